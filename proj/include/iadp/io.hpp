#pragma once

/// @file io.hpp
/// @brief JSON and CSV formats for instances, priors, solve reports,
/// trade-off curves and solver comparisons.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "iadp/beta_driver.hpp"
#include "iadp/distributions.hpp"
#include "iadp/errors.hpp"
#include "iadp/problem.hpp"
#include "iadp/trellis.hpp"

namespace iadp::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

/// Writes through a sibling temporary file and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    out.flush();
    if (!out) throw IoError("cannot write " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot write " + path.string());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw IoError("bad number '" + s + "'");
  return v;
}

/// Paths print as symbols joined by '-', e.g. 4-2-1-1.
inline std::string format_path(const Path& p) {
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(p[i]);
  }
  return out;
}

inline Path parse_path(const std::string& s) {
  Path out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, '-')) {
    int v = 0;
    auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc{} || res.ptr != item.data() + item.size()) throw IoError("bad path '" + s + "'");
    out.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

inline json to_json(const BitAllocInstance& inst) {
  json j;
  j["n"] = inst.n();
  j["alphabet"] = inst.alphabet().values();
  j["a"] = inst.a();
  j["b"] = inst.b();
  j["d"] = inst.d();
  j["p_b"] = inst.power_budget();
  j["reward_preset"] = to_string(inst.preset());
  if (inst.seed()) j["seed"] = *inst.seed();
  return j;
}

inline BitAllocInstance instance_from_json(const json& j) {
  static const std::set<std::string> known{"n", "alphabet", "a", "b", "d", "p_b", "reward_preset", "seed"};
  if (!j.is_object()) throw ConfigError("instance must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown instance field '" + key + "'");
  }
  for (const char* key : {"n", "alphabet", "a", "b", "d", "p_b", "reward_preset"}) {
    if (!j.contains(key)) throw ConfigError(std::string("instance is missing field '") + key + "'");
  }
  try {
    auto n = j.at("n").get<std::size_t>();
    auto alphabet = j.at("alphabet").get<std::vector<Symbol>>();
    if (alphabet != std::vector<Symbol>{1, 2, 3, 4}) {
      throw ConfigError("bit-allocation alphabet must be [1, 2, 3, 4]");
    }
    auto a = j.at("a").get<std::vector<double>>();
    if (a.size() != n) throw ConfigError("field 'a' must have n entries");
    std::optional<std::uint64_t> seed;
    if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();
    return BitAllocInstance(std::move(a), j.at("b").get<std::vector<double>>(),
                            j.at("d").get<std::vector<double>>(), j.at("p_b").get<double>(),
                            reward_preset_from_string(j.at("reward_preset").get<std::string>()), seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed instance: ") + e.what());
  }
}

inline void save_instance(const std::filesystem::path& path, const BitAllocInstance& inst) {
  write_file_atomic(path, to_json(inst).dump(2) + "\n");
}

inline BitAllocInstance load_instance(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return instance_from_json(j);
}

// ---------------------------------------------------------------------------
// Priors
// ---------------------------------------------------------------------------

/// Stage-major nesting: rows[t][j][i] = Pr(X_{t+1} = i | X_t = j).
inline json to_json(const ConditionalModel& model) {
  json j;
  j["horizon"] = model.horizon();
  j["alphabet_size"] = model.alphabet_size();
  j["initial"] = std::vector<double>(model.initial().begin(), model.initial().end());
  json rows = json::array(), flags = json::array(), occ = json::array();
  for (std::size_t t = 0; t < model.transitions(); ++t) {
    json stage = json::array(), sflags = json::array(), socc = json::array();
    for (std::size_t k = 0; k < model.alphabet_size(); ++k) {
      auto r = model.row(t, k);
      stage.push_back(std::vector<double>(r.begin(), r.end()));
      sflags.push_back(model.unsupported(t, k));
      socc.push_back(model.occupancy(t, k));
    }
    rows.push_back(std::move(stage));
    flags.push_back(std::move(sflags));
    occ.push_back(std::move(socc));
  }
  j["rows"] = std::move(rows);
  j["unsupported"] = std::move(flags);
  j["occupancy"] = std::move(occ);
  return j;
}

inline ConditionalModel prior_from_json(const json& j) {
  try {
    ConditionalModel model(j.at("horizon").get<std::size_t>(), j.at("alphabet_size").get<std::size_t>());
    model.set_initial(j.at("initial").get<std::vector<double>>());
    const auto& rows = j.at("rows");
    if (rows.size() != model.transitions()) throw ConfigError("prior has the wrong number of stages");
    for (std::size_t t = 0; t < model.transitions(); ++t) {
      if (rows[t].size() != model.alphabet_size()) throw ConfigError("prior stage has the wrong row count");
      for (std::size_t k = 0; k < model.alphabet_size(); ++k) {
        model.set_row(t, k, rows[t][k].get<std::vector<double>>());
        model.set_unsupported(t, k, j.at("unsupported")[t][k].get<bool>());
        model.set_occupancy(t, k, j.at("occupancy")[t][k].get<double>());
      }
    }
    return model;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed prior: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Solve reports
// ---------------------------------------------------------------------------

inline json to_json(const SolveReport& r) {
  json j;
  j["beta"] = r.beta;
  j["mode"] = to_string(r.mode);
  j["solution"] = r.solution;
  j["reward"] = r.reward;
  j["information_to_go"] = r.information_to_go;
  j["metric"] = r.metric;
  j["feasible"] = r.feasible;
  j["counters"] = {{"acs_ops", r.counters.acs_ops},
                   {"conditional_evals", r.counters.conditional_evals},
                   {"baa_iters_total", r.counters.baa_iters_total}};
  j["exhausted_rows"] = r.exhausted_rows;
  j["unconverged_stages"] = r.unconverged_stages;
  return j;
}

inline SolveReport report_from_json(const json& j) {
  try {
    SolveReport r;
    r.beta = j.at("beta").get<double>();
    r.mode = conditional_mode_from_string(j.at("mode").get<std::string>());
    r.solution = j.at("solution").get<Path>();
    r.reward = j.at("reward").get<double>();
    r.information_to_go = j.at("information_to_go").get<double>();
    r.metric = j.at("metric").get<double>();
    r.feasible = j.at("feasible").get<bool>();
    const auto& c = j.at("counters");
    r.counters.acs_ops = c.at("acs_ops").get<std::uint64_t>();
    r.counters.conditional_evals = c.at("conditional_evals").get<std::uint64_t>();
    r.counters.baa_iters_total = c.at("baa_iters_total").get<std::uint64_t>();
    r.exhausted_rows = j.at("exhausted_rows").get<std::uint64_t>();
    r.unconverged_stages = j.at("unconverged_stages").get<std::uint64_t>();
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline constexpr const char* kTradeoffHeader = "beta,reward,ig_bits,feasible,solution";

inline std::string tradeoff_csv(const std::vector<TradeoffPoint>& points) {
  std::string out = std::string(kTradeoffHeader) + "\n";
  for (const auto& p : points) {
    out += format_double(p.beta) + "," + format_double(p.reward) + "," + format_double(p.information_to_go) +
           "," + (p.feasible ? "1" : "0") + "," + format_path(p.solution) + "\n";
  }
  return out;
}

namespace detail {

inline std::vector<std::vector<std::string>> split_csv(const std::string& text, const std::string& header) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line) || line != header) throw IoError("unexpected CSV header '" + line + "'");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

inline bool parse_flag(const std::string& s) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw IoError("bad flag '" + s + "'");
}

}  // namespace detail

inline std::vector<TradeoffPoint> parse_tradeoff_csv(const std::string& text) {
  std::vector<TradeoffPoint> out;
  for (const auto& cells : detail::split_csv(text, kTradeoffHeader)) {
    if (cells.size() != 5) throw IoError("trade-off rows need 5 columns");
    out.push_back({parse_double(cells[0]), parse_path(cells[4]), parse_double(cells[1]),
                   parse_double(cells[2]), detail::parse_flag(cells[3])});
  }
  return out;
}

/// One row of a solver comparison table.
struct ComparisonRow {
  std::uint64_t seed = 0;
  std::string algorithm;
  Path solution;
  double reward = 0.0;
  double power = 0.0;
  bool feasible = false;

  bool operator==(const ComparisonRow&) const = default;
};

inline constexpr const char* kCompareHeader = "seed,algorithm,solution,reward,power,feasible";

inline std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::string out = std::string(kCompareHeader) + "\n";
  for (const auto& r : rows) {
    out += std::to_string(r.seed) + "," + r.algorithm + "," + format_path(r.solution) + "," +
           format_double(r.reward) + "," + format_double(r.power) + "," + (r.feasible ? "1" : "0") + "\n";
  }
  return out;
}

inline std::vector<ComparisonRow> parse_comparison_csv(const std::string& text) {
  std::vector<ComparisonRow> out;
  for (const auto& cells : detail::split_csv(text, kCompareHeader)) {
    if (cells.size() != 6) throw IoError("comparison rows need 6 columns");
    out.push_back({std::stoull(cells[0]), cells[1], parse_path(cells[2]), parse_double(cells[3]),
                   parse_double(cells[4]), detail::parse_flag(cells[5])});
  }
  return out;
}

}  // namespace iadp::io
