// iadp: generate bit-allocation instances, solve them with the
// information-assisted trellis search, and compare against baselines.
//
// Exit codes: 0 success, 2 invalid input, 3 sampling failure,
// 4 no feasible solution, 5 I/O failure. Errors are printed to stderr as a
// single JSON object {"error": <kind>, "message": <text>}.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "iadp/iadp.hpp"
#include "iadp/io.hpp"

namespace {

using namespace iadp;
using nlohmann::json;

enum Exit : int { kOk = 0, kInvalid = 2, kSampling = 3, kNoFeasible = 4, kIo = 5 };

// Every random stream derives from --seed: stream 1 feeds prior sampling,
// stream 2 the conditional noise.
constexpr std::uint64_t kPriorStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) { return detail::mix(seed, stream); }

int fail(const char* kind, const std::string& message, int code) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
  return code;
}

struct SolveOptions {
  std::string instance;
  std::string mode = "specific";
  std::optional<double> beta;
  bool sweep = false;
  bool bsearch = false;
  std::size_t prior_k = 2000;
  std::size_t prior_n1 = 50;
  std::uint64_t seed = 0;
  double beta_max = 10.0;
  double step = 0.01;
  double t_range = 0.01;
  double sigma = 1e-3;
  std::string out;
  std::string curve;
};

SolverConfig solver_config(const std::string& mode, std::uint64_t seed, double sigma) {
  SolverConfig cfg;
  cfg.mode = conditional_mode_from_string(mode);
  cfg.sigmoid.sigma = sigma;
  cfg.sigmoid.noise_seed = stream_seed(seed, kNoiseStream);
  return cfg;
}

ConditionalModel build_prior(const BitAllocInstance& inst, std::size_t k, std::size_t n1, std::uint64_t seed) {
  SamplerConfig sc;
  sc.k = k;
  sc.n1 = n1;
  sc.seed = stream_seed(seed, kPriorStream);
  return estimate_prior(inst, sc);
}

json point_json(const TradeoffPoint& p) {
  return {{"beta", p.beta},
          {"solution", p.solution},
          {"reward", p.reward},
          {"information_to_go", p.information_to_go},
          {"feasible", p.feasible}};
}

int run_solve(const SolveOptions& o) {
  const auto inst = io::load_instance(o.instance);
  const auto cfg = solver_config(o.mode, o.seed, o.sigma);
  const auto prior = build_prior(inst, o.prior_k, o.prior_n1, o.seed);
  const auto solve = make_solver(inst, prior, cfg);

  json doc;
  bool feasible = false;
  if (o.beta) {
    auto report = solve(*o.beta);
    doc = io::to_json(report);
    feasible = report.feasible;
  } else if (o.sweep) {
    SweepConfig sc{0.0, o.beta_max, o.step};
    auto result = sweep(solve, sc);
    if (!result.chosen) {
      doc["chosen"] = nullptr;
    } else {
      doc = io::to_json(solve(result.chosen_point()->beta));
      feasible = true;
    }
    json intervals = json::array();
    for (const auto& iv : result.intervals) {
      intervals.push_back({{"beta_lo", iv.beta_lo},
                           {"beta_hi", iv.beta_hi},
                           {"solution", iv.solution},
                           {"reward", iv.reward},
                           {"power", power(inst, iv.solution)},
                           {"feasible", iv.feasible}});
    }
    doc["intervals"] = std::move(intervals);
    doc["grid_points"] = result.points.size();
    doc["monotonicity_violations"] = result.monotonicity_violations;
    std::string curve = o.curve;
    if (curve.empty() && !o.out.empty()) curve = std::filesystem::path(o.out).replace_extension(".csv").string();
    if (!curve.empty()) io::write_file_atomic(curve, io::tradeoff_csv(result.points));
  } else {
    BsConfig bc{o.beta_max, o.t_range};
    auto result = binary_search_beta(solve, bc);
    if (result.chosen) {
      doc = io::to_json(solve(result.chosen->beta));
      feasible = true;
    } else {
      doc["chosen"] = nullptr;
    }
    const char* status = result.status == BsStatus::transition_found      ? "transition_found"
                         : result.status == BsStatus::no_transition_found ? "no_transition_found"
                                                                          : "no_feasible_anchor";
    doc["search_status"] = status;
    doc["beta_lower"] = result.beta_lower;
    doc["beta_upper"] = result.beta_upper;
    json visited = json::array();
    for (const auto& p : result.visited) visited.push_back(point_json(p));
    doc["visited"] = std::move(visited);
  }

  const std::string text = doc.dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << text;
  } else {
    io::write_file_atomic(o.out, text);
  }
  if (!feasible) return fail("no_feasible", "no feasible solution was produced", kNoFeasible);
  return kOk;
}

struct CompareOptions {
  std::string instance;
  std::vector<std::uint64_t> seeds{0};
  std::size_t prior_k = 2000;
  std::size_t prior_n1 = 50;
  std::string out;
  std::string summary;
  double es_cap = kDefaultSearchCap;
};

int run_compare(const CompareOptions& o) {
  const auto inst = io::load_instance(o.instance);
  const auto& problem = inst.problem();

  std::optional<SearchResult> es;
  try {
    es = exhaustive_search(problem, o.es_cap);
  } catch (const SearchSpaceTooLargeError& e) {
    std::cerr << json{{"warning", "es_skipped"}, {"message", e.what()}}.dump() << "\n";
  }
  const auto nlbb = nlbb_solve(problem);

  std::vector<io::ComparisonRow> rows;
  auto add = [&](std::uint64_t seed, const char* name, const std::optional<Path>& path) {
    io::ComparisonRow row{seed, name, {}, 0.0, 0.0, false};
    if (path) {
      row.solution = *path;
      row.reward = reward(inst, *path);
      row.power = power(inst, *path);
      row.feasible = csf(inst, *path);
    }
    rows.push_back(std::move(row));
  };

  std::size_t trials = 0;
  std::size_t matches = 0;
  for (std::uint64_t seed : o.seeds) {
    const auto prior = build_prior(inst, o.prior_k, o.prior_n1, seed);
    for (const char* mode : {"specific", "baa"}) {
      auto result = sweep(make_solver(inst, prior, solver_config(mode, seed, 1e-3)), {});
      std::optional<Path> chosen;
      if (result.chosen) chosen = result.chosen_point()->solution;
      add(seed, mode[0] == 's' ? "IADP-Specific" : "IADP-BAA", chosen);
      if (es && es->solution) {
        ++trials;
        matches += chosen && *chosen == *es->solution;
      }
    }
    add(seed, "NLBB", nlbb.solution);
    if (es) add(seed, "ES", es->solution);
  }

  json summary;
  summary["instance"] = o.instance;
  summary["seeds"] = o.seeds;
  summary["es_available"] = es.has_value();
  summary["match_rate"] = trials ? json(static_cast<double>(matches) / static_cast<double>(trials)) : json(nullptr);
  if (es && es->solution) summary["es_reward"] = es->reward;

  const std::string csv = io::comparison_csv(rows);
  if (o.out.empty()) {
    std::cout << csv;
  } else {
    io::write_file_atomic(o.out, csv);
  }
  if (o.summary.empty()) {
    std::cerr << summary.dump() << "\n";
  } else {
    io::write_file_atomic(o.summary, summary.dump(2) + "\n");
  }
  bool any_feasible = false;
  for (const auto& r : rows) any_feasible = any_feasible || r.feasible;
  if (!any_feasible) return fail("no_feasible", "no solver produced a feasible solution", kNoFeasible);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Information-assisted dynamic programming for constrained bit allocation"};
  app.require_subcommand(1);

  std::uint64_t gen_seed = 0;
  std::size_t gen_n = 8;
  std::optional<double> gen_budget;
  std::string gen_preset = "paper-consistent";
  std::string gen_out;
  auto* gen = app.add_subcommand("generate", "Write a random bit-allocation instance");
  gen->add_option("--seed", gen_seed, "Instance seed");
  gen->add_option("--n", gen_n, "Number of RF paths");
  gen->add_option("--p-b", gen_budget, "Power budget (default 4N)");
  gen->add_option("--reward-preset", gen_preset, "paper-consistent or as-printed");
  gen->add_option("--out", gen_out, "Output JSON file (stdout when omitted)");

  SolveOptions so;
  auto* solve = app.add_subcommand("solve", "Solve an instance at one beta, across a sweep, or by bisection");
  solve->add_option("--instance", so.instance, "Instance JSON")->required();
  solve->add_option("--mode", so.mode, "specific or baa")->check(CLI::IsMember({"specific", "baa"}));
  auto* beta_opt = solve->add_option("--beta", so.beta, "Single Lagrange multiplier");
  auto* sweep_opt = solve->add_flag("--sweep", so.sweep, "Grid sweep over [0, beta-max]");
  auto* bs_opt = solve->add_flag("--bsearch", so.bsearch, "Bisection on feasibility");
  beta_opt->excludes(sweep_opt, bs_opt);
  sweep_opt->excludes(bs_opt);
  solve->add_option("--prior-k", so.prior_k, "Feasible samples drawn for the prior");
  solve->add_option("--prior-n1", so.prior_n1, "Top samples kept for the prior");
  solve->add_option("--seed", so.seed, "Root seed for sampling and noise");
  solve->add_option("--beta-max", so.beta_max, "Upper end of the beta range");
  solve->add_option("--step", so.step, "Sweep grid step");
  solve->add_option("--t-range", so.t_range, "Bisection exit width");
  solve->add_option("--sigma", so.sigma, "Conditional noise standard deviation");
  solve->add_option("--out", so.out, "Report JSON file (stdout when omitted)");
  solve->add_option("--curve", so.curve, "Trade-off CSV for sweeps (defaults next to --out)");

  CompareOptions co;
  auto* compare = app.add_subcommand("compare", "Run IADP-Specific, IADP-BAA, NLBB and ES");
  compare->add_option("--instance", co.instance, "Instance JSON")->required();
  compare->add_option("--seeds", co.seeds, "Prior seeds, one comparison block each");
  compare->add_option("--prior-k", co.prior_k, "Feasible samples drawn for the prior");
  compare->add_option("--prior-n1", co.prior_n1, "Top samples kept for the prior");
  compare->add_option("--out", co.out, "Comparison CSV (stdout when omitted)");
  compare->add_option("--es-cap", co.es_cap, "Largest path count exhaustive search may enumerate");
  compare->add_option("--summary", co.summary, "Match-rate summary JSON (stderr when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("invalid_arguments", e.what(), kInvalid);
  }

  try {
    if (*gen) {
      auto inst = generate_instance(gen_seed, gen_n, {}, gen_budget, reward_preset_from_string(gen_preset));
      const std::string text = io::to_json(inst).dump(2) + "\n";
      if (gen_out.empty()) {
        std::cout << text;
      } else {
        io::write_file_atomic(gen_out, text);
      }
      return kOk;
    }
    if (*solve) {
      if (!so.beta && !so.sweep && !so.bsearch) {
        return fail("invalid_arguments", "solve needs one of --beta, --sweep, --bsearch", kInvalid);
      }
      return run_solve(so);
    }
    return run_compare(co);
  } catch (const SamplingError& e) {
    return fail("sampling_failure", e.what(), kSampling);
  } catch (const NoFeasiblePathError& e) {
    return fail("no_feasible", e.what(), kNoFeasible);
  } catch (const IoError& e) {
    return fail("io", e.what(), kIo);
  } catch (const Error& e) {
    return fail("invalid_input", e.what(), kInvalid);
  }
}
