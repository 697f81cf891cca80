#pragma once

/// @file trellis.hpp
/// @brief Viterbi search over the M-state, N-stage trellis with the
/// information-assisted path metric G = I_g - beta * f.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "iadp/conditionals.hpp"
#include "iadp/distributions.hpp"
#include "iadp/errors.hpp"
#include "iadp/problem.hpp"

namespace iadp {

enum class ConditionalMode { specific, baa };

inline std::string to_string(ConditionalMode m) { return m == ConditionalMode::specific ? "specific" : "baa"; }

inline ConditionalMode conditional_mode_from_string(const std::string& s) {
  if (s == "specific") return ConditionalMode::specific;
  if (s == "baa") return ConditionalMode::baa;
  throw ConfigError("unknown conditional mode '" + s + "'");
}

/// How the information cost of leaving a survivor is priced.
///
/// `joint_kl` compares p against the prior's joint transition frequencies
/// (row times occupancy), which charges -log2(occupancy) on top of the
/// row divergence for conditioning states that reference solutions rarely
/// visit. `conditional_kl` uses the row divergence alone. `edge_log_ratio`
/// charges each edge log2 p(x'|x) / q(x'|x) instead of the row expectation.
enum class InformationTerm { joint_kl, conditional_kl, edge_log_ratio };

/// Builds p(X_{t+1} | prefix) for a survivor whose prefix ends at stage t.
using RowBuilder = std::function<ConditionalRow(std::size_t stage, std::span<const Symbol> prefix)>;

/// Extra trellis coordinate for augmented-state search (e.g. residual power).
using StateKey = std::function<std::int64_t(std::span<const Symbol> prefix)>;

struct SolverConfig {
  ConditionalMode mode = ConditionalMode::specific;
  InformationTerm information = InformationTerm::joint_kl;
  bool prune_partial = false;   ///< drop extensions whose prefix fails csf_partial
  bool augmented_state = false;  ///< one survivor per (symbol, state key) node
  SigmoidConditionalConfig sigmoid;
  BaaConfig baa;  ///< beta is taken from the solve call
};

struct SolveCounters {
  std::uint64_t acs_ops = 0;
  std::uint64_t conditional_evals = 0;
  std::uint64_t baa_iters_total = 0;

  bool operator==(const SolveCounters&) const = default;
};

struct SolveReport {
  double beta = 0.0;
  Path solution;
  double reward = 0.0;
  double information_to_go = 0.0;  ///< bits
  double metric = 0.0;
  bool feasible = false;
  SolveCounters counters;
  ConditionalMode mode = ConditionalMode::specific;
  std::uint64_t exhausted_rows = 0;
  std::uint64_t unconverged_stages = 0;

  bool operator==(const SolveReport&) const = default;
};

/// KL(p || q) - beta * reward, the cost of one trellis transition.
/// An infinite divergence yields an infinite increment.
inline double path_metric_increment(std::span<const double> p_row, std::span<const double> q_row,
                                    double beta, double candidate_reward) {
  if (!std::isfinite(candidate_reward)) throw ContractError("candidate reward must be finite");
  return kl_divergence(p_row, q_row) - beta * candidate_reward;
}

/// Information cost of leaving a survivor at stage @p stage in symbol index @p from.
inline double transition_information(std::span<const double> p_row, const ConditionalModel& prior,
                                     std::size_t stage, std::size_t from, InformationTerm term) {
  if (term == InformationTerm::edge_log_ratio) return 0.0;
  double bits = kl_divergence(p_row, prior.row(stage, from));
  if (term == InformationTerm::joint_kl) {
    double w = prior.occupancy(stage, from);
    bits += w > 0.0 ? -std::log2(w) : std::numeric_limits<double>::infinity();
  }
  return bits;
}

/// Row builder that ignores the prefix beyond its last symbol.
inline RowBuilder fixed_rows(ConditionalModel p, Alphabet alphabet) {
  return [p = std::move(p), alphabet = std::move(alphabet)](
             std::size_t stage, std::span<const Symbol> prefix) -> ConditionalRow {
    auto row = p.row(stage, alphabet.require_index(prefix.back()));
    return {Row(row.begin(), row.end()), false};
  };
}

inline RowBuilder sigmoid_rows(const BitAllocInstance& inst, SigmoidConditionalConfig cfg) {
  return [&inst, cfg](std::size_t, std::span<const Symbol> prefix) {
    return sigmoid_conditional(inst, prefix, cfg);
  };
}

/// Residual-power coordinate for augmented bit-allocation search. Every
/// symbol costs an even power, so power / 2 indexes buckets of width 2.
inline StateKey power_state_key() {
  return [](std::span<const Symbol> prefix) {
    std::int64_t s = 0;
    for (Symbol x : prefix) s += std::int64_t{1} << x;
    return s / 2;
  };
}

namespace detail {

struct Survivor {
  std::size_t symbol = 0;  // alphabet index
  std::int64_t key = 0;
  double metric = 0.0;
  double ig = 0.0;
  double reward = 0.0;
  std::size_t back = 0;  // index into the previous stage
};

inline Path backtrace(const std::vector<std::vector<Survivor>>& stages, const Alphabet& alphabet,
                      std::size_t stage, std::size_t index) {
  Path out(stage + 1);
  for (std::size_t t = stage + 1; t-- > 0;) {
    const Survivor& s = stages[t][index];
    out[t] = alphabet[s.symbol];
    index = s.back;
  }
  return out;
}

}  // namespace detail

/// Forward Viterbi pass with add-compare-select.
///
/// Stage 1 is seeded with -log2 q(X_1 = x) - beta r_1(x). Each survivor
/// then pays the information cost of its conditional row once, and every
/// allowed successor adds -beta r_{t+1}(x'). Ties keep the predecessor with
/// the smaller symbol. The returned path may be infeasible; `feasible`
/// reports csf of the full path.
///
/// In specific mode @p builder supplies the rows; in BAA mode the rows come
/// from Blahut-Arimoto iteration seeded by the prior's stage marginals.
inline SolveReport viterbi_solve(const ProblemInstance& problem, const ConditionalModel& prior, double beta,
                                 const RowBuilder& builder, const SolverConfig& cfg,
                                 const StateKey& state_key = {}) {
  const std::size_t n = problem.horizon();
  const std::size_t m = problem.alphabet().size();
  const auto& alphabet = problem.alphabet();
  if (prior.horizon() != n || prior.alphabet_size() != m) {
    throw ContractError("prior does not cover the instance's stages and alphabet");
  }
  if (!std::isfinite(beta)) throw ContractError("beta must be finite");
  if (cfg.mode == ConditionalMode::specific && !builder) {
    throw ConfigError("specific mode needs a row builder");
  }
  if (cfg.augmented_state && !state_key) throw ConfigError("augmented trellis needs a state key");
  const bool augmented = cfg.augmented_state;
  auto key_of = [&](std::span<const Symbol> prefix) -> std::int64_t {
    return augmented ? state_key(prefix) : 0;
  };

  SolveReport report;
  report.beta = beta;
  report.mode = cfg.mode;
  auto& counters = report.counters;

  std::vector<std::vector<detail::Survivor>> stages(n);
  Path prefix;

  // Stage 1: M start slots compete for each node; only the matching slot
  // carries the anchor -log2 q(X_1 = x).
  for (std::size_t k = 0; k < m; ++k) {
    counters.acs_ops += m;
    double q = prior.initial()[k];
    if (!(q > 0.0)) continue;
    detail::Survivor s;
    s.symbol = k;
    s.ig = -std::log2(q);
    s.reward = problem.reward_at(0, k);
    s.metric = s.ig - beta * s.reward;
    Path one{alphabet[k]};
    s.key = key_of(one);
    stages[0].push_back(s);
  }
  if (n > 1 && cfg.prune_partial) {
    std::erase_if(stages[0], [&](const detail::Survivor& s) {
      Path one{alphabet[s.symbol]};
      return !problem.partially_feasible(one);
    });
  }

  auto marginals = cfg.mode == ConditionalMode::baa ? prior.stage_marginals() : std::vector<Row>{};

  for (std::size_t t = 0; t + 1 < n; ++t) {
    const auto& current = stages[t];
    std::map<std::pair<std::size_t, std::int64_t>, detail::Survivor> next;

    std::vector<Row> baa_rows;
    if (cfg.mode == ConditionalMode::baa) {
      // Tentative value of stepping from each live symbol to each successor.
      ValueTable values(m, Row(m, std::numeric_limits<double>::infinity()));
      std::vector<double> best(m, std::numeric_limits<double>::infinity());
      for (const auto& s : current) best[s.symbol] = std::min(best[s.symbol], s.metric);
      for (std::size_t j = 0; j < m; ++j) {
        if (std::isinf(best[j])) continue;
        for (std::size_t i = 0; i < m; ++i) {
          if (problem.edge_allowed(t, alphabet[j], alphabet[i])) {
            values[j][i] = best[j] - beta * problem.reward_at(t + 1, i);
          }
        }
      }
      BaaConfig baa = cfg.baa;
      baa.beta = beta;
      BaaResult res = baa_conditional(marginals[t], marginals[t + 1], values, baa);
      counters.baa_iters_total += res.iterations;
      counters.conditional_evals += res.iterations * m * m;
      if (!res.converged) ++report.unconverged_stages;
      baa_rows = std::move(res.conditional);
    }

    for (std::size_t idx = 0; idx < current.size(); ++idx) {
      const auto& pred = current[idx];
      prefix = detail::backtrace(stages, alphabet, t, idx);

      Row p_row;
      if (cfg.mode == ConditionalMode::specific) {
        ConditionalRow row = builder(t, prefix);
        counters.conditional_evals += m;
        report.exhausted_rows += row.exhausted;
        p_row = std::move(row.probs);
      } else {
        p_row = baa_rows[pred.symbol];
      }
      const double info = transition_information(p_row, prior, t, pred.symbol, cfg.information);

      prefix.push_back(0);
      for (std::size_t i = 0; i < m; ++i) {
        ++counters.acs_ops;
        if (!problem.edge_allowed(t, alphabet[pred.symbol], alphabet[i])) continue;
        prefix.back() = alphabet[i];
        if (cfg.prune_partial && t + 2 < n && !problem.partially_feasible(prefix)) continue;
        const double r = problem.reward_at(t + 1, i);
        double edge_info = info;
        if (cfg.information == InformationTerm::edge_log_ratio) {
          if (!(p_row[i] > 0.0)) continue;
          const double q = prior.row(t, pred.symbol)[i];
          edge_info = q > 0.0 ? std::log2(p_row[i] / q) : std::numeric_limits<double>::infinity();
        }
        const double metric = pred.metric + edge_info - beta * r;
        if (!std::isfinite(metric)) continue;
        auto node = std::make_pair(i, key_of(prefix));
        auto it = next.find(node);
        if (it == next.end() || metric < it->second.metric) {
          detail::Survivor s;
          s.symbol = i;
          s.key = node.second;
          s.metric = metric;
          s.ig = pred.ig + edge_info;
          s.reward = pred.reward + r;
          s.back = idx;
          next[node] = s;
        }
      }
    }
    // Map order is (symbol, key), which keeps iteration deterministic.
    stages[t + 1].reserve(next.size());
    for (auto& [node, s] : next) stages[t + 1].push_back(s);
  }

  const auto& last = stages[n - 1];
  if (last.empty()) throw NoFeasiblePathError("every terminal trellis node was pruned");
  std::size_t best = 0;
  for (std::size_t i = 1; i < last.size(); ++i) {
    if (last[i].metric < last[best].metric) best = i;
  }
  report.solution = detail::backtrace(stages, alphabet, n - 1, best);
  report.reward = last[best].reward;
  report.information_to_go = last[best].ig;
  report.metric = last[best].metric;
  report.feasible = problem.feasible(report.solution);
  return report;
}

/// Bit-allocation solve: the sigmoid builder in specific mode, power as
/// the state key in augmented mode.
inline SolveReport viterbi_solve(const BitAllocInstance& inst, const ConditionalModel& prior, double beta,
                                 const SolverConfig& cfg) {
  RowBuilder builder;
  if (cfg.mode == ConditionalMode::specific) builder = sigmoid_rows(inst, cfg.sigmoid);
  return viterbi_solve(inst.problem(), prior, beta, builder, cfg,
                       cfg.augmented_state ? power_state_key() : StateKey{});
}

/// Accumulated information-to-go of the winning survivor, in bits.
inline double information_to_go(const SolveReport& report) { return report.information_to_go; }

}  // namespace iadp
