#pragma once

/// @file baselines.hpp
/// @brief Reference solvers: exhaustive enumeration, depth-first
/// branch-and-bound, and the naive constraint-pruned DP on reward alone.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

#include "iadp/errors.hpp"
#include "iadp/problem.hpp"

namespace iadp {

struct SearchResult {
  std::optional<Path> solution;  ///< empty when nothing feasible exists
  double reward = -std::numeric_limits<double>::infinity();
  std::uint64_t nodes_visited = 0;  ///< paths enumerated (ES) or tree nodes (NLBB)
};

inline constexpr double kDefaultSearchCap = 16777216.0;  // 2^24

/// Enumerates all M^N paths in lexicographic order and keeps the first
/// feasible path of maximum reward.
inline SearchResult exhaustive_search(const ProblemInstance& problem, double cap = kDefaultSearchCap) {
  const std::size_t n = problem.horizon();
  const std::size_t m = problem.alphabet().size();
  const double size = std::pow(static_cast<double>(m), static_cast<double>(n));
  if (size > cap) throw SearchSpaceTooLargeError(size);

  SearchResult out;
  std::vector<std::size_t> digits(n, 0);
  Path path(n, problem.alphabet()[0]);
  while (true) {
    ++out.nodes_visited;
    if (problem.feasible(path)) {
      double r = 0.0;
      for (std::size_t t = 0; t < n; ++t) r += problem.reward_at(t, digits[t]);
      if (!out.solution || r > out.reward) {
        out.solution = path;
        out.reward = r;
      }
    }
    std::size_t t = n;
    while (t > 0) {
      --t;
      if (++digits[t] < m) {
        path[t] = problem.alphabet()[digits[t]];
        break;
      }
      digits[t] = 0;
      path[t] = problem.alphabet()[0];
      if (t == 0) return out;
    }
  }
}

struct NlbbConfig {
  bool constraint_pruning = true;  ///< drop prefixes failing csf_partial
  bool bound_pruning = true;       ///< drop prefixes whose optimistic bound cannot beat the incumbent
};

namespace detail {

struct Nlbb {
  const ProblemInstance& problem;
  NlbbConfig cfg;
  std::vector<double> suffix_best;  // suffix_best[k] = sum of column maxima over stages k..N-1
  Path prefix;
  double so_far = 0.0;
  SearchResult out;

  void descend(std::size_t depth) {
    const std::size_t n = problem.horizon();
    const auto& alphabet = problem.alphabet();
    for (std::size_t k = 0; k < alphabet.size(); ++k) {
      prefix.push_back(alphabet[k]);
      const double r = problem.reward_at(depth, k);
      so_far += r;
      ++out.nodes_visited;
      const std::size_t len = depth + 1;
      bool keep = true;
      if (len < n && cfg.constraint_pruning && !problem.partially_feasible(prefix)) keep = false;
      // Stage rewards are separable, so the column maxima bound any completion.
      if (keep && cfg.bound_pruning && out.solution && so_far + suffix_best[len] < out.reward - 1e-12) {
        keep = false;
      }
      if (keep) {
        if (len == n) {
          if (problem.feasible(prefix)) {
            double total = 0.0;
            for (std::size_t t = 0; t < n; ++t) total += problem.reward_at(t, *alphabet.index_of(prefix[t]));
            if (!out.solution || total > out.reward) {
              out.solution = prefix;
              out.reward = total;
            }
          }
        } else {
          descend(len);
        }
      }
      so_far -= r;
      prefix.pop_back();
    }
  }
};

}  // namespace detail

/// Depth-first branch-and-bound over the symbol assignment tree.
inline SearchResult nlbb_solve(const ProblemInstance& problem, const NlbbConfig& cfg = {}) {
  const std::size_t n = problem.horizon();
  detail::Nlbb search{problem, cfg, std::vector<double>(n + 1, 0.0), {}, 0.0, {}};
  for (std::size_t t = n; t-- > 0;) {
    const auto& row = problem.reward_table()[t];
    double best = row[0];
    for (double v : row) best = std::max(best, v);
    search.suffix_best[t] = search.suffix_best[t + 1] + best;
  }
  search.prefix.reserve(n);
  search.descend(0);
  return search.out;
}

/// Dynamic programming on reward alone: one survivor per (stage, symbol),
/// keeping the highest-reward prefix that still passes csf_partial. It
/// ignores how much of the budget a prefix has consumed, so it can discard
/// the prefix of the true optimum.
inline std::optional<Path> naive_constrained_dp(const ProblemInstance& problem) {
  const std::size_t n = problem.horizon();
  const auto& alphabet = problem.alphabet();
  struct Entry {
    Path path;
    double reward;
  };
  std::vector<std::optional<Entry>> current(alphabet.size());
  for (std::size_t k = 0; k < alphabet.size(); ++k) {
    Path p{alphabet[k]};
    if (n > 1 && !problem.partially_feasible(p)) continue;
    current[k] = Entry{p, problem.reward_at(0, k)};
  }
  for (std::size_t t = 1; t < n; ++t) {
    std::vector<std::optional<Entry>> next(alphabet.size());
    for (std::size_t j = 0; j < alphabet.size(); ++j) {
      if (!current[j]) continue;
      for (std::size_t i = 0; i < alphabet.size(); ++i) {
        if (!problem.edge_allowed(t - 1, alphabet[j], alphabet[i])) continue;
        Path p = current[j]->path;
        p.push_back(alphabet[i]);
        if (t + 1 < n && !problem.partially_feasible(p)) continue;
        double r = current[j]->reward + problem.reward_at(t, i);
        if (!next[i] || r > next[i]->reward) next[i] = Entry{std::move(p), r};
      }
    }
    current = std::move(next);
  }
  std::optional<Entry> best;
  for (auto& e : current) {
    if (e && problem.feasible(e->path) && (!best || e->reward > best->reward)) best = e;
  }
  if (!best) return std::nullopt;
  return best->path;
}

}  // namespace iadp
