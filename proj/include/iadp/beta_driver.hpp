#pragma once

/// @file beta_driver.hpp
/// @brief Solves across the Lagrange multiplier: a dense grid sweep that
/// traces the reward / information trade-off, and a feasibility bisection.

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "iadp/errors.hpp"
#include "iadp/trellis.hpp"

namespace iadp {

using SolveFn = std::function<SolveReport(double beta)>;

struct SweepConfig {
  double beta_min = 0.0;
  double beta_max = 10.0;
  double step = 0.01;

  void validate() const {
    if (!(step > 0.0)) throw ConfigError("sweep step must be positive");
    if (!(beta_min <= beta_max)) throw ConfigError("sweep needs beta_min <= beta_max");
  }
  std::size_t grid_size() const {
    return static_cast<std::size_t>(std::floor((beta_max - beta_min) / step + 1e-9)) + 1;
  }
  /// Grid points are computed by multiplication so they do not drift.
  double beta_at(std::size_t k) const { return beta_min + static_cast<double>(k) * step; }
};

struct TradeoffPoint {
  double beta = 0.0;
  Path solution;
  double reward = 0.0;
  double information_to_go = 0.0;
  bool feasible = false;

  static TradeoffPoint from(const SolveReport& r) {
    return {r.beta, r.solution, r.reward, r.information_to_go, r.feasible};
  }
  bool operator==(const TradeoffPoint&) const = default;
};

/// A maximal run of consecutive grid points returning the same path.
struct BetaInterval {
  double beta_lo = 0.0;
  double beta_hi = 0.0;
  Path solution;
  double reward = 0.0;
  bool feasible = false;
};

struct SweepResult {
  std::vector<TradeoffPoint> points;
  std::optional<std::size_t> chosen;  ///< index into points; empty when no grid beta is feasible
  std::vector<BetaInterval> intervals;
  std::size_t monotonicity_violations = 0;  ///< grid steps where the reward fell

  const TradeoffPoint* chosen_point() const { return chosen ? &points[*chosen] : nullptr; }
};

/// Picks the feasible point of maximum reward; ties go to the smallest beta.
inline std::optional<std::size_t> best_feasible(const std::vector<TradeoffPoint>& points) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].feasible) continue;
    if (!best || points[i].reward > points[*best].reward ||
        (points[i].reward == points[*best].reward && points[i].beta < points[*best].beta)) {
      best = i;
    }
  }
  return best;
}

inline SweepResult sweep(const SolveFn& solve, const SweepConfig& cfg) {
  cfg.validate();
  SweepResult out;
  const std::size_t count = cfg.grid_size();
  out.points.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.points.push_back(TradeoffPoint::from(solve(cfg.beta_at(k))));

  for (std::size_t k = 0; k < out.points.size(); ++k) {
    const auto& p = out.points[k];
    if (k > 0 && p.reward < out.points[k - 1].reward) ++out.monotonicity_violations;
    if (out.intervals.empty() || out.intervals.back().solution != p.solution) {
      out.intervals.push_back({p.beta, p.beta, p.solution, p.reward, p.feasible});
    } else {
      out.intervals.back().beta_hi = p.beta;
    }
  }
  out.chosen = best_feasible(out.points);
  return out;
}

struct BsConfig {
  double beta_max = 10.0;
  double t_range = 0.01;

  void validate() const {
    if (!(t_range > 0.0)) throw ConfigError("t_range must be positive");
    if (!(t_range < beta_max)) throw ConfigError("t_range must be smaller than beta_max");
  }
  /// Upper bound on the number of solves: two end points plus the halvings.
  std::size_t max_solves() const {
    return static_cast<std::size_t>(std::ceil(std::log2(beta_max / t_range))) + 2;
  }
};

enum class BsStatus { transition_found, no_transition_found, no_feasible_anchor };

struct BsResult {
  BsStatus status = BsStatus::transition_found;
  std::optional<TradeoffPoint> chosen;
  std::vector<TradeoffPoint> visited;
  double beta_lower = 0.0;
  double beta_upper = 0.0;
};

/// Bisects [0, beta_max] on feasibility of the solve result, keeping the
/// lower end feasible and the upper end infeasible, until the bracket is
/// narrower than t_range. Returns the best feasible visited point.
inline BsResult binary_search_beta(const SolveFn& solve, const BsConfig& cfg) {
  cfg.validate();
  BsResult out;
  auto visit = [&](double beta) -> const TradeoffPoint& {
    out.visited.push_back(TradeoffPoint::from(solve(beta)));
    return out.visited.back();
  };

  double lo = 0.0;
  double hi = cfg.beta_max;
  out.beta_lower = lo;
  out.beta_upper = hi;
  if (!visit(lo).feasible) {
    out.status = BsStatus::no_feasible_anchor;
    return out;
  }
  if (visit(hi).feasible) {
    out.status = BsStatus::no_transition_found;
    out.beta_lower = hi;
    out.chosen = out.visited.back();
    return out;
  }
  while (hi - lo >= cfg.t_range) {
    double mid = 0.5 * (lo + hi);
    if (visit(mid).feasible) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.beta_lower = lo;
  out.beta_upper = hi;
  if (auto best = best_feasible(out.visited)) out.chosen = out.visited[*best];
  return out;
}

/// Solve callback for a bit-allocation instance with a fixed prior.
inline SolveFn make_solver(const BitAllocInstance& inst, const ConditionalModel& prior, SolverConfig cfg) {
  return [&inst, &prior, cfg](double beta) { return viterbi_solve(inst, prior, beta, cfg); };
}

}  // namespace iadp
