#pragma once

/// @file problem.hpp
/// @brief Stage-separable allocation problems, paths, rewards and the
/// constraint-satisfaction predicates, plus the ADC bit-allocation instance.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "iadp/errors.hpp"

namespace iadp {

using Symbol = int;
using Path = std::vector<Symbol>;

/// Ordered set of M >= 2 distinct symbols.
class Alphabet {
 public:
  Alphabet() = default;

  explicit Alphabet(std::vector<Symbol> values) : values_(std::move(values)) {
    if (values_.size() < 2) {
      throw ConfigError("alphabet needs at least two symbols");
    }
    for (std::size_t i = 1; i < values_.size(); ++i) {
      if (values_[i] <= values_[i - 1]) {
        throw ConfigError("alphabet symbols must be strictly increasing");
      }
    }
  }

  std::size_t size() const noexcept { return values_.size(); }
  Symbol operator[](std::size_t i) const { return values_[i]; }
  const std::vector<Symbol>& values() const noexcept { return values_; }
  Symbol min() const { return values_.front(); }
  Symbol max() const { return values_.back(); }

  std::optional<std::size_t> index_of(Symbol s) const {
    auto it = std::lower_bound(values_.begin(), values_.end(), s);
    if (it == values_.end() || *it != s) return std::nullopt;
    return static_cast<std::size_t>(it - values_.begin());
  }

  /// Index of @p s, throwing InvalidPathError when it is not a member.
  std::size_t require_index(Symbol s) const {
    auto idx = index_of(s);
    if (!idx) throw InvalidPathError("symbol " + std::to_string(s) + " is not in the alphabet");
    return *idx;
  }

  bool contains(Symbol s) const { return index_of(s).has_value(); }

  bool operator==(const Alphabet&) const = default;

 private:
  std::vector<Symbol> values_;
};

/// A constrained allocation problem with stage-separable reward
/// f(x) = sum_i r_i(x_i). Feasibility lives entirely in the predicates.
///
/// `partially_feasible` must never reject a prefix that has a feasible
/// completion; it may accept prefixes that do not. `edge_allowed` restricts
/// which symbol may follow which (all edges when empty).
class ProblemInstance {
 public:
  using PathPredicate = std::function<bool(std::span<const Symbol>)>;
  using EdgePredicate = std::function<bool(std::size_t stage, Symbol from, Symbol to)>;

  ProblemInstance(Alphabet alphabet, std::vector<std::vector<double>> reward_table,
                  PathPredicate feasible = {}, PathPredicate partially_feasible = {},
                  EdgePredicate edge_allowed = {}, std::string metadata = {})
      : alphabet_(std::move(alphabet)),
        rewards_(std::move(reward_table)),
        feasible_(std::move(feasible)),
        partial_(std::move(partially_feasible)),
        edge_(std::move(edge_allowed)),
        metadata_(std::move(metadata)) {
    if (rewards_.empty()) throw ConfigError("horizon must be at least 1");
    for (const auto& row : rewards_) {
      if (row.size() != alphabet_.size()) {
        throw ConfigError("reward table rows must have one entry per symbol");
      }
      for (double v : row) {
        if (!std::isfinite(v)) throw ConfigError("reward table entries must be finite");
      }
    }
  }

  std::size_t horizon() const noexcept { return rewards_.size(); }
  const Alphabet& alphabet() const noexcept { return alphabet_; }
  const std::vector<std::vector<double>>& reward_table() const noexcept { return rewards_; }
  const std::string& metadata() const noexcept { return metadata_; }

  /// Reward of symbol index @p k at stage @p stage (both 0-based).
  double reward_at(std::size_t stage, std::size_t k) const { return rewards_[stage][k]; }

  bool feasible(std::span<const Symbol> path) const { return !feasible_ || feasible_(path); }
  bool partially_feasible(std::span<const Symbol> prefix) const {
    return !partial_ || partial_(prefix);
  }
  bool edge_allowed(std::size_t stage, Symbol from, Symbol to) const {
    return !edge_ || edge_(stage, from, to);
  }

 private:
  Alphabet alphabet_;
  std::vector<std::vector<double>> rewards_;
  PathPredicate feasible_;
  PathPredicate partial_;
  EdgePredicate edge_;
  std::string metadata_;
};

namespace detail {

inline void validate_path(const ProblemInstance& problem, std::span<const Symbol> path) {
  if (path.size() > problem.horizon()) {
    throw InvalidPathError("path of length " + std::to_string(path.size()) +
                           " exceeds horizon " + std::to_string(problem.horizon()));
  }
  for (Symbol s : path) problem.alphabet().require_index(s);
}

}  // namespace detail

/// Sum of the per-stage rewards along a (possibly partial) path.
inline double reward(const ProblemInstance& problem, std::span<const Symbol> path) {
  detail::validate_path(problem, path);
  double total = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    total += problem.reward_at(i, *problem.alphabet().index_of(path[i]));
  }
  return total;
}

/// Constraint satisfaction of a complete path.
inline bool csf(const ProblemInstance& problem, std::span<const Symbol> path) {
  detail::validate_path(problem, path);
  if (path.size() != problem.horizon()) {
    throw ContractError("csf needs a path of length exactly N");
  }
  return problem.feasible(path);
}

/// Constraint satisfaction of a prefix: true when some completion may be
/// feasible. Defined for 1 <= k < N.
inline bool csf_partial(const ProblemInstance& problem, std::span<const Symbol> prefix) {
  detail::validate_path(problem, prefix);
  if (prefix.empty() || prefix.size() >= problem.horizon()) {
    throw ContractError("csf_partial needs a prefix of length 1 <= k < N");
  }
  return problem.partially_feasible(prefix);
}

// ---------------------------------------------------------------------------
// ADC bit allocation
// ---------------------------------------------------------------------------

/// Which closed form the per-path reward a^2 f(x) / (b^2 + d g(x)) takes.
///
/// `paper_consistent` uses g(x) = 2^-x, so more bits means more reward.
/// `as_printed` uses g(x) = 2^x, where the reward falls as bits grow.
enum class RewardPreset { paper_consistent, as_printed };

inline std::string to_string(RewardPreset p) {
  return p == RewardPreset::paper_consistent ? "paper-consistent" : "as-printed";
}

inline RewardPreset reward_preset_from_string(const std::string& s) {
  if (s == "paper-consistent") return RewardPreset::paper_consistent;
  if (s == "as-printed") return RewardPreset::as_printed;
  throw ConfigError("unknown reward preset '" + s + "'");
}

/// Numerator and quantization factors of the bit-allocation reward.
struct RewardShape {
  std::function<double(Symbol)> numerator;
  std::function<double(Symbol)> quantization;

  static RewardShape for_preset(RewardPreset preset) {
    if (preset == RewardPreset::paper_consistent) {
      return {[](Symbol) { return 1.0; }, [](Symbol x) { return std::exp2(-x); }};
    }
    return {[](Symbol) { return 1.0; }, [](Symbol x) { return std::exp2(x); }};
  }
};

class BitAllocInstance {
 public:
  BitAllocInstance(std::vector<double> a, std::vector<double> b, std::vector<double> d,
                   double power_budget, RewardPreset preset = RewardPreset::paper_consistent,
                   std::optional<std::uint64_t> seed = std::nullopt)
      : a_(std::move(a)),
        b_(std::move(b)),
        d_(std::move(d)),
        power_budget_(power_budget),
        preset_(preset),
        seed_(seed),
        alphabet_(std::vector<Symbol>{1, 2, 3, 4}) {
    validate();
    problem_ = build_problem(RewardShape::for_preset(preset_));
    check_monotone();
  }

  std::size_t n() const noexcept { return a_.size(); }
  const std::vector<double>& a() const noexcept { return a_; }
  const std::vector<double>& b() const noexcept { return b_; }
  const std::vector<double>& d() const noexcept { return d_; }
  double power_budget() const noexcept { return power_budget_; }
  RewardPreset preset() const noexcept { return preset_; }
  std::optional<std::uint64_t> seed() const noexcept { return seed_; }
  const Alphabet& alphabet() const noexcept { return alphabet_; }

  /// The generic view used by solvers: reward table and feasibility oracles.
  const ProblemInstance& problem() const noexcept { return *problem_; }

  double reward_term(std::size_t i, Symbol x) const {
    return problem_->reward_at(i, alphabet_.require_index(x));
  }

  friend bool operator==(const BitAllocInstance& l, const BitAllocInstance& r) {
    return l.a_ == r.a_ && l.b_ == r.b_ && l.d_ == r.d_ &&
           l.power_budget_ == r.power_budget_ && l.preset_ == r.preset_ && l.seed_ == r.seed_;
  }

 private:
  void validate() const {
    if (a_.empty()) throw ConfigError("bit allocation needs N >= 1 paths");
    if (b_.size() != a_.size() || d_.size() != a_.size()) {
      throw ConfigError("coefficient vectors a, b, d must have the same length");
    }
    auto positive = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x) && x > 0; });
    };
    if (!positive(a_) || !positive(b_)) throw ConfigError("coefficients a and b must be positive");
    // d = 0 is accepted: it removes quantization noise and is a useful limit case.
    if (!std::all_of(d_.begin(), d_.end(), [](double x) { return std::isfinite(x) && x >= 0; })) {
      throw ConfigError("coefficients d must be non-negative");
    }
    if (!(power_budget_ > 0) || !std::isfinite(power_budget_)) {
      throw ConfigError("power budget must be positive");
    }
  }

  std::shared_ptr<const ProblemInstance> build_problem(const RewardShape& shape) const {
    std::vector<std::vector<double>> table(n(), std::vector<double>(alphabet_.size()));
    for (std::size_t i = 0; i < n(); ++i) {
      for (std::size_t k = 0; k < alphabet_.size(); ++k) {
        Symbol x = alphabet_[k];
        table[i][k] = a_[i] * a_[i] * shape.numerator(x) /
                      (b_[i] * b_[i] + d_[i] * shape.quantization(x));
      }
    }
    const double budget = power_budget_;
    const std::size_t horizon = n();
    const Symbol cheapest = alphabet_.min();
    auto ordered = [](std::span<const Symbol> p) {
      return std::is_sorted(p.begin(), p.end(), std::greater<>{});
    };
    auto path_power = [](std::span<const Symbol> p) {
      double s = 0.0;
      for (Symbol x : p) s += std::exp2(x);
      return s;
    };
    auto feasible = [=](std::span<const Symbol> p) {
      return ordered(p) && path_power(p) <= budget;
    };
    // Exact: the cheapest ordered completion repeats the smallest symbol.
    auto partial = [=](std::span<const Symbol> p) {
      double rest = static_cast<double>(horizon - p.size()) * std::exp2(cheapest);
      return ordered(p) && path_power(p) + rest <= budget;
    };
    auto edge = [](std::size_t, Symbol from, Symbol to) { return to <= from; };
    return std::make_shared<const ProblemInstance>(
        alphabet_, std::move(table), feasible, partial, edge,
        "bit-allocation N=" + std::to_string(horizon) + " P_b=" + std::to_string(budget) +
            " preset=" + to_string(preset_));
  }

  void check_monotone() const {
    for (std::size_t i = 0; i < n(); ++i) {
      const auto& row = problem_->reward_table()[i];
      for (std::size_t k = 1; k < row.size(); ++k) {
        bool ok = preset_ == RewardPreset::paper_consistent ? row[k] >= row[k - 1]
                                                            : row[k] <= row[k - 1];
        if (d_[i] > 0) {
          ok = preset_ == RewardPreset::paper_consistent ? row[k] > row[k - 1]
                                                         : row[k] < row[k - 1];
        }
        if (!ok) throw ConfigError("reward term is not monotone in the bit count");
      }
    }
  }

  std::vector<double> a_, b_, d_;
  double power_budget_;
  RewardPreset preset_;
  std::optional<std::uint64_t> seed_;
  Alphabet alphabet_;
  std::shared_ptr<const ProblemInstance> problem_;
};

/// Total normalized ADC power sum_i 2^{x_i} of a (possibly partial) path.
inline double power(const BitAllocInstance& inst, std::span<const Symbol> path) {
  detail::validate_path(inst.problem(), path);
  double s = 0.0;
  for (Symbol x : path) s += std::exp2(x);
  return s;
}

inline double reward(const BitAllocInstance& inst, std::span<const Symbol> path) {
  return reward(inst.problem(), path);
}
inline bool csf(const BitAllocInstance& inst, std::span<const Symbol> path) {
  return csf(inst.problem(), path);
}
inline bool csf_partial(const BitAllocInstance& inst, std::span<const Symbol> prefix) {
  return csf_partial(inst.problem(), prefix);
}

/// Uniform sampling ranges for generated instances.
struct CoefficientRanges {
  double a_min = 0.5, a_max = 2.0;
  double b_min = 0.3, b_max = 0.7;
  double d_min = 0.5, d_max = 1.5;
};

/// Draws a reproducible instance. Channel singular values come sorted in
/// decreasing order, matching the non-increasing bit-ordering constraint.
/// The budget defaults to 4N, the power of 2-bit converters on every path.
inline BitAllocInstance generate_instance(std::uint64_t seed, std::size_t n,
                                          const CoefficientRanges& ranges = {},
                                          std::optional<double> power_budget = std::nullopt,
                                          RewardPreset preset = RewardPreset::paper_consistent) {
  if (n == 0) throw ConfigError("N must be at least 1");
  auto check = [](double lo, double hi, const char* name) {
    if (!(lo > 0) || !(hi >= lo) || !std::isfinite(hi)) {
      throw ConfigError(std::string("range for ") + name + " must satisfy 0 < min <= max");
    }
  };
  check(ranges.a_min, ranges.a_max, "a");
  check(ranges.b_min, ranges.b_max, "b");
  check(ranges.d_min, ranges.d_max, "d");

  std::mt19937_64 rng(seed);
  auto draw = [&](double lo, double hi) {
    std::vector<double> v(n);
    std::uniform_real_distribution<double> dist(lo, hi);
    for (auto& x : v) x = lo == hi ? lo : dist(rng);
    return v;
  };
  auto a = draw(ranges.a_min, ranges.a_max);
  std::sort(a.begin(), a.end(), std::greater<>{});
  auto b = draw(ranges.b_min, ranges.b_max);
  auto d = draw(ranges.d_min, ranges.d_max);
  double budget = power_budget.value_or(4.0 * static_cast<double>(n));
  return BitAllocInstance(std::move(a), std::move(b), std::move(d), budget, preset, seed);
}

}  // namespace iadp
