#pragma once

/// @file distributions.hpp
/// @brief Stage-wise conditional distributions, KL divergence in bits and
/// the sampling-based prior estimator.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "iadp/errors.hpp"
#include "iadp/problem.hpp"

namespace iadp {

using Row = std::vector<double>;

inline constexpr double kRowTolerance = 1e-9;

inline bool is_distribution(std::span<const double> row, double tol = kRowTolerance) {
  double sum = 0.0;
  for (double v : row) {
    if (!(v >= 0.0) || v > 1.0 + tol) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= tol;
}

/// D(p || q) in bits, with 0 log(0/q) = 0 and +inf when p > 0 where q = 0.
inline double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ContractError("kl_divergence: rows differ in length");
  if (!is_distribution(p) || !is_distribution(q)) {
    throw ContractError("kl_divergence: rows must be normalized distributions");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    total += p[i] * std::log2(p[i] / q[i]);
  }
  return std::max(total, 0.0);
}

/// Per-stage transition tables Pr(X_{t+1} = x_i | X_t = x_j) plus the
/// distribution of X_1. Stage t runs over 0..N-2 (transition t -> t+1).
///
/// Besides the row-stochastic tables the model carries an occupancy weight
/// per conditioning state: the share of reference solutions that visit x_j
/// at stage t. occupancy * row gives the joint transition frequency.
class ConditionalModel {
 public:
  ConditionalModel() = default;

  ConditionalModel(std::size_t horizon, std::size_t alphabet_size)
      : horizon_(horizon),
        m_(alphabet_size),
        initial_(alphabet_size, 1.0 / static_cast<double>(alphabet_size)),
        rows_(transitions() * m_ * m_, 1.0 / static_cast<double>(alphabet_size)),
        unsupported_(transitions() * m_, false),
        occupancy_(transitions() * m_, 1.0) {
    if (horizon == 0 || alphabet_size < 2) throw ConfigError("empty conditional model");
  }

  static ConditionalModel uniform(std::size_t horizon, std::size_t alphabet_size) {
    return ConditionalModel(horizon, alphabet_size);
  }

  std::size_t horizon() const noexcept { return horizon_; }
  std::size_t alphabet_size() const noexcept { return m_; }
  std::size_t transitions() const noexcept { return horizon_ > 0 ? horizon_ - 1 : 0; }

  std::span<const double> initial() const noexcept { return initial_; }
  std::span<const double> row(std::size_t stage, std::size_t from) const {
    return {rows_.data() + offset(stage, from), m_};
  }
  bool unsupported(std::size_t stage, std::size_t from) const {
    return unsupported_[stage * m_ + from];
  }
  double occupancy(std::size_t stage, std::size_t from) const {
    return occupancy_[stage * m_ + from];
  }

  void set_initial(std::span<const double> dist) {
    require_distribution(dist, "initial distribution");
    initial_.assign(dist.begin(), dist.end());
  }
  void set_row(std::size_t stage, std::size_t from, std::span<const double> dist) {
    require_distribution(dist, "conditional row");
    std::copy(dist.begin(), dist.end(), rows_.begin() + static_cast<std::ptrdiff_t>(offset(stage, from)));
  }
  void set_unsupported(std::size_t stage, std::size_t from, bool flag) {
    check_index(stage, from);
    unsupported_[stage * m_ + from] = flag;
  }
  void set_occupancy(std::size_t stage, std::size_t from, double weight) {
    check_index(stage, from);
    if (!(weight >= 0.0 && weight <= 1.0 + kRowTolerance)) {
      throw ContractError("occupancy weight must lie in [0, 1]");
    }
    occupancy_[stage * m_ + from] = weight;
  }

  /// Marginal of X_{t+1} for t = 0..N-1 obtained by propagating the initial
  /// distribution through the tables.
  std::vector<Row> stage_marginals() const {
    std::vector<Row> out;
    out.reserve(horizon_);
    out.emplace_back(initial_);
    for (std::size_t t = 0; t < transitions(); ++t) {
      Row next(m_, 0.0);
      for (std::size_t j = 0; j < m_; ++j) {
        auto r = row(t, j);
        for (std::size_t i = 0; i < m_; ++i) next[i] += out.back()[j] * r[i];
      }
      out.push_back(std::move(next));
    }
    return out;
  }

  bool operator==(const ConditionalModel&) const = default;

 private:
  std::size_t offset(std::size_t stage, std::size_t from) const {
    check_index(stage, from);
    return (stage * m_ + from) * m_;
  }
  void check_index(std::size_t stage, std::size_t from) const {
    if (stage >= transitions() || from >= m_) throw ContractError("conditional model index out of range");
  }
  void require_distribution(std::span<const double> dist, const char* what) const {
    if (dist.size() != m_ || !is_distribution(dist)) {
      throw ContractError(std::string(what) + " must be a normalized distribution over the alphabet");
    }
  }

  std::size_t horizon_ = 0;
  std::size_t m_ = 0;
  Row initial_;
  std::vector<double> rows_;
  std::vector<bool> unsupported_;
  std::vector<double> occupancy_;
};

// ---------------------------------------------------------------------------
// Prior estimation
// ---------------------------------------------------------------------------

struct SamplerConfig {
  std::size_t k = 2000;   ///< feasible solutions to sample
  std::size_t n1 = 50;    ///< top solutions kept for the counts
  std::uint64_t seed = 0;
  std::optional<double> epsilon;  ///< Laplace term; 1/(10 N1) when unset
  std::uint64_t max_attempts = 100'000'000;

  double smoothing() const { return epsilon.value_or(1.0 / (10.0 * static_cast<double>(n1))); }
};

/// Feasible solutions retained for prior estimation, best first.
struct SampleSet {
  std::vector<Path> solutions;
  std::vector<double> rewards;
  std::size_t k = 0;
  std::size_t n1 = 0;
  std::uint64_t attempts = 0;
};

/// Rejection-samples K feasible paths with i.i.d. uniform symbols and keeps
/// the N1 best by reward (ties broken by lexicographically smaller path).
inline SampleSet sample_solutions(const ProblemInstance& problem, const SamplerConfig& cfg) {
  if (cfg.n1 < 1 || cfg.k < cfg.n1) throw ConfigError("sampler needs K >= N1 >= 1");
  const std::size_t n = problem.horizon();
  const auto& alphabet = problem.alphabet();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);

  std::vector<Path> drawn;
  drawn.reserve(cfg.k);
  Path candidate(n);
  std::uint64_t attempts = 0;
  while (drawn.size() < cfg.k) {
    if (attempts >= cfg.max_attempts) throw SamplingError(attempts, drawn.size());
    ++attempts;
    // A path breaking an edge rule can never be feasible; stop drawing it early.
    bool alive = true;
    for (std::size_t t = 0; t < n && alive; ++t) {
      candidate[t] = alphabet[pick(rng)];
      alive = t == 0 || problem.edge_allowed(t - 1, candidate[t - 1], candidate[t]);
    }
    if (alive && problem.feasible(candidate)) drawn.push_back(candidate);
  }

  std::vector<std::pair<double, std::size_t>> order(drawn.size());
  for (std::size_t i = 0; i < drawn.size(); ++i) order[i] = {reward(problem, drawn[i]), i};
  std::sort(order.begin(), order.end(), [&](const auto& l, const auto& r) {
    if (l.first != r.first) return l.first > r.first;
    return drawn[l.second] < drawn[r.second];
  });

  SampleSet out;
  out.k = cfg.k;
  out.n1 = cfg.n1;
  out.attempts = attempts;
  for (std::size_t i = 0; i < cfg.n1; ++i) {
    out.solutions.push_back(drawn[order[i].second]);
    out.rewards.push_back(order[i].first);
  }
  return out;
}

/// Transition frequencies of the given solutions, with @p epsilon added to
/// every cell before normalization. Each row is normalized by the count of
/// its conditioning state; rows never visited become uniform and are
/// flagged unsupported. The occupancy weight keeps the per-state visit
/// share so that occupancy * row equals the count divided by N1.
inline ConditionalModel prior_from_solutions(const ProblemInstance& problem,
                                             std::span<const Path> solutions, double epsilon) {
  if (solutions.empty()) throw ContractError("prior needs at least one solution");
  if (!(epsilon >= 0.0)) throw ConfigError("smoothing must be non-negative");
  const std::size_t n = problem.horizon();
  const std::size_t m = problem.alphabet().size();
  const double count = static_cast<double>(solutions.size());
  const double md = static_cast<double>(m);

  std::vector<double> first(m, 0.0);
  std::vector<double> cells((n > 0 ? n - 1 : 0) * m * m, 0.0);
  for (const auto& s : solutions) {
    if (s.size() != n) throw ContractError("prior solutions must have length N");
    first[problem.alphabet().require_index(s[0])] += 1.0;
    for (std::size_t t = 0; t + 1 < n; ++t) {
      std::size_t j = problem.alphabet().require_index(s[t]);
      std::size_t i = problem.alphabet().require_index(s[t + 1]);
      cells[(t * m + j) * m + i] += 1.0;
    }
  }

  ConditionalModel model(n, m);
  Row dist(m);
  for (std::size_t i = 0; i < m; ++i) dist[i] = (first[i] + epsilon) / (count + md * epsilon);
  model.set_initial(dist);
  for (std::size_t t = 0; t + 1 < n; ++t) {
    for (std::size_t j = 0; j < m; ++j) {
      const double* c = &cells[(t * m + j) * m];
      double visits = std::accumulate(c, c + m, 0.0);
      if (visits == 0.0) {
        std::fill(dist.begin(), dist.end(), 1.0 / md);
        model.set_unsupported(t, j, true);
      } else {
        for (std::size_t i = 0; i < m; ++i) dist[i] = (c[i] + epsilon) / (visits + md * epsilon);
      }
      model.set_row(t, j, dist);
      model.set_occupancy(t, j, (visits + md * epsilon) / (count + md * md * epsilon));
    }
  }
  return model;
}

inline ConditionalModel estimate_prior(const ProblemInstance& problem, const SamplerConfig& cfg) {
  auto samples = sample_solutions(problem, cfg);
  return prior_from_solutions(problem, samples.solutions, cfg.smoothing());
}

inline ConditionalModel estimate_prior(const BitAllocInstance& inst, const SamplerConfig& cfg) {
  return estimate_prior(inst.problem(), cfg);
}

}  // namespace iadp
