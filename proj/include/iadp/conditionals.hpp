#pragma once

/// @file conditionals.hpp
/// @brief Forward conditionals p(X_{t+1} | X_t): the budget-aware sigmoid
/// builder for bit allocation and Blahut-Arimoto iteration.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "iadp/distributions.hpp"
#include "iadp/errors.hpp"
#include "iadp/problem.hpp"

namespace iadp {

/// A conditional row plus the flag raised when every candidate had zero
/// weight and the row fell back to a point mass.
struct ConditionalRow {
  Row probs;
  bool exhausted = false;
};

struct SigmoidConditionalConfig {
  double sigma = 1e-3;  ///< standard deviation of the additive weight noise
  std::uint64_t noise_seed = 0;
};

namespace detail {

// splitmix64 finalizer, used to derive independent noise streams.
inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t value) {
  return mix(seed ^ mix(value));
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace detail

/// Budget-aware conditional for the next bit width after @p prefix.
///
/// Candidate x gets weight S(P_b - (power(prefix) + 2^x)) + n_x, where S is
/// the logistic sigmoid and n_x ~ N(0, sigma^2). Candidates larger than the
/// last symbol are masked to zero; negative weights are clamped before
/// normalizing. The noise is keyed on (stage, prefix power, last symbol) so
/// the same trellis edge always sees the same weights.
inline ConditionalRow sigmoid_conditional(const BitAllocInstance& inst,
                                          std::span<const Symbol> prefix,
                                          const SigmoidConditionalConfig& cfg = {}) {
  if (prefix.empty()) throw ContractError("sigmoid conditional needs a non-empty prefix");
  if (!(cfg.sigma >= 0.0)) throw ConfigError("sigma must be non-negative");
  const auto& alphabet = inst.alphabet();
  const double used = power(inst, prefix);
  const Symbol last = prefix.back();

  std::minstd_rand noise_rng;
  std::normal_distribution<double> noise(0.0, cfg.sigma);
  if (cfg.sigma > 0.0) {
    std::uint64_t key = detail::mix(cfg.noise_seed, prefix.size());
    key = detail::mix(key, static_cast<std::uint64_t>(used));
    key = detail::mix(key, static_cast<std::uint64_t>(last));
    noise_rng.seed(static_cast<std::uint_fast32_t>(key % 2147483646ULL + 1));
  }

  ConditionalRow out{Row(alphabet.size(), 0.0), false};
  double total = 0.0;
  for (std::size_t k = 0; k < alphabet.size(); ++k) {
    const Symbol x = alphabet[k];
    double n = cfg.sigma > 0.0 ? noise(noise_rng) : 0.0;
    if (x > last) continue;
    double w = detail::sigmoid(inst.power_budget() - (used + std::exp2(x))) + n;
    out.probs[k] = std::max(w, 0.0);
    total += out.probs[k];
  }
  if (total > 0.0) {
    for (double& v : out.probs) v /= total;
    return out;
  }
  // Every allowed candidate lost its weight.
  std::fill(out.probs.begin(), out.probs.end(), 0.0);
  out.probs[alphabet.require_index(last)] = 1.0;
  out.exhausted = true;
  return out;
}

// ---------------------------------------------------------------------------
// Blahut-Arimoto
// ---------------------------------------------------------------------------

struct BaaConfig {
  std::size_t max_iters = 200;
  double tolerance = 1e-8;  ///< max per-row L1 change that counts as converged
  double beta = 0.0;

  void validate() const {
    if (max_iters < 1) throw ConfigError("BAA needs max_iters >= 1");
    if (!(tolerance > 0.0)) throw ConfigError("BAA tolerance must be positive");
  }
};

/// Value table G[j][i] for conditioning symbol j and next symbol i. An
/// entry of +inf marks a forbidden transition and receives zero mass.
using ValueTable = std::vector<Row>;

struct BaaStep {
  std::vector<Row> conditional;
  Row marginal;
};

/// One synchronous sweep of the self-consistent equations:
///   m(i)     = sum_j s(j) p(i | j)
///   p'(i | j) = m(i) exp(-beta G[j][i]) / Z_j
/// evaluated in log space with max subtraction.
inline BaaStep baa_update(std::span<const Row> conditional, std::span<const double> source,
                          const ValueTable& values, double beta) {
  const std::size_t m = source.size();
  if (conditional.size() != m || values.size() != m) {
    throw ContractError("baa_update: conditional and value table need one row per source symbol");
  }
  BaaStep out{std::vector<Row>(m, Row(m, 0.0)), Row(m, 0.0)};
  for (std::size_t j = 0; j < m; ++j) {
    if (conditional[j].size() != m || values[j].size() != m) {
      throw ContractError("baa_update: rows must be square");
    }
    for (std::size_t i = 0; i < m; ++i) out.marginal[i] += source[j] * conditional[j][i];
  }

  Row logw(m);
  for (std::size_t j = 0; j < m; ++j) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double g = values[j][i];
      if (std::isinf(g) && g > 0) {
        logw[i] = -std::numeric_limits<double>::infinity();
      } else if (std::isnan(g)) {
        throw ContractError("baa_update: value table entries must not be NaN");
      } else {
        logw[i] = out.marginal[i] > 0.0 ? std::log(out.marginal[i]) - beta * g
                                        : -std::numeric_limits<double>::infinity();
      }
      top = std::max(top, logw[i]);
    }
    Row& row = out.conditional[j];
    if (std::isinf(top)) {
      // No admissible symbol carries marginal mass: spread over the admissible set.
      std::size_t allowed = 0;
      for (std::size_t i = 0; i < m; ++i) allowed += !(std::isinf(values[j][i]) && values[j][i] > 0);
      for (std::size_t i = 0; i < m; ++i) {
        bool ok = !(std::isinf(values[j][i]) && values[j][i] > 0);
        row[i] = allowed == 0 ? out.marginal[i] : (ok ? 1.0 / static_cast<double>(allowed) : 0.0);
      }
      continue;
    }
    double z = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      row[i] = std::isinf(logw[i]) ? 0.0 : std::exp(logw[i] - top);
      z += row[i];
    }
    for (double& v : row) v /= z;
  }
  return out;
}

struct BaaResult {
  std::vector<Row> conditional;
  Row marginal;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Iterates baa_update from rows equal to @p initial_marginal until the
/// largest per-row L1 change drops below the tolerance.
inline BaaResult baa_conditional(std::span<const double> source, std::span<const double> initial_marginal,
                                 const ValueTable& values, const BaaConfig& cfg) {
  cfg.validate();
  if (!is_distribution(source) || !is_distribution(initial_marginal) ||
      initial_marginal.size() != source.size()) {
    throw ContractError("baa_conditional: marginals must be distributions of equal size");
  }
  const std::size_t m = source.size();
  BaaResult out;
  out.conditional.assign(m, Row(initial_marginal.begin(), initial_marginal.end()));
  out.marginal.assign(initial_marginal.begin(), initial_marginal.end());
  for (std::size_t k = 1; k <= cfg.max_iters; ++k) {
    BaaStep step = baa_update(out.conditional, source, values, cfg.beta);
    double change = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      double l1 = 0.0;
      for (std::size_t i = 0; i < m; ++i) l1 += std::abs(step.conditional[j][i] - out.conditional[j][i]);
      change = std::max(change, l1);
    }
    out.conditional = std::move(step.conditional);
    out.marginal = std::move(step.marginal);
    out.iterations = k;
    if (change < cfg.tolerance) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace iadp
