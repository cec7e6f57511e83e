#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "sparsetraj/distributions.hpp"

namespace sparsetraj {

enum class BoundKind { general, gaussian, uniform, discrete, prior_raghu };

inline std::string_view to_string(BoundKind k) {
  switch (k) {
    case BoundKind::general: return "general";
    case BoundKind::gaussian: return "gaussian";
    case BoundKind::uniform: return "uniform";
    case BoundKind::discrete: return "discrete";
    case BoundKind::prior_raghu: return "prior_raghu";
  }
  return "?";
}

/// Per-layer multiplicative factor of an expected-length lower bound:
/// E[l(z^(d))] >= base^d * l(x).
struct BoundBase {
  double base = 0.0;
  BoundKind kind = BoundKind::general;
};

namespace detail {
inline void check_alpha_k(double alpha, double k) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (!(k >= 1.0)) throw std::invalid_argument("width k must be >= 1");
}
}  // namespace detail

/// alpha * M * sqrt(k) / 2, for any even law with E|u^T w| >= M ||u||.
inline BoundBase base_general(double alpha, double m, double k) {
  detail::check_alpha_k(alpha, k);
  if (!(m >= 0.0)) throw std::invalid_argument("M must be nonnegative");
  return {alpha * m * std::sqrt(k) / 2.0, BoundKind::general};
}

/// alpha * sigma_w * sqrt(k) / sqrt(2 pi). Pass sigma_w / sqrt(k) for
/// 1/sqrt(k)-scaled weights.
inline BoundBase base_gaussian(double alpha, double sigma_w, double k) {
  detail::check_alpha_k(alpha, k);
  if (!(sigma_w > 0.0)) throw std::invalid_argument("sigma_w must be positive");
  return {alpha * sigma_w * std::sqrt(k) / std::sqrt(2.0 * std::numbers::pi), BoundKind::gaussian};
}

/// alpha * C_w * sqrt(k) / (4 sqrt 2).
inline BoundBase base_uniform(double alpha, double c_w, double k) {
  detail::check_alpha_k(alpha, k);
  if (!(c_w > 0.0)) throw std::invalid_argument("C_w must be positive");
  return {alpha * c_w * std::sqrt(k) / (4.0 * std::numbers::sqrt2), BoundKind::uniform};
}

/// alpha * sqrt(k) / (2 sqrt 2) * sum|w| / N_w.
inline BoundBase base_discrete(double alpha, std::span<const double> values, double k) {
  detail::check_alpha_k(alpha, k);
  // Reuse the spec's validation of symmetry and nonemptiness.
  const DistributionSpec spec = DistributionSpec::discrete({values.begin(), values.end()});
  double s = 0.0;
  for (double v : spec.values()) s += std::abs(v);
  return {alpha * std::sqrt(k) / (2.0 * std::numbers::sqrt2) * s / static_cast<double>(spec.values().size()),
          BoundKind::discrete};
}

/// sigma_w sqrt(k) / sqrt(k + 1): the dense Gaussian factor from the
/// earlier order-of-magnitude bound, without its unstated constant.
inline BoundBase base_prior_raghu(double sigma_w, double k) {
  if (!(sigma_w > 0.0)) throw std::invalid_argument("sigma_w must be positive");
  if (!(k >= 1.0)) throw std::invalid_argument("width k must be >= 1");
  return {sigma_w * std::sqrt(k) / std::sqrt(k + 1.0), BoundKind::prior_raghu};
}

/// Product of per-layer bases times the input length.
inline double bound_length(std::span<const BoundBase> bases, double input_length) {
  if (!(input_length >= 0.0)) throw std::invalid_argument("input length must be nonnegative");
  double out = input_length;
  for (const BoundBase& b : bases) out *= b.base;
  return out;
}

/// Family-specific base for a hidden layer of width k with fan-in `fan_in`,
/// applying the 1/sqrt(fan_in) scaling when the spec asks for it.
inline BoundBase bound_base_for(const DistributionSpec& weights, std::size_t k, std::size_t fan_in) {
  const DistributionSpec eff = weights.effective(fan_in);
  const auto kd = static_cast<double>(k);
  switch (eff.family()) {
    case Family::gaussian: return base_gaussian(eff.alpha(), eff.sigma(), kd);
    case Family::uniform: return base_uniform(eff.alpha(), eff.half_width(), kd);
    case Family::discrete: return base_discrete(eff.alpha(), eff.values(), kd);
  }
  return {};
}

inline BoundBase bound_base_for(const DistributionSpec& weights, std::size_t k) {
  return bound_base_for(weights, k, k);
}

}  // namespace sparsetraj
