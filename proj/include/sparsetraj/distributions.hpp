#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "sparsetraj/rng.hpp"

namespace sparsetraj {

enum class Family { gaussian, uniform, discrete };

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::gaussian: return "gaussian";
    case Family::uniform: return "uniform";
    case Family::discrete: return "discrete";
  }
  return "?";
}

inline Family parse_family(std::string_view name) {
  if (name == "gaussian") return Family::gaussian;
  if (name == "uniform") return Family::uniform;
  if (name == "discrete") return Family::discrete;
  throw std::invalid_argument("unknown distribution family: " + std::string(name));
}

/// A sparse weight or bias law: with probability `alpha` a draw from the
/// family, otherwise exactly zero.
///
/// The family part is one of N(0, sigma^2), U(-c, c), or the uniform law on
/// a finite symmetric value set. Instances are immutable and validated on
/// construction.
class DistributionSpec {
 public:
  static DistributionSpec gaussian(double sigma, double alpha = 1.0, bool scale_by_inv_sqrt_k = false) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("gaussian sigma must be positive");
    return DistributionSpec(Family::gaussian, sigma, {}, alpha, scale_by_inv_sqrt_k);
  }

  static DistributionSpec uniform(double half_width, double alpha = 1.0, bool scale_by_inv_sqrt_k = false) {
    if (!(half_width > 0.0) || !std::isfinite(half_width))
      throw std::invalid_argument("uniform half-width must be positive");
    return DistributionSpec(Family::uniform, half_width, {}, alpha, scale_by_inv_sqrt_k);
  }

  /// Values are sorted and deduplicated; the set must be symmetric about 0.
  static DistributionSpec discrete(std::vector<double> values, double alpha = 1.0,
                                   bool scale_by_inv_sqrt_k = false) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    if (values.empty()) throw std::invalid_argument("discrete value set must be nonempty");
    const std::size_t n = values.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(values[i])) throw std::invalid_argument("discrete values must be finite");
      if (values[i] != -values[n - 1 - i]) throw std::invalid_argument("discrete value set must be symmetric");
    }
    return DistributionSpec(Family::discrete, 1.0, std::move(values), alpha, scale_by_inv_sqrt_k);
  }

  /// The integer set {-c, ..., c}, optionally without 0, times `multiplier`.
  static DistributionSpec integer_range(int c, double multiplier = 1.0, bool include_zero = true,
                                        double alpha = 1.0, bool scale_by_inv_sqrt_k = false) {
    if (c < 1) throw std::invalid_argument("integer range bound must be >= 1");
    if (!(multiplier > 0.0)) throw std::invalid_argument("integer range multiplier must be positive");
    std::vector<double> v;
    for (int i = -c; i <= c; ++i) {
      if (i == 0 && !include_zero) continue;
      v.push_back(multiplier * i);
    }
    return discrete(std::move(v), alpha, scale_by_inv_sqrt_k);
  }

  Family family() const { return family_; }
  double alpha() const { return alpha_; }
  bool scale_by_inv_sqrt_k() const { return scale_by_inv_sqrt_k_; }

  /// sigma for gaussian, half-width c for uniform, largest value for discrete.
  double scale_param() const {
    return family_ == Family::discrete ? values_.back() : param_;
  }
  double sigma() const { return param_; }
  double half_width() const { return param_; }
  std::span<const double> values() const { return values_; }

  DistributionSpec with_alpha(double alpha) const {
    DistributionSpec out = *this;
    out.alpha_ = alpha;
    out.validate_alpha();
    return out;
  }

  DistributionSpec dense() const { return with_alpha(1.0); }

  DistributionSpec with_scaling(bool scale_by_inv_sqrt_k) const {
    DistributionSpec out = *this;
    out.scale_by_inv_sqrt_k_ = scale_by_inv_sqrt_k;
    return out;
  }

  /// Multiplies the family's scale (sigma, c, or every value) by `factor`.
  DistributionSpec scaled(double factor) const {
    if (!(factor > 0.0)) throw std::invalid_argument("scale factor must be positive");
    DistributionSpec out = *this;
    if (family_ == Family::discrete) {
      for (double& v : out.values_) v *= factor;
    } else {
      out.param_ *= factor;
    }
    return out;
  }

  /// The spec actually sampled for a fan-in of `fan_in`: scale divided by
  /// sqrt(fan_in) when the flag is set, unchanged otherwise.
  DistributionSpec effective(std::size_t fan_in) const {
    if (!scale_by_inv_sqrt_k_) return *this;
    return scaled(1.0 / std::sqrt(static_cast<double>(fan_in))).with_scaling(false);
  }

  friend bool operator==(const DistributionSpec&, const DistributionSpec&) = default;

 private:
  DistributionSpec(Family f, double param, std::vector<double> values, double alpha, bool scaled)
      : family_(f), param_(param), values_(std::move(values)), alpha_(alpha), scale_by_inv_sqrt_k_(scaled) {
    validate_alpha();
  }

  void validate_alpha() const {
    if (!(alpha_ >= 0.0 && alpha_ <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  }

  Family family_;
  double param_;
  std::vector<double> values_;
  double alpha_;
  bool scale_by_inv_sqrt_k_;
};

namespace detail {

inline double sample_family(const DistributionSpec& spec, Rng& rng) {
  switch (spec.family()) {
    case Family::gaussian: return spec.sigma() * rng.normal();
    case Family::uniform: return spec.half_width() * (2.0 * rng.uniform01() - 1.0);
    case Family::discrete: {
      const auto v = spec.values();
      auto idx = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(v.size()));
      return v[std::min(idx, v.size() - 1)];
    }
  }
  return 0.0;
}

}  // namespace detail

/// One draw from the sparse mixture. The 1/sqrt(k) flag is ignored here;
/// sample_matrix resolves it from the fan-in.
inline double sample_scalar(const DistributionSpec& spec, Rng& rng) {
  const double a = spec.alpha();
  if (a <= 0.0) return 0.0;
  if (a < 1.0 && rng.uniform01() >= a) return 0.0;
  return detail::sample_family(spec, rng);
}

/// rows x cols matrix of iid draws, filled row by row.
inline Eigen::MatrixXd sample_matrix(const DistributionSpec& spec, std::size_t rows, std::size_t cols, Rng& rng) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("sample_matrix: rows and cols must be >= 1");
  const DistributionSpec eff = spec.effective(cols);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = sample_scalar(eff, rng);
  return m;
}

inline Eigen::VectorXd sample_vector(const DistributionSpec& spec, std::size_t n, Rng& rng) {
  return sample_matrix(spec, n, 1, rng).col(0);
}

/// Standard deviation of the family part alone (alpha ignored).
inline double family_std_dev(const DistributionSpec& spec) {
  switch (spec.family()) {
    case Family::gaussian: return spec.sigma();
    case Family::uniform: return spec.half_width() / std::sqrt(3.0);
    case Family::discrete: {
      double s = 0.0;
      for (double v : spec.values()) s += v * v;
      return std::sqrt(s / static_cast<double>(spec.values().size()));
    }
  }
  return 0.0;
}

/// Standard deviation of the sparse mixture, sqrt(alpha) * family std.
inline double std_dev(const DistributionSpec& spec) { return std::sqrt(spec.alpha()) * family_std_dev(spec); }

/// Constant M with E|u^T w| >= M ||u|| for w iid from the dense family.
///
/// Gaussian uses the exact value sqrt(2/pi) sigma. Uniform and discrete use
/// the p = 1 Marcinkiewicz-Zygmund route: A_1 * E|w_i| = E|w_i| / sqrt(2).
/// Always evaluated on the unscaled family parameter.
inline double m_constant(const DistributionSpec& spec) {
  switch (spec.family()) {
    case Family::gaussian: return std::sqrt(2.0) * spec.sigma() / std::sqrt(std::numbers::pi);
    case Family::uniform: return spec.half_width() / (2.0 * std::numbers::sqrt2);
    case Family::discrete: {
      double s = 0.0;
      for (double v : spec.values()) s += std::abs(v);
      return s / (std::numbers::sqrt2 * static_cast<double>(spec.values().size()));
    }
  }
  return 0.0;
}

/// Root of Gamma((p+1)/2) = sqrt(pi)/2 in (1, 2), p0 ~ 1.8474.
///
/// The equation has a second root at p = 2 exactly. Bisection keeps the
/// bracket's left end where the residual is positive, and the first
/// midpoints (1.5, 1.75, 1.875) steer it to the interior root.
inline double mz_p0() {
  static const double root = [] {
    const double target = std::sqrt(std::numbers::pi) / 2.0;
    double lo = 1.0, hi = 2.0;
    while (hi - lo > 1e-12) {
      const double mid = 0.5 * (lo + hi);
      if (std::tgamma(0.5 * (mid + 1.0)) - target > 0.0) lo = mid;
      else hi = mid;
    }
    return 0.5 * (lo + hi);
  }();
  return root;
}

namespace detail {
inline double mz_gamma_branch(double p) {
  return std::pow(2.0, p / 2.0) * std::tgamma(0.5 * (p + 1.0)) / std::sqrt(std::numbers::pi);
}
inline void check_mz_p(double p) {
  if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument("Marcinkiewicz-Zygmund p must be positive");
}
}  // namespace detail

/// Optimal lower Marcinkiewicz-Zygmund constant A_p.
inline double mz_constant_A(double p) {
  detail::check_mz_p(p);
  if (p <= mz_p0()) return std::pow(2.0, p / 2.0 - 1.0);
  if (p < 2.0) return detail::mz_gamma_branch(p);
  return 1.0;
}

/// Optimal upper Marcinkiewicz-Zygmund constant B_p.
inline double mz_constant_B(double p) {
  detail::check_mz_p(p);
  if (p <= 2.0) return 1.0;
  return detail::mz_gamma_branch(p);
}

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  bool exact = false;
};

namespace detail {

/// Calls f(values, weight) for every outcome of `dim` iid uniform draws
/// from `support`, where weight is the outcome's probability.
template <class F>
void enumerate_outcomes(std::span<const double> support, std::size_t dim, F&& f) {
  const std::size_t n = support.size();
  std::vector<std::size_t> digit(dim, 0);
  Eigen::VectorXd w(static_cast<Eigen::Index>(dim));
  const double p = std::pow(static_cast<double>(n), -static_cast<double>(dim));
  for (;;) {
    for (std::size_t i = 0; i < dim; ++i) w(static_cast<Eigen::Index>(i)) = support[digit[i]];
    f(w, p);
    std::size_t i = 0;
    while (i < dim && ++digit[i] == n) digit[i++] = 0;
    if (i == dim) break;
  }
}

inline bool enumerable(std::size_t support, std::size_t dim, double limit = 1e6) {
  return std::pow(static_cast<double>(support), static_cast<double>(dim)) <= limit;
}

}  // namespace detail

/// Estimate of E|u^T w| for w iid from the dense family part of `spec`.
///
/// Discrete families with at most 1e6 joint outcomes are enumerated exactly
/// (stderr 0); everything else is Monte Carlo over `trials` draws.
inline Estimate abs_dot_expectation_oracle(const DistributionSpec& spec, const Eigen::VectorXd& u, std::size_t trials,
                                           Rng& rng) {
  if (u.size() == 0 || u.squaredNorm() == 0.0) throw std::invalid_argument("direction u must be nonzero");
  const DistributionSpec dense = spec.dense();
  const auto dim = static_cast<std::size_t>(u.size());
  if (dense.family() == Family::discrete && detail::enumerable(dense.values().size(), dim)) {
    double acc = 0.0;
    detail::enumerate_outcomes(dense.values(), dim, [&](const Eigen::VectorXd& w, double p) {
      acc += p * std::abs(u.dot(w));
    });
    return {acc, 0.0, true};
  }
  if (trials < 1000) throw std::invalid_argument("Monte Carlo oracle needs at least 1000 trials");
  double sum = 0.0, sum_sq = 0.0;
  Eigen::VectorXd w(u.size());
  for (std::size_t t = 0; t < trials; ++t) {
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = detail::sample_family(dense, rng);
    const double x = std::abs(u.dot(w));
    sum += x;
    sum_sq += x * x;
  }
  const double n = static_cast<double>(trials);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n), false};
}

}  // namespace sparsetraj
