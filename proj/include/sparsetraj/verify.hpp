#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sparsetraj/distributions.hpp"
#include "sparsetraj/network.hpp"
#include "sparsetraj/rng.hpp"

namespace sparsetraj {

/// Outcome of one empirical or exact check of a supporting inequality.
struct LemmaReport {
  std::string lemma;
  std::string description;
  std::vector<std::pair<std::string, double>> estimates;
  std::vector<std::pair<std::string, double>> references;
  double std_error = 0.0;
  bool exact = false;
  std::string rule;
  double tolerance = 0.0;
  bool pass = false;
};

inline void to_json(nlohmann::json& j, const LemmaReport& r) {
  nlohmann::json est = nlohmann::json::object(), ref = nlohmann::json::object();
  for (const auto& [k, v] : r.estimates) est[k] = v;
  for (const auto& [k, v] : r.references) ref[k] = v;
  j = nlohmann::json{{"lemma", r.lemma}, {"description", r.description}, {"estimates", est},
                     {"references", ref},  {"stderr", r.std_error},       {"exact", r.exact},
                     {"rule", r.rule},     {"tolerance", r.tolerance},    {"pass", r.pass}};
}

/// Running mean with its standard error.
class RunningMean {
 public:
  void add(double x) {
    ++n_;
    sum_ += x;
    sum_sq_ += x * x;
  }
  std::size_t count() const { return n_; }
  double mean() const { return n_ == 0 ? 0.0 : sum_ / static_cast<double>(n_); }
  double std_error() const {
    if (n_ < 2) return 0.0;
    const double n = static_cast<double>(n_);
    const double var = std::max(0.0, (sum_sq_ - n * mean() * mean()) / (n - 1.0));
    return std::sqrt(var / n);
  }

 private:
  std::size_t n_ = 0;
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
};

/// Compares E[|X| | Y > 0] with E[|X|] for X = w^T dz, Y = w^T z + b, w
/// drawn from the dense weight family and b from the bias law.
///
/// Fully discrete cases with at most 1e6 joint outcomes are enumerated
/// exactly (pass iff the two agree to 1e-12); everything else is Monte
/// Carlo with pass iff |difference| <= 3 * sqrt(se_cond^2 + se_uncond^2).
/// Throws std::invalid_argument when z and dz are parallel and
/// std::domain_error when the enumeration hits Y = 0.
inline LemmaReport check_conditional_symmetry(const DistributionSpec& weight_spec, const DistributionSpec& bias_spec,
                                              const Eigen::VectorXd& z, const Eigen::VectorXd& dz, std::size_t trials,
                                              Rng& rng) {
  if (z.size() != dz.size() || z.size() == 0) throw std::invalid_argument("z and dz must share a nonzero dimension");
  const double zn = z.norm(), dn = dz.norm();
  if (zn == 0.0 || dn == 0.0 || std::abs(z.dot(dz)) >= (1.0 - 1e-12) * zn * dn)
    throw std::invalid_argument("z and dz must not be parallel");
  const DistributionSpec w_spec = weight_spec.dense();
  const DistributionSpec b_spec = bias_spec.dense();
  const auto dim = static_cast<std::size_t>(z.size());

  LemmaReport r;
  r.lemma = "conditional_symmetry";
  r.description = std::string("E[|X| | Y>0] = E[|X|], weights ") + std::string(to_string(w_spec.family())) +
                  ", biases " + std::string(to_string(b_spec.family()));

  const bool discrete = w_spec.family() == Family::discrete && b_spec.family() == Family::discrete;
  const double outcomes = std::pow(static_cast<double>(w_spec.values().size()), static_cast<double>(dim)) *
                          static_cast<double>(discrete ? b_spec.values().size() : 1);
  if (discrete && outcomes <= 1e6) {
    double max_w = 0.0, max_b = 0.0;
    for (double v : w_spec.values()) max_w = std::max(max_w, std::abs(v));
    for (double v : b_spec.values()) max_b = std::max(max_b, std::abs(v));
    const double zero_tol = 1e-12 * (z.lpNorm<1>() * max_w + max_b);
    const double pb = 1.0 / static_cast<double>(b_spec.values().size());
    long double uncond = 0.0L, joint = 0.0L, p_pos = 0.0L;
    detail::enumerate_outcomes(w_spec.values(), dim, [&](const Eigen::VectorXd& w, double pw) {
      const double ax = std::abs(w.dot(dz));
      const double wz = w.dot(z);
      for (double b : b_spec.values()) {
        const double y = wz + b;
        if (std::abs(y) <= zero_tol) throw std::domain_error("Y = 0 has positive probability for this z");
        const long double p = static_cast<long double>(pw) * pb;
        uncond += p * ax;
        if (y > 0.0) {
          joint += p * ax;
          p_pos += p;
        }
      }
    });
    const double cond = static_cast<double>(joint / p_pos);
    r.estimates = {{"E|X| given Y>0", cond}, {"P(Y>0)", static_cast<double>(p_pos)}};
    r.references = {{"E|X|", static_cast<double>(uncond)}};
    r.exact = true;
    r.rule = "|difference| <= tolerance";
    r.tolerance = 1e-12;
    r.pass = std::abs(cond - static_cast<double>(uncond)) <= r.tolerance;
    return r;
  }

  if (trials < 10000) throw std::invalid_argument("conditional symmetry Monte Carlo needs at least 1e4 trials");
  RunningMean all, pos;
  Eigen::VectorXd w(z.size());
  for (std::size_t t = 0; t < trials; ++t) {
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = detail::sample_family(w_spec, rng);
    const double b = detail::sample_family(b_spec, rng);
    const double ax = std::abs(w.dot(dz));
    all.add(ax);
    if (w.dot(z) + b > 0.0) pos.add(ax);
  }
  const double se = std::hypot(all.std_error(), pos.std_error());
  r.estimates = {{"E|X| given Y>0", pos.mean()}, {"P(Y>0)", static_cast<double>(pos.count()) / trials}};
  r.references = {{"E|X|", all.mean()}};
  r.std_error = se;
  r.rule = "|difference| <= 3 * combined stderr";
  r.tolerance = 3.0 * se;
  r.pass = std::abs(pos.mean() - all.mean()) <= r.tolerance;
  return r;
}

/// How subvector_norm_expectation averages over index sets.
struct SubvectorMethod {
  enum class Kind { enumerate, montecarlo } kind = Kind::enumerate;
  std::size_t trials = 0;

  static SubvectorMethod enumerate() { return {}; }
  static SubvectorMethod montecarlo(std::size_t trials) { return {Kind::montecarlo, trials}; }
};

inline constexpr std::size_t kMaxEnumerateDim = 20;

/// E_J ||u_J|| where each index joins J independently with probability
/// alpha. Enumeration sums all 2^dim subsets in extended precision.
inline Estimate subvector_norm_expectation(const Eigen::VectorXd& u, double alpha, SubvectorMethod method, Rng& rng) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (method.kind == SubvectorMethod::Kind::enumerate) {
    // Zero entries never change ||u_J||, so only the support is enumerated.
    std::vector<double> support;
    for (Eigen::Index i = 0; i < u.size(); ++i)
      if (u(i) != 0.0) support.push_back(u(i));
    if (support.size() > kMaxEnumerateDim)
      throw std::invalid_argument("enumeration limited to at most 20 nonzero entries");
    const std::size_t dim = support.size();
    std::vector<long double> pw_in(dim + 1), pw_out(dim + 1);
    pw_in[0] = pw_out[0] = 1.0L;
    for (std::size_t i = 1; i <= dim; ++i) {
      pw_in[i] = pw_in[i - 1] * alpha;
      pw_out[i] = pw_out[i - 1] * (1.0L - alpha);
    }
    long double acc = 0.0L;
    const std::uint64_t subsets = std::uint64_t{1} << dim;
    for (std::uint64_t mask = 0; mask < subsets; ++mask) {
      long double sq = 0.0L;
      std::size_t count = 0;
      for (std::size_t i = 0; i < dim; ++i) {
        if (mask >> i & 1U) {
          const long double x = support[i];
          sq += x * x;
          ++count;
        }
      }
      acc += pw_in[count] * pw_out[dim - count] * std::sqrt(sq);
    }
    return {static_cast<double>(acc), 0.0, true};
  }
  if (method.trials < 2) throw std::invalid_argument("Monte Carlo needs at least 2 trials");
  RunningMean m;
  for (std::size_t t = 0; t < method.trials; ++t) {
    double sq = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i)
      if (rng.uniform01() < alpha) sq += u(i) * u(i);
    m.add(std::sqrt(sq));
  }
  return {m.mean(), m.std_error(), false};
}

/// Checks E|u^T w| >= M ||u|| for each direction: Monte Carlo passes when
/// estimate + 3 stderr >= bound, enumeration when estimate >= bound up to
/// 1e-12 relative rounding.
inline LemmaReport check_m_bound(const DistributionSpec& spec, const std::vector<Eigen::VectorXd>& directions,
                                 std::size_t trials, Rng& rng) {
  if (directions.empty()) throw std::invalid_argument("check_m_bound needs at least one direction");
  const double m = m_constant(spec);
  LemmaReport r;
  r.lemma = "m_bound";
  r.description = std::string("E|u^T w| >= M ||u|| for ") + std::string(to_string(spec.family())) + " over " +
                  std::to_string(directions.size()) + " directions";
  r.exact = true;
  r.pass = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_est = 0.0, worst_bound = 0.0, worst_se = 0.0;
  for (const Eigen::VectorXd& u : directions) {
    const Estimate e = abs_dot_expectation_oracle(spec, u, trials, rng);
    const double bound = m * u.norm();
    const double slack = e.exact ? 1e-12 * bound : 3.0 * e.std_error;
    const double margin = e.mean + slack - bound;
    if (!e.exact) r.exact = false;
    if (margin < 0.0) r.pass = false;
    if (margin < worst_margin) {
      worst_margin = margin;
      worst_est = e.mean;
      worst_bound = bound;
      worst_se = e.std_error;
    }
  }
  r.estimates = {{"estimate at tightest direction", worst_est}, {"margin", worst_margin}};
  r.references = {{"M ||u||", worst_bound}, {"M", m}};
  r.std_error = worst_se;
  r.rule = r.exact ? "estimate >= bound (1e-12 relative)" : "estimate + 3 stderr >= bound";
  r.tolerance = r.exact ? 1e-12 : 3.0 * worst_se;
  return r;
}

/// Same check over `n_dirs` standard-normal directions in `dims` dimensions.
inline LemmaReport check_m_bound(const DistributionSpec& spec, std::size_t dims, std::size_t n_dirs, std::size_t trials,
                                 Rng& rng) {
  std::vector<Eigen::VectorXd> dirs;
  for (std::size_t i = 0; i < n_dirs; ++i) {
    Eigen::VectorXd u(static_cast<Eigen::Index>(dims));
    for (Eigen::Index j = 0; j < u.size(); ++j) u(j) = rng.normal();
    dirs.push_back(std::move(u));
  }
  return check_m_bound(spec, dirs, trials, rng);
}

/// p = 1 lower Marcinkiewicz-Zygmund inequality for X_i = u_i w_i:
/// A_1 E[sqrt(sum X_i^2)] <= E|sum X_i|, checked on paired differences.
inline LemmaReport check_mz_lower(const DistributionSpec& spec, const Eigen::VectorXd& u, std::size_t trials, Rng& rng) {
  const DistributionSpec dense = spec.dense();
  const double a1 = mz_constant_A(1.0);
  RunningMean diff, lhs, rhs;
  Eigen::VectorXd w(u.size());
  for (std::size_t t = 0; t < trials; ++t) {
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = detail::sample_family(dense, rng);
    const Eigen::VectorXd x = u.cwiseProduct(w);
    const double l = a1 * x.norm(), rr = std::abs(x.sum());
    lhs.add(l);
    rhs.add(rr);
    diff.add(rr - l);
  }
  LemmaReport r;
  r.lemma = "mz_lower_p1";
  r.description = std::string("A_1 E sqrt(sum X^2) <= E|sum X| for ") + std::string(to_string(spec.family()));
  r.estimates = {{"E|sum X|", rhs.mean()}};
  r.references = {{"A_1 E sqrt(sum X^2)", lhs.mean()}};
  r.std_error = diff.std_error();
  r.rule = "mean difference + 3 stderr >= 0";
  r.tolerance = 3.0 * r.std_error;
  r.pass = diff.mean() + r.tolerance >= 0.0;
  return r;
}

/// Per-layer active counts |{j : h_j > 0}| at a fixed input point,
/// averaged over freshly drawn networks and compared with k/2 (4 stderr).
inline LemmaReport check_active_count(const NetworkConfig& config, std::size_t replicates, Rng& rng,
                                      const Eigen::VectorXd* input = nullptr) {
  config.validate();
  if (replicates < 2) throw std::invalid_argument("check_active_count needs at least 2 replicates");
  Eigen::VectorXd x = input != nullptr ? *input
                                       : Eigen::VectorXd::Constant(static_cast<Eigen::Index>(config.input_dim),
                                                                   1.0 / std::sqrt(static_cast<double>(config.input_dim)));
  if (static_cast<std::size_t>(x.size()) != config.input_dim)
    throw std::invalid_argument("input point dimension must equal input_dim");
  std::vector<RunningMean> per_layer(config.depth);
  Eigen::MatrixXd pts(x.size(), 2);
  pts.col(0) = x;
  pts.col(1) = x;
  pts(0, 1) += 1.0;  // second point only to satisfy the polyline shape
  const Polyline probe(pts);
  for (std::size_t rep = 0; rep < replicates; ++rep) {
    const Network net = build_network(config, rng);
    forward_each(net, probe, [&](std::size_t d, const Eigen::MatrixXd& h, const Eigen::MatrixXd&) {
      per_layer[d].add(static_cast<double>(active_set(h.col(0)).size()));
    });
  }
  const double half = static_cast<double>(config.width) / 2.0;
  LemmaReport r;
  r.lemma = "active_count";
  r.description = "E|A| = k/2 at every layer, k = " + std::to_string(config.width) + ", " +
                  std::string(to_string(config.weights.family())) + " weights, alpha = " +
                  std::to_string(config.weights.alpha());
  r.rule = "|mean - k/2| <= 4 stderr at every layer";
  r.pass = true;
  double worst_z = 0.0;
  for (std::size_t d = 0; d < per_layer.size(); ++d) {
    const double m = per_layer[d].mean(), se = per_layer[d].std_error();
    r.estimates.emplace_back("layer " + std::to_string(d + 1), m);
    const double dev = std::abs(m - half);
    if (se == 0.0 ? dev > 0.0 : dev > 4.0 * se) r.pass = false;
    if (se > 0.0) worst_z = std::max(worst_z, dev / se);
    r.std_error = std::max(r.std_error, se);
  }
  r.references = {{"k/2", half}, {"worst |z|", worst_z}};
  r.tolerance = 4.0 * r.std_error;
  return r;
}

/// Lower and upper sandwich alpha ||u|| <= E||u_J|| <= sqrt(alpha) ||u||
/// for one u, by exact enumeration.
inline LemmaReport check_subvector_sandwich(const Eigen::VectorXd& u, double alpha) {
  Rng unused(0, 0);
  const Estimate e = subvector_norm_expectation(u, alpha, SubvectorMethod::enumerate(), unused);
  const double n = u.norm();
  const double lo = alpha * n, hi = std::sqrt(alpha) * n;
  const double tol = 1e-12 * std::max(n, 1e-300);
  LemmaReport r;
  r.lemma = "subvector_sandwich";
  r.description = "alpha ||u|| <= E||u_J|| <= sqrt(alpha) ||u||, dim " + std::to_string(u.size()) +
                  ", alpha = " + std::to_string(alpha);
  r.estimates = {{"E||u_J||", e.mean}};
  r.references = {{"alpha ||u||", lo}, {"sqrt(alpha) ||u||", hi}};
  r.exact = true;
  r.rule = "lower - tol <= value <= upper + tol";
  r.tolerance = tol;
  r.pass = e.mean >= lo - tol && e.mean <= hi + tol;
  return r;
}

/// The full battery behind `sparsetraj verify`.
inline std::vector<LemmaReport> run_verification_suite(std::uint64_t seed) {
  std::vector<LemmaReport> out;
  const std::vector<DistributionSpec> weights = {DistributionSpec::gaussian(1.0), DistributionSpec::uniform(1.0),
                                                 DistributionSpec::integer_range(2)};
  const std::vector<DistributionSpec> biases = {DistributionSpec::gaussian(0.01), DistributionSpec::uniform(0.01),
                                                DistributionSpec::discrete({-0.01, 0.01})};
  std::uint64_t stream = 0;
  for (std::size_t f = 0; f < weights.size(); ++f) {
    Rng rng(seed, stream++);
    out.push_back(check_m_bound(weights[f], 8, 50, 20000, rng));
    Eigen::VectorXd u = Eigen::VectorXd::Zero(8);
    for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = rng.normal();
    out.push_back(check_mz_lower(weights[f], u, 100000, rng));
    for (int pair = 0; pair < 5; ++pair) {
      const std::size_t dim = weights[f].family() == Family::discrete ? 4 : 6;
      Eigen::VectorXd z(static_cast<Eigen::Index>(dim)), dz(static_cast<Eigen::Index>(dim));
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        z(i) = rng.normal();
        dz(i) = rng.normal();
      }
      out.push_back(check_conditional_symmetry(weights[f], biases[f], z, dz, 100000, rng));
    }
    NetworkConfig cfg;
    cfg.width = 100;
    cfg.depth = 5;
    cfg.input_dim = 100;
    cfg.weights = weights[f].with_scaling(true);
    cfg.biases = biases[f];
    out.push_back(check_active_count(cfg, 2000, rng));
  }
  Rng rng(seed, stream++);
  for (double alpha : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    Eigen::VectorXd u(10);
    for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = rng.normal();
    out.push_back(check_subvector_sandwich(u, alpha));
    out.push_back(check_subvector_sandwich(Eigen::VectorXd::Unit(10, 0), alpha));
  }
  return out;
}

}  // namespace sparsetraj
