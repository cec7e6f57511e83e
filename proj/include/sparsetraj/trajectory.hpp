#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "sparsetraj/network.hpp"
#include "sparsetraj/polyline.hpp"
#include "sparsetraj/rng.hpp"

namespace sparsetraj {

/// Straight line x0 -> x1 cut into `segments` equal pieces.
inline Polyline line_trajectory(const Eigen::VectorXd& x0, const Eigen::VectorXd& x1, std::size_t segments) {
  if (x0.size() != x1.size() || x0.size() == 0) throw std::invalid_argument("line endpoints must share a dimension");
  if (x0 == x1) throw std::invalid_argument("line endpoints must differ");
  if (segments < 1) throw std::invalid_argument("line needs at least one segment");
  const auto n = static_cast<Eigen::Index>(segments);
  Eigen::MatrixXd pts(x0.size(), n + 1);
  for (Eigen::Index i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n);
    pts.col(i) = (1.0 - t) * x0 + t * x1;
  }
  pts.col(0) = x0;
  pts.col(n) = x1;
  return Polyline(std::move(pts));
}

/// Chord x0 -> x1 bent into a semicircle in each of `planes` random planes.
///
/// With L = ||x1 - x0||, unit chord direction c and random orthonormal
/// directions q_1..q_P orthogonal to c, the point at t is
///   m - (L/2) cos(pi t) c + (L/2) sin(pi t) (q_1 + ... + q_P)
/// where m is the chord midpoint. The directions come from a QR
/// factorization of [c, g_1, ..., g_P] with g_i standard normal. planes = 0
/// returns the straight line.
inline Polyline arc_trajectory(const Eigen::VectorXd& x0, const Eigen::VectorXd& x1, std::size_t segments,
                               std::size_t planes, Rng& rng) {
  if (x0.size() < 2) throw std::invalid_argument("arc trajectory needs dimension >= 2");
  if (planes == 0) return line_trajectory(x0, x1, segments);
  if (x0.size() != x1.size()) throw std::invalid_argument("arc endpoints must share a dimension");
  if (x0 == x1) throw std::invalid_argument("arc endpoints must differ");
  if (segments < 1) throw std::invalid_argument("arc needs at least one segment");
  const Eigen::Index dim = x0.size();
  if (static_cast<Eigen::Index>(planes) > dim - 1)
    throw std::invalid_argument("arc planes must be at most dimension - 1");

  const Eigen::VectorXd chord = x1 - x0;
  const double len = chord.norm();
  Eigen::MatrixXd basis(dim, static_cast<Eigen::Index>(planes) + 1);
  basis.col(0) = chord / len;
  for (Eigen::Index j = 1; j < basis.cols(); ++j)
    for (Eigen::Index i = 0; i < dim; ++i) basis(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, basis.cols());
  // Householder Q may flip the first column's sign; align it with the chord.
  const double sign = q.col(0).dot(basis.col(0)) < 0.0 ? -1.0 : 1.0;
  const Eigen::VectorXd c = sign * q.col(0);
  Eigen::VectorXd bend = Eigen::VectorXd::Zero(dim);
  for (Eigen::Index j = 1; j < q.cols(); ++j) bend += q.col(j);

  const Eigen::VectorXd mid = 0.5 * (x0 + x1);
  const auto n = static_cast<Eigen::Index>(segments);
  Eigen::MatrixXd pts(dim, n + 1);
  for (Eigen::Index i = 0; i <= n; ++i) {
    const double th = std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    pts.col(i) = mid - 0.5 * len * std::cos(th) * c + 0.5 * len * std::sin(th) * bend;
  }
  pts.col(0) = x0;
  pts.col(n) = x1;
  return Polyline(std::move(pts));
}

/// Unit-norm standard-normal point; the random endpoints used for
/// synthetic trajectories.
inline Eigen::VectorXd random_unit_point(std::size_t dim, Rng& rng) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
  return v / v.norm();
}

struct LayerGrowth {
  double mean_ratio = 0.0;  // mean of ||dz^(d+1)_i|| / ||dz^(d)_i|| over live segments
  double length = 0.0;      // l(z^(d+1)), post-activation
  double pre_length = 0.0;  // l(h^(d))
  double dead_segment_fraction = 0.0;
  double ratio_sum = 0.0;
  std::size_t live_segments = 0;
};

/// Per-layer growth of a trajectory, measured on post-activation images.
/// Layer 0 is the input.
struct GrowthProfile {
  double input_length = 0.0;
  std::vector<LayerGrowth> layers;

  /// Mean ratio over every live segment of every layer.
  double pooled_growth() const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const LayerGrowth& l : layers) {
      sum += l.ratio_sum;
      n += l.live_segments;
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
  }

  /// l(z^(d)) for d = 0..depth.
  std::vector<double> lengths() const {
    std::vector<double> out{input_length};
    for (const LayerGrowth& l : layers) out.push_back(l.length);
    return out;
  }
};

/// Streaming growth measurement: feed layer images in order.
class GrowthMeter {
 public:
  explicit GrowthMeter(const Polyline& input) : prev_(segment_lengths(input)) {
    profile_.input_length = prev_.sum();
  }

  void observe(const Eigen::MatrixXd& pre, const Eigen::MatrixXd& post) {
    if (post.cols() != prev_.size() + 1 || pre.cols() != post.cols())
      throw std::invalid_argument("layer image point count differs from the input");
    Eigen::VectorXd cur = segment_lengths(post);
    LayerGrowth g;
    g.length = cur.sum();
    g.pre_length = segment_lengths(pre).sum();
    for (Eigen::Index i = 0; i < cur.size(); ++i) {
      if (prev_(i) > 0.0) {
        g.ratio_sum += cur(i) / prev_(i);
        ++g.live_segments;
      }
    }
    const auto segs = static_cast<double>(cur.size());
    g.dead_segment_fraction = 1.0 - static_cast<double>(g.live_segments) / segs;
    g.mean_ratio = g.live_segments == 0 ? 0.0 : g.ratio_sum / static_cast<double>(g.live_segments);
    profile_.layers.push_back(g);
    prev_ = std::move(cur);
  }

  const GrowthProfile& profile() const { return profile_; }

 private:
  Eigen::VectorXd prev_;
  GrowthProfile profile_;
};

/// Growth profile of a recorded trace; `trace` must come from `input`.
inline GrowthProfile growth_profile(const LayerTrace& trace, const Polyline& input) {
  GrowthMeter meter(input);
  for (const LayerImage& img : trace) meter.observe(img.pre_activation.points(), img.post_activation.points());
  return meter.profile();
}

/// Traces `input` through `net` and measures growth without keeping the trace.
inline GrowthProfile measure_growth(const Network& net, const Polyline& input) {
  GrowthMeter meter(input);
  forward_each(net, input, [&](std::size_t, const Eigen::MatrixXd& h, const Eigen::MatrixXd& z) { meter.observe(h, z); });
  return meter.profile();
}

}  // namespace sparsetraj
