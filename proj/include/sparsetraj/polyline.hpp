#pragma once

#include <cstddef>
#include <stdexcept>

#include <Eigen/Dense>

namespace sparsetraj {

/// Ordered points x(t_0), ..., x(t_n) of a discretized trajectory, stored
/// as the columns of a dim x (n+1) matrix. Parameter values are implicit and
/// uniform on [0, 1].
class Polyline {
 public:
  explicit Polyline(Eigen::MatrixXd points) : points_(std::move(points)) {
    if (points_.cols() < 2) throw std::invalid_argument("polyline needs at least two points");
    if (points_.rows() < 1) throw std::invalid_argument("polyline points need dimension >= 1");
  }

  std::size_t dim() const { return static_cast<std::size_t>(points_.rows()); }
  std::size_t point_count() const { return static_cast<std::size_t>(points_.cols()); }
  std::size_t segment_count() const { return point_count() - 1; }

  auto point(std::size_t i) const { return points_.col(static_cast<Eigen::Index>(i)); }
  const Eigen::MatrixXd& points() const { return points_; }

 private:
  Eigen::MatrixXd points_;
};

/// Euclidean length of every segment, ||p_{i+1} - p_i||.
inline Eigen::VectorXd segment_lengths(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.cols() - 1;
  Eigen::VectorXd out(n < 0 ? 0 : n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = (points.col(i + 1) - points.col(i)).norm();
  return out;
}

inline Eigen::VectorXd segment_lengths(const Polyline& p) { return segment_lengths(p.points()); }

inline double arc_length(const Polyline& p) { return segment_lengths(p).sum(); }

}  // namespace sparsetraj
