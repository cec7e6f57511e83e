#include <cmath>
#include <filesystem>
#include <vector>

#include <gtest/gtest.h>

#include "sparsetraj/network.hpp"
#include "sparsetraj/trajectory.hpp"

using namespace sparsetraj;

namespace {

NetworkConfig make_config(std::size_t k, std::size_t d, DistributionSpec w,
                          DistributionSpec b = DistributionSpec::gaussian(0.01)) {
  NetworkConfig c;
  c.width = k;
  c.depth = d;
  c.input_dim = k;
  c.weights = std::move(w);
  c.biases = std::move(b);
  return c;
}

Network fixed_network(Eigen::MatrixXd w, Eigen::VectorXd b) {
  NetworkConfig c = make_config(static_cast<std::size_t>(w.rows()), 1, DistributionSpec::gaussian(1.0));
  c.input_dim = static_cast<std::size_t>(w.cols());
  return Network(c, {Layer{std::move(w), std::move(b)}}, 0, 0);
}

Polyline two_points(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::MatrixXd p(a.size(), 2);
  p << a, b;
  return Polyline(p);
}

}  // namespace

TEST(NetworkConfig, Validation) {
  auto c = make_config(4, 2, DistributionSpec::gaussian(1.0));
  EXPECT_NO_THROW(c.validate());
  c.biases = DistributionSpec::gaussian(0.01, 0.5);
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = make_config(0, 2, DistributionSpec::gaussian(1.0));
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = make_config(2, 0, DistributionSpec::gaussian(1.0));
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Network, RejectsBadShapes) {
  auto c = make_config(3, 2, DistributionSpec::gaussian(1.0));
  std::vector<Layer> layers = {Layer{Eigen::MatrixXd::Zero(3, 3), Eigen::VectorXd::Zero(3)}};
  EXPECT_THROW(Network(c, layers, 0, 0), std::invalid_argument);
  layers.push_back(Layer{Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(3)});
  EXPECT_THROW(Network(c, layers, 0, 0), std::invalid_argument);
}

TEST(BuildNetwork, ShapesChainFromInputDim) {
  auto c = make_config(5, 3, DistributionSpec::gaussian(1.0));
  c.input_dim = 7;
  Rng rng(1, 0);
  const Network net = build_network(c, rng);
  ASSERT_EQ(net.depth(), 3u);
  EXPECT_EQ(net.layers()[0].weights.rows(), 5);
  EXPECT_EQ(net.layers()[0].weights.cols(), 7);
  EXPECT_EQ(net.layers()[2].weights.cols(), 5);
  EXPECT_EQ(net.seed(), 1u);
}

TEST(BuildNetwork, AlphaZeroGivesZeroWeights) {
  Rng rng(2, 0);
  const Network net = build_network(make_config(16, 4, DistributionSpec::uniform(1.0, 0.0)), rng);
  for (const Layer& l : net.layers()) EXPECT_TRUE(l.weights.isZero(0.0));
  EXPECT_EQ(sparsity_fraction(net), 1.0);
}

TEST(BuildNetwork, RealizedSparsityWidth784) {
  Rng rng(3, 0);
  const Network net = build_network(make_config(784, 12, DistributionSpec::gaussian(2.0, 0.5, true)), rng);
  EXPECT_NEAR(sparsity_fraction(net), 0.5, 0.003);
}

TEST(BuildNetwork, RealizedSparsityAlpha07) {
  Rng rng(4, 0);
  const Network net = build_network(make_config(784, 6, DistributionSpec::gaussian(1.0, 0.7)), rng);
  EXPECT_NEAR(sparsity_fraction(net), 0.3, 0.004);
  Rng rng2(4, 1);
  const Network dense = build_network(make_config(64, 2, DistributionSpec::gaussian(1.0)), rng2);
  EXPECT_EQ(sparsity_fraction(dense), 0.0);
}

TEST(BuildNetwork, DeterministicGivenSeedAndStream) {
  const auto c = make_config(32, 3, DistributionSpec::integer_range(2, 1.0, true, 0.6, true));
  Rng a(5, 9), b(5, 9), other(5, 10);
  const Network n1 = build_network(c, a), n2 = build_network(c, b), n3 = build_network(c, other);
  for (std::size_t d = 0; d < 3; ++d) {
    EXPECT_EQ(n1.layers()[d].weights, n2.layers()[d].weights);
    EXPECT_EQ(n1.layers()[d].biases, n2.layers()[d].biases);
  }
  EXPECT_NE(n1.layers()[0].weights, n3.layers()[0].weights);
}

TEST(ForwardTrace, IdentityLayer) {
  const Network net = fixed_network(Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero());
  const auto trace = forward_trace(net, two_points(Eigen::Vector2d(1, -1), Eigen::Vector2d(2, 3)));
  ASSERT_EQ(trace.size(), 1u);
  EXPECT_EQ(trace[0].pre_activation.point(0), Eigen::Vector2d(1, -1));
  EXPECT_EQ(trace[0].post_activation.point(0), Eigen::Vector2d(1, 0));
}

TEST(ForwardTrace, ZeroWeightsGiveConstantReluOfBias) {
  auto c = make_config(6, 3, DistributionSpec::gaussian(1.0, 0.0), DistributionSpec::gaussian(0.5));
  Rng rng(6, 0);
  const Network net = build_network(c, rng);
  const Polyline line = line_trajectory(Eigen::VectorXd::Zero(6), Eigen::VectorXd::Ones(6), 10);
  const auto trace = forward_trace(net, line);
  for (std::size_t d = 0; d < trace.size(); ++d) {
    const Eigen::VectorXd expected = net.layers()[d].biases.cwiseMax(0.0);
    for (std::size_t i = 0; i < line.point_count(); ++i)
      EXPECT_EQ(Eigen::VectorXd(trace[d].post_activation.point(i)), expected);
  }
}

TEST(ForwardTrace, DimensionMismatchThrows) {
  Rng rng(7, 0);
  const Network net = build_network(make_config(4, 2, DistributionSpec::gaussian(1.0)), rng);
  EXPECT_THROW(forward_trace(net, two_points(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(0, 0, 1))),
               std::invalid_argument);
}

TEST(ForwardTrace, ShapesAndReluRelation) {
  auto c = make_config(8, 4, DistributionSpec::gaussian(1.0, 0.5, true));
  c.input_dim = 3;
  Rng rng(8, 0);
  const Network net = build_network(c, rng);
  const Polyline line = line_trajectory(Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, -2, 3), 25);
  const auto trace = forward_trace(net, line);
  ASSERT_EQ(trace.size(), 4u);
  for (const LayerImage& img : trace) {
    EXPECT_EQ(img.pre_activation.point_count(), line.point_count());
    EXPECT_EQ(img.post_activation.dim(), 8u);
    EXPECT_EQ(img.post_activation.points(), img.pre_activation.points().cwiseMax(0.0));
  }
}

// Positive homogeneity: zero bias, weights times c => layer-d output times c^d.
TEST(ForwardTrace, PositiveHomogeneity) {
  auto c = make_config(20, 5, DistributionSpec::gaussian(1.0, 0.8, true), DistributionSpec::gaussian(1.0));
  Rng rng(9, 0);
  Network net = build_network(c, rng);
  std::vector<Layer> layers = net.layers();
  for (Layer& l : layers) l.biases.setZero();
  net = Network(net.config(), std::move(layers), 0, 0);
  const Polyline line = line_trajectory(Eigen::VectorXd::Constant(20, -1.0), Eigen::VectorXd::Ones(20), 50);
  const auto base = forward_trace(net, line);
  for (double s : {0.5, 2.0, 3.0}) {
    const auto scaled = forward_trace(scale_weights(net, s), line);
    for (std::size_t d = 0; d < base.size(); ++d) {
      const double f = std::pow(s, double(d + 1));
      for (std::size_t i = 0; i < line.point_count(); ++i) {
        const double a = base[d].post_activation.point(i).norm(), b = scaled[d].post_activation.point(i).norm();
        EXPECT_NEAR(b, f * a, 1e-9 * f * a + 1e-300);
      }
    }
  }
}

TEST(ActiveSet, Examples) {
  EXPECT_EQ(active_set(Eigen::Vector3d(1, -1, 0.5)), (std::vector<std::size_t>{0, 2}));
  EXPECT_TRUE(active_set(Eigen::Vector3d(-1, -2, -0.1)).empty());
  EXPECT_TRUE(active_set(Eigen::Vector2d(0, 0)).empty());
}

TEST(ActiveSet, ExpectedSizeIsHalfWidth) {
  const std::size_t k = 40;
  auto c = make_config(k, 3, DistributionSpec::gaussian(1.0, 1.0, true));
  const Eigen::VectorXd x = Eigen::VectorXd::Ones(k) / std::sqrt(double(k));
  const Polyline probe = two_points(x, x * 2.0);
  std::vector<double> sums(3, 0.0), sq(3, 0.0);
  constexpr int reps = 10000;
  for (int r = 0; r < reps; ++r) {
    Rng rng(10, r);
    const Network net = build_network(c, rng);
    forward_each(net, probe, [&](std::size_t d, const Eigen::MatrixXd& h, const Eigen::MatrixXd&) {
      const double n = double(active_set(h.col(0)).size());
      sums[d] += n;
      sq[d] += n * n;
    });
  }
  for (std::size_t d = 0; d < 3; ++d) {
    const double mean = sums[d] / reps;
    const double se = std::sqrt((sq[d] / reps - mean * mean) / (reps - 1));
    EXPECT_LE(std::abs(mean - k / 2.0), 4.0 * se) << "layer " << d;
  }
}

TEST(NetworkDump, RoundTripIsBitExact) {
  auto c = make_config(9, 3, DistributionSpec::uniform(1.0, 0.5, true));
  c.input_dim = 4;
  Rng rng(11, 2);
  const Network net = build_network(c, rng);
  const auto path = std::filesystem::temp_directory_path() / "sparsetraj_net_dump.bin";
  write_network(net, path);
  EXPECT_EQ(std::filesystem::file_size(path), 4u + 4u + 5u * 8u + 3u * 16u + (9u * 4u + 9u + 2u * (9u * 9u + 9u)) * 8u);
  const Network back = read_network(path, c);
  EXPECT_EQ(back.seed(), 11u);
  EXPECT_EQ(back.stream(), 2u);
  for (std::size_t d = 0; d < 3; ++d) {
    EXPECT_EQ(back.layers()[d].weights, net.layers()[d].weights);
    EXPECT_EQ(back.layers()[d].biases, net.layers()[d].biases);
  }
  std::filesystem::remove(path);
}

TEST(NetworkDump, RejectsForeignFile) {
  const auto path = std::filesystem::temp_directory_path() / "sparsetraj_not_a_dump.bin";
  { std::ofstream(path) << "hello world, not a network"; }
  EXPECT_THROW(read_network(path, NetworkConfig{}), std::runtime_error);
  std::filesystem::remove(path);
}
