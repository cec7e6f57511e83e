#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sparsetraj/distributions.hpp"
#include "sparsetraj/polyline.hpp"
#include "sparsetraj/rng.hpp"

namespace sparsetraj {

struct NetworkConfig {
  std::size_t width = 1;
  std::size_t depth = 1;
  std::size_t input_dim = 1;
  DistributionSpec weights = DistributionSpec::gaussian(1.0);
  DistributionSpec biases = DistributionSpec::gaussian(0.01);

  void validate() const {
    if (width < 1) throw std::invalid_argument("network width must be >= 1");
    if (depth < 1) throw std::invalid_argument("network depth must be >= 1");
    if (input_dim < 1) throw std::invalid_argument("network input_dim must be >= 1");
    if (biases.alpha() != 1.0) throw std::invalid_argument("biases are never sparsified (alpha must be 1)");
  }
};

struct Layer {
  Eigen::MatrixXd weights;  // width x fan_in
  Eigen::VectorXd biases;   // width
};

/// A realized random ReLU network. Immutable once built.
class Network {
 public:
  Network(NetworkConfig config, std::vector<Layer> layers, std::uint64_t seed, std::uint64_t stream)
      : config_(std::move(config)), layers_(std::move(layers)), seed_(seed), stream_(stream) {
    if (layers_.size() != config_.depth) throw std::invalid_argument("layer count must equal depth");
    Eigen::Index fan_in = static_cast<Eigen::Index>(config_.input_dim);
    for (const Layer& l : layers_) {
      if (l.weights.cols() != fan_in || l.weights.rows() != static_cast<Eigen::Index>(config_.width) ||
          l.biases.size() != l.weights.rows())
        throw std::invalid_argument("layer shapes do not chain");
      fan_in = l.weights.rows();
    }
  }

  const NetworkConfig& config() const { return config_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::size_t depth() const { return layers_.size(); }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  NetworkConfig config_;
  std::vector<Layer> layers_;
  std::uint64_t seed_;
  std::uint64_t stream_;
};

/// Draws every layer's weights then biases, first layer first.
inline Network build_network(const NetworkConfig& config, Rng& rng) {
  config.validate();
  std::vector<Layer> layers;
  layers.reserve(config.depth);
  std::size_t fan_in = config.input_dim;
  for (std::size_t d = 0; d < config.depth; ++d) {
    Layer l;
    l.weights = sample_matrix(config.weights, config.width, fan_in, rng);
    l.biases = sample_vector(config.biases, config.width, rng);
    layers.push_back(std::move(l));
    fan_in = config.width;
  }
  return Network(config, std::move(layers), rng.seed(), rng.stream());
}

/// Copy of `net` with every weight multiplied by `c` (biases untouched).
inline Network scale_weights(const Network& net, double c) {
  std::vector<Layer> layers = net.layers();
  for (Layer& l : layers) l.weights *= c;
  return Network(net.config(), std::move(layers), net.seed(), net.stream());
}

/// Exact fraction of weight entries equal to zero, over all layers.
inline double sparsity_fraction(const Network& net) {
  std::size_t zeros = 0, total = 0;
  for (const Layer& l : net.layers()) {
    zeros += static_cast<std::size_t>((l.weights.array() == 0.0).count());
    total += static_cast<std::size_t>(l.weights.size());
  }
  return static_cast<double>(zeros) / static_cast<double>(total);
}

/// Indices j with h_j > 0. h_j = 0 counts as inactive.
inline std::vector<std::size_t> active_set(const Eigen::VectorXd& pre_activation) {
  std::vector<std::size_t> out;
  for (Eigen::Index j = 0; j < pre_activation.size(); ++j)
    if (pre_activation(j) > 0.0) out.push_back(static_cast<std::size_t>(j));
  return out;
}

struct LayerImage {
  Polyline pre_activation;   // h^(d)
  Polyline post_activation;  // z^(d+1) = max(h^(d), 0)
};

using LayerTrace = std::vector<LayerImage>;

/// Pushes every input point through the network, calling
/// visit(layer_index, pre, post) once per layer with dim x points matrices.
/// Only the current layer's images are kept alive.
template <class Visitor>
void forward_each(const Network& net, const Polyline& input, Visitor&& visit) {
  if (input.dim() != net.config().input_dim)
    throw std::invalid_argument("input dimension " + std::to_string(input.dim()) + " does not match network input_dim " +
                                std::to_string(net.config().input_dim));
  Eigen::MatrixXd z = input.points();
  Eigen::MatrixXd h;
  for (std::size_t d = 0; d < net.depth(); ++d) {
    const Layer& l = net.layers()[d];
    h.noalias() = l.weights * z;
    h.colwise() += l.biases;
    z = h.cwiseMax(0.0);
    visit(d, static_cast<const Eigen::MatrixXd&>(h), static_cast<const Eigen::MatrixXd&>(z));
  }
}

inline LayerTrace forward_trace(const Network& net, const Polyline& input) {
  LayerTrace trace;
  trace.reserve(net.depth());
  forward_each(net, input, [&](std::size_t, const Eigen::MatrixXd& h, const Eigen::MatrixXd& z) {
    trace.push_back(LayerImage{Polyline(h), Polyline(z)});
  });
  return trace;
}

// Binary dump: "SPTN", u32 version, u64 seed, stream, input_dim, width,
// depth; then per layer u64 rows, u64 cols, row-major f64 weights, f64
// biases. All little-endian.

inline constexpr std::uint32_t kNetworkDumpVersion = 1;

namespace detail {

inline void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(b, 8);
}

inline std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("network dump truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[i]} << (8 * i);
  return v;
}

inline void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }
inline double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

}  // namespace detail

inline void write_network(const Network& net, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write("SPTN", 4);
  const std::uint32_t v = kNetworkDumpVersion;
  for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xFF));
  detail::put_u64(os, net.seed());
  detail::put_u64(os, net.stream());
  detail::put_u64(os, net.config().input_dim);
  detail::put_u64(os, net.config().width);
  detail::put_u64(os, net.depth());
  for (const Layer& l : net.layers()) {
    detail::put_u64(os, static_cast<std::uint64_t>(l.weights.rows()));
    detail::put_u64(os, static_cast<std::uint64_t>(l.weights.cols()));
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) detail::put_f64(os, l.weights(r, c));
    for (Eigen::Index r = 0; r < l.biases.size(); ++r) detail::put_f64(os, l.biases(r));
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

/// Reads a dump written by write_network. The distribution specs are not
/// stored; `config` supplies them.
inline Network read_network(const std::filesystem::path& path, NetworkConfig config) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  char magic[4];
  unsigned char ver[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != "SPTN") throw std::runtime_error("not a network dump");
  if (!is.read(reinterpret_cast<char*>(ver), 4)) throw std::runtime_error("network dump truncated");
  const std::uint32_t version = ver[0] | (ver[1] << 8) | (ver[2] << 16) | (std::uint32_t{ver[3]} << 24);
  if (version != kNetworkDumpVersion) throw std::runtime_error("unsupported network dump version");
  const std::uint64_t seed = detail::get_u64(is);
  const std::uint64_t stream = detail::get_u64(is);
  config.input_dim = detail::get_u64(is);
  config.width = detail::get_u64(is);
  config.depth = detail::get_u64(is);
  std::vector<Layer> layers(config.depth);
  for (Layer& l : layers) {
    const auto rows = static_cast<Eigen::Index>(detail::get_u64(is));
    const auto cols = static_cast<Eigen::Index>(detail::get_u64(is));
    l.weights.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) l.weights(r, c) = detail::get_f64(is);
    l.biases.resize(rows);
    for (Eigen::Index r = 0; r < rows; ++r) l.biases(r) = detail::get_f64(is);
  }
  return Network(std::move(config), std::move(layers), seed, stream);
}

}  // namespace sparsetraj
