#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "sparsetraj/bounds.hpp"
#include "sparsetraj/distributions.hpp"
#include "sparsetraj/idx.hpp"
#include "sparsetraj/network.hpp"
#include "sparsetraj/rng.hpp"
#include "sparsetraj/svg_plot.hpp"
#include "sparsetraj/trajectory.hpp"

namespace sparsetraj {

struct TrajectorySource {
  enum class Kind { mnist_line, random_line, random_arc };
  Kind kind = Kind::random_line;
  std::filesystem::path path;  // mnist_line: IDX image file
  std::size_t first = 100;     // mnist_line: zero-based item indices
  std::size_t second = 1000;
  std::size_t dim = 784;       // random_line / random_arc
  std::size_t planes = 100;    // random_arc
};

inline std::string_view to_string(TrajectorySource::Kind k) {
  switch (k) {
    case TrajectorySource::Kind::mnist_line: return "mnist_line";
    case TrajectorySource::Kind::random_line: return "random_line";
    case TrajectorySource::Kind::random_arc: return "random_arc";
  }
  return "?";
}

/// A sweep over (family, alpha, scale). `scales` are family standard
/// deviations before any 1/sqrt(k) scaling; each family's own parameter is
/// derived from them so that cells with equal (alpha, scale) share the
/// same mixture standard deviation.
struct ExperimentConfig {
  std::size_t width = 784;
  std::size_t depth = 12;
  TrajectorySource trajectory;
  std::size_t segments = 10000;
  std::size_t replicates = 100;
  std::vector<Family> families{Family::gaussian};
  std::vector<double> alphas{1.0};
  std::vector<double> scales{2.0};
  bool scale_by_inv_sqrt_k = true;
  int discrete_c = 2;
  bool discrete_include_zero = true;
  double bias_scale = 0.01;
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  void validate() const {
    if (width < 1 || depth < 1) throw std::invalid_argument("width and depth must be >= 1");
    if (segments < 1) throw std::invalid_argument("segments must be >= 1");
    if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
    if (families.empty() || alphas.empty() || scales.empty()) throw std::invalid_argument("sweep axes must be nonempty");
    for (double a : alphas)
      if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("sweep alpha outside [0, 1]");
    for (double s : scales)
      if (!(s > 0.0)) throw std::invalid_argument("sweep scales must be positive");
    if (!(bias_scale > 0.0)) throw std::invalid_argument("bias scale must be positive");
  }
};

/// Weight law of family `f` whose dense part has standard deviation `std`.
/// Discrete laws are the integers {-C..C} rescaled to that deviation.
inline DistributionSpec weight_spec_for(Family f, double std, double alpha, const ExperimentConfig& cfg) {
  switch (f) {
    case Family::gaussian: return DistributionSpec::gaussian(std, alpha, cfg.scale_by_inv_sqrt_k);
    case Family::uniform: return DistributionSpec::uniform(std * std::sqrt(3.0), alpha, cfg.scale_by_inv_sqrt_k);
    case Family::discrete: {
      const auto base = DistributionSpec::integer_range(cfg.discrete_c, 1.0, cfg.discrete_include_zero);
      return DistributionSpec::integer_range(cfg.discrete_c, std / family_std_dev(base), cfg.discrete_include_zero,
                                             alpha, cfg.scale_by_inv_sqrt_k);
    }
  }
  throw std::invalid_argument("unknown family");
}

/// Bias law used with each weight family: N(0, b^2), U(-b, b), {-b, b}.
inline DistributionSpec bias_spec_for(Family f, double b) {
  switch (f) {
    case Family::gaussian: return DistributionSpec::gaussian(b);
    case Family::uniform: return DistributionSpec::uniform(b);
    case Family::discrete: return DistributionSpec::discrete({-b, b});
  }
  throw std::invalid_argument("unknown family");
}

/// Builds the input polyline. Random endpoints come from an auxiliary
/// stream so they are shared by every cell of a sweep.
inline Polyline make_trajectory(const ExperimentConfig& cfg) {
  const TrajectorySource& src = cfg.trajectory;
  Rng rng(cfg.seed, kAuxStreamBase);
  switch (src.kind) {
    case TrajectorySource::Kind::mnist_line: {
      const IdxTensor data = load_idx(src.path);
      return line_trajectory(mnist_point(data, src.first, true), mnist_point(data, src.second, true), cfg.segments);
    }
    case TrajectorySource::Kind::random_line: {
      Eigen::VectorXd a = random_unit_point(src.dim, rng);
      Eigen::VectorXd b = random_unit_point(src.dim, rng);
      return line_trajectory(a, b, cfg.segments);
    }
    case TrajectorySource::Kind::random_arc: {
      Eigen::VectorXd a = random_unit_point(src.dim, rng);
      Eigen::VectorXd b = random_unit_point(src.dim, rng);
      return arc_trajectory(a, b, cfg.segments, src.planes, rng);
    }
  }
  throw std::invalid_argument("unknown trajectory kind");
}

struct LayerSummary {
  std::size_t layer = 0;  // 0 = input
  double mean_length = 0.0;
  double std_length = 0.0;
  double mean_growth = std::numeric_limits<double>::quiet_NaN();
  double stderr_growth = std::numeric_limits<double>::quiet_NaN();
  double dead_segment_fraction = 0.0;
};

struct CellResult {
  Family family = Family::gaussian;
  double alpha = 1.0;
  double scale = 1.0;        // family std before 1/sqrt(k)
  double scale_param = 1.0;  // sigma, c, or the largest discrete value, unscaled
  double mixture_std = 1.0;
  std::size_t k = 1;
  double input_length = 0.0;
  std::vector<LayerSummary> layers;
  double growth = 0.0;  // mean over replicates of the pooled per-segment ratio
  double growth_stderr = 0.0;
  std::vector<double> replicate_growth;
  BoundBase bound;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<CellResult> cells;
};

namespace detail {

inline double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

/// Runs job(i) for i in [0, n) on up to `threads` workers. Each job writes
/// only its own slot, so the result never depends on scheduling.
template <class Job>
void parallel_for(std::size_t n, std::size_t threads, Job&& job) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) job(i);
      } catch (...) {
        errors[t] = std::current_exception();
        next = n;
      }
    });
  pool.clear();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

/// Runs every (family, alpha, scale) cell over `replicates` networks.
/// Replicate r of every cell uses stream r, so cells share their random
/// draws wherever the laws allow it.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const Polyline input = make_trajectory(cfg);

  struct CellSpec {
    Family family;
    double alpha, scale;
    NetworkConfig net;
  };
  std::vector<CellSpec> specs;
  for (Family f : cfg.families)
    for (double a : cfg.alphas)
      for (double s : cfg.scales) {
        NetworkConfig nc;
        nc.width = cfg.width;
        nc.depth = cfg.depth;
        nc.input_dim = input.dim();
        nc.weights = weight_spec_for(f, s, a, cfg);
        nc.biases = bias_spec_for(f, cfg.bias_scale);
        specs.push_back({f, a, s, nc});
      }

  const std::size_t reps = cfg.replicates;
  std::vector<GrowthProfile> profiles(specs.size() * reps);
  detail::parallel_for(profiles.size(), cfg.threads, [&](std::size_t job) {
    const CellSpec& cs = specs[job / reps];
    Rng rng(cfg.seed, job % reps);
    profiles[job] = measure_growth(build_network(cs.net, rng), input);
  });

  ExperimentResult result{cfg, {}};
  for (std::size_t c = 0; c < specs.size(); ++c) {
    const CellSpec& cs = specs[c];
    CellResult cell;
    cell.family = cs.family;
    cell.alpha = cs.alpha;
    cell.scale = cs.scale;
    cell.scale_param = cs.net.weights.scale_param();
    cell.mixture_std = std_dev(cs.net.weights);
    cell.k = cfg.width;
    cell.input_length = arc_length(input);
    cell.bound = bound_base_for(cs.net.weights, cfg.width);

    const GrowthProfile* first = &profiles[c * reps];
    for (std::size_t d = 0; d <= cfg.depth; ++d) {
      LayerSummary ls;
      ls.layer = d;
      std::vector<double> lengths, ratios;
      double dead = 0.0;
      for (std::size_t r = 0; r < reps; ++r) {
        const GrowthProfile& p = first[r];
        if (d == 0) {
          lengths.push_back(p.input_length);
        } else {
          const LayerGrowth& g = p.layers[d - 1];
          lengths.push_back(g.length);
          ratios.push_back(g.mean_ratio);
          dead += g.dead_segment_fraction;
        }
      }
      ls.mean_length = detail::mean_of(lengths);
      ls.std_length = detail::sample_std(lengths, ls.mean_length);
      if (d > 0) {
        ls.mean_growth = detail::mean_of(ratios);
        ls.stderr_growth = detail::sample_std(ratios, ls.mean_growth) / std::sqrt(static_cast<double>(reps));
        ls.dead_segment_fraction = dead / static_cast<double>(reps);
      }
      cell.layers.push_back(ls);
    }
    for (std::size_t r = 0; r < reps; ++r) cell.replicate_growth.push_back(first[r].pooled_growth());
    cell.growth = detail::mean_of(cell.replicate_growth);
    cell.growth_stderr =
        detail::sample_std(cell.replicate_growth, cell.growth) / std::sqrt(static_cast<double>(reps));
    result.cells.push_back(std::move(cell));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Fits

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = intercept + slope x.
inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line needs >= 2 paired points");
  const double n = static_cast<double>(x.size());
  const double mx = detail::mean_of(x), my = detail::mean_of(y);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line needs distinct x values");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    sse += e * e;
  }
  f.slope_stderr = x.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
  f.r_squared = syy == 0.0 ? 1.0 : 1.0 - sse / syy;
  return f;
}

/// Fit of log(mean length) against layer index over layers 0..depth.
inline LinearFit fit_log_length(const CellResult& cell) {
  std::vector<double> x, y;
  for (const LayerSummary& l : cell.layers) {
    if (!(l.mean_length > 0.0)) throw std::domain_error("log-length fit needs positive lengths");
    x.push_back(static_cast<double>(l.layer));
    y.push_back(std::log(l.mean_length));
  }
  return fit_line(x, y);
}

// ---------------------------------------------------------------------------
// CSV

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "family",      "alpha",        "scale_param", "mixture_std",   "k",          "depth_layer",
      "mean_length", "std_length",   "mean_growth", "stderr_growth", "bound_base", "dead_segment_fraction",
      "replicates",  "segments",     "seed",        "mean_length_normalized"};
  return cols;
}

namespace detail {

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, end);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size())
    throw std::invalid_argument("bad number in CSV: " + std::string(s));
  return v;
}

inline void write_csv_row(std::ostream& os, const ExperimentResult& r, const CellResult& c, const LayerSummary& l,
                          double growth, double growth_se) {
  const double norm = c.input_length > 0.0 ? l.mean_length / c.input_length : 0.0;
  os << to_string(c.family) << ',' << format_double(c.alpha) << ',' << format_double(c.scale_param) << ','
     << format_double(c.mixture_std) << ',' << c.k << ',' << l.layer << ',' << format_double(l.mean_length) << ','
     << format_double(l.std_length) << ',' << format_double(growth) << ',' << format_double(growth_se) << ','
     << format_double(c.bound.base) << ',' << format_double(l.dead_segment_fraction) << ',' << r.config.replicates
     << ',' << r.config.segments << ',' << r.config.seed << ',' << format_double(norm) << '\n';
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return os;
}

inline void write_header(std::ostream& os) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
}

}  // namespace detail

/// One row per cell per layer (layer 0 is the input; its growth is nan).
inline void export_csv(const ExperimentResult& result, std::ostream& os) {
  detail::write_header(os);
  for (const CellResult& c : result.cells)
    for (const LayerSummary& l : c.layers) detail::write_csv_row(os, result, c, l, l.mean_growth, l.stderr_growth);
}

inline void export_csv(const ExperimentResult& result, const std::filesystem::path& path) {
  auto os = detail::open_for_write(path);
  export_csv(result, os);
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

/// One row per cell: lengths at the last layer, growth pooled over layers.
inline void export_summary_csv(const ExperimentResult& result, std::ostream& os) {
  detail::write_header(os);
  for (const CellResult& c : result.cells) {
    LayerSummary last = c.layers.back();
    last.dead_segment_fraction = 0.0;
    for (std::size_t d = 1; d < c.layers.size(); ++d) last.dead_segment_fraction += c.layers[d].dead_segment_fraction;
    if (c.layers.size() > 1) last.dead_segment_fraction /= static_cast<double>(c.layers.size() - 1);
    detail::write_csv_row(os, result, c, last, c.growth, c.growth_stderr);
  }
}

inline void export_summary_csv(const ExperimentResult& result, const std::filesystem::path& path) {
  auto os = detail::open_for_write(path);
  export_summary_csv(result, os);
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

/// A parsed CSV row: the family name plus every numeric column by name.
struct CsvRow {
  std::string family;
  std::vector<std::pair<std::string, double>> values;

  double at(std::string_view name) const {
    for (const auto& [k, v] : values)
      if (k == name) return v;
    throw std::out_of_range("no CSV column " + std::string(name));
  }
};

inline std::vector<CsvRow> parse_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) return {};
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) header.push_back(cell);
  }
  if (header != csv_columns()) throw std::invalid_argument("unexpected CSV header");
  std::vector<CsvRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    CsvRow row;
    std::size_t i = 0;
    for (std::string cell; std::getline(ss, cell, ','); ++i) {
      if (i >= header.size()) throw std::invalid_argument("too many CSV fields");
      if (i == 0) row.family = cell;
      else row.values.emplace_back(header[i], detail::parse_double(cell));
    }
    if (i != header.size()) throw std::invalid_argument("too few CSV fields");
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// SVG

inline std::string cell_label(const CellResult& c) {
  std::ostringstream s;
  s.precision(3);
  s << to_string(c.family) << " a=" << c.alpha << " s=" << c.scale;
  return s.str();
}

/// Mean trajectory length per layer (log scale) with each cell's dashed
/// lower bound l(x) * base^d.
inline void export_svg(const ExperimentResult& result, const std::filesystem::path& path,
                       const std::string& title = "Trajectory length by layer") {
  SvgPlot plot(title, "layer d", "mean length");
  plot.set_log_y(true);
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    const CellResult& c = result.cells[i];
    SvgPlot::Series obs{cell_label(c), {}, {}, SvgPlot::palette(i), false, true};
    SvgPlot::Series bnd{"bound", {}, {}, SvgPlot::palette(i), true, false};
    for (const LayerSummary& l : c.layers) {
      obs.x.push_back(static_cast<double>(l.layer));
      obs.y.push_back(l.mean_length);
      bnd.x.push_back(static_cast<double>(l.layer));
      bnd.y.push_back(c.input_length * std::pow(c.bound.base, static_cast<double>(l.layer)));
    }
    plot.add(std::move(obs));
    plot.add(std::move(bnd));
  }
  plot.write(path);
}

}  // namespace sparsetraj
