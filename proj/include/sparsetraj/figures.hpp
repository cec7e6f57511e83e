#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sparsetraj/config_io.hpp"
#include "sparsetraj/experiment.hpp"
#include "sparsetraj/svg_plot.hpp"
#include "sparsetraj/verify.hpp"

namespace sparsetraj {

enum class FigureScale { full, desk };

inline FigureScale parse_figure_scale(std::string_view s) {
  if (s == "full") return FigureScale::full;
  if (s == "desk") return FigureScale::desk;
  throw std::invalid_argument("unknown figure scale: " + std::string(s));
}

/// Sizes used when reproducing the figures.
struct FigurePreset {
  std::string label;
  std::size_t segments = 1000;
  std::size_t replicates = 20;
  std::size_t width = 256;
  std::size_t depth = 8;          // growth-factor figures
  std::size_t length_depth = 12;  // length-by-layer figure
  std::size_t subvector_trials = 2000;
  std::size_t threads = 0;
};

inline FigurePreset preset_for(FigureScale s) {
  FigurePreset p;
  if (s == FigureScale::full) {
    p.label = "full";
    p.segments = 10000;
    p.replicates = 100;
    p.width = 784;
    p.depth = 12;
    p.subvector_trials = 100000;
  } else {
    p.label = "desk";
  }
  return p;
}

inline const std::vector<std::string>& figure_names() {
  static const std::vector<std::string> names = {"fig2", "fig3a", "fig3b", "fig4a", "fig4b", "fig5"};
  return names;
}

struct SubvectorPoint {
  std::size_t k = 0;
  double alpha = 0.0;
  double value = 0.0;
  double std_error = 0.0;
  bool exact = false;
};

struct FigureOutput {
  std::string name;
  std::vector<std::filesystem::path> files;
  std::vector<ExperimentResult> experiments;
  std::vector<SubvectorPoint> subvector;
  nlohmann::json meta;
};

namespace detail {

inline const std::vector<double>& alpha_grid_fine() {
  static const std::vector<double> g = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  return g;
}

/// MNIST test images if present in the data directory, else a random
/// unit-endpoint line in R^784.
inline TrajectorySource default_line_source(nlohmann::json& meta) {
  TrajectorySource src;
  for (const char* name : {"t10k-images-idx3-ubyte", "t10k-images-idx3-ubyte.gz", "t10k-images.idx3-ubyte"}) {
    const auto p = resolve_data_path(name);
    if (std::filesystem::exists(p)) {
      src.kind = TrajectorySource::Kind::mnist_line;
      src.path = p;
      src.first = 100;
      src.second = 1000;
      meta["trajectory"] = "line between MNIST test items 101 and 1001 (" + p.string() + ")";
      return src;
    }
  }
  src.kind = TrajectorySource::Kind::random_line;
  src.dim = 784;
  meta["trajectory"] = std::string("line between random unit points in R^784 (MNIST test images not found; set ") +
                       kDataDirEnv + ")";
  return src;
}

inline ExperimentConfig base_config(const FigurePreset& p, std::uint64_t seed) {
  ExperimentConfig c;
  c.width = p.width;
  c.depth = p.depth;
  c.segments = p.segments;
  c.replicates = p.replicates;
  c.seed = seed;
  c.threads = p.threads;
  c.families = {Family::gaussian, Family::uniform, Family::discrete};
  return c;
}

/// Growth factor against a swept parameter, one solid (observed) and one
/// dashed (bound) line per family.
inline void growth_plot(const ExperimentResult& r, bool by_alpha, const std::string& title,
                        const std::filesystem::path& path) {
  SvgPlot plot(title, by_alpha ? "alpha" : "standard deviation (before 1/sqrt(k))", "growth factor");
  std::size_t color = 0;
  for (Family f : r.config.families) {
    SvgPlot::Series obs{std::string(to_string(f)), {}, {}, SvgPlot::palette(color), false, true};
    SvgPlot::Series bnd{std::string(to_string(f)) + " bound", {}, {}, SvgPlot::palette(color), true, false};
    for (const CellResult& c : r.cells) {
      if (c.family != f) continue;
      const double x = by_alpha ? c.alpha : c.scale;
      obs.x.push_back(x);
      obs.y.push_back(c.growth);
      bnd.x.push_back(x);
      bnd.y.push_back(c.bound.base);
    }
    plot.add(std::move(obs));
    plot.add(std::move(bnd));
    ++color;
  }
  plot.write(path);
}

inline void write_meta(FigureOutput& out, const FigurePreset& p, const std::filesystem::path& dir) {
  out.meta["figure"] = out.name;
  out.meta["scale"] = p.label;
  out.meta["segments"] = p.segments;
  out.meta["replicates"] = p.replicates;
  out.meta["width"] = p.width;
  if (p.label == "desk")
    out.meta["note"] = "desk scale: reduced segments, replicates and width; use --scale full for the full protocol";
  const auto path = dir / (out.name + "_meta.json");
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << out.meta.dump(2) << '\n';
  out.files.push_back(path);
}

inline void write_subvector_csv(const std::vector<SubvectorPoint>& pts, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << "k,alpha,expected_subvector_norm,stderr,exact,lower_alpha,upper_sqrt_alpha\n";
  for (const SubvectorPoint& p : pts)
    os << p.k << ',' << detail::format_double(p.alpha) << ',' << detail::format_double(p.value) << ',' << detail::format_double(p.std_error)
       << ',' << (p.exact ? 1 : 0) << ',' << detail::format_double(p.alpha) << ',' << detail::format_double(std::sqrt(p.alpha))
       << '\n';
}

inline void subvector_plot(const std::vector<SubvectorPoint>& pts, const std::vector<std::size_t>& dims,
                           const std::string& title, const std::filesystem::path& path) {
  SvgPlot plot(title, "alpha", "E||u_J|| / ||u||");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    SvgPlot::Series s{"k = " + std::to_string(dims[i]), {}, {}, SvgPlot::palette(i), false, true};
    for (const SubvectorPoint& p : pts)
      if (p.k == dims[i]) {
        s.x.push_back(p.alpha);
        s.y.push_back(p.value);
      }
    plot.add(std::move(s));
  }
  SvgPlot::Series lo{"alpha", {}, {}, "#000000", true, false}, hi{"sqrt(alpha)", {}, {}, "#555555", true, false};
  for (int i = 0; i <= 20; ++i) {
    const double a = i / 20.0;
    lo.x.push_back(a);
    lo.y.push_back(a);
    hi.x.push_back(a);
    hi.y.push_back(std::sqrt(a));
  }
  plot.add(std::move(lo));
  plot.add(std::move(hi));
  plot.write(path);
}

}  // namespace detail

/// Regenerates one figure's data (CSV), plot (SVG), and a metadata file
/// into `outdir`.
inline FigureOutput reproduce_figure(std::string_view name, const FigurePreset& preset,
                                     const std::filesystem::path& outdir, std::uint64_t seed = 1) {
  std::filesystem::create_directories(outdir);
  FigureOutput out;
  out.name = std::string(name);
  const auto file = [&](const std::string& stem, const char* ext) {
    auto p = outdir / (stem + ext);
    out.files.push_back(p);
    return p;
  };

  if (name == "fig2") {
    ExperimentConfig c = detail::base_config(preset, seed);
    c.trajectory = detail::default_line_source(out.meta);
    c.depth = preset.length_depth;
    c.families = {Family::gaussian};
    c.scales = {6.0};
    c.alphas = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    ExperimentResult r = run_experiment(c);
    export_csv(r, file("fig2", ".csv"));
    export_svg(r, file("fig2", ".svg"), "Sparse-Gaussian length by layer, sigma_w = 6");
    out.experiments.push_back(std::move(r));
  } else if (name == "fig3a" || name == "fig3b") {
    const bool by_alpha = name == "fig3b";
    ExperimentConfig c = detail::base_config(preset, seed);
    c.trajectory = detail::default_line_source(out.meta);
    if (by_alpha) {
      c.alphas = detail::alpha_grid_fine();
      c.scales = {2.0};
    } else {
      c.alphas = {0.5};
      c.scales = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    }
    ExperimentResult r = run_experiment(c);
    export_summary_csv(r, file(out.name, ".csv"));
    detail::growth_plot(r, by_alpha,
                        by_alpha ? "Growth factor against alpha (std 2)" : "Growth factor against std (alpha 0.5)",
                        file(out.name, ".svg"));
    if (!by_alpha) {
      for (Family f : c.families) {
        std::vector<double> x, y;
        for (const CellResult& cell : r.cells)
          if (cell.family == f) {
            x.push_back(cell.scale);
            y.push_back(cell.growth);
          }
        const LinearFit fit = fit_line(x, y);
        out.meta["linear_fit"][std::string(to_string(f))] = {{"slope", fit.slope}, {"r_squared", fit.r_squared}};
      }
    }
    out.experiments.push_back(std::move(r));
  } else if (name == "fig4a" || name == "fig4b") {
    const bool unit = name == "fig4b";
    const std::vector<std::size_t> dims = {10, 100, 500, 1000};
    Rng rng(seed, kAuxStreamBase + 1);
    for (std::size_t k : dims) {
      Eigen::VectorXd u = unit ? Eigen::VectorXd::Unit(static_cast<Eigen::Index>(k), 0) : random_unit_point(k, rng);
      for (int i = 1; i <= 20; ++i) {
        const double a = i / 20.0;
        const SubvectorMethod m = unit ? SubvectorMethod::enumerate() : SubvectorMethod::montecarlo(preset.subvector_trials);
        const Estimate e = subvector_norm_expectation(u, a, m, rng);
        out.subvector.push_back({k, a, e.mean / u.norm(), e.std_error / u.norm(), e.exact});
      }
    }
    out.meta["u"] = unit ? "first standard basis vector" : "uniform on the unit sphere";
    detail::write_subvector_csv(out.subvector, file(out.name, ".csv"));
    detail::subvector_plot(out.subvector, dims,
                           unit ? "Expected subvector norm, u = e1" : "Expected subvector norm, u uniform on sphere",
                           file(out.name, ".svg"));
  } else if (name == "fig5") {
    for (bool arc : {false, true})
      for (bool by_alpha : {false, true}) {
        ExperimentConfig c = detail::base_config(preset, seed);
        c.trajectory.kind = arc ? TrajectorySource::Kind::random_arc : TrajectorySource::Kind::random_line;
        c.trajectory.dim = 500;
        c.trajectory.planes = 100;
        if (by_alpha) {
          c.alphas = detail::alpha_grid_fine();
          c.scales = {2.0};
        } else {
          c.alphas = {0.5};
          c.scales = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
        }
        const std::string stem = std::string("fig5_") + (arc ? "arc" : "line") + (by_alpha ? "_alpha" : "_sigma");
        ExperimentResult r = run_experiment(c);
        export_summary_csv(r, file(stem, ".csv"));
        detail::growth_plot(r, by_alpha,
                            std::string(arc ? "Arc" : "Straight") + " trajectory between random points in R^500",
                            file(stem, ".svg"));
        out.experiments.push_back(std::move(r));
      }
    out.meta["trajectory"] = "random unit endpoints in R^500; arcs bent in 100 random planes";
  } else {
    throw std::invalid_argument("unknown figure name: " + std::string(name));
  }
  out.meta["seed"] = seed;
  detail::write_meta(out, preset, outdir);
  return out;
}

}  // namespace sparsetraj
