#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sparsetraj/sparsetraj.hpp"

namespace st = sparsetraj;

namespace {

struct SimulateOptions {
  std::string config;
  std::optional<std::size_t> width, depth, segments, replicates, threads;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> families;
  std::vector<double> alphas, scales;
  std::string trajectory;
  std::string mnist;
  std::optional<std::size_t> dim, planes;
  std::string out, summary, svg;
  bool print_config = false;
};

int run_simulate(const SimulateOptions& o) {
  st::ExperimentConfig c = o.config.empty() ? st::ExperimentConfig{} : st::load_config(o.config);
  if (o.width) c.width = *o.width;
  if (o.depth) c.depth = *o.depth;
  if (o.segments) c.segments = *o.segments;
  if (o.replicates) c.replicates = *o.replicates;
  if (o.threads) c.threads = *o.threads;
  if (o.seed) c.seed = *o.seed;
  if (!o.families.empty()) {
    c.families.clear();
    for (const auto& f : o.families) c.families.push_back(st::parse_family(f));
  }
  if (!o.alphas.empty()) c.alphas = o.alphas;
  if (!o.scales.empty()) c.scales = o.scales;
  if (!o.mnist.empty()) {
    c.trajectory.kind = st::TrajectorySource::Kind::mnist_line;
    c.trajectory.path = st::resolve_data_path(o.mnist);
  }
  if (o.trajectory == "line") c.trajectory.kind = st::TrajectorySource::Kind::random_line;
  else if (o.trajectory == "arc") c.trajectory.kind = st::TrajectorySource::Kind::random_arc;
  if (o.dim) c.trajectory.dim = *o.dim;
  if (o.planes) c.trajectory.planes = *o.planes;
  c.validate();
  if (o.print_config) {
    std::cout << st::config_to_json(c).dump(2) << '\n';
    return 0;
  }

  const st::ExperimentResult r = st::run_experiment(c);
  if (o.out.empty() || o.out == "-") st::export_csv(r, std::cout);
  else st::export_csv(r, std::filesystem::path(o.out));
  if (!o.summary.empty()) st::export_summary_csv(r, std::filesystem::path(o.summary));
  if (!o.svg.empty()) st::export_svg(r, o.svg);
  // Diagnostic only: the product of per-layer mean ratios against the
  // realized length ratio (a mean of ratios is not a ratio of means).
  for (const st::CellResult& cell : r.cells) {
    double log_prod = 0.0;
    for (std::size_t d = 1; d < cell.layers.size(); ++d) log_prod += std::log(cell.layers[d].mean_growth);
    const double ratio = cell.input_length > 0.0 ? cell.layers.back().mean_length / cell.input_length : 0.0;
    std::fprintf(stderr, "%-32s growth %.4f +- %.4f  bound %.4f  prod(ratios) %.4g  l(z)/l(x) %.4g\n",
                 st::cell_label(cell).c_str(), cell.growth, cell.growth_stderr, cell.bound.base, std::exp(log_prod),
                 ratio);
  }
  return 0;
}

int run_bounds(const std::vector<double>& alphas, const std::vector<double>& scales, const std::vector<std::size_t>& ks,
               bool scaled, int discrete_c) {
  st::ExperimentConfig ec;
  ec.scale_by_inv_sqrt_k = scaled;
  ec.discrete_c = discrete_c;
  std::printf("family,alpha,std,k,m_constant,base,prior_order_of_magnitude\n");
  for (st::Family f : {st::Family::gaussian, st::Family::uniform, st::Family::discrete})
    for (double a : alphas)
      for (double s : scales)
        for (std::size_t k : ks) {
          const st::DistributionSpec w = st::weight_spec_for(f, s, a, ec);
          const double m = st::m_constant(w.effective(k));
          const double base = st::bound_base_for(w, k).base;
          const double prior =
              f == st::Family::gaussian ? st::base_prior_raghu(w.effective(k).sigma(), double(k)).base : 0.0;
          std::printf("%s,%g,%g,%zu,%.12g,%.12g,", std::string(st::to_string(f)).c_str(), a, s, k, m, base);
          if (f == st::Family::gaussian) std::printf("%.12g\n", prior);
          else std::printf("\n");
        }
  return 0;
}

int run_verify(std::uint64_t seed, const std::string& json_path) {
  const auto reports = st::run_verification_suite(seed);
  int failed = 0;
  for (const auto& r : reports) {
    std::printf("%-4s %-22s %s\n", r.pass ? "ok" : "FAIL", r.lemma.c_str(), r.description.c_str());
    failed += !r.pass;
  }
  if (!json_path.empty()) {
    const nlohmann::json j = reports;
    if (json_path == "-") {
      std::cout << j.dump(2) << '\n';
    } else {
      std::ofstream os(json_path);
      if (!os) throw std::runtime_error("cannot open " + json_path + " for writing");
      os << j.dump(2) << '\n';
    }
  }
  std::printf("%zu checks, %d failed\n", reports.size(), failed);
  return failed == 0 ? 0 : 1;
}

int run_figure(const std::string& name, const std::string& scale, const std::string& out, std::uint64_t seed,
               std::size_t threads) {
  st::FigurePreset p = st::preset_for(st::parse_figure_scale(scale));
  p.threads = threads;
  const auto names = name == "all" ? st::figure_names() : std::vector<std::string>{name};
  for (const auto& n : names) {
    const st::FigureOutput fo = st::reproduce_figure(n, p, out, seed);
    for (const auto& f : fo.files) std::printf("%s\n", f.string().c_str());
  }
  return 0;
}

int run_idx_info(const std::string& path, std::optional<std::size_t> item) {
  const st::IdxTensor t = st::load_idx(st::resolve_data_path(path));
  std::printf("dims:");
  for (auto d : t.dims) std::printf(" %u", d);
  std::printf("\nitems: %zu\nitem size: %zu bytes\n", t.item_count(), t.item_size());
  if (item) {
    const Eigen::VectorXd raw = st::mnist_point(t, *item, false);
    std::printf("item %zu: min %g, max %g, mean %g, norm %g\n", *item, raw.minCoeff(), raw.maxCoeff(), raw.mean(),
                raw.norm());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trajectory-length growth in random sparse ReLU networks"};
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Run a sweep and write per-layer CSV");
  simulate->add_option("-c,--config", sim.config, "JSON experiment config")->check(CLI::ExistingFile);
  simulate->add_option("--width", sim.width, "Hidden width k");
  simulate->add_option("--depth", sim.depth, "Number of layers");
  simulate->add_option("--segments", sim.segments, "Trajectory segments");
  simulate->add_option("--replicates", sim.replicates, "Networks per cell");
  simulate->add_option("--seed", sim.seed, "Base seed");
  simulate->add_option("--threads", sim.threads, "Worker threads (0 = all cores)");
  simulate->add_option("--family", sim.families, "gaussian, uniform and/or discrete");
  simulate->add_option("--alpha", sim.alphas, "Sparsity values");
  simulate->add_option("--scale", sim.scales, "Family standard deviations before 1/sqrt(k)");
  simulate->add_option("--trajectory", sim.trajectory, "Random endpoints: line or arc")
      ->check(CLI::IsMember({"line", "arc"}));
  simulate->add_option("--mnist", sim.mnist, "IDX image file for an MNIST line");
  simulate->add_option("--dim", sim.dim, "Dimension of random endpoints");
  simulate->add_option("--planes", sim.planes, "Arc planes");
  simulate->add_option("-o,--out", sim.out, "Per-layer CSV path (default stdout)");
  simulate->add_option("--summary", sim.summary, "One-row-per-cell CSV path");
  simulate->add_option("--svg", sim.svg, "Length-by-layer SVG path");
  simulate->add_flag("--print-config", sim.print_config, "Print the resolved config as JSON and exit");

  std::vector<double> b_alphas = {0.25, 0.5, 1.0}, b_scales = {1.0, 2.0, 4.0};
  std::vector<std::size_t> b_ks = {100, 784};
  bool b_unscaled = false;
  int b_c = 2;
  auto* bounds = app.add_subcommand("bounds", "Print the bound base for a grid of weight laws");
  bounds->add_option("--alpha", b_alphas, "Sparsity values");
  bounds->add_option("--scale", b_scales, "Family standard deviations");
  bounds->add_option("-k,--width", b_ks, "Widths");
  bounds->add_flag("--unscaled", b_unscaled, "Do not divide the scale by sqrt(k)");
  bounds->add_option("--discrete-c", b_c, "Discrete set {-C..C}");

  std::uint64_t v_seed = 1;
  std::string v_json;
  auto* verify = app.add_subcommand("verify", "Run every lemma check; nonzero exit on failure");
  verify->add_option("--seed", v_seed, "Seed");
  verify->add_option("--json", v_json, "Write the JSON report here ('-' for stdout)");

  std::string f_name, f_scale = "desk", f_out = "figures";
  std::uint64_t f_seed = 1;
  std::size_t f_threads = 0;
  auto* figure = app.add_subcommand("figure", "Reproduce a figure's CSV and SVG");
  figure->add_option("name", f_name, "fig2, fig3a, fig3b, fig4a, fig4b, fig5 or all")->required();
  figure->add_option("--scale", f_scale, "desk or full")->check(CLI::IsMember({"desk", "full"}));
  figure->add_option("-o,--out", f_out, "Output directory");
  figure->add_option("--seed", f_seed, "Seed");
  figure->add_option("--threads", f_threads, "Worker threads (0 = all cores)");

  std::string i_path;
  std::optional<std::size_t> i_item;
  auto* idx = app.add_subcommand("idx-info", "Describe an IDX file");
  idx->add_option("path", i_path, "IDX file, optionally gzip-compressed")->required();
  idx->add_option("--item", i_item, "Print statistics of one item");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*simulate) return run_simulate(sim);
    if (*bounds) return run_bounds(b_alphas, b_scales, b_ks, !b_unscaled, b_c);
    if (*verify) return run_verify(v_seed, v_json);
    if (*figure) return run_figure(f_name, f_scale, f_out, f_seed, f_threads);
    if (*idx) return run_idx_info(i_path, i_item);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
