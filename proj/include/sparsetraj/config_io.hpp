#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "sparsetraj/distributions.hpp"
#include "sparsetraj/experiment.hpp"

namespace sparsetraj {

inline constexpr int kConfigVersion = 1;

/// Directory searched for relative dataset paths.
inline constexpr const char* kDataDirEnv = "SPARSETRAJ_DATA_DIR";

inline std::filesystem::path resolve_data_path(const std::filesystem::path& p) {
  if (p.empty() || p.is_absolute() || std::filesystem::exists(p)) return p;
  if (const char* dir = std::getenv(kDataDirEnv); dir != nullptr && *dir != '\0') return std::filesystem::path(dir) / p;
  return p;
}

inline nlohmann::json spec_to_json(const DistributionSpec& s) {
  nlohmann::json j{{"family", to_string(s.family())}, {"alpha", s.alpha()},
                   {"scale_by_inv_sqrt_k", s.scale_by_inv_sqrt_k()}};
  switch (s.family()) {
    case Family::gaussian: j["sigma"] = s.sigma(); break;
    case Family::uniform: j["c"] = s.half_width(); break;
    case Family::discrete: j["values"] = std::vector<double>(s.values().begin(), s.values().end()); break;
  }
  return j;
}

inline DistributionSpec spec_from_json(const nlohmann::json& j) {
  const Family f = parse_family(j.at("family").get<std::string>());
  const double alpha = j.value("alpha", 1.0);
  const bool scaled = j.value("scale_by_inv_sqrt_k", false);
  switch (f) {
    case Family::gaussian: return DistributionSpec::gaussian(j.at("sigma").get<double>(), alpha, scaled);
    case Family::uniform: return DistributionSpec::uniform(j.at("c").get<double>(), alpha, scaled);
    case Family::discrete:
      return DistributionSpec::discrete(j.at("values").get<std::vector<double>>(), alpha, scaled);
  }
  throw std::invalid_argument("unknown family");
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json fam = nlohmann::json::array();
  for (Family f : c.families) fam.push_back(to_string(f));
  nlohmann::json traj{{"kind", to_string(c.trajectory.kind)}};
  switch (c.trajectory.kind) {
    case TrajectorySource::Kind::mnist_line:
      traj["path"] = c.trajectory.path.string();
      traj["first"] = c.trajectory.first;
      traj["second"] = c.trajectory.second;
      break;
    case TrajectorySource::Kind::random_arc:
      traj["planes"] = c.trajectory.planes;
      [[fallthrough]];
    case TrajectorySource::Kind::random_line:
      traj["dim"] = c.trajectory.dim;
      break;
  }
  return nlohmann::json{{"version", kConfigVersion},
                        {"width", c.width},
                        {"depth", c.depth},
                        {"trajectory", traj},
                        {"segments", c.segments},
                        {"replicates", c.replicates},
                        {"families", fam},
                        {"alphas", c.alphas},
                        {"scales", c.scales},
                        {"scale_by_inv_sqrt_k", c.scale_by_inv_sqrt_k},
                        {"discrete_c", c.discrete_c},
                        {"discrete_include_zero", c.discrete_include_zero},
                        {"bias_scale", c.bias_scale},
                        {"seed", c.seed},
                        {"threads", c.threads}};
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  if (!j.contains("version")) throw std::invalid_argument("config is missing \"version\"");
  if (j.at("version").get<int>() != kConfigVersion)
    throw std::invalid_argument("unsupported config version " + j.at("version").dump());
  static const char* known[] = {"version", "width", "depth", "trajectory", "segments", "replicates",
                                "families", "alphas", "scales", "scale_by_inv_sqrt_k", "discrete_c",
                                "discrete_include_zero", "bias_scale", "seed", "threads"};
  for (const auto& [key, _] : j.items())
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      throw std::invalid_argument("unknown config key \"" + key + "\"");

  ExperimentConfig c;
  c.width = j.value("width", c.width);
  c.depth = j.value("depth", c.depth);
  c.segments = j.value("segments", c.segments);
  c.replicates = j.value("replicates", c.replicates);
  c.alphas = j.value("alphas", c.alphas);
  c.scales = j.value("scales", c.scales);
  c.scale_by_inv_sqrt_k = j.value("scale_by_inv_sqrt_k", c.scale_by_inv_sqrt_k);
  c.discrete_c = j.value("discrete_c", c.discrete_c);
  c.discrete_include_zero = j.value("discrete_include_zero", c.discrete_include_zero);
  c.bias_scale = j.value("bias_scale", c.bias_scale);
  c.seed = j.value("seed", c.seed);
  c.threads = j.value("threads", c.threads);
  if (j.contains("families")) {
    c.families.clear();
    for (const auto& f : j.at("families")) c.families.push_back(parse_family(f.get<std::string>()));
  }
  if (j.contains("trajectory")) {
    const auto& t = j.at("trajectory");
    const std::string kind = t.value("kind", std::string("random_line"));
    if (kind == "mnist_line") {
      c.trajectory.kind = TrajectorySource::Kind::mnist_line;
      c.trajectory.path = resolve_data_path(t.at("path").get<std::string>());
      c.trajectory.first = t.value("first", c.trajectory.first);
      c.trajectory.second = t.value("second", c.trajectory.second);
    } else if (kind == "random_line" || kind == "random_arc") {
      c.trajectory.kind =
          kind == "random_line" ? TrajectorySource::Kind::random_line : TrajectorySource::Kind::random_arc;
      c.trajectory.dim = t.value("dim", c.trajectory.dim);
      c.trajectory.planes = t.value("planes", c.trajectory.planes);
    } else {
      throw std::invalid_argument("unknown trajectory kind \"" + kind + "\"");
    }
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path.string());
  try {
    return config_from_json(nlohmann::json::parse(is, nullptr, true, true));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

}  // namespace sparsetraj
