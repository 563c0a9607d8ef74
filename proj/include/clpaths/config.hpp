#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "clpaths/analysis.hpp"
#include "clpaths/contour.hpp"
#include "clpaths/density.hpp"
#include "clpaths/langevin.hpp"

namespace clpaths {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "clpaths 1.0.0";

struct SdeSection {
  std::vector<int> n_max;  // empty: default_n_max
  double tol_rank = 1e-8;
};

struct FitSection {
  FitConfig cfg;
  std::vector<std::string> basis;      // path labels; empty: every path not listed in extra_paths
  std::vector<std::string> symmetric;  // three labels for the b/2 (T_1 + T_2) + (1 - b) T_3 form
};

struct OutputSection {
  std::string dir = "clpaths_out";
  std::vector<std::string> formats{"json", "csv"};
};

struct ExperimentConfig {
  Json density_spec;
  std::optional<Density> density;
  std::vector<Observable> observables;
  bool auto_paths = true;
  std::vector<PathSpec> paths;        // explicit paths (when auto_paths is false)
  std::vector<PathSpec> extra_paths;  // tabulated but not part of the default fit basis
  bool normalize = true;              // normalize functionals to (T, 1) = 1
  QuadratureConfig quadrature;
  CLConfig cl;
  SdeSection sde;
  FitSection fit;
  std::vector<FluxCurve> flux_curves;
  OutputSection output;
};

/// Parses a config document. Errors are ConfigError with "source:line: /json/pointer: message".
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

/// Applies CLPATHS_OUTPUT_DIR and CLPATHS_THREADS.
void apply_environment(ExperimentConfig& cfg);

/// The config with every default filled in; parse_config(to_json(c).dump())
/// reproduces c.
Json to_json(const ExperimentConfig& cfg);

Json density_to_json(const Density& d);
Density density_from_json(const Json& j);
Json endpoint_to_json(const Endpoint& e);
Json path_to_json(const PathSpec& p);
Json complex_to_json(cplx z);

/// The paths of the experiment: spanning_paths (auto) or the explicit list,
/// followed by extra_paths.
std::vector<PathSpec> experiment_paths(const ExperimentConfig& cfg);

/// Line number (1-based) of the value at every JSON pointer of `text`.
std::map<std::string, int> json_pointer_lines(const std::string& text);

}  // namespace clpaths
