#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "shocklab/evolution.hpp"
#include "shocklab/profile.hpp"

namespace shocklab {

using Json = nlohmann::ordered_json;

// Polynomial flux and source with endstates. When loading, a built-in name
// supplies coefficients the file omits; any other name needs both lists.
struct ModelConfig {
  std::string name = "burgers-cubic";
  std::vector<double> flux{0.0, 0.0, 0.5};          // f = sum flux[k] u^k
  std::vector<double> source{0.0, -0.5, 1.5, -1.0};  // g = sum source[k] u^k
  double u_minus = 1.0;
  double u_plus = 0.0;
  int oleinik_samples = 1001;
};

struct GridConfig {
  double half_width = 80.0;
  double spacing = 0.05;
};

struct EvansConfig {
  double circle_radius = 0.2;
  int circle_nodes = 64;
  double keyhole_gap = 2e-3;
  double rect_re_lo = 0.1, rect_re_hi = 2.0;
  double rect_im_lo = -2.0, rect_im_hi = 2.0;
  int rect_nodes = 16;
  double hf_lambda = 400.0;
  // D'(0) by centred differences with step derivative_step * (distance to the
  // essential spectrum).
  double derivative_step = 0.25;
};

struct GreenConfig {
  double eps = 0.05;  // where the time-Green checks run
  TimeGreenOptions time;
  std::vector<double> stationarity_times{0.5, 2.0, 8.0};
  double propagator_time = 1.0;
  int scattering_samples = 10;
  double lambda_re_lo = 0.05, lambda_re_hi = 3.0;
  double lambda_im_max = 3.0;
};

struct DecayConfig {
  bool enabled = true;
  double amplitude = 0.05;
  double window_start = 1.5;
  double window_end = 4.0;
};

struct BasinConfig {
  bool enabled = true;
  double lo = 0.05, hi = 1.0;
  int iterations = 10;
  double horizon = 4.0;
};

struct ExperimentConfig {
  ModelConfig model;
  std::vector<double> eps{0.1, 0.05, 0.025, 0.0125};
  GridConfig grid;
  ProfileOptions profile;
  EvansConfig evans;
  GreenConfig green;
  bool reference_checks = true;  // layer, eps = 0 limit, scattering, time Green
  EvolutionOptions evolution;
  InitSpec init{InitSpec::Kind::plateau};
  double evolve_eps = 0.05;  // single run of the `evolve` command
  double evolve_t_end = 100.0;
  DecayConfig decay;
  BasinConfig basin;
  std::string output_dir = "shocklab-out";
  std::uint64_t seed = 12345;
};

// Missing keys take the defaults above; unknown keys and invalid values
// throw ConfigError.
ExperimentConfig config_from_json(const Json& j);
Json to_json(const ExperimentConfig& c);
Json read_config_json(const std::string& path);
ExperimentConfig load_config(const std::string& path);
// `section.key=value`; the value is read as JSON when it parses, else as a
// string. Validation happens in config_from_json.
void apply_override(Json& j, const std::string& assignment);
// `kind[:key=value,...]` with the keys of the init section, e.g.
// `gaussian:amplitude=0.05,center=5,width=2` or `csv:path=v0.csv`.
void apply_init_spec(Json& j, const std::string& spec);
void save_config(const std::string& path, const ExperimentConfig& c);
// FNV-1a of the canonical serialization, 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

Model build_model(const ModelConfig& m);
ProfileGrid build_grid(const GridConfig& g);

}  // namespace shocklab
