#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shocklab/config.hpp"

namespace shocklab {

// Per-eps results of one sweep. Values of stages that did not run stay NaN.
struct RunRecord {
  double eps = 0.0;
  bool ok = true;
  std::string failure;  // "<stage>: <message>" of the first error
  std::string directory;

  // profile
  double sigma_eps = NAN;
  double sigma_drift = NAN;     // |sigma_eps - sigma0|
  double weighted_diff = NAN;   // sup e^{0.4 theta0 |x|} |U_eps - U0|
  double profile_residual = NAN;

  // evans
  double circle_winding = NAN;
  int circle_roots = -1;
  double rect_winding = NAN;
  int rect_roots = -1;
  double evans_slope = NAN;  // |D'(0)|, D normalised by |D(1)|
  double hf_error = NAN;     // |D / sqrt(lambda) - limit| at hf_lambda

  // decay
  double target_rate = NAN;
  double v0_sup = NAN;
  double norm_rate = NAN, dpsi_rate = NAN, monitor_rate = NAN;
  double norm_fit_residual = NAN;
  double psi_inf = NAN;
  double phase_constant = NAN;
  std::vector<std::string> warnings;

  // basin
  double basin_sup = NAN;
  double basin_weighted = NAN;
  bool basin_bracketed = false;

  std::vector<std::pair<std::string, double>> seconds;  // stage wall times
};

// Model-level checks run once per sweep.
struct ReferenceChecks {
  double layer_error = NAN;          // max node error against 1/(1 + e^{x/2})
  double hf_ratio_error = NAN;       // |D/sqrt(400) - 0.5| at eps = 0
  double hf_limit = NAN;
  double scattering_closed_form = NAN;  // worst relative error over sampled lambda
  double scattering_pairing = NAN;      // worst pairing identity error
  double green_continuity = NAN;     // relative jump of G across x = y
  double green_flux_jump = NAN;      // |jump of the flux + 1|
  double green_residual = NAN;
  double contour_independence = NAN; // worst |a - b| / (a_err + b_err)
  double stationarity = NAN;         // worst sup |G_t U' - U'| over the times
  double propagator = NAN;           // sup |time Green - method of lines|
  std::vector<std::pair<std::string, double>> seconds;
};

struct SweepResult {
  std::string config_hash;
  double sigma0 = NAN;
  std::vector<RunRecord> records;
  std::optional<ReferenceChecks> reference;
};

// Runs every eps on a bounded worker pool (SHOCKLAB_WORKERS), writing per-eps
// CSVs under output_dir/eps_<value>. A failing stage ends that eps only.
SweepResult run_sweep(const ExperimentConfig& config);
ReferenceChecks run_reference_checks(const ExperimentConfig& config);

struct Criterion {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Report {
  std::vector<Criterion> criteria;  // only those the records can decide
  std::string text;
  bool all_pass() const;
  int exit_code() const { return all_pass() ? 0 : 2; }
};

// Criteria with their pinned tolerances; those without data are omitted.
Report report(const SweepResult& result);

// CSV bundle: sweep.csv, criteria.csv, reference.csv, timings.csv, summary.txt.
void write_report(const std::string& dir, const SweepResult& result, const Report& rep);

Json to_json(const SweepResult& r);
SweepResult sweep_from_json(const Json& j);
void save_sweep(const std::string& path, const SweepResult& r);
SweepResult load_sweep(const std::string& path);

// |D'(0)| of the Evans function normalised by |D(1)|, by centred differences
// with a step below the distance to the essential spectrum.
double evans_slope_at_zero(const EpsProfile& profile, double step_fraction);

}  // namespace shocklab
