#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "shocklab/green.hpp"
#include "shocklab/profile.hpp"

namespace shocklab {

// Perturbation in the frame of the shifted profile: the physical solution is
// u(t, x) = U(x + psi(t)) + v(t, x + psi(t)) with fast variables throughout.
struct EvolutionState {
  double t = 0.0;
  std::vector<double> v;
  double psi = 0.0;
  double dpsi = 0.0;
};

enum class PhaseMethod { none, anchor, duhamel };
enum class Scheme { imex1, cnab2 };

std::string to_string(PhaseMethod m);
std::string to_string(Scheme s);
PhaseMethod parse_phase_method(const std::string& s);
Scheme parse_scheme(const std::string& s);

// Initial perturbations. Plateau data is a smoothstep rise on the right of the
// shock, placed in slow units (positions times 1/eps) so that its geometry is
// fixed as eps varies, held constant out to a fast-unit ramp that brings it
// to zero at the right boundary.
struct InitSpec {
  enum class Kind { zero, gaussian, plateau, translate, csv };
  Kind kind = Kind::zero;
  double amplitude = 0.0;  // sup amplitude, or the weighted norm if `weighted`
  bool weighted = false;
  double center = 0.0;       // gaussian
  double width = 1.0;        // gaussian
  double slow_start = 0.5;   // plateau: slow position of the rise midpoint
  double slow_ramp = 0.25;   // plateau: slow width of the rise
  double boundary_ramp = 40.0;
  double shift = 0.0;        // translate: v0 = U(x + shift) - U(x)
  std::string path;          // csv: columns x, v
};
std::string to_string(InitSpec::Kind k);
InitSpec::Kind parse_init_kind(const std::string& s);

struct EvolutionOptions {
  double half_width = 260.0;  // fast-frame domain [-L, L], Dirichlet v = 0
  double cfl = 0.4;           // dt = cfl * h unless dt > 0
  double dt = 0.0;
  Scheme scheme = Scheme::imex1;
  PhaseMethod phase = PhaseMethod::anchor;
  double theta = 0.0;  // 0 takes 0.1 min(theta0_l, theta0_r)
  double x_star = 10.0;
  double sample_every = 0.5;
  double blowup_factor = 10.0;
  // Duhamel phase: kernel and history on a coarse time grid.
  double duhamel_step = 0.1;
  std::size_t duhamel_max_bytes = std::size_t{512} << 20;
  TimeGreenOptions green;
};

// Multiscale weights 1 / (1 + eps^-j exp(-theta |x|)) evaluated in the fast
// frame, summed over derivative orders j <= k.
struct WeightedNorm {
  double theta = 0.0;
  double eps = 0.0;
  int k = 0;
  double value = 0.0;
  std::vector<double> terms;  // sup of the j-th weighted derivative
};
WeightedNorm weighted_norm(std::span<const double> v, const ProfileGrid& grid, double eps,
                           double theta, int k);

// sup over |x| >= x_star of |v_x| / (eps + exp(-theta |x|)).
double max_principle_monitor(std::span<const double> v, const ProfileGrid& grid, double eps,
                             double x_star, double theta);

// -(f'(U + w) - f'(U) + phi) w_x + eps (g(U + w) - g(U) - g'(U) w)
//   - (f'(U + w) - f'(U) - f''(U) w) U', with centred differences for w_x.
std::vector<double> nonlinear_residual(const EpsProfile& profile, std::span<const double> w,
                                       double phi);

struct DecayFit {
  double rate = 0.0;
  double amplitude = 0.0;
  double t0 = 0.0, t1 = 0.0;  // window actually used
  double residual = 0.0;      // RMS of the log-scale fit
  std::size_t points = 0;
  bool ok() const { return points >= 5; }
};
// Least squares on (t, ln value) over [t0, t1], keeping only values above
// 100 times `noise_floor`.
DecayFit fit_decay(std::span<const double> t, std::span<const double> value, double t0,
                   double t1, double noise_floor = 1e-12);

struct SeriesRow {
  double t = 0.0;
  double psi = 0.0;
  double dpsi = 0.0;
  double sup = 0.0;
  double norm0 = 0.0;
  double norm1 = 0.0;
  double monitor = 0.0;
};

// Fast-frame solver for the perturbation equation with phase tracking.
class Evolver {
 public:
  // `profile` lives on its own grid; the evolution grid has the same spacing
  // and half-width opts.half_width (at least the profile's).
  Evolver(const EpsProfile& profile, const EvolutionOptions& opts);
  ~Evolver();
  Evolver(Evolver&&) noexcept;

  const ProfileGrid& grid() const;
  const EpsProfile& frame_profile() const;  // profile padded to the evolution grid
  double dt() const;
  double theta() const;
  PhaseMethod phase_method() const;
  const std::vector<std::string>& warnings() const;

  std::vector<double> initial_data(const InitSpec& spec) const;
  // Starts from v0 with phase psi0; the anchor method re-centres at once.
  void reset(std::vector<double> v0, double psi0 = 0.0);
  const EvolutionState& state() const;

  // One step; throws DivergenceError on blow-up or a lost shock.
  const EvolutionState& step();
  // Advances to t_end (rounded to whole steps), sampling every opts.sample_every.
  // `stop` may end the run early after a sample.
  std::vector<SeriesRow> run(double t_end,
                             const std::function<bool(const SeriesRow&)>& stop = {});
  SeriesRow sample() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Decay experiment on plateau data: fits of the weighted norm, |psi'| and the
// monitor over a window fixed in slow time, and the tail-fitted phase limit.
struct DecayOptions {
  double amplitude = 0.05;     // weighted W^{1,inf} norm of v0
  double window_start = 1.5;   // slow time
  double window_end = 4.0;
  EvolutionOptions evolution;
  InitSpec init;               // kind plateau unless overridden
};
struct DecayReport {
  double eps = 0.0;
  double target_rate = 0.0;  // eps * omega_inf
  double v0_sup = 0.0;
  double v0_weighted = 0.0;
  DecayFit norm_fit, dpsi_fit, monitor_fit;
  double psi0 = 0.0;
  double psi_inf = 0.0;
  double phase_constant = 0.0;  // eps |psi_inf - psi0| / sup|v0|, slow units
  std::vector<SeriesRow> series;
  std::vector<std::string> warnings;
  bool rates_in_band(double lo = 0.8, double hi = 1.2) const;
};
DecayReport decay_experiment(const EpsProfile& profile, const DecayOptions& opts = {});

// Largest amplitude of a fixed plateau shape that still decays: the weighted
// norm must drop below half its initial value by slow time `horizon`.
struct BasinOptions {
  double lo = 0.05, hi = 1.0;  // sup amplitudes bracketing the threshold
  int iterations = 10;
  double horizon = 4.0;  // slow time
  EvolutionOptions evolution;
  InitSpec init;
};
struct BasinReport {
  double eps = 0.0;
  double threshold_sup = 0.0;       // A* in sup norm
  double threshold_weighted = 0.0;  // A* in the weighted W^{1,inf} norm
  bool bracketed = false;
  std::vector<std::pair<double, bool>> trials;  // (sup amplitude, decayed)
};
BasinReport basin_threshold(const EpsProfile& profile, const BasinOptions& opts = {});

// Fast-frame run (no phase) against a direct solve of the original equation
// on the matched slow grid, compared at slow time `slow_time`.
struct FrameCheck {
  double max_difference = 0.0;
  double slow_time = 0.0;
};
FrameCheck frame_consistency(const EpsProfile& profile, double slow_time, double dt,
                             const InitSpec& init);

void write_series_csv(const std::string& path, const std::vector<SeriesRow>& rows);

}  // namespace shocklab
