#pragma once

#include <array>
#include <memory>
#include <vector>

#include "shocklab/model.hpp"
#include "shocklab/profile.hpp"

namespace shocklab {

// Coefficients of V' = A(lambda, x) V with A = [[a, 1], [lambda - beta, 0]],
// a = f'(U) - sigma and beta = eps g'(U), sampled once per profile.
// Cell i spans [x_i, x_{i+1}] and carries the two Gauss-point samples.
struct SpectralCoefficients {
  ProfileGrid grid;
  double eps = 0.0;
  double sigma = 0.0;
  std::vector<double> a_node;
  std::vector<double> a_gauss;     // 2 per cell
  std::vector<double> beta_gauss;  // 2 per cell
  std::vector<double> cum_a;       // int_0^x a at nodes
  double a_plus = 0.0, a_minus = 0.0;
  double beta_plus = 0.0, beta_minus = 0.0;
  double I_plus = 0.0;   // int_0^inf (f'(U) - f'(u+))
  double I_minus = 0.0;  // int_-inf^0 (f'(U) - f'(u-))
  std::vector<double> du;  // U' at nodes

  FrozenCoefficients frozen_plus() const { return {a_plus, beta_plus}; }
  FrozenCoefficients frozen_minus() const { return {a_minus, beta_minus}; }
  // Rightmost tip of the two absolute-spectrum half-lines.
  double branch_tip() const;
};

using CoefficientsPtr = std::shared_ptr<const SpectralCoefficients>;
CoefficientsPtr make_coefficients(const EpsProfile& profile);

using Mat2 = std::array<Complex, 4>;  // row major

enum class Side { left, right };
enum class Kind { stable, unstable };

// Solution stored as mantissa * exp(log_scale) with mantissa norms in [0.1, 10].
struct ManifoldSolution {
  Side side = Side::right;
  Kind kind = Kind::stable;
  bool dual = false;
  std::vector<Vec2> values;
  std::vector<double> log_scale;

  Vec2 at(std::size_t i) const;  // exact value, may overflow for extreme scales
  Complex first(std::size_t i) const { return at(i)[0]; }
};

struct EvansValue {
  Complex lambda;
  Complex value;            // mantissa
  double log_scale = 0.0;   // D = value * exp(log_scale)
  Complex full() const;
};

// One spectral parameter; cell propagators are computed lazily and cached.
class SpectralProblem {
 public:
  SpectralProblem(CoefficientsPtr coeffs, Complex lambda);

  Complex lambda() const { return lambda_; }
  const SpectralCoefficients& coeffs() const { return *coeffs_; }
  const EndstateEigen& eigen_plus() const { return eig_plus_; }
  const EndstateEigen& eigen_minus() const { return eig_minus_; }

  // Exact propagator of the Magnus step over cell i (primal); the dual one is
  // this times exp(-h (a1 + a2) / 2).
  const Mat2& propagator(std::size_t cell) const;
  double dual_factor_log(std::size_t cell) const;

  // Integrates over the full grid; `half_only` stops at x = 0 (decaying kinds).
  ManifoldSolution integrate(Side side, Kind kind, bool dual = false,
                             bool half_only = false) const;

 private:
  CoefficientsPtr coeffs_;
  Complex lambda_;
  EndstateEigen eig_plus_, eig_minus_;
  mutable std::vector<Mat2> cache_;
  mutable std::vector<bool> cached_;
};

ManifoldSolution integrate_manifold(const SpectralProblem& problem, Side side, Kind kind,
                                    bool dual = false);

// Largest relative mismatch between consecutive stored states and an
// independent RK4 step (8 substeps) using the same interpolated coefficients.
double manifold_step_residual(const SpectralProblem& problem, const ManifoldSolution& m,
                              const EpsProfile& profile);

EvansValue evans(const CoefficientsPtr& coeffs, Complex lambda);
EvansValue evans(const EpsProfile& profile, Complex lambda);

struct ScatteringCoeffs {
  Complex rho_r, tau_r, rho_l, tau_l;
  Complex tilde_rho_r, tilde_tau_r, tilde_rho_l, tilde_tau_l;
};

// All eight manifolds for one lambda together with D and the expansion
// coefficients obtained from 2x2 solves at x = 0.
struct SpectralSolution {
  Complex lambda;
  ManifoldSolution rs, ru, ls, lu;          // primal
  ManifoldSolution d_rs, d_ru, d_ls, d_lu;  // dual
  EvansValue evans;
  ScatteringCoeffs coeffs;
  EndstateEigen eig_plus, eig_minus;
};

SpectralSolution solve_spectral(const CoefficientsPtr& coeffs, Complex lambda);

ScatteringCoeffs scattering_coeffs(const EpsProfile& profile, Complex lambda);

struct ScatteringCheck {
  double closed_form_error = 0.0;   // relative error of rho_r vs its closed form
  double expansion_error = 0.0;     // relative error of the four expansions at samples
  double self_pairing = 0.0;        // |V^{rs} . J tilde V^{rs}| / (|V||tilde V|)
  double cross_pairing_error = 0.0; // relative error of the two cross pairings
};
ScatteringCheck check_scattering(const SpectralSolution& sol, const SpectralCoefficients& c,
                                 const std::vector<double>& x_samples);

struct WronskianReport {
  std::vector<double> x;
  std::vector<double> rel_error;
  double max_rel_error = 0.0;
};
WronskianReport check_wronskian_transport(const EpsProfile& profile, Complex lambda,
                                          const std::vector<double>& x_samples);

struct HfRow {
  Complex lambda;
  Complex ratio;  // D / sqrt(lambda)
  double error = 0.0;
};
struct HfReport {
  double limit = 0.0;  // 2 exp(-I_+/2 + I_-/2)
  std::vector<HfRow> rows;
};
HfReport evans_hf_limit(const EpsProfile& profile, const std::vector<Complex>& lambdas);

// Cauchy-Riemann residual of D for a 5-point stencil of half-width h.
double cauchy_riemann_residual(const CoefficientsPtr& coeffs, Complex lambda, double h);

struct WindingResult {
  double winding = 0.0;         // accumulated argument / 2 pi
  int count = 0;                // rounded winding
  std::vector<Complex> nodes;   // refined polyline
  std::vector<double> argument; // unwrapped argument along the polyline
};

// Winding number of fn along the closed polyline; segments are bisected while
// the argument jump exceeds pi/4. Throws RefineContourError if a jump above pi
// survives refinement.
WindingResult winding_number(const std::function<Complex(Complex)>& fn,
                             const std::vector<Complex>& nodes, int max_depth = 12);

WindingResult count_roots(const EpsProfile& profile, const std::vector<Complex>& contour_nodes);

std::vector<Complex> circle_contour(Complex center, double radius, int n);
std::vector<Complex> rectangle_contour(double re_lo, double re_hi, double im_lo, double im_hi,
                                       int n_per_side);
// Circle around `center` with a slit of half-width `gap` around the real
// half-line (-inf, branch_tip]; equals the circle when it misses the half-line.
std::vector<Complex> keyhole_contour(Complex center, double radius, double branch_tip, double gap,
                                     int n);

// Half the distance from 0 to the rightmost point of the essential spectrum,
// floored at `floor` (the edge touches 0 when eps = 0).
double estimate_eta0(const SpectralCoefficients& c, double floor = 0.02);

}  // namespace shocklab
