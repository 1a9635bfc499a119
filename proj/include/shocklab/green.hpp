#pragma once

#include <memory>
#include <string>
#include <vector>

#include "shocklab/contour.hpp"
#include "shocklab/spectral.hpp"

namespace shocklab {

// m * exp(log), for quantities that over- or underflow on their own.
struct Scaled {
  Complex m;
  double log = 0.0;
  Complex value() const;
};
Scaled operator*(const Scaled& a, const Scaled& b);
Scaled operator*(const Scaled& a, Complex c);
Scaled operator+(const Scaled& a, const Scaled& b);

// Resolvent kernel (lambda - L)^{-1}(x, y) of L w = w'' - (a w)' + beta w for one
// lambda. The kernel equals the first component of V(x) times the first
// component of the dual solution at y; its flux component jumps by -1 across
// x = y (the sign making it the resolvent of L rather than of -L).
class SpectralGreen {
 public:
  // Throws NearRootError when |D(lambda)| < det_floor.
  SpectralGreen(CoefficientsPtr coeffs, Complex lambda, double det_floor = 1e-10);

  Complex lambda() const { return sol_.lambda; }
  const SpectralSolution& solution() const { return sol_; }

  // Kernel at grid nodes (i, j), using the representation that only evaluates
  // decaying factors for the sign pattern of (x, y, x - y).
  Complex operator()(std::size_t i, std::size_t j) const { return value(i, j, i >= j); }
  // Branch x >= y (upper) or x < y (lower), both extended to x = y.
  Complex value(std::size_t i, std::size_t j, bool upper) const;
  // Flux component (V_2(x) instead of V_1(x)) of the same branch.
  Complex flux(std::size_t i, std::size_t j, bool upper) const;
  // Unexpanded form: V^{rs} (x) dual V^{lu}(y) above the diagonal, V^{lu} dual
  // V^{rs} below, without the scattering re-expansions.
  Complex unexpanded(std::size_t i, std::size_t j) const;

  // Largest |(lambda - L) G(., y)| over x at least `gap` nodes away from y,
  // relative to sup |G(., y)|, with sixth-order differences in x.
  double residual(const EpsProfile& profile, std::size_t j, std::size_t gap = 4) const;

 private:
  Complex component(std::size_t i, std::size_t j, bool upper, int comp) const;

  CoefficientsPtr coeffs_;
  SpectralSolution sol_;
  Scaled pre_minus_;  // exp(I_-) / D
  Scaled pre_plus_;   // exp(-I_+) / D
};

Complex spectral_green(const EpsProfile& profile, Complex lambda, double x, double y);

// Decomposition of G(lambda; x, y) for the pt/ess split: `cross` carries the
// whole kernel when x and y lie on opposite sides of 0; otherwise `tau` and
// `rho` are the transmitted and reflected parts of the same-side expansion.
struct GreenPieces {
  Scaled cross, tau, rho;
};

// Per-node data of a contour, restricted to the window |x| <= half_width.
class ContourBundle {
 public:
  struct Options {
    double window = 30.0;
    QuadratureOptions quadrature;
  };

  ContourBundle(CoefficientsPtr coeffs, const ContourSpec& spec, double t_min,
                const Options& opts);

  const ContourSpec& spec() const { return spec_; }
  const std::vector<ContourNode>& nodes() const { return nodes_; }
  double t_min() const { return t_min_; }
  std::size_t first_index() const { return lo_; }
  std::size_t last_index() const { return hi_; }
  bool covers(std::size_t i) const { return i >= lo_ && i <= hi_; }

  GreenPieces pieces(std::size_t k, std::size_t i, std::size_t j) const;
  // First component of dual V^{rs} (j right of 0) or dual V^{lu} (j left).
  Scaled dual_decaying(std::size_t k, std::size_t j) const;
  Scaled pre_plus(std::size_t k) const { return data_[k].pre_plus; }
  Scaled pre_minus(std::size_t k) const { return data_[k].pre_minus; }

  // Sum over y of G(lambda_k; x_i, y) w(y) split into pieces, for every i in
  // the window; w is indexed by grid node and ignored outside the window.
  std::vector<GreenPieces> apply(std::size_t k, const std::vector<double>& w,
                                 double weight_h) const;

 private:
  struct NodeData {
    Scaled pre_minus, pre_plus;
    ScatteringCoeffs sc;
    // Right half [mid, hi] then left half [lo, mid], first components.
    std::vector<Scaled> rs, ru, d_rs, d_ru;
    std::vector<Scaled> lu, ls, d_lu, d_ls;
  };
  const NodeData& node(std::size_t k) const { return data_[k]; }

  CoefficientsPtr coeffs_;
  ContourSpec spec_;
  double t_min_ = 0.0;
  std::size_t lo_ = 0, mid_ = 0, hi_ = 0;
  std::vector<ContourNode> nodes_;
  std::vector<NodeData> data_;
};

// Crank-Nicolson method of lines for w_t = L w with fourth-order differences,
// Dirichlet ends, and two backward-Euler half steps to damp rough data.
class MolPropagator {
 public:
  explicit MolPropagator(const EpsProfile& profile, double dt = 0.002);
  std::vector<double> apply(const std::vector<double>& w0, double t) const;
  // Column G_t(., y_j) from a discrete delta at node j.
  std::vector<double> column(std::size_t j, double t) const;
  // Row G_t(x_i, .) from the adjoint problem.
  std::vector<double> row(std::size_t i, double t) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

enum class Representation { mol, cross, same_side_inside, same_side_outside };
std::string to_string(Representation r);

struct GreenSample {
  double total = 0.0;
  double pt = 0.0;
  double ess = 0.0;
  double pt_tilde = 0.0;
  double phase = 0.0;           // G^p(y)
  double error_estimate = 0.0;  // tail + panel + roundoff
  Representation representation = Representation::cross;
};

struct PhaseValue {
  double G_p = 0.0;
  double dG_p = 0.0;
};

struct TimeGreenOptions {
  double t_min = 0.5;
  double t_max = 40.0;    // sets the low-frequency panel count
  double eta0 = 0.0;      // 0 estimates it from the endstates
  double kappa0 = 0.05;
  double truncation_tol = 1e-8;
  double mol_below = 0.01;
  double mol_dt = 0.002;
  ContourBundle::Options bundle;
};

// Time Green function on the split curves through both endstates, with the
// pt/ess/phase decomposition. Contours: right curve for y >= 0, left for y < 0.
class TimeGreen {
 public:
  TimeGreen(const EpsProfile& profile, const TimeGreenOptions& opts = {});

  const CurveParameters& curves() const { return curves_; }
  const ContourBundle& bundle(bool right) const { return right ? *right_ : *left_; }
  const EpsProfile& profile() const { return profile_; }
  const SpectralCoefficients& coeffs() const { return *coeffs_; }
  double a_right() const { return a_r_; }
  double a_left() const { return a_l_; }
  // Relative spread of V_1(0, x) / U'(x) over |x| <= 10 for both manifolds.
  double phase_constant_spread() const { return a_spread_; }

  // Pointwise values at grid nodes; t below mol_below uses the MOL oracle.
  double total(double t, std::size_t i, std::size_t j) const;
  GreenSample split(double t, std::size_t i, std::size_t j) const;
  GreenSample split_at(double t, double x, double y) const;
  PhaseValue phase(double t, std::size_t j) const;
  // Whole phase kernel over the window nodes at once.
  std::vector<PhaseValue> phase_row(double t) const;

  struct Action {
    std::vector<double> total, pt, ess;
    double error_estimate = 0.0;
  };
  // x -> sum_y G_t(x, y) w(y) h over the window, for every window node x.
  Action apply(double t, const std::vector<double>& w) const;
  double cone_right(double t) const { return curves_.omega_hf_r * t; }
  double cone_left(double t) const { return curves_.omega_hf_l * t; }

 private:
  bool inside_cone(double t, double y) const;

  EpsProfile profile_;
  CoefficientsPtr coeffs_;
  TimeGreenOptions opts_;
  CurveParameters curves_;
  std::shared_ptr<const ContourBundle> right_, left_;
  std::shared_ptr<const MolPropagator> mol_;
  // pre-factor * phase constant * dual decaying solution, per low-frequency
  // node (outer) and window node (inner), for j in [j0, j1].
  struct PhaseCache {
    std::size_t j0 = 0, j1 = 0;
    std::vector<std::size_t> nodes;
    std::vector<Complex> base;
  };
  PhaseCache phase_right_, phase_left_;
  double a_r_ = 0.0, a_l_ = 0.0, a_spread_ = 0.0;
};

struct TimeGreenValue {
  double value = 0.0;
  double truncation = 0.0;
  double panel_error = 0.0;
  double roundoff = 0.0;
  double error_estimate() const { return truncation + panel_error + roundoff; }
};

// Single-contour evaluation for an arbitrary admissible contour; throws
// ExtendContourError when the tail estimate exceeds `tol`.
TimeGreenValue time_green(const ContourBundle& bundle, double t, std::size_t i, std::size_t j,
                          double tol = 1e-8);

// Smooth cutoff, 0 on [0, 1] and 1 on [2, inf), C^2 quintic smoothstep between.
double phase_cutoff(double t);
double phase_cutoff_derivative(double t);

struct BoundRow {
  std::string name;
  double constant = 0.0;          // on the base sample set
  double constant_refined = 0.0;  // on the refined sample set
  bool pass = false;
  std::string detail;
};
struct BoundsReport {
  double theta = 0.0;
  double omega = 0.0;
  double ess_speed = 0.0;       // fitted drift of the G_ess peak
  double ess_speed_target = 0.0;
  double pt_tilde_slope = 0.0;  // largest fitted log-slope of |G~pt| in |x|
  double short_time_mass = 0.0;
  std::vector<BoundRow> rows;
  bool pass() const;
};
BoundsReport sample_pointwise_bounds(const TimeGreen& green);

}  // namespace shocklab
