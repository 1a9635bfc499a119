#pragma once

#include <vector>

#include "shocklab/spectral.hpp"

namespace shocklab {

// Curve Lambda(xi) defined by 2 sqrt(alpha^2/4 - b + Lambda) = c0 + i xi zeta_{sign xi},
// i.e. Lambda(xi) = ((c0 + i xi zeta)/2)^2 - alpha^2/4 + b, with c0 = beta0 / t for
// the large kind and c0 = omega0 for the small kind.
struct ContourSpec {
  enum class Kind { large, small };
  Kind kind = Kind::small;
  double alpha = 0.0;
  double b = 0.0;
  double beta0 = 0.0;
  double omega0 = 0.0;
  Complex zeta_plus{1.0, -0.5};
  Complex zeta_minus{1.0, 0.5};
  double xi_max = 0.0;  // 0 selects the Gaussian cutoff at build time
  int n_nodes = 0;      // nodes per half for build_contour
  double xi_split = 0.0;  // low/high-frequency boundary, 0 when unused

  double offset(double t) const { return kind == Kind::large ? beta0 / t : omega0; }
  Complex zeta(double xi) const { return xi >= 0.0 ? zeta_plus : zeta_minus; }
  Complex point(double t, double xi) const;
  Complex derivative(double t, double xi) const;
  // xi beyond which |exp(Lambda t)| has dropped below `ratio` times its peak.
  double gaussian_cutoff(double t, double ratio) const;
};

// Throws InvalidContourError unless Re zeta > |Im zeta|, -+Im zeta_+- > 0, and,
// for the small kind with omega0 < |alpha|, Re zeta >= |alpha| / sqrt(alpha^2 -
// omega0^2) |Im zeta|.
void validate(const ContourSpec& spec);

ContourSpec endstate_contour(const SpectralCoefficients& c, Side endstate, ContourSpec::Kind kind,
                             double offset_param, Complex zeta_plus, Complex zeta_minus);

// Symmetric xi-grid with spec.n_nodes points per half on [-xi_max, xi_max].
std::vector<Complex> build_contour(const ContourSpec& spec, double t);

// Largest excess of Re(Lambda t + (alpha/2 - sqrt(alpha^2/4 - b + Lambda)) beta)
// over the large-curve bound at the given xi (nonpositive when it holds).
double large_curve_violation(const ContourSpec& spec, double t, double beta,
                             const std::vector<double>& xi);
// Same for the second small-curve bound (omega0 < |alpha|) with trade-off eta.
double small_curve_violation(const ContourSpec& spec, double t, double beta, double eta,
                             const std::vector<double>& xi);
// Largest excess of |Lambda'| over its bound by the real part of the root.
double derivative_bound_violation(const ContourSpec& spec, double t,
                                  const std::vector<double>& xi);

// The split curves through the endstates and the frequency cut between them.
struct CurveParameters {
  double eta0 = 0.0;
  double kappa0 = 0.0;      // minimal crossing Lambda(0) of both curves
  double gamma = 0.0;       // zeta = 1 -+ i gamma
  Complex zeta_plus, zeta_minus;
  double omega_eta_r = 0.0, omega_eta_l = 0.0;
  double omega_hf_r = 0.0, omega_hf_l = 0.0;
  double xi_hf = 0.0;

  ContourSpec right_curve(const SpectralCoefficients& c) const;
  ContourSpec left_curve(const SpectralCoefficients& c) const;
};
CurveParameters curve_parameters(const SpectralCoefficients& c, double eta0,
                                 double kappa0 = 0.05);

enum class QuadratureRule { gauss_kronrod, trapezoid };

struct QuadratureOptions {
  QuadratureRule rule = QuadratureRule::gauss_kronrod;
  double panel_width = 0.5;     // Gauss-Kronrod panels on the high-frequency part
  int lf_panels = 8;            // Gauss-Kronrod panels on [0, xi_split]
  double trapezoid_step = 0.05;
  double tail_ratio = 1e-12;    // Gaussian factor at the cutoff relative to the peak
};

struct ContourNode {
  double xi = 0.0;
  double weight = 0.0;          // quadrature weight in xi
  double embedded_weight = 0.0; // Gauss weight of the embedded rule (0 off its nodes)
  Complex lambda;
  Complex dlambda;
  bool low_frequency = false;
};

// Nodes on xi in [0, xi_max]; conjugate symmetry of real problems supplies the
// other half. Low-frequency nodes are those with xi < spec.xi_split.
std::vector<ContourNode> quadrature_nodes(const ContourSpec& spec, double t,
                                          const QuadratureOptions& opts);

}  // namespace shocklab
