#pragma once

#include <string>
#include <vector>

#include "shocklab/grid.hpp"
#include "shocklab/model.hpp"

namespace shocklab {

// Values are stored twice: absolute (u) and as the deviation from the endstate
// on the same side of x = 0 (tail), which keeps relative accuracy where the
// profile is within roundoff of its endstate.
struct LayerProfile {
  ScalarLaw law;
  ShockTriple shock;
  ProfileGrid grid;
  std::vector<double> u0;
  std::vector<double> du0;
  std::vector<double> tail0;
};

struct FixedPointDiagnostics {
  int iterations = 0;
  std::vector<double> corrections;  // sup-norm of successive updates
  double contraction = 0.0;         // largest ratio of successive corrections
  double sigma_tilde = 0.0;         // sigma functional at the fixed point
  std::vector<double> u_tilde;      // fixed-point iterate before polishing
};

struct EpsProfile {
  ScalarLaw law;
  ShockTriple shock;
  ProfileGrid grid;
  double eps = 0.0;
  double sigma_eps = 0.0;
  double sigma_tilde = 0.0;
  std::vector<double> u_eps;
  std::vector<double> du_eps;
  std::vector<double> tail_eps;
  std::vector<double> u_tilde;
  FixedPointDiagnostics fixed_point;
  double polish_residual = 0.0;

  double endstate(std::size_t i) const {
    return i < grid.center() ? shock.u_minus : shock.u_plus;
  }
  double advection(std::size_t i) const { return law.df(u_eps[i]) - sigma_eps; }
  // Second derivative from the profile equation U'' = (f'(U) - sigma) U' - eps g(U).
  double second_derivative(std::size_t i) const;
  std::vector<double> second_derivatives() const;
  // Source term eps g(U) evaluated from the tail to keep relative accuracy.
  double source(std::size_t i) const;
};

// Default half-width so that endstate tails are below 1e-15 (40 / min theta0).
ProfileGrid default_profile_grid(const ScalarLaw& law, const ShockTriple& shock,
                                 double spacing = 0.05);

LayerProfile solve_layer(const ScalarLaw& law, const ShockTriple& shock, const ProfileGrid& grid,
                         double anchor_x = 0.0);

double sigma_functional(const LayerProfile& layer, const std::vector<double>& u_tilde, double eps);

// v with L0 v = h and v(0) = 0, for zero-mean h.
std::vector<double> apply_L0_dagger(const LayerProfile& layer, const std::vector<double>& h);

// Forward operator L0 v = v'' - ((f'(U0) - sigma0) v)' by centered differences.
std::vector<double> apply_L0(const LayerProfile& layer, const std::vector<double>& v);

struct ProfileOptions {
  double tol = 1e-12;
  int max_iter = 200;
  bool polish = true;
  double polish_tol = 1e-13;
};

EpsProfile solve_profile_eps(const LayerProfile& layer, double eps, ProfileOptions opts = {});

// Profile of the eps = 0 layer seen as an EpsProfile.
EpsProfile layer_as_profile(const LayerProfile& layer);

// Pads a profile with its endstates to a wider grid of the same spacing.
EpsProfile extend_profile(const EpsProfile& p, double half_width);

struct ProfileResidual {
  double max_residual = 0.0;  // fourth-order Hermite collocation residual
  bool monotone = false;
  bool anchored = false;
};
ProfileResidual profile_residual(const EpsProfile& p);

struct AsymptoticsRow {
  double eps = 0.0;
  std::vector<double> left_diff;   // index k: sup over x <= 0
  std::vector<double> right_diff;  // index k: sup over x >= 0
  std::vector<double> ratio;       // max(left, right) / eps per k
  double weighted_diff = 0.0;      // sup e^{0.4 theta0 |x|} |U_eps - U0|
  double weighted_ratio = 0.0;     // weighted_diff / eps
  double sigma_drift = 0.0;        // |sigma_eps - sigma0|
};
struct AsymptoticsReport {
  std::vector<AsymptoticsRow> rows;
  std::vector<double> ratio_spread;  // max/min of ratio[k] over eps > 0
  double weighted_spread = 0.0;
  bool pass = false;
};
AsymptoticsReport verify_profile_asymptotics(const LayerProfile& layer,
                                             const std::vector<EpsProfile>& profiles,
                                             int k_max = 1);

void write_profile_csv(const std::string& path, const LayerProfile& layer, const EpsProfile& p);
EpsProfile read_profile_csv(const std::string& path, const Model& model);

}  // namespace shocklab
