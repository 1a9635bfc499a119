#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "shocklab/common.hpp"

namespace shocklab {

using ScalarFn = std::function<double(double)>;

// Flux f and source g of u_t + f(u)_x = eps u_xx + g(u), with the derivatives
// the linearization needs. Immutable once constructed.
class ScalarLaw {
 public:
  struct Functions {
    ScalarFn f, df, d2f, g, dg;
  };

  // Throws InvalidModelError when a derivative disagrees with centered
  // difference quotients of its primitive on the sample range.
  static ScalarLaw create(std::string name, Functions fns, double sample_lo = -1.0,
                          double sample_hi = 2.0);
  static ScalarLaw polynomial(std::string name, std::vector<double> flux_coeffs,
                              std::vector<double> source_coeffs);

  const std::string& name() const { return name_; }
  double f(double u) const { return fns_.f(u); }
  double df(double u) const { return fns_.df(u); }
  double d2f(double u) const { return fns_.d2f(u); }
  double g(double u) const { return fns_.g(u); }
  double dg(double u) const { return fns_.dg(u); }

  const std::vector<double>& flux_coeffs() const { return flux_coeffs_; }
  const std::vector<double>& source_coeffs() const { return source_coeffs_; }

 private:
  ScalarLaw(std::string name, Functions fns) : name_(std::move(name)), fns_(std::move(fns)) {}

  std::string name_;
  Functions fns_;
  std::vector<double> flux_coeffs_;
  std::vector<double> source_coeffs_;
};

struct ShockTriple {
  double u_minus = 0.0;
  double u_plus = 0.0;
  double sigma0 = 0.0;

  static constexpr double kTolerance = 1e-10;

  // Validates g(u_minus) = g(u_plus) = 0 and the Rankine-Hugoniot relation.
  static ShockTriple create(const ScalarLaw& law, double u_minus, double u_plus);
  static ShockTriple create(const ScalarLaw& law, double u_minus, double u_plus, double sigma0);

  double jump() const { return u_plus - u_minus; }
  double midpoint() const { return 0.5 * (u_minus + u_plus); }
};

struct Model {
  ScalarLaw law;
  ShockTriple shock;
};

// "burgers-cubic": f = u^2/2, g = u(1-u)(u-1/2), shock 1 -> 0.
// "burgers-asymmetric": same flux, g = u(1-u)(u-1/4).
Model builtin_model(const std::string& name);
std::vector<std::string> builtin_model_names();

double rankine_hugoniot_speed(const ScalarLaw& law, double u_minus, double u_plus);

struct OleinikReport {
  bool ok = false;
  double margin = 0.0;
};
OleinikReport check_oleinik(const ScalarLaw& law, const ShockTriple& shock, int n_samples = 1001);

struct EndstateStability {
  bool ok = false;
  double omega_inf = 0.0;
};
EndstateStability check_endstate_stability(const ScalarLaw& law, const ShockTriple& shock);

using Vec2 = std::array<Complex, 2>;

// Eigendata of the frozen matrix [[alpha, 1], [lambda - beta, 0]] with
// alpha = f'(u) - sigma and beta = eps g'(u).
struct EndstateEigen {
  Complex mu_plus, mu_minus;
  Vec2 r_plus, r_minus;
  Vec2 l_plus, l_minus;
};

struct FrozenCoefficients {
  double alpha = 0.0;
  double beta = 0.0;

  static FrozenCoefficients at(const ScalarLaw& law, double u, double sigma, double eps) {
    return {law.df(u) - sigma, eps * law.dg(u)};
  }
  // Tip of the absolute-spectrum half-line beta - alpha^2/4 + R^-.
  double branch_point() const { return beta - 0.25 * alpha * alpha; }
};

inline constexpr double kBranchDistance = 1e-3;

// Distance from lambda to the half-line branch_point + R^-.
double branch_distance(Complex lambda, const FrozenCoefficients& c);

// Throws BranchCutError within branch_tol of the half-line.
EndstateEigen mu_pm(Complex lambda, const FrozenCoefficients& c,
                    double branch_tol = kBranchDistance);
EndstateEigen mu_pm(const ScalarLaw& law, const ShockTriple& shock, Complex lambda, double u,
                    double eps, double sigma_eps, double branch_tol = kBranchDistance);
inline EndstateEigen mu_pm(const ScalarLaw& law, const ShockTriple& shock, Complex lambda,
                           double u, double eps) {
  return mu_pm(law, shock, lambda, u, eps, shock.sigma0);
}

struct DecayRates {
  double theta_l = 0.0;
  double theta_r = 0.0;
  double min() const { return theta_l < theta_r ? theta_l : theta_r; }
};
DecayRates decay_rates(const ScalarLaw& law, const ShockTriple& shock, double sigma_eps,
                       double eps);

}  // namespace shocklab
