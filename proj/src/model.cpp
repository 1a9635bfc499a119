#include "shocklab/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace shocklab {

namespace {

double horner(const std::vector<double>& c, double u) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * u + *it;
  return acc;
}

std::vector<double> derivative(const std::vector<double>& c) {
  std::vector<double> d;
  for (std::size_t k = 1; k < c.size(); ++k) d.push_back(static_cast<double>(k) * c[k]);
  return d;
}

void check_derivative(const std::string& what, const ScalarFn& prim, const ScalarFn& deriv,
                      double lo, double hi) {
  constexpr int kSamples = 9;
  constexpr double kStep = 1e-4;
  for (int i = 0; i < kSamples; ++i) {
    const double u = lo + (hi - lo) * i / (kSamples - 1);
    const double quotient = (prim(u + kStep) - prim(u - kStep)) / (2 * kStep);
    const double d = deriv(u);
    const double scale = 1.0 + std::abs(d) + std::abs(prim(u));
    if (!std::isfinite(d) || std::abs(quotient - d) > 1e-6 * scale) {
      std::ostringstream msg;
      msg << what << " inconsistent with difference quotient at u=" << u << ": " << d
          << " vs " << quotient;
      throw InvalidModelError(msg.str());
    }
  }
}

}  // namespace

ScalarLaw ScalarLaw::create(std::string name, Functions fns, double sample_lo, double sample_hi) {
  if (!fns.f || !fns.df || !fns.d2f || !fns.g || !fns.dg)
    throw InvalidModelError("scalar law '" + name + "' is missing an evaluator");
  check_derivative("df", fns.f, fns.df, sample_lo, sample_hi);
  check_derivative("d2f", fns.df, fns.d2f, sample_lo, sample_hi);
  check_derivative("dg", fns.g, fns.dg, sample_lo, sample_hi);
  return ScalarLaw(std::move(name), std::move(fns));
}

ScalarLaw ScalarLaw::polynomial(std::string name, std::vector<double> flux_coeffs,
                                std::vector<double> source_coeffs) {
  auto df = derivative(flux_coeffs);
  auto d2f = derivative(df);
  auto dg = derivative(source_coeffs);
  Functions fns{
      [c = flux_coeffs](double u) { return horner(c, u); },
      [c = df](double u) { return horner(c, u); },
      [c = d2f](double u) { return horner(c, u); },
      [c = source_coeffs](double u) { return horner(c, u); },
      [c = dg](double u) { return horner(c, u); },
  };
  ScalarLaw law = create(std::move(name), std::move(fns));
  law.flux_coeffs_ = std::move(flux_coeffs);
  law.source_coeffs_ = std::move(source_coeffs);
  return law;
}

ShockTriple ShockTriple::create(const ScalarLaw& law, double u_minus, double u_plus) {
  return create(law, u_minus, u_plus, rankine_hugoniot_speed(law, u_minus, u_plus));
}

ShockTriple ShockTriple::create(const ScalarLaw& law, double u_minus, double u_plus,
                                double sigma0) {
  if (u_minus == u_plus) throw DegenerateShockError("shock endstates coincide");
  if (std::abs(law.g(u_minus)) > kTolerance || std::abs(law.g(u_plus)) > kTolerance)
    throw InvalidModelError("endstates are not zeros of the source term");
  const double rh = law.f(u_plus) - law.f(u_minus) - sigma0 * (u_plus - u_minus);
  if (std::abs(rh) > kTolerance) throw InvalidModelError("Rankine-Hugoniot relation violated");
  return ShockTriple{u_minus, u_plus, sigma0};
}

Model builtin_model(const std::string& name) {
  if (name == "burgers-cubic") {
    auto law = ScalarLaw::polynomial(name, {0.0, 0.0, 0.5}, {0.0, -0.5, 1.5, -1.0});
    auto shock = ShockTriple::create(law, 1.0, 0.0);
    return {std::move(law), shock};
  }
  if (name == "burgers-asymmetric") {
    auto law = ScalarLaw::polynomial(name, {0.0, 0.0, 0.5}, {0.0, -0.25, 1.25, -1.0});
    auto shock = ShockTriple::create(law, 1.0, 0.0);
    return {std::move(law), shock};
  }
  throw ConfigError("unknown built-in model '" + name + "'");
}

std::vector<std::string> builtin_model_names() { return {"burgers-cubic", "burgers-asymmetric"}; }

double rankine_hugoniot_speed(const ScalarLaw& law, double u_minus, double u_plus) {
  if (u_minus == u_plus) throw DegenerateShockError("shock endstates coincide");
  return (law.f(u_plus) - law.f(u_minus)) / (u_plus - u_minus);
}

OleinikReport check_oleinik(const ScalarLaw& law, const ShockTriple& s, int n_samples) {
  double margin = std::min(s.sigma0 - law.df(s.u_plus), law.df(s.u_minus) - s.sigma0);
  for (int k = 1; k <= n_samples; ++k) {
    const double tau = static_cast<double>(k) / (n_samples + 1);
    const double w = tau * s.u_minus + (1.0 - tau) * s.u_plus;
    const double left_chord = (law.f(w) - law.f(s.u_minus)) / (w - s.u_minus);
    const double right_chord = (law.f(w) - law.f(s.u_plus)) / (w - s.u_plus);
    margin = std::min(margin, left_chord - right_chord);
  }
  return {margin > 0.0, margin};
}

EndstateStability check_endstate_stability(const ScalarLaw& law, const ShockTriple& s) {
  const double gl = law.dg(s.u_minus);
  const double gr = law.dg(s.u_plus);
  return {gl < 0.0 && gr < 0.0, std::min(std::abs(gl), std::abs(gr))};
}

double branch_distance(Complex lambda, const FrozenCoefficients& c) {
  const double p = c.branch_point();
  if (lambda.real() >= p) return std::abs(lambda - p);
  return std::abs(lambda.imag());
}

EndstateEigen mu_pm(Complex lambda, const FrozenCoefficients& c, double branch_tol) {
  if (branch_distance(lambda, c) < branch_tol) {
    std::ostringstream msg;
    msg << "lambda=" << lambda << " within " << branch_tol << " of the branch half-line at "
        << c.branch_point();
    throw BranchCutError(msg.str());
  }
  const Complex root = std::sqrt(0.25 * c.alpha * c.alpha + lambda - c.beta);
  EndstateEigen e;
  e.mu_plus = 0.5 * c.alpha + root;
  e.mu_minus = 0.5 * c.alpha - root;
  const Complex gap = e.mu_plus - e.mu_minus;
  e.r_plus = {1.0, -e.mu_minus};
  e.r_minus = {1.0, -e.mu_plus};
  e.l_plus = {e.mu_plus / gap, 1.0 / gap};
  e.l_minus = {-e.mu_minus / gap, -1.0 / gap};
  return e;
}

EndstateEigen mu_pm(const ScalarLaw& law, const ShockTriple&, Complex lambda, double u, double eps,
                    double sigma_eps, double branch_tol) {
  return mu_pm(lambda, FrozenCoefficients::at(law, u, sigma_eps, eps), branch_tol);
}

DecayRates decay_rates(const ScalarLaw& law, const ShockTriple& s, double sigma_eps, double eps) {
  auto rate = [&](double u) {
    const double a = law.df(u) - sigma_eps;
    return 0.5 * std::abs(a) + 0.5 * std::sqrt(a * a + 4.0 * eps * std::abs(law.dg(u)));
  };
  return {rate(s.u_minus), rate(s.u_plus)};
}

}  // namespace shocklab
