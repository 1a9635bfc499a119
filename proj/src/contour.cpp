#include "shocklab/contour.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

namespace shocklab {

Complex ContourSpec::point(double t, double xi) const {
  const Complex z = 0.5 * (offset(t) + Complex(0.0, xi) * zeta(xi));
  return z * z - 0.25 * alpha * alpha + b;
}

Complex ContourSpec::derivative(double t, double xi) const {
  const Complex z = 0.5 * (offset(t) + Complex(0.0, xi) * zeta(xi));
  return Complex(0.0, 1.0) * zeta(xi) * z;
}

double ContourSpec::gaussian_cutoff(double t, double ratio) const {
  // Re Lambda is a downward parabola in xi on each half; take the worse half.
  double cut = 0.0;
  for (const Complex z : {zeta_plus, zeta_minus}) {
    const double re2 = (z * z).real();
    const double peak_xi = std::abs(offset(t) * z.imag() / re2);
    cut = std::max(cut, peak_xi + std::sqrt(4.0 * std::log(1.0 / ratio) / (re2 * t)));
  }
  return cut;
}

void validate(const ContourSpec& s) {
  for (const Complex z : {s.zeta_plus, s.zeta_minus}) {
    if (!(z.real() > std::abs(z.imag())))
      throw InvalidContourError("contour needs Re zeta > |Im zeta|");
  }
  if (!(s.zeta_plus.imag() < 0.0) || !(s.zeta_minus.imag() > 0.0))
    throw InvalidContourError("contour needs Im zeta_+ < 0 < Im zeta_-");
  if (s.kind == ContourSpec::Kind::large && s.beta0 < 0.0)
    throw InvalidContourError("large contour needs beta0 >= 0");
  if (s.kind == ContourSpec::Kind::small) {
    if (s.omega0 < 0.0) throw InvalidContourError("small contour needs omega0 >= 0");
    const double a = std::abs(s.alpha);
    if (s.omega0 < a) {
      const double factor = a / std::sqrt(a * a - s.omega0 * s.omega0);
      for (const Complex z : {s.zeta_plus, s.zeta_minus})
        if (z.real() < factor * std::abs(z.imag()))
          throw InvalidContourError("small contour violates the curve condition on zeta");
    }
  }
}

ContourSpec endstate_contour(const SpectralCoefficients& c, Side endstate, ContourSpec::Kind kind,
                             double offset_param, Complex zeta_plus, Complex zeta_minus) {
  const auto f = endstate == Side::right ? c.frozen_plus() : c.frozen_minus();
  ContourSpec s;
  s.kind = kind;
  s.alpha = f.alpha;
  s.b = f.beta;
  if (kind == ContourSpec::Kind::large)
    s.beta0 = offset_param;
  else
    s.omega0 = offset_param;
  s.zeta_plus = zeta_plus;
  s.zeta_minus = zeta_minus;
  validate(s);
  return s;
}

std::vector<Complex> build_contour(const ContourSpec& spec, double t) {
  validate(spec);
  if (!(t > 0.0)) throw InvalidContourError("contour needs t > 0");
  const int n = spec.n_nodes > 0 ? spec.n_nodes : 64;
  const double xi_max = spec.xi_max > 0.0 ? spec.xi_max : spec.gaussian_cutoff(t, 1e-12);
  std::vector<Complex> out;
  out.reserve(2 * n + 1);
  for (int k = -n; k <= n; ++k) out.push_back(spec.point(t, xi_max * k / n));
  return out;
}

namespace {
// Root sqrt(alpha^2/4 - b + Lambda) = (c0 + i xi zeta) / 2, which has positive
// real part under the sign conditions on zeta.
Complex curve_root(const ContourSpec& s, double t, double xi) {
  return 0.5 * (s.offset(t) + Complex(0.0, xi) * s.zeta(xi));
}

double exponent(const ContourSpec& s, double t, double beta, double xi) {
  return (s.point(t, xi) * t + (0.5 * s.alpha - curve_root(s, t, xi)) * beta).real();
}
}  // namespace

double large_curve_violation(const ContourSpec& s, double t, double beta,
                             const std::vector<double>& xi) {
  double worst = -std::numeric_limits<double>::infinity();
  const double b0 = s.beta0;
  for (double x : xi) {
    const Complex z = s.zeta(x);
    const double bound = -std::abs(s.b) * t - (b0 - s.alpha * t) * (b0 - s.alpha * t) / (4 * t) -
                         0.25 * x * x * (z * z).real() * t;
    worst = std::max(worst, exponent(s, t, beta, x) - bound);
  }
  return worst;
}

double small_curve_violation(const ContourSpec& s, double t, double beta, double eta,
                             const std::vector<double>& xi) {
  const double a = std::abs(s.alpha);
  const double w = s.omega0;
  double worst = -std::numeric_limits<double>::infinity();
  for (double x : xi) {
    const Complex z = s.zeta(x);
    const double bound = -std::abs(s.b) * t -
                         (a * t - beta) * (a * t - beta) / (4 * t) *
                             (1.0 - (1.0 + eta) * w * w / (a * a)) -
                         0.25 * x * x * ((z * z).real() - z.imag() * z.imag() / eta) * t;
    worst = std::max(worst, exponent(s, t, beta, x) - bound);
  }
  return worst;
}

double derivative_bound_violation(const ContourSpec& s, double t, const std::vector<double>& xi) {
  double worst = -std::numeric_limits<double>::infinity();
  for (double x : xi) {
    if (x == 0.0) continue;
    const Complex z = s.zeta(x);
    const double bound =
        std::abs(z) * (1.0 + z.real() / std::abs(z.imag())) * curve_root(s, t, x).real();
    worst = std::max(worst, std::abs(s.derivative(t, x)) - bound);
  }
  return worst;
}

ContourSpec CurveParameters::right_curve(const SpectralCoefficients& c) const {
  auto s = endstate_contour(c, Side::right, ContourSpec::Kind::small, omega_hf_r, zeta_plus,
                            zeta_minus);
  s.xi_split = xi_hf;
  return s;
}

ContourSpec CurveParameters::left_curve(const SpectralCoefficients& c) const {
  auto s = endstate_contour(c, Side::left, ContourSpec::Kind::small, omega_hf_l, zeta_plus,
                            zeta_minus);
  s.xi_split = xi_hf;
  return s;
}

CurveParameters curve_parameters(const SpectralCoefficients& c, double eta0, double kappa0) {
  const double ar = std::abs(c.a_plus), al = std::abs(c.a_minus);
  if (!(eta0 > 0.0) || 2.0 * eta0 >= std::min(ar * ar, al * al))
    throw InvalidContourError("eta0 must lie in (0, min alpha^2 / 2)");
  CurveParameters p;
  p.eta0 = eta0;
  p.kappa0 = kappa0;
  const double amax = std::max(ar, al);
  // Re zeta >= 2 max|alpha| / sqrt(2 eta0) |Im zeta|, with 10% slack.
  p.gamma = std::min(0.5, 0.9 * std::sqrt(2.0 * eta0) / (2.0 * amax));
  p.zeta_plus = {1.0, -p.gamma};
  p.zeta_minus = {1.0, p.gamma};
  p.omega_eta_r = std::sqrt(ar * ar - 2.0 * eta0);
  p.omega_eta_l = std::sqrt(al * al - 2.0 * eta0);

  // Smallest omega above |alpha| whose curve crosses the real axis at kappa0 or beyond.
  auto base = [&](double a, double b) {
    return std::max(a * (1.0 + 1e-3), std::sqrt(a * a + 4.0 * (kappa0 - b)));
  };
  double wr = base(ar, c.beta_plus), wl = base(al, c.beta_minus);
  // The reinforced constraint reads max(omega^2 - alpha^2) <= 2 (1/gamma^2 - 1) max(d omega)^2
  // once xi_hf = 2 max(d omega) / gamma is substituted.
  const double k = 2.0 * (1.0 / (p.gamma * p.gamma) - 1.0);
  for (int it = 0; it < 1000; ++it) {
    const double lhs = std::max(wr * wr - ar * ar, wl * wl - al * al);
    const double dw = std::max(wr - p.omega_eta_r, wl - p.omega_eta_l);
    if (lhs <= k * dw * dw) break;
    wr *= 1.01;
    wl *= 1.01;
  }
  p.omega_hf_r = wr;
  p.omega_hf_l = wl;
  p.xi_hf = 2.0 * std::max(wr - p.omega_eta_r, wl - p.omega_eta_l) / p.gamma;
  return p;
}

std::vector<ContourNode> quadrature_nodes(const ContourSpec& spec, double t,
                                          const QuadratureOptions& opts) {
  validate(spec);
  if (!(t > 0.0)) throw InvalidContourError("quadrature needs t > 0");
  const double split = spec.xi_split;
  const double xi_max =
      std::max(spec.xi_max > 0.0 ? spec.xi_max : spec.gaussian_cutoff(t, opts.tail_ratio),
               split + opts.panel_width);
  std::vector<ContourNode> out;
  auto push = [&](double xi, double w, double wg, bool lf) {
    out.push_back({xi, w, wg, spec.point(t, xi), spec.derivative(t, xi), lf});
  };

  if (opts.rule == QuadratureRule::gauss_kronrod) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    using G = boost::math::quadrature::gauss<double, 7>;
    const auto& xk = GK::abscissa();
    const auto& wk = GK::weights();
    const auto& xg = G::abscissa();
    const auto& wg = G::weights();
    // Gauss weight at a Kronrod abscissa, 0 when it is not a Gauss node.
    std::vector<double> embedded(xk.size(), 0.0);
    for (std::size_t i = 0; i < xk.size(); ++i)
      for (std::size_t j = 0; j < xg.size(); ++j)
        if (std::abs(xk[i] - xg[j]) < 1e-14) embedded[i] = wg[j];
    auto panel = [&](double a, double b, bool lf) {
      const double m = 0.5 * (a + b), r = 0.5 * (b - a);
      for (std::size_t i = 0; i < xk.size(); ++i) {
        if (xk[i] == 0.0) {
          push(m, r * wk[i], r * embedded[i], lf);
        } else {
          push(m - r * xk[i], r * wk[i], r * embedded[i], lf);
          push(m + r * xk[i], r * wk[i], r * embedded[i], lf);
        }
      }
    };
    if (split > 0.0) {
      const int n = std::max(1, opts.lf_panels);
      for (int k = 0; k < n; ++k) panel(split * k / n, split * (k + 1) / n, true);
    }
    const int n = std::max(1, static_cast<int>(std::ceil((xi_max - split) / opts.panel_width)));
    for (int k = 0; k < n; ++k)
      panel(split + (xi_max - split) * k / n, split + (xi_max - split) * (k + 1) / n, false);
  } else {
    auto segment = [&](double a, double b, bool lf) {
      const int n = std::max(1, static_cast<int>(std::ceil((b - a) / opts.trapezoid_step)));
      const double h = (b - a) / n;
      for (int k = 0; k <= n; ++k) push(a + h * k, (k == 0 || k == n) ? 0.5 * h : h, 0.0, lf);
    };
    if (split > 0.0) segment(0.0, split, true);
    segment(split, xi_max, false);
  }
  return out;
}

}  // namespace shocklab
