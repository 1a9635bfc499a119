#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "shocklab/green.hpp"

using namespace shocklab;

namespace {

const Model kCubic = builtin_model("burgers-cubic");

const EpsProfile& eps05() {
  static const EpsProfile p = [] {
    const auto layer =
        solve_layer(kCubic.law, kCubic.shock, default_profile_grid(kCubic.law, kCubic.shock));
    return solve_profile_eps(layer, 0.05);
  }();
  return p;
}

const TimeGreen& green05() {
  static const TimeGreen g(eps05());
  return g;
}

std::size_t node(double x) { return eps05().grid.index_of(x); }

// Smooth compactly supported bump cos^4 on [c - r, c + r].
std::vector<double> bump(double center, double radius) {
  const auto& grid = eps05().grid;
  std::vector<double> w(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double z = (grid.x(i) - center) / radius;
    if (std::abs(z) < 1.0) w[i] = std::pow(std::cos(0.5 * std::numbers::pi * z), 4);
  }
  return w;
}

// Window values of an action written back onto the full grid.
std::vector<double> on_grid(const std::vector<double>& window) {
  std::vector<double> w(eps05().grid.size(), 0.0);
  const std::size_t lo = green05().bundle(true).first_index();
  for (std::size_t r = 0; r < window.size(); ++r) w[lo + r] = window[r];
  return w;
}

}  // namespace

TEST_CASE("spectral Green function: continuity, flux jump, residual") {
  const auto c = make_coefficients(eps05());
  for (Complex lambda : {Complex(0.3, 0.0), Complex(0.1, 0.7), Complex(-0.02, 1.5)}) {
    const SpectralGreen g(c, lambda);
    for (double y : {-3.0, 0.0, 1.0, 4.0}) {
      const std::size_t j = node(y);
      const Complex up = g.value(j, j, true), down = g.value(j, j, false);
      CHECK(std::abs(up - down) <= 1e-8 * std::abs(up));
      const Complex jump = g.flux(j, j, true) - g.flux(j, j, false);
      CHECK(std::abs(jump + 1.0) < 1e-6);
      CHECK(g.residual(eps05(), j) <= 1e-6);
    }
  }
}

TEST_CASE("same-side expansions agree with the unexpanded kernel") {
  const auto c = make_coefficients(eps05());
  const SpectralGreen g(c, {0.3, 0.4});
  for (auto [x, y] : {std::pair{2.0, 1.0}, {-1.0, -3.0}, {-3.0, -1.0}, {1.0, 3.0}, {0.0, 0.5}}) {
    const Complex a = g(node(x), node(y)), b = g.unexpanded(node(x), node(y));
    CHECK(std::abs(a - b) <= 1e-7 * std::abs(b));
  }
}

TEST_CASE("spectral Green function decays at the endstate rate") {
  const auto& p = eps05();
  const SpectralGreen g(make_coefficients(p), 0.3);
  std::vector<double> xs, ls;
  for (double x = 15.0; x <= 30.0; x += 0.5) {
    xs.push_back(x);
    ls.push_back(std::log(std::abs(g(node(x), node(0.0)))));
  }
  const auto fit = num::fit_line(xs, ls);
  const auto e = mu_pm(0.3, {p.law.df(0.0) - p.sigma_eps, p.eps * p.law.dg(0.0)});
  CHECK(fit.slope == doctest::Approx(e.mu_minus.real()).epsilon(1e-4));
  CHECK(spectral_green(p, 0.3, 2.0, 0.0) == g(node(2.0), node(0.0)));
}

TEST_CASE("spectral Green function refuses lambda at a root") {
  const auto c = make_coefficients(eps05());
  const double d0 = std::abs(evans(c, 0.0).full());
  const double d3 = std::abs(evans(c, 0.3).full());
  CHECK_THROWS_AS(SpectralGreen(c, 0.0, 1e-4 * d3), NearRootError);
  CHECK(d0 < 1e-4 * d3);
  CHECK_NOTHROW(SpectralGreen(c, 0.3, 1e-4 * d3));
}

TEST_CASE("time Green function fixes the profile slope") {
  const auto& g = green05();
  const auto& du = g.coeffs().du;
  const std::size_t lo = g.bundle(true).first_index();
  for (double t : {0.5, 2.0, 8.0}) {
    const auto a = g.apply(t, du);
    double err = 0.0;
    for (std::size_t r = 0; r < a.total.size(); ++r)
      err = std::max(err, std::abs(a.total[r] - du[lo + r]));
    CHECK(err <= 1e-4);
  }
}

TEST_CASE("time Green action matches the method of lines") {
  const auto& g = green05();
  const auto w = bump(1.5, 3.0);
  const MolPropagator mol(eps05());
  const auto ref = mol.apply(w, 1.0);
  const auto a = g.apply(1.0, w);
  const std::size_t lo = g.bundle(true).first_index();
  double err = 0.0;
  for (std::size_t r = 0; r < a.total.size(); ++r)
    err = std::max(err, std::abs(a.total[r] - ref[lo + r]));
  CHECK(err <= 1e-3);
}

TEST_CASE("time Green action is a semigroup and preserves positivity") {
  const auto& g = green05();
  const auto w = bump(-2.0, 2.5);
  const auto two = g.apply(2.0, w);
  const auto one = g.apply(1.0, w);
  const auto again = g.apply(1.0, on_grid(one.total));
  double err = 0.0, low = 0.0;
  for (std::size_t r = 0; r < two.total.size(); ++r) {
    err = std::max(err, std::abs(two.total[r] - again.total[r]));
    low = std::min(low, two.total[r]);
  }
  CHECK(err <= 1e-3);
  CHECK(low >= -1e-6);
}

TEST_CASE("split is additive and follows the zone rules") {
  const auto& g = green05();
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> ut(0.5, 12.0), ux(-25.0, 25.0);
  const double h = eps05().grid.spacing();
  auto snap = [&](double x) { return std::round(x / h) * h; };
  for (int k = 0; k < 50; ++k) {
    const double t = ut(rng), x = snap(ux(rng)), y = snap(ux(rng));
    const auto s = g.split_at(t, x, y);
    CHECK(std::abs(s.total - (s.pt + s.ess)) <= 1e-10);
    if (x * y < 0) {
      CHECK(s.ess == 0.0);
      CHECK(s.representation == Representation::cross);
    }
    const bool outside = y >= g.cone_right(t) || y <= -g.cone_left(t);
    if (outside) CHECK(s.phase == 0.0);
    if (outside && x * y >= 0 && (x >= 0) == (y >= 0)) CHECK(s.pt == 0.0);
    CHECK(std::abs(s.pt - g.coeffs().du[node(x)] * s.phase - s.pt_tilde) <= 1e-12);
  }
}

TEST_CASE("phase constants are constant along the layer") {
  const auto& g = green05();
  CHECK(g.phase_constant_spread() <= 1e-6);
  CHECK(g.a_right() != 0.0);
  CHECK(g.a_left() != 0.0);
}

TEST_CASE("phase kernel vanishes outside the cone and for t <= 1 after cutoff") {
  const auto& g = green05();
  const double t = 3.0;
  const double edge = g.cone_right(t);
  const double h = eps05().grid.spacing();
  const double beyond = std::ceil((edge + 0.5) / h) * h;
  CHECK(g.phase(t, node(beyond)).G_p == 0.0);
  CHECK(g.phase(t, node(-beyond)).dG_p == 0.0);
  CHECK(g.phase(t, node(0.0)).G_p != 0.0);
  CHECK(phase_cutoff(0.5) == 0.0);
  CHECK(phase_cutoff(1.0) == 0.0);
  CHECK(phase_cutoff(2.0) == 1.0);
  CHECK(phase_cutoff(7.0) == 1.0);
  CHECK(phase_cutoff_derivative(1.0) == 0.0);
  CHECK(phase_cutoff_derivative(2.0) == 0.0);
  const double d = 1e-6;
  CHECK((phase_cutoff(1.4 + d) - phase_cutoff(1.4 - d)) / (2 * d) ==
        doctest::Approx(phase_cutoff_derivative(1.4)).epsilon(1e-6));
}

TEST_CASE("phase kernel time derivative matches finite differences") {
  const auto& g = green05();
  for (double y : {-2.0, 0.0, 3.0}) {
    const double t = 6.0, d = 1e-3;
    const double fd = (g.phase(t + d, node(y)).G_p - g.phase(t - d, node(y)).G_p) / (2 * d);
    CHECK(g.phase(t, node(y)).dG_p == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("phase kernel derivative decays at least at the endstate rate") {
  const auto& g = green05();
  const double target = 0.9 * 0.05 * 0.5;
  for (double y : {-2.0, 0.0, 3.0}) {
    std::vector<double> ts, ls;
    for (double t = 5.0; t <= 40.0 + 1e-9; t += 1.0) {
      ts.push_back(t);
      ls.push_back(std::log(std::abs(g.phase(t, node(y)).dG_p)));
    }
    CHECK(-num::fit_line(ts, ls).slope >= target);
  }
}

TEST_CASE("cross-zone pt part is Gaussian in the source position") {
  const auto& g = green05();
  const double t = 2.0;
  std::vector<double> y2, ls;
  for (double y = -20.0; y <= -8.0; y += 0.5) {
    const auto s = g.split_at(t, 1.0, y);
    y2.push_back(y * y);
    ls.push_back(std::log(std::abs(s.pt)));
  }
  const auto fit = num::fit_line(y2, ls);
  MESSAGE("fitted Gaussian rate theta*t = ", -fit.slope * t);
  CHECK(fit.slope < 0.0);
}

TEST_CASE("contour independence within the error estimates") {
  const auto& g = green05();
  const auto c = make_coefficients(eps05());
  ContourBundle::Options o;
  o.window = 12.0;
  const ContourBundle split_curve(c, g.curves().right_curve(*c), 1.0, o);
  ContourSpec other;
  other.kind = ContourSpec::Kind::small;
  other.alpha = c->a_plus;
  other.b = c->beta_plus;
  other.omega0 = 1.1;
  other.zeta_plus = {1.0, -0.35};
  other.zeta_minus = {1.0, 0.35};
  const ContourBundle second(c, other, 1.0, o);
  for (double t : {1.0, 3.0})
    for (auto [x, y] : {std::pair{0.0, 0.0}, {2.0, -1.0}, {-3.0, 4.0}, {5.0, 6.0}}) {
      const auto a = time_green(split_curve, t, node(x), node(y));
      const auto b = time_green(second, t, node(x), node(y));
      CHECK(std::abs(a.value - b.value) <= 2.0 * (a.error_estimate() + b.error_estimate()));
      CHECK(std::abs(a.value - g.split_at(t, x, y).total) <= 1e-9);
    }
}

TEST_CASE("trapezoid quadrature converges at second order") {
  const auto c = make_coefficients(eps05());
  ContourBundle::Options o;
  o.window = 5.0;
  ContourSpec s = green05().curves().right_curve(*c);
  s.xi_split = 0.0;
  const double t = 1.0;
  s.xi_max = s.gaussian_cutoff(t, 1e-14);
  const ContourBundle ref(c, s, t, o);
  std::vector<double> err;
  for (double step : {0.1, 0.05, 0.025}) {
    o.quadrature.rule = QuadratureRule::trapezoid;
    o.quadrature.trapezoid_step = step;
    const ContourBundle b(c, s, t, o);
    err.push_back(time_green(b, t, node(1.0), node(-0.5)).value -
                  time_green(ref, t, node(1.0), node(-0.5)).value);
  }
  const double r1 = err[0] / err[1], r2 = err[1] / err[2];
  MESSAGE("Richardson ratios ", r1, " ", r2);
  CHECK(r1 >= 3.6);
  CHECK(r1 <= 4.4);
  CHECK(r2 >= 3.6);
  CHECK(r2 <= 4.4);
}

TEST_CASE("short times delegate to the method of lines and short contours must be extended") {
  const auto& g = green05();
  const MolPropagator mol(eps05());
  CHECK(g.total(0.005, node(0.5), node(0.0)) == mol.column(node(0.0), 0.005)[node(0.5)]);
  CHECK(g.split(0.005, node(0.5), node(0.0)).representation == Representation::mol);
  CHECK_THROWS_AS(g.total(0.02, node(0.5), node(0.0)), ExtendContourError);
}

TEST_CASE("sampled pointwise bounds") {
  const auto rep = sample_pointwise_bounds(green05());
  for (const auto& r : rep.rows) {
    INFO(r.name, ": ", r.constant, " / ", r.constant_refined, " ", r.detail);
    CHECK(r.pass);
  }
  CHECK(rep.ess_speed == doctest::Approx(-0.5).epsilon(0.1));
  CHECK(rep.pt_tilde_slope <= -rep.theta);
}
