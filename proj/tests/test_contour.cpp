#include <cmath>
#include <random>

#include "doctest.h"
#include "shocklab/contour.hpp"

using namespace shocklab;

namespace {

const Model kCubic = builtin_model("burgers-cubic");

CoefficientsPtr coeffs05() {
  static const CoefficientsPtr c = [] {
    const auto layer =
        solve_layer(kCubic.law, kCubic.shock, default_profile_grid(kCubic.law, kCubic.shock));
    return make_coefficients(solve_profile_eps(layer, 0.05));
  }();
  return c;
}

std::vector<double> xi_samples(double xi_max, int n) {
  std::vector<double> xs;
  for (int k = -n; k <= n; ++k) xs.push_back(xi_max * k / n);
  return xs;
}

ContourSpec large_spec(double alpha, double b, double beta0, Complex zeta) {
  ContourSpec s;
  s.kind = ContourSpec::Kind::large;
  s.alpha = alpha;
  s.b = b;
  s.beta0 = beta0;
  s.zeta_plus = zeta;
  s.zeta_minus = std::conj(zeta);
  return s;
}

}  // namespace

TEST_CASE("large curve crosses the real axis at beta0^2/(4t^2) - alpha^2/4 + b") {
  const auto s = large_spec(-0.5, -0.025, 3.0, {1.0, -0.5});
  for (double t : {0.5, 2.0, 10.0}) {
    const Complex l0 = s.point(t, 0.0);
    CHECK(l0.imag() == 0.0);
    CHECK(l0.real() == doctest::Approx(9.0 / (4 * t * t) - 0.0625 - 0.025).epsilon(1e-14));
  }
}

TEST_CASE("curve points solve the defining square-root relation") {
  const auto s = large_spec(0.5, -0.025, 2.0, {1.0, -0.3});
  const double t = 1.5;
  for (double xi : xi_samples(6.0, 12)) {
    const Complex lhs = 2.0 * std::sqrt(0.0625 + 0.025 + s.point(t, xi));
    const Complex rhs = s.offset(t) + Complex(0.0, xi) * s.zeta(xi);
    CHECK(std::abs(lhs - rhs) < 1e-12);
    // Lambda' against a centred difference.
    if (std::abs(xi) > 1e-3) {
      const double d = 1e-5;
      const Complex fd = (s.point(t, xi + d) - s.point(t, xi - d)) / (2 * d);
      CHECK(std::abs(fd - s.derivative(t, xi)) < 1e-7 * (1 + std::abs(fd)));
    }
  }
}

TEST_CASE("invalid curve parameters are refused") {
  auto s = large_spec(-0.5, -0.025, 1.0, {1.0, -0.5});
  s.zeta_plus = {1.0, -1.2};  // |Im| > Re
  CHECK_THROWS_AS(validate(s), InvalidContourError);
  s.zeta_plus = {1.0, 0.2};  // wrong sign
  CHECK_THROWS_AS(validate(s), InvalidContourError);
  s.zeta_plus = {1.0, -0.2};
  s.beta0 = -1.0;
  CHECK_THROWS_AS(validate(s), InvalidContourError);

  ContourSpec small;
  small.kind = ContourSpec::Kind::small;
  small.alpha = -0.5;
  small.omega0 = 0.45;  // |alpha| / sqrt(alpha^2 - omega0^2) = 2.29
  small.zeta_plus = {1.0, -0.5};
  small.zeta_minus = {1.0, 0.5};
  CHECK_THROWS_AS(validate(small), InvalidContourError);
  small.zeta_plus = {1.0, -0.4};
  small.zeta_minus = {1.0, 0.4};
  CHECK_NOTHROW(validate(small));
  CHECK_THROWS_AS(build_contour(small, 0.0), InvalidContourError);
}

TEST_CASE("large-curve decay bound holds on the nodes") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const double alpha = -1.0 + 2.0 * u(rng);
    const double b = -0.2 * u(rng);
    const double beta0 = 5.0 * u(rng);
    const double gamma = 0.05 + 0.9 * u(rng);
    const double t = 0.1 + 10.0 * u(rng);
    const auto s = large_spec(alpha, b, beta0, {1.0, -gamma});
    const auto xs = xi_samples(s.gaussian_cutoff(t, 1e-12), 50);
    // Equality is attained, so only roundoff may exceed the bound.
    const double scale = 1.0 + std::abs(alpha * alpha * t) + beta0 * beta0 / t;
    CHECK(large_curve_violation(s, t, beta0, xs) <= 1e-12 * scale);
    if (alpha <= 0.0) CHECK(large_curve_violation(s, t, beta0 + 2.0, xs) <= 1e-12 * scale);
  }
}

TEST_CASE("small-curve second bound holds under the curve condition") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const double alpha = -0.3 - u(rng);
    const double omega0 = std::abs(alpha) * (0.1 + 0.85 * u(rng));
    const double factor = std::abs(alpha) / std::sqrt(alpha * alpha - omega0 * omega0);
    const double gamma = 0.95 / factor * u(rng) + 1e-3;
    ContourSpec s;
    s.kind = ContourSpec::Kind::small;
    s.alpha = alpha;
    s.b = -0.1 * u(rng) - 1e-3;
    s.omega0 = omega0;
    s.zeta_plus = {1.0, -gamma};
    s.zeta_minus = {1.0, gamma};
    validate(s);
    const double t = 0.2 + 10.0 * u(rng);
    const double eta = alpha * alpha / (omega0 * omega0) - 1.0;
    const auto xs = xi_samples(s.gaussian_cutoff(t, 1e-12), 50);
    for (double frac : {0.0, 0.3, 1.0}) {
      const double beta = frac * omega0 * t;
      CHECK(small_curve_violation(s, t, beta, eta, xs) <= 1e-12 * (1.0 + alpha * alpha * t));
    }
    CHECK(derivative_bound_violation(s, t, xs) <= 1e-12);
  }
}

TEST_CASE("curve parameters for the reference model") {
  const auto c = coeffs05();
  const auto p = curve_parameters(*c, 0.02);
  // Reinforced condition Re zeta >= 2 max|alpha| / sqrt(2 eta0) |Im zeta|.
  CHECK(p.gamma <= std::sqrt(2 * 0.02) / (2 * 0.5) + 1e-15);
  CHECK(p.omega_hf_r > 0.5);
  CHECK(p.omega_eta_r == doctest::Approx(std::sqrt(0.25 - 0.04)).epsilon(1e-6));
  const auto r = p.right_curve(*c);
  CHECK(r.point(1.0, 0.0).real() >= p.kappa0 - 1e-12);
  CHECK(p.xi_hf == doctest::Approx(2 * (p.omega_hf_r - p.omega_eta_r) / p.gamma));
  // Beyond xi_hf the curve is strictly left of the imaginary axis.
  CHECK(r.point(1.0, p.xi_hf).real() < -p.eta0);
  CHECK_THROWS_AS(curve_parameters(*c, 0.2), InvalidContourError);
}

TEST_CASE("quadrature nodes integrate smooth functions") {
  ContourSpec s = large_spec(-0.5, -0.025, 1.0, {1.0, -0.3});
  s.xi_split = 2.0;
  s.xi_max = 8.0;
  QuadratureOptions q;
  const auto nodes = quadrature_nodes(s, 1.0, q);
  double gk = 0.0, g7 = 0.0, lf = 0.0;
  for (const auto& n : nodes) {
    gk += n.weight * std::exp(-n.xi * n.xi);
    g7 += n.embedded_weight * std::exp(-n.xi * n.xi);
    if (n.low_frequency) lf += n.weight;
    CHECK(n.xi >= 0.0);
    CHECK(n.xi <= 8.0);
    CHECK(std::abs(n.lambda - s.point(1.0, n.xi)) == 0.0);
  }
  const double exact = 0.5 * std::sqrt(std::numbers::pi) * std::erf(8.0);
  CHECK(gk == doctest::Approx(exact).epsilon(1e-14));
  CHECK(g7 == doctest::Approx(exact).epsilon(1e-8));
  CHECK(lf == doctest::Approx(2.0).epsilon(1e-14));

  q.rule = QuadratureRule::trapezoid;
  q.trapezoid_step = 0.01;
  double tr = 0.0;
  for (const auto& n : quadrature_nodes(s, 1.0, q)) tr += n.weight * std::exp(-n.xi * n.xi);
  CHECK(tr == doctest::Approx(exact).epsilon(1e-4));
}

TEST_CASE("symmetric contour is conjugate-symmetric") {
  const auto s = large_spec(-0.5, -0.025, 1.0, {1.0, -0.4});
  const auto pts = build_contour(s, 2.0);
  const std::size_t n = pts.size();
  for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(pts[k] - std::conj(pts[n - 1 - k])) < 1e-14);
  // Upward orientation at large |xi|.
  CHECK(pts.front().imag() < 0.0);
  CHECK(pts.back().imag() > 0.0);
}
