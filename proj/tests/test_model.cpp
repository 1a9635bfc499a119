#include <cmath>
#include <random>

#include "doctest.h"
#include "shocklab/model.hpp"

using namespace shocklab;

namespace {
const Model kCubic = builtin_model("burgers-cubic");
}

TEST_CASE("Rankine-Hugoniot speed of the reference shock is one half") {
  CHECK(rankine_hugoniot_speed(kCubic.law, 1.0, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(kCubic.shock.sigma0 == doctest::Approx(0.5));
}

TEST_CASE("linear flux propagates at its slope") {
  auto law = ScalarLaw::polynomial("linear", {0.0, 0.7}, {0.0, -1.0, 1.0});
  CHECK(rankine_hugoniot_speed(law, 1.0, 0.0) == doctest::Approx(0.7));
  CHECK(rankine_hugoniot_speed(law, -0.3, 2.5) == doctest::Approx(0.7));
}

TEST_CASE("equal endstates are degenerate") {
  CHECK_THROWS_AS(rankine_hugoniot_speed(kCubic.law, 0.3, 0.3), DegenerateShockError);
  CHECK_THROWS_AS(ShockTriple::create(kCubic.law, 1.0, 1.0), DegenerateShockError);
}

TEST_CASE("shock triple validation") {
  CHECK_THROWS_AS(ShockTriple::create(kCubic.law, 1.0, 0.0, 0.6), InvalidModelError);
  CHECK_THROWS_AS(ShockTriple::create(kCubic.law, 0.9, 0.0), InvalidModelError);
}

TEST_CASE("inconsistent derivatives are rejected") {
  ScalarLaw::Functions fns{[](double u) { return 0.5 * u * u; }, [](double u) { return 2 * u; },
                           [](double) { return 1.0; }, [](double u) { return -u; },
                           [](double) { return -1.0; }};
  CHECK_THROWS_AS(ScalarLaw::create("bad", fns), InvalidModelError);
  fns.df = [](double u) { return u; };
  CHECK_NOTHROW(ScalarLaw::create("good", fns));
}

TEST_CASE("Oleinik condition") {
  const auto rep = check_oleinik(kCubic.law, kCubic.shock);
  CHECK(rep.ok);
  CHECK(rep.margin == doctest::Approx(0.5).epsilon(1e-3));
  const auto swapped = ShockTriple::create(kCubic.law, 0.0, 1.0);
  CHECK_FALSE(check_oleinik(kCubic.law, swapped).ok);
  auto linear = ScalarLaw::polynomial("linear", {0.0, 0.7}, {0.0, -1.0, 1.0});
  CHECK_FALSE(check_oleinik(linear, ShockTriple::create(linear, 1.0, 0.0)).ok);
}

TEST_CASE("endstate stability") {
  const auto rep = check_endstate_stability(kCubic.law, kCubic.shock);
  CHECK(rep.ok);
  CHECK(rep.omega_inf == doctest::Approx(0.5));
  auto flat = ScalarLaw::polynomial("flat", {0.0, 0.0, 0.5}, {0.0});
  CHECK_FALSE(check_endstate_stability(flat, ShockTriple::create(flat, 1.0, 0.0)).ok);
  auto unstable = ScalarLaw::polynomial("unstable", {0.0, 0.0, 0.5}, {0.0, 1.0, -1.0});
  CHECK_FALSE(check_endstate_stability(unstable, ShockTriple::create(unstable, 1.0, 0.0)).ok);
}

TEST_CASE("frozen eigenvalues at lambda = 0 without source") {
  const auto right = mu_pm(kCubic.law, kCubic.shock, 0.0, 0.0, 0.0);
  CHECK(std::abs(right.mu_plus - 0.0) < 1e-14);
  CHECK(std::abs(right.mu_minus + 0.5) < 1e-14);
  const auto left = mu_pm(kCubic.law, kCubic.shock, 0.0, 1.0, 0.0);
  CHECK(std::abs(left.mu_plus - 0.5) < 1e-14);
  CHECK(std::abs(left.mu_minus) < 1e-14);
}

TEST_CASE("eigenvalues refuse the branch half-line") {
  const auto c = FrozenCoefficients::at(kCubic.law, 0.0, 0.5, 0.1);
  CHECK_THROWS_AS(mu_pm(Complex(c.branch_point() - 1.0, 0.0), c), BranchCutError);
  CHECK_NOTHROW(mu_pm(Complex(c.branch_point() - 1.0, 0.01), c));
}

TEST_CASE("decay rates") {
  const auto t0 = decay_rates(kCubic.law, kCubic.shock, 0.5, 0.0);
  CHECK(t0.theta_l == doctest::Approx(0.5));
  CHECK(t0.theta_r == doctest::Approx(0.5));
  for (double eps : {0.001, 0.01}) {
    const auto t = decay_rates(kCubic.law, kCubic.shock, 0.5, eps);
    CHECK(t.theta_r == doctest::Approx(0.5 + eps).epsilon(4 * eps * eps));
    // The rate is the magnitude of the decaying frozen eigenvalue at lambda = 0.
    const auto e = mu_pm(kCubic.law, kCubic.shock, 0.0, 0.0, eps);
    CHECK(std::abs(std::abs(e.mu_minus.real()) - t.theta_r) < 1e-12);
    const auto el = mu_pm(kCubic.law, kCubic.shock, 0.0, 1.0, eps);
    CHECK(std::abs(el.mu_plus.real() - t.theta_l) < 1e-12);
  }
}

TEST_CASE("property: eigenprojections reconstruct the frozen matrix") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    FrozenCoefficients c{coord(rng), 0.3 * coord(rng)};
    const Complex lambda(coord(rng), coord(rng));
    if (branch_distance(lambda, c) < 0.05) continue;
    const auto e = mu_pm(lambda, c);
    // A = [[alpha, 1], [lambda - beta, 0]] = mu+ r+ l+^T + mu- r- l-^T.
    const Complex a[2][2] = {{c.alpha, 1.0}, {lambda - c.beta, 0.0}};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const Complex rec = e.mu_plus * e.r_plus[i] * e.l_plus[j] +
                            e.mu_minus * e.r_minus[i] * e.l_minus[j];
        CHECK(std::abs(rec - a[i][j]) < 1e-10 * (1 + std::abs(a[i][j])));
      }
    CHECK(std::abs(e.l_plus[0] * e.r_plus[0] + e.l_plus[1] * e.r_plus[1] - 1.0) < 1e-10);
    CHECK(std::abs(e.l_plus[0] * e.r_minus[0] + e.l_plus[1] * e.r_minus[1]) < 1e-10);
    CHECK(e.mu_plus.real() >= e.mu_minus.real() - 1e-14);
  }
}
