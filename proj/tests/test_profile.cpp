#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "shocklab/profile.hpp"

using namespace shocklab;

namespace {

const Model kCubic = builtin_model("burgers-cubic");
const Model kAsym = builtin_model("burgers-asymmetric");
const ProfileGrid kGrid(80.0, 0.05);

const LayerProfile& cubic_layer() {
  static const LayerProfile layer = solve_layer(kCubic.law, kCubic.shock, kGrid);
  return layer;
}

double closed_form_layer(double x) { return 1.0 / (1.0 + std::exp(x / 2)); }

}  // namespace

TEST_CASE("layer matches the logistic closed form") {
  const auto& layer = cubic_layer();
  CHECK(layer.u0[kGrid.center()] == 0.5);
  CHECK(layer.u0[kGrid.index_of(2.0)] == doctest::Approx(0.268941421369995).epsilon(1e-12));
  double worst = 0.0;
  for (std::size_t i = 0; i < kGrid.size(); ++i) {
    const double x = kGrid.x(i);
    const double exact_tail = x < 0 ? -1.0 / (1.0 + std::exp(-x / 2))
                                    : closed_form_layer(x);
    worst = std::max(worst, std::abs(layer.tail0[i] - exact_tail) / std::abs(exact_tail));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("layer invariants") {
  const auto& layer = cubic_layer();
  for (std::size_t i = 0; i < kGrid.size(); ++i) {
    REQUIRE(layer.du0[i] < 0.0);
    const double u = layer.u0[i];
    CHECK(std::abs(layer.du0[i] - (0.5 * u * u - 0.5 * u)) < 1e-10);
  }
  // Tail fit of log U0 on [10, 30]: slope -1/2, prefactor at most 1.1.
  std::vector<double> xs, ys;
  for (double x = 10.0; x <= 30.0; x += 0.5) {
    xs.push_back(x);
    ys.push_back(std::log(layer.u0[kGrid.index_of(x)]));
  }
  const auto fit = num::fit_line(xs, ys);
  CHECK(fit.slope == doctest::Approx(-0.5).epsilon(1e-3));
  CHECK(std::exp(fit.intercept) <= 1.1);
}

TEST_CASE("translation covariance of the layer") {
  const double shift = 1.35;
  const auto moved = solve_layer(kCubic.law, kCubic.shock, kGrid, shift);
  const auto& layer = cubic_layer();
  double worst = 0.0;
  for (double x = -40.0; x <= 40.0; x += 0.05) {
    // moved(x) = layer(x - shift); compare on the closed form since x - shift is off-grid.
    const std::size_t i = kGrid.index_of(std::round(x / 0.05) * 0.05);
    worst = std::max(worst, std::abs(moved.u0[i] - closed_form_layer(kGrid.x(i) - shift)));
  }
  CHECK(worst < 1e-10);
  const std::size_t shift_nodes = 27;
  const auto moved_node = solve_layer(kCubic.law, kCubic.shock, kGrid, shift_nodes * 0.05);
  worst = 0.0;
  for (std::size_t i = 0; i + shift_nodes < kGrid.size(); ++i)
    worst = std::max(worst, std::abs(moved_node.u0[i + shift_nodes] - layer.u0[i]));
  CHECK(worst < 1e-10);
}

TEST_CASE("non-entropic data has no connection") {
  const auto swapped = ShockTriple::create(kCubic.law, 0.0, 1.0);
  CHECK_THROWS_AS(solve_layer(kCubic.law, swapped, kGrid), NoConnectionError);
}

TEST_CASE("sigma functional") {
  const auto& layer = cubic_layer();
  const std::vector<double> zero(kGrid.size(), 0.0);
  CHECK(std::abs(sigma_functional(layer, zero, 0.0)) < 1e-12);
  auto flat = ScalarLaw::polynomial("flat", {0.0, 0.0, 0.5}, {0.0});
  const auto flat_layer = solve_layer(flat, ShockTriple::create(flat, 1.0, 0.0), kGrid);
  CHECK(sigma_functional(flat_layer, zero, 0.3) == 0.0);
  // Asymmetric source: trapezoid oracle on the closed-form layer.
  const auto asym_layer = solve_layer(kAsym.law, kAsym.shock, kGrid);
  double integral = 0.0;
  for (std::size_t i = 0; i < kGrid.size(); ++i) {
    const double u = closed_form_layer(kGrid.x(i));
    const double w = (i == 0 || i + 1 == kGrid.size()) ? 0.5 : 1.0;
    integral += w * u * (1 - u) * (u - 0.25);
  }
  integral *= kGrid.spacing();
  const double value = sigma_functional(asym_layer, zero, 0.0);
  CHECK(value == doctest::Approx(integral).epsilon(1e-9));
  // Frozen regression value: int g(U0) = 1/2 and the jump is -1.
  CHECK(value == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("L0 dagger") {
  const auto& layer = cubic_layer();
  const std::size_t n = kGrid.size();
  const std::vector<double> zero(n, 0.0);
  for (double v : apply_L0_dagger(layer, zero)) CHECK(v == 0.0);

  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = kGrid.x(i);
    w[i] = x * std::exp(-x * x) * layer.du0[i];
  }
  const auto h = apply_L0(layer, w);
  const auto back = apply_L0_dagger(layer, h);
  CHECK(back[kGrid.center()] == 0.0);
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(back[i] - w[i]));
  CHECK(err < 1e-6);

  std::vector<double> biased(n);
  for (std::size_t i = 0; i < n; ++i) biased[i] = std::exp(-kGrid.x(i) * kGrid.x(i));
  CHECK_THROWS_AS(apply_L0_dagger(layer, biased), RangeError);
}

TEST_CASE("property: L0 dagger inverts L0 on random anchored bumps at second order or better") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> centre(-6.0, 6.0), width(0.7, 2.0), amp(-1.0, 1.0);
  for (int trial = 0; trial < 8; ++trial) {
    const double c = centre(rng), s = width(rng), a = amp(rng);
    double errs[2];
    for (int level = 0; level < 2; ++level) {
      const ProfileGrid grid(40.0, level == 0 ? 0.1 : 0.05);
      const auto layer = solve_layer(kCubic.law, kCubic.shock, grid);
      std::vector<double> w(grid.size());
      const double at0 = a * std::exp(-c * c / (s * s));
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double x = grid.x(i);
        w[i] = a * std::exp(-(x - c) * (x - c) / (s * s)) - at0 * std::exp(-x * x);
      }
      const auto back = apply_L0_dagger(layer, apply_L0(layer, w));
      double err = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) err = std::max(err, std::abs(back[i] - w[i]));
      errs[level] = err;
    }
    CHECK(errs[1] < 1e-5);
    CHECK(errs[1] <= errs[0] / 3.5 + 1e-12);
  }
}

TEST_CASE("eps = 0 fixed point is a single affine solve") {
  const auto p = solve_profile_eps(cubic_layer(), 0.0);
  CHECK(p.fixed_point.iterations == 1);
  CHECK(p.sigma_eps == kCubic.shock.sigma0);
  CHECK(p.u_eps == cubic_layer().u0);
  // The first-order corrector solves L0 u1 = -g(U0) - sigma1 U0'.
  const auto& layer = cubic_layer();
  std::vector<double> rhs(kGrid.size());
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    const double u = layer.u0[i];
    rhs[i] = -u * (1 - u) * (u - 0.5) - p.sigma_tilde * layer.du0[i];
  }
  const auto direct = apply_L0_dagger(layer, rhs);
  double err = 0.0;
  for (std::size_t i = 0; i < rhs.size(); ++i) err = std::max(err, std::abs(direct[i] - p.u_tilde[i]));
  CHECK(err < 1e-8);
}

TEST_CASE("profile sweep: anchoring, residual, monotonicity, symmetry of the speed") {
  const auto& layer = cubic_layer();
  std::vector<double> ratios;
  for (double eps : {0.1, 0.05, 0.025}) {
    const auto p = solve_profile_eps(layer, eps);
    const auto res = profile_residual(p);
    CHECK(res.anchored);
    CHECK(res.monotone);
    CHECK(res.max_residual <= 1e-8);
    // Symmetric source keeps the speed exactly at one half.
    CHECK(std::abs(p.sigma_eps - kCubic.shock.sigma0) < 1e-10);
    CHECK(std::abs(p.fixed_point.sigma_tilde) < 1e-10);
    ratios.push_back(p.fixed_point.contraction / eps);
    // Polished and fixed-point correctors agree to discretization accuracy.
    double diff = 0.0;
    for (std::size_t i = 0; i < kGrid.size(); ++i)
      diff = std::max(diff, std::abs(p.u_tilde[i] - p.fixed_point.u_tilde[i]));
    CHECK(diff < 1e-6);
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  CHECK(*hi / *lo < 2.0);
  CHECK(*hi < 10.0);
}

TEST_CASE("asymmetric source: speed drift is linear in eps") {
  const auto layer = solve_layer(kAsym.law, kAsym.shock, kGrid);
  std::vector<double> cs;
  for (double eps : {0.05, 0.025, 0.0125}) {
    const auto p = solve_profile_eps(layer, eps);
    CHECK(profile_residual(p).max_residual <= 1e-8);
    cs.push_back(std::abs(p.sigma_eps - kAsym.shock.sigma0) / eps);
    CHECK(p.sigma_eps > kAsym.shock.sigma0);
  }
  // sigma_tilde -> -int g(U0) / (u+ - u-) = 1/2 as eps -> 0.
  for (double c : cs) CHECK(c == doctest::Approx(0.5).epsilon(0.2));
  CHECK(std::max({cs[0], cs[1], cs[2]}) / std::min({cs[0], cs[1], cs[2]}) < 1.5);
}

TEST_CASE("profile asymptotics report") {
  const auto& layer = cubic_layer();
  const auto zero = verify_profile_asymptotics(layer, {layer_as_profile(layer)}, 2);
  for (double d : zero.rows[0].left_diff) CHECK(d == 0.0);
  for (double d : zero.rows[0].right_diff) CHECK(d == 0.0);
  std::vector<EpsProfile> sweep;
  for (double eps : {0.1, 0.05, 0.025}) sweep.push_back(solve_profile_eps(layer, eps));
  const auto rep = verify_profile_asymptotics(layer, sweep, 1);
  CHECK(rep.pass);
  CHECK(rep.weighted_spread <= 2.0);
  CHECK(rep.ratio_spread[0] <= 2.0);
  CHECK(rep.ratio_spread[1] <= 2.0);
}

TEST_CASE("profile CSV round trip") {
  const auto& layer = cubic_layer();
  const auto p = solve_profile_eps(layer, 0.05);
  const auto path = (std::filesystem::temp_directory_path() / "shocklab_profile.csv").string();
  write_profile_csv(path, layer, p);
  const auto q = read_profile_csv(path, kCubic);
  CHECK(q.eps == p.eps);
  CHECK(q.sigma_eps == p.sigma_eps);
  REQUIRE(q.u_eps.size() == p.u_eps.size());
  for (std::size_t i = 0; i < p.u_eps.size(); ++i) {
    CHECK(q.u_eps[i] == p.u_eps[i]);
    CHECK(q.du_eps[i] == p.du_eps[i]);
  }
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".json");
}

TEST_CASE("extension pads with endstates") {
  const auto p = solve_profile_eps(cubic_layer(), 0.05);
  const auto wide = extend_profile(p, 100.0);
  CHECK(wide.grid.size() == 4001);
  CHECK(wide.u_eps.front() == 1.0);
  CHECK(wide.u_eps.back() == 0.0);
  CHECK(wide.u_eps[wide.grid.center()] == 0.5);
  CHECK(wide.du_eps[wide.grid.index_of(3.0)] == p.du_eps[kGrid.index_of(3.0)]);
}
