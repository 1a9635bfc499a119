#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include "doctest.h"
#include "shocklab/evolution.hpp"

using namespace shocklab;

namespace {

const Model kCubic = builtin_model("burgers-cubic");

const LayerProfile& layer() {
  static const LayerProfile l =
      solve_layer(kCubic.law, kCubic.shock, default_profile_grid(kCubic.law, kCubic.shock));
  return l;
}

const EpsProfile& profile(double eps) {
  static std::map<double, EpsProfile> cache;
  auto it = cache.find(eps);
  if (it == cache.end()) it = cache.emplace(eps, solve_profile_eps(layer(), eps)).first;
  return it->second;
}

double sup_abs(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

std::vector<double> gaussian(const ProfileGrid& grid, double amp, double center, double width) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double z = (grid.x(i) - center) / width;
    v[i] = amp * std::exp(-z * z);
  }
  return v;
}

}  // namespace

TEST_CASE("parsers reject unknown names") {
  CHECK(parse_phase_method("duhamel") == PhaseMethod::duhamel);
  CHECK(parse_scheme(to_string(Scheme::cnab2)) == Scheme::cnab2);
  CHECK(parse_init_kind(to_string(InitSpec::Kind::plateau)) == InitSpec::Kind::plateau);
  CHECK_THROWS_AS(parse_phase_method("pinned"), ConfigError);
  CHECK_THROWS_AS(parse_scheme("rk4"), ConfigError);
  CHECK_THROWS_AS(parse_init_kind("sawtooth"), ConfigError);
}

TEST_CASE("time step above the advection bound is rejected") {
  EvolutionOptions o;
  o.half_width = 80.0;
  o.dt = 0.2;
  CHECK_THROWS_AS(Evolver(profile(0.05), o), ConfigError);
}

TEST_CASE("the profile is a steady state of the frame equation") {
  EvolutionOptions o;
  Evolver e(profile(0.05), o);
  e.reset(std::vector<double>(e.grid().size(), 0.0));
  double worst = 0.0;
  for (const auto& r : e.run(100.0)) {
    worst = std::max(worst, r.sup);
    CHECK(r.psi == 0.0);
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("zero data keeps the phase rate at zero") {
  for (auto m : {PhaseMethod::anchor, PhaseMethod::duhamel}) {
    EvolutionOptions o;
    o.half_width = 80.0;
    o.phase = m;
    o.green.t_max = 5.0;
    Evolver e(profile(0.05), o);
    e.reset(std::vector<double>(e.grid().size(), 0.0));
    for (const auto& r : e.run(5.0)) CHECK(std::abs(r.dpsi) <= 1e-12);
  }
}

TEST_CASE("a pure translate is absorbed into the phase") {
  const double shift = 0.5;
  std::map<PhaseMethod, double> psi_end;
  for (auto m : {PhaseMethod::anchor, PhaseMethod::duhamel}) {
    EvolutionOptions o;
    o.half_width = 80.0;
    o.phase = m;
    o.green.t_max = 60.0;
    Evolver e(profile(0.05), o);
    InitSpec s;
    s.kind = InitSpec::Kind::translate;
    s.shift = shift;
    const auto v0 = e.initial_data(s);
    e.reset(v0);
    const auto rows = e.run(60.0);
    psi_end[m] = rows.back().psi;
    CHECK(rows.back().sup < 1e-3 * sup_abs(v0) + 1e-3);
  }
  CHECK(psi_end[PhaseMethod::anchor] == doctest::Approx(shift).epsilon(1e-6));
  CHECK(std::abs(psi_end[PhaseMethod::duhamel] - psi_end[PhaseMethod::anchor]) <= 0.02 * shift);
}

TEST_CASE("the Duhamel phase is frozen up to t = 1") {
  EvolutionOptions o;
  o.half_width = 80.0;
  o.phase = PhaseMethod::duhamel;
  o.green.t_max = 4.0;
  Evolver e(profile(0.05), o);
  e.reset(gaussian(e.grid(), 0.05, 2.0, 1.5));
  while (e.state().t < 1.0 - 1e-9) {
    e.step();
    CHECK(e.state().dpsi == 0.0);
    CHECK(e.state().psi == 0.0);
  }
  e.run(3.0);
  CHECK(e.state().dpsi != 0.0);
}

TEST_CASE("small data follows the time Green function") {
  const auto& p = profile(0.05);
  const TimeGreen green(p);
  EvolutionOptions o;
  o.half_width = p.grid.half_width();
  o.phase = PhaseMethod::none;
  o.scheme = Scheme::cnab2;
  o.dt = 0.005;
  Evolver e(p, o);
  REQUIRE(e.grid().size() == p.grid.size());
  const double amp = 1e-4;
  const auto v0 = gaussian(e.grid(), amp, 3.0, 1.5);
  e.reset(v0);
  const std::size_t lo = green.bundle(true).first_index();
  for (double t : {1.0, 2.0, 5.0, 10.0}) {
    while (e.state().t < t - 1e-9) e.step();
    const auto g = green.apply(t, v0).total;
    double diff = 0.0, ref = 0.0;
    for (std::size_t r = 0; r < g.size(); ++r) {
      diff = std::max(diff, std::abs(e.state().v[lo + r] - g[r]));
      ref = std::max(ref, std::abs(g[r]));
    }
    INFO("t = " << t << " diff = " << diff << " ref = " << ref);
    CHECK(diff <= 1e-2 * ref);
    if (t <= 5.0) CHECK(diff <= 1e-3 * amp);
  }
}

TEST_CASE("nonlinear residual is quadratic and vanishes at zero") {
  const auto& p = profile(0.05);
  const std::vector<double> zero(p.grid.size(), 0.0);
  CHECK(sup_abs(nonlinear_residual(p, zero, 0.0)) == 0.0);
  CHECK(sup_abs(nonlinear_residual(p, zero, 0.3)) == 0.0);
  std::vector<double> prev;
  for (double d : {1e-2, 5e-3, 2.5e-3}) {
    const auto n = sup_abs(nonlinear_residual(p, gaussian(p.grid, d, 1.0, 2.0), 0.0));
    if (!prev.empty()) CHECK(prev.back() / n == doctest::Approx(4.0).epsilon(0.05));
    prev.push_back(n);
  }
  // Linear in the phase rate at fixed w, through the -phi w_x term.
  const auto w = gaussian(p.grid, 1e-2, 1.0, 2.0);
  const auto n0 = nonlinear_residual(p, w, 0.0), n1 = nonlinear_residual(p, w, 0.1),
             n2 = nonlinear_residual(p, w, 0.2);
  for (std::size_t i = 0; i < n0.size(); i += 97)
    CHECK(n2[i] - n1[i] == doctest::Approx(n1[i] - n0[i]).epsilon(1e-9).scale(1e-12));
  CHECK_THROWS_AS(nonlinear_residual(p, std::vector<double>(3, 0.0), 0.0), RangeError);
}

TEST_CASE("weighted norm properties") {
  const double eps = 0.05, theta = 0.05;
  const ProfileGrid grid(260.0, 0.05);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> pos(-200.0, 200.0), amp(-1.0, 1.0), wid(0.5, 5.0);

  SUBCASE("k = 0 stays within a factor 2 of the sup norm away from the layer") {
    for (int trial = 0; trial < 20; ++trial) {
      const double c = pos(rng);
      const auto v = gaussian(grid, amp(rng), c, wid(rng));
      const auto n = weighted_norm(v, grid, eps, theta, 0);
      CHECK(n.value <= sup_abs(v) * (1.0 + 1e-12));
      if (std::abs(c) > 0.0) CHECK(n.value >= 0.5 * sup_abs(v) - 1e-12);
    }
  }
  SUBCASE("far support sees weights of at least one half") {
    const double edge = 3.0 * std::log(1.0 / eps) / theta;
    for (int trial = 0; trial < 20; ++trial) {
      const double w = wid(rng), c = (edge + 6.0 * w + 2.0) * (trial % 2 ? 1.0 : -1.0);
      const auto v = gaussian(grid, amp(rng), c, w);
      std::vector<double> dv(v.size(), 0.0);
      for (std::size_t i = 1; i + 1 < v.size(); ++i) dv[i] = (v[i + 1] - v[i - 1]) / 0.1;
      const double plain = sup_abs(v) + sup_abs(dv);
      const auto n = weighted_norm(v, grid, eps, theta, 1);
      CHECK(n.value <= plain * (1.0 + 1e-12));
      CHECK(n.value >= 0.5 * plain);
    }
  }
  SUBCASE("a unit spike at the layer has its derivative term scaled by eps") {
    const auto v = gaussian(grid, 1.0, 0.0, 1.0);
    std::vector<double> dv(v.size(), 0.0);
    for (std::size_t i = 1; i + 1 < v.size(); ++i) dv[i] = (v[i + 1] - v[i - 1]) / 0.1;
    const auto n = weighted_norm(v, grid, eps, theta, 1);
    REQUIRE(n.terms.size() == 2);
    const double ratio = n.terms[1] / (eps * sup_abs(dv));
    CHECK(ratio >= 0.25);
    CHECK(ratio <= 4.0);
    CHECK(n.terms[0] == doctest::Approx(0.5).epsilon(1e-12));  // weight 1/2 at the origin
  }
  SUBCASE("profile corrections are bounded uniformly in eps") {
    std::vector<double> values;
    for (double e : {0.1, 0.05, 0.025, 0.0125}) {
      const auto& p = profile(e);
      std::vector<double> diff(p.grid.size());
      for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = p.u_eps[i] - layer().u0[i];
      values.push_back(weighted_norm(diff, p.grid, e, theta, 1).value);
    }
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    INFO("norms " << values[0] << " " << values[1] << " " << values[2] << " " << values[3]);
    CHECK(*mx <= 2.0 * values.front());
    CHECK(*mn > 0.0);
  }
}

TEST_CASE("fit_decay recovers synthetic exponentials") {
  std::vector<double> t, y;
  for (int i = 0; i <= 400; ++i) {
    t.push_back(0.5 * i);
    y.push_back(3.0 * std::exp(-0.025 * t.back()));
  }
  const auto f = fit_decay(t, y, 20.0, 160.0);
  REQUIRE(f.ok());
  CHECK(f.rate == doctest::Approx(0.025).epsilon(1e-6));
  CHECK(f.amplitude == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(f.residual < 1e-10);
  CHECK(f.t0 >= 20.0);
  CHECK(f.t1 <= 160.0);

  // Values at the noise floor are discarded instead of flattening the fit.
  for (std::size_t i = 200; i < y.size(); ++i) y[i] = 1e-13;
  const auto g = fit_decay(t, y, 20.0, 200.0, 1e-12);
  CHECK(g.rate == doctest::Approx(0.025).epsilon(1e-6));
  CHECK(g.t1 < 100.0);
  CHECK_FALSE(fit_decay(t, y, 150.0, 200.0, 1e-12).ok());
}

TEST_CASE("the gradient monitor decreases for a bump near the shock") {
  EvolutionOptions o;
  o.theta = 0.1;
  o.x_star = 10.0;
  o.half_width = 120.0;
  Evolver e(profile(0.05), o);
  e.reset(gaussian(e.grid(), 0.05, 15.0, 3.0));
  double m10 = 0.0, m40 = 0.0;
  for (const auto& r : e.run(40.0)) {
    if (std::abs(r.t - 10.0) < 1e-9) m10 = r.monitor;
    if (std::abs(r.t - 40.0) < 1e-9) m40 = r.monitor;
  }
  REQUIRE(m10 > 0.0);
  CHECK(m40 <= m10);
}

TEST_CASE("plateau data is normalised in the weighted norm") {
  for (double eps : {0.1, 0.025}) {
    Evolver e(profile(eps), EvolutionOptions{});
    InitSpec s;
    s.kind = InitSpec::Kind::plateau;
    s.amplitude = 0.05;
    s.weighted = true;
    const auto v = e.initial_data(s);
    CHECK(weighted_norm(v, e.grid(), eps, e.theta(), 1).value ==
          doctest::Approx(0.05).epsilon(1e-12));
    CHECK(v.front() == 0.0);
    CHECK(v.back() == 0.0);
    CHECK(v[e.grid().center()] == doctest::Approx(0.0).scale(1e-12));
  }
}

TEST_CASE("initial data from a file is interpolated onto the grid") {
  const auto path = std::filesystem::temp_directory_path() / "shocklab_init.csv";
  {
    std::ofstream out(path);
    out << "x,v\n-10,0\n0,1\n10,0\n";
  }
  EvolutionOptions o;
  o.half_width = 80.0;
  Evolver e(profile(0.05), o);
  InitSpec s;
  s.kind = InitSpec::Kind::csv;
  s.path = path.string();
  const auto v = e.initial_data(s);
  CHECK(v[e.grid().index_of(0.0)] == doctest::Approx(1.0));
  CHECK(v[e.grid().index_of(5.0)] == doctest::Approx(0.5));
  CHECK(v[e.grid().index_of(-20.0)] == 0.0);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(e.initial_data(s), ConfigError);
}

TEST_CASE("a plateau above the unstable root loses the tracked shock") {
  Evolver e(profile(0.1), EvolutionOptions{});
  InitSpec s;
  s.kind = InitSpec::Kind::plateau;
  s.amplitude = 1.0;
  e.reset(e.initial_data(s));
  CHECK_THROWS_AS(e.run(40.0), DivergenceError);
}

TEST_CASE("decay experiment at eps = 0.1") {
  const auto r = decay_experiment(profile(0.1));
  INFO("norm rate " << r.norm_fit.rate << " dpsi rate " << r.dpsi_fit.rate << " target "
                    << r.target_rate);
  CHECK(r.target_rate == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(r.v0_weighted == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(r.rates_in_band());
  CHECK(r.monitor_fit.rate >= 0.5 * r.target_rate);
  CHECK(r.psi_inf < 0.0);
  CHECK(std::isfinite(r.phase_constant));
}

TEST_CASE("fast frame agrees with a slow-frame solve") {
  InitSpec s;
  s.kind = InitSpec::Kind::gaussian;
  s.amplitude = 0.05;
  s.center = 5.0;
  s.width = 2.0;
  const auto coarse = frame_consistency(profile(0.1), 0.5, 0.02, s);
  const auto fine = frame_consistency(profile(0.1), 0.5, 0.01, s);
  INFO("differences " << coarse.max_difference << " " << fine.max_difference);
  CHECK(coarse.max_difference < 2e-3);
  CHECK(coarse.max_difference / fine.max_difference == doctest::Approx(2.0).epsilon(0.2));
  CHECK_THROWS_AS(frame_consistency(profile(0.1), 0.5, 0.03, s), RangeError);
}
