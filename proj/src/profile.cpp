#include "shocklab/profile.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include "json.hpp"
#include <sstream>

#include "shocklab/common.hpp"

namespace shocklab {

namespace odeint = boost::numeric::odeint;

namespace {

constexpr double kOdeRelTol = 1e-13;
constexpr double kOdeAbsTol = 1e-30;  // tails are resolved relatively
constexpr double kSmallIncrement = 1e-5;

// fn(base + d) - fn(base) without cancellation for tiny d (relative error d^2/24).
template <class Fn, class DFn>
double increment(const Fn& fn, const DFn& dfn, double base, double d) {
  if (std::abs(d) < kSmallIncrement) return d * dfn(base + 0.5 * d);
  return fn(base + d) - fn(base);
}

double source_at(const ScalarLaw& law, double base, double d) {
  return law.g(base) + increment([&](double u) { return law.g(u); },
                                 [&](double u) { return law.dg(u); }, base, d);
}

double flux_increment(const ScalarLaw& law, double base, double d) {
  return increment([&](double u) { return law.f(u); }, [&](double u) { return law.df(u); }, base,
                   d);
}

template <class State>
auto controlled_stepper() {
  return odeint::make_controlled(kOdeAbsTol, kOdeRelTol, odeint::runge_kutta_dopri5<State>());
}

double side_endstate(const ShockTriple& s, double x) { return x < 0.0 ? s.u_minus : s.u_plus; }

// Nodes of `grid` as a time list ordered away from x0 on one side.
std::vector<double> march_times(const ProfileGrid& grid, double x0, bool rightward) {
  std::vector<double> t{x0};
  if (rightward) {
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (grid.x(i) > x0) t.push_back(grid.x(i));
  } else {
    for (std::size_t i = grid.size(); i-- > 0;)
      if (grid.x(i) < x0) t.push_back(grid.x(i));
  }
  return t;
}

// Second-order profile ODE in deviation form around the endstate `base`.
struct DeviationSystem {
  const ScalarLaw& law;
  double base;
  double sigma;
  double eps;
  void operator()(const std::array<double, 2>& s, std::array<double, 2>& ds, double) const {
    ds[0] = s[1];
    ds[1] = (law.df(base + s[0]) - sigma) * s[1] - eps * source_at(law, base, s[0]);
  }
};

// Decaying tail exponent at an endstate (negative on the right, positive on the left).
double tail_exponent(const ScalarLaw& law, double u, double sigma, double eps, bool right) {
  const double a = law.df(u) - sigma;
  const double root = std::sqrt(0.25 * a * a - eps * law.dg(u));
  return right ? 0.5 * a - root : 0.5 * a + root;
}

struct ShotResult {
  double u0 = 0.0;  // deviation at x = 0
  double p0 = 0.0;  // derivative at x = 0
};

struct Shooter {
  const ScalarLaw& law;
  const ShockTriple& shock;
  double eps;
  double L;

  std::array<double, 2> tail_state(double sigma, double log_amp, bool right) const {
    const double sign = right ? (shock.u_minus > shock.u_plus ? 1.0 : -1.0)
                              : (shock.u_plus > shock.u_minus ? 1.0 : -1.0);
    const double base = right ? shock.u_plus : shock.u_minus;
    const double c = sign * std::exp(log_amp);
    return {c, tail_exponent(law, base, sigma, eps, right) * c};
  }

  ShotResult shoot(double sigma, double log_amp, bool right) const {
    const double base = right ? shock.u_plus : shock.u_minus;
    auto state = tail_state(sigma, log_amp, right);
    const double start = right ? L : -L;
    odeint::integrate_adaptive(controlled_stepper<std::array<double, 2>>(),
                               DeviationSystem{law, base, sigma, eps}, state, start, 0.0,
                               right ? -0.05 : 0.05);
    return {base + state[0], state[1]};
  }

  Eigen::Vector3d residual(const Eigen::Vector3d& z) const {
    const ShotResult r = shoot(z[0], z[1], true);
    const ShotResult l = shoot(z[0], z[2], false);
    const double mid = shock.midpoint();
    return {r.u0 - mid, l.u0 - mid, r.p0 - l.p0};
  }
};

void fill_half(const ScalarLaw& law, const ShockTriple& shock, const ProfileGrid& grid, double eps,
               double sigma, double log_amp, bool right, std::vector<double>& tail,
               std::vector<double>& du) {
  const Shooter shooter{law, shock, eps, grid.half_width()};
  const double base = right ? shock.u_plus : shock.u_minus;
  auto state = shooter.tail_state(sigma, log_amp, right);
  std::vector<double> times;
  if (right)
    for (std::size_t i = grid.size(); i-- > grid.center();) times.push_back(grid.x(i));
  else
    for (std::size_t i = 0; i <= grid.center(); ++i) times.push_back(grid.x(i));
  const double h = grid.spacing();
  odeint::integrate_times(
      controlled_stepper<std::array<double, 2>>(), DeviationSystem{law, base, sigma, eps}, state,
      times.begin(), times.end(), right ? -h : h,
      [&](const std::array<double, 2>& s, double x) {
        const std::size_t i = grid.index_of(x);
        if (right || i != grid.center()) {
          tail[i] = s[0];
          du[i] = s[1];
        }
      });
}

void require_same_grid(const ProfileGrid& a, const std::vector<double>& v) {
  if (v.size() != a.size()) throw RangeError("grid function has the wrong length");
}

}  // namespace

double EpsProfile::source(std::size_t i) const {
  return eps * source_at(law, endstate(i), tail_eps[i]);
}

double EpsProfile::second_derivative(std::size_t i) const {
  return advection(i) * du_eps[i] - source(i);
}

std::vector<double> EpsProfile::second_derivatives() const {
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = second_derivative(i);
  return out;
}

ProfileGrid default_profile_grid(const ScalarLaw& law, const ShockTriple& shock, double spacing) {
  const DecayRates rates = decay_rates(law, shock, shock.sigma0, 0.0);
  const double needed = 40.0 / rates.min();
  const double L = std::max(80.0, spacing * std::ceil(needed / spacing));
  return ProfileGrid(L, spacing);
}

LayerProfile solve_layer(const ScalarLaw& law, const ShockTriple& shock, const ProfileGrid& grid,
                         double anchor_x) {
  const auto oleinik = check_oleinik(law, shock);
  const double mid = shock.midpoint();
  const double field_mid = law.f(mid) - law.f(shock.u_plus) - shock.sigma0 * (mid - shock.u_plus);
  if (!oleinik.ok || field_mid * shock.jump() <= 0.0) {
    std::ostringstream msg;
    msg << "layer ODE has no connection (Oleinik margin " << oleinik.margin
        << ", field at midpoint " << field_mid << ")";
    throw NoConnectionError(msg.str());
  }
  if (std::abs(anchor_x) >= grid.half_width()) throw RangeError("anchor outside the grid");

  LayerProfile layer{law, shock, grid, std::vector<double>(grid.size()),
                     std::vector<double>(grid.size()), std::vector<double>(grid.size())};
  const double sigma0 = shock.sigma0;
  for (bool rightward : {true, false}) {
    const double base = rightward ? shock.u_plus : shock.u_minus;
    auto field = [&](const std::array<double, 1>& d, std::array<double, 1>& dd, double) {
      dd[0] = flux_increment(law, base, d[0]) - sigma0 * d[0];
    };
    std::array<double, 1> state{mid - base};
    const auto times = march_times(grid, anchor_x, rightward);
    const double h = grid.spacing();
    odeint::integrate_times(controlled_stepper<std::array<double, 1>>(), field, state,
                            times.begin(), times.end(), rightward ? h : -h,
                            [&](const std::array<double, 1>& d, double x) {
                              if (x == anchor_x && !grid.contains_node(x)) return;
                              const std::size_t i = grid.index_of(x);
                              const double side = side_endstate(shock, x);
                              layer.tail0[i] = base == side ? d[0] : base + d[0] - side;
                              layer.u0[i] = base + d[0];
                              layer.du0[i] = flux_increment(law, base, d[0]) - sigma0 * d[0];
                            });
  }
  return layer;
}

double sigma_functional(const LayerProfile& layer, const std::vector<double>& u_tilde, double eps) {
  require_same_grid(layer.grid, u_tilde);
  std::vector<double> g(u_tilde.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double side = side_endstate(layer.shock, layer.grid.x(i));
    g[i] = source_at(layer.law, side, layer.tail0[i] + eps * u_tilde[i]);
  }
  return -num::trapezoid(g, layer.grid.spacing()) / layer.shock.jump();
}

namespace {

// v = -U0' * int_0^x H / U0' with H = int_x^inf h on the right; on the left the
// integrand is H_left / U0' with H_left = int_{-inf}^x h.
std::vector<double> invert_with_fluxes(const LayerProfile& layer, const std::vector<double>& right,
                                       const std::vector<double>& left) {
  const std::size_t n = layer.grid.size();
  const std::size_t c = layer.grid.center();
  const double h = layer.grid.spacing();
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i)
    q[i] = (i >= c ? -right[i] : left[i]) / layer.du0[i];
  // At x = 0 both forms agree for zero-mean data; use the side-consistent one.
  std::vector<double> q_left = q;
  q_left[c] = left[c] / layer.du0[c];
  const auto phi_r = num::cumulative_sixth(q, h, c);
  const auto phi_l = num::cumulative_sixth(q_left, h, c);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = layer.du0[i] * (i >= c ? phi_r[i] : phi_l[i]);
  v[c] = 0.0;
  return v;
}

}  // namespace

std::vector<double> apply_L0_dagger(const LayerProfile& layer, const std::vector<double>& h_in) {
  require_same_grid(layer.grid, h_in);
  const double h = layer.grid.spacing();
  const double mean = num::trapezoid(h_in, h);
  if (std::abs(mean) > 1e-10) {
    std::ostringstream msg;
    msg << "L0 dagger needs a zero-mean right side, got integral " << mean;
    throw RangeError(msg.str());
  }
  const std::size_t last = h_in.size() - 1;
  auto right = num::cumulative_sixth(h_in, h, last);  // int_{L}^x h = -H(x)
  for (double& r : right) r = -r;
  const auto left = num::cumulative_sixth(h_in, h, 0);
  return invert_with_fluxes(layer, right, left);
}

std::vector<double> apply_L0(const LayerProfile& layer, const std::vector<double>& v) {
  require_same_grid(layer.grid, v);
  const std::size_t n = v.size();
  const double h = layer.grid.spacing();
  std::vector<double> av(n);
  for (std::size_t i = 0; i < n; ++i)
    av[i] = (layer.law.df(layer.u0[i]) - layer.shock.sigma0) * v[i];
  // Sixth-order centered stencils; the three outermost nodes fall back to second order.
  auto d1 = [h](const std::vector<double>& f, std::size_t i) {
    return (45 * (f[i + 1] - f[i - 1]) - 9 * (f[i + 2] - f[i - 2]) + (f[i + 3] - f[i - 3])) /
           (60 * h);
  };
  auto d2 = [h](const std::vector<double>& f, std::size_t i) {
    return (270 * (f[i + 1] + f[i - 1]) - 27 * (f[i + 2] + f[i - 2]) + 2 * (f[i + 3] + f[i - 3]) -
            490 * f[i]) /
           (180 * h * h);
  };
  std::vector<double> out(n, 0.0);
  const auto dav = num::derivative(av, h);
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= 3 && i + 3 < n) {
      out[i] = d2(v, i) - d1(av, i);
    } else if (i >= 1 && i + 1 < n) {
      out[i] = (v[i + 1] - 2 * v[i] + v[i - 1]) / (h * h) - dav[i];
    }
  }
  return out;
}

EpsProfile layer_as_profile(const LayerProfile& layer) {
  EpsProfile p{layer.law, layer.shock, layer.grid};
  p.sigma_eps = layer.shock.sigma0;
  p.u_eps = layer.u0;
  p.du_eps = layer.du0;
  p.tail_eps = layer.tail0;
  p.u_tilde.assign(layer.grid.size(), 0.0);
  return p;
}

namespace {

// One application of the fixed-point map; returns the new iterate and sigma-tilde.
std::pair<std::vector<double>, double> fixed_point_map(const LayerProfile& layer,
                                                       const std::vector<double>& ut, double eps) {
  const std::size_t n = ut.size();
  const double h = layer.grid.spacing();
  const ScalarLaw& law = layer.law;
  const ShockTriple& s = layer.shock;
  std::vector<double> g(n), tail(n), q(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double side = side_endstate(s, layer.grid.x(i));
    tail[i] = layer.tail0[i] + eps * ut[i];
    g[i] = source_at(law, side, tail[i]);
    const double u0 = layer.u0[i];
    if (eps < 1e-6) {
      q[i] = 0.5 * eps * law.d2f(u0) * ut[i] * ut[i];
    } else {
      q[i] = (flux_increment(law, u0, eps * ut[i]) - eps * law.df(u0) * ut[i]) / eps;
    }
  }
  const double sigma_tilde = -num::trapezoid(g, h) / s.jump();
  const auto g_from_right = num::cumulative_sixth(g, h, n - 1);  // -int_x^L g
  const auto g_from_left = num::cumulative_sixth(g, h, 0);       // int_{-L}^x g
  std::vector<double> right(n), left(n);
  const std::size_t c = layer.grid.center();
  for (std::size_t i = 0; i < n; ++i) {
    // Deviation of U from each endstate, formed from the stored tail.
    const double from_plus = i >= c ? tail[i] : s.u_minus - s.u_plus + tail[i];
    const double from_minus = i < c ? tail[i] : s.u_plus - s.u_minus + tail[i];
    right[i] = g_from_right[i] + sigma_tilde * from_plus - q[i];
    left[i] = q[i] - sigma_tilde * from_minus - g_from_left[i];
  }
  return {invert_with_fluxes(layer, right, left), sigma_tilde};
}

}  // namespace

EpsProfile solve_profile_eps(const LayerProfile& layer, double eps, ProfileOptions opts) {
  if (!(eps >= 0.0)) throw RangeError("eps must be nonnegative");
  const std::size_t n = layer.grid.size();
  const std::size_t c = layer.grid.center();
  FixedPointDiagnostics diag;
  std::vector<double> ut(n, 0.0);
  double sigma_tilde = 0.0;
  double last = 0.0;
  for (int k = 1;; ++k) {
    if (k > opts.max_iter) {
      std::ostringstream msg;
      msg << "fixed point did not converge in " << opts.max_iter << " iterations (last correction "
          << last << ")";
      throw ContractionError(msg.str());
    }
    auto [next, st] = fixed_point_map(layer, ut, eps);
    double corr = 0.0;
    for (std::size_t i = 0; i < n; ++i) corr = std::max(corr, std::abs(next[i] - ut[i]));
    if (!std::isfinite(corr) || (k > 3 && corr > 1e3 * diag.corrections.front())) {
      std::ostringstream msg;
      msg << "fixed point diverges at eps=" << eps << " (correction " << corr << ")";
      throw ContractionError(msg.str());
    }
    diag.corrections.push_back(corr);
    ut = std::move(next);
    sigma_tilde = st;
    last = corr;
    if (corr < opts.tol) {
      diag.iterations = k - 1 > 0 ? k - 1 : 1;
      break;
    }
  }
  for (std::size_t k = 1; k < diag.corrections.size(); ++k)
    if (diag.corrections[k] > 1e-11)
      diag.contraction = std::max(diag.contraction, diag.corrections[k] / diag.corrections[k - 1]);
  diag.sigma_tilde = sigma_tilde;
  diag.u_tilde = ut;

  EpsProfile p{layer.law, layer.shock, layer.grid, eps};
  p.u_eps.resize(n);
  p.du_eps.resize(n);
  p.tail_eps.resize(n);
  if (eps == 0.0) {
    p = layer_as_profile(layer);
    p.u_tilde = ut;
    p.sigma_tilde = sigma_tilde;
    p.fixed_point = std::move(diag);
    return p;
  }

  p.sigma_eps = layer.shock.sigma0 + eps * sigma_tilde;
  p.sigma_tilde = sigma_tilde;
  for (std::size_t i = 0; i < n; ++i) p.tail_eps[i] = layer.tail0[i] + eps * ut[i];
  const auto dut = num::derivative(ut, layer.grid.spacing());
  for (std::size_t i = 0; i < n; ++i) p.du_eps[i] = layer.du0[i] + eps * dut[i];

  if (opts.polish) {
    const ScalarLaw& law = layer.law;
    const ShockTriple& s = layer.shock;
    const double L = layer.grid.half_width();
    const Shooter shooter{law, s, eps, L};
    // Initial tail amplitudes extrapolated from the fixed point at |x| = 20.
    const double probe = std::min(20.0, 0.5 * L);
    const std::size_t ir = layer.grid.index_of(probe);
    const std::size_t il = layer.grid.index_of(-probe);
    const double mr = tail_exponent(law, s.u_plus, p.sigma_eps, eps, true);
    const double ml = tail_exponent(law, s.u_minus, p.sigma_eps, eps, false);
    auto log_tail = [&](std::size_t i, double fallback) {
      const double t = std::abs(p.tail_eps[i]);
      return t > 0 ? std::log(t) : std::log(std::abs(fallback));
    };
    Eigen::Vector3d z(p.sigma_eps, log_tail(ir, layer.tail0[ir]) + mr * (L - probe),
                      log_tail(il, layer.tail0[il]) - ml * (L - probe));
    Eigen::Vector3d r = shooter.residual(z);
    for (int it = 0; it < 30 && r.norm() > opts.polish_tol; ++it) {
      Eigen::Matrix3d jac;
      for (int j = 0; j < 3; ++j) {
        Eigen::Vector3d zp = z;
        const double step = 1e-7 * std::max(1.0, std::abs(z[j]));
        zp[j] += step;
        jac.col(j) = (shooter.residual(zp) - r) / step;
      }
      const Eigen::Vector3d dz = jac.fullPivLu().solve(-r);
      double damping = 1.0;
      Eigen::Vector3d trial = z + dz;
      Eigen::Vector3d rt = shooter.residual(trial);
      while (!(rt.norm() < r.norm()) && damping > 1e-3) {
        damping *= 0.5;
        trial = z + damping * dz;
        rt = shooter.residual(trial);
      }
      if (!(rt.norm() < r.norm())) break;
      z = trial;
      r = rt;
    }
    p.polish_residual = r.norm();
    if (!(p.polish_residual < 1e-9)) {
      std::ostringstream msg;
      msg << "profile shooting did not converge at eps=" << eps << " (residual "
          << p.polish_residual << ")";
      throw ContractionError(msg.str());
    }
    p.sigma_eps = z[0];
    p.sigma_tilde = (z[0] - s.sigma0) / eps;
    fill_half(law, s, layer.grid, eps, z[0], z[1], true, p.tail_eps, p.du_eps);
    fill_half(law, s, layer.grid, eps, z[0], z[2], false, p.tail_eps, p.du_eps);
    p.tail_eps[c] = 0.5 * (s.u_minus + s.u_plus) - s.u_plus;
  }
  p.u_tilde.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    p.u_eps[i] = p.endstate(i) + p.tail_eps[i];
    p.u_tilde[i] = (p.tail_eps[i] - layer.tail0[i]) / eps;
  }
  p.fixed_point = std::move(diag);
  return p;
}

EpsProfile extend_profile(const EpsProfile& p, double half_width) {
  if (half_width < p.grid.half_width()) throw RangeError("extension must not shrink the grid");
  EpsProfile out = p;
  out.grid = ProfileGrid(half_width, p.grid.spacing());
  const std::size_t n = out.grid.size();
  const std::size_t offset = out.grid.center() - p.grid.center();
  auto pad = [&](const std::vector<double>& v, bool absolute) {
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (i < offset) {
        w[i] = absolute ? p.shock.u_minus : 0.0;
      } else if (i - offset >= v.size()) {
        w[i] = absolute ? p.shock.u_plus : 0.0;
      } else {
        w[i] = v[i - offset];
      }
    }
    return w;
  };
  out.u_eps = pad(p.u_eps, true);
  out.du_eps = pad(p.du_eps, false);
  out.tail_eps = pad(p.tail_eps, false);
  out.u_tilde = pad(p.u_tilde, false);
  out.fixed_point.u_tilde.clear();
  return out;
}

ProfileResidual profile_residual(const EpsProfile& p) {
  ProfileResidual res;
  const std::size_t n = p.grid.size();
  const double h = p.grid.spacing();
  const auto u2 = p.second_derivatives();
  std::vector<double> u3(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double du = p.du_eps[i];
    u3[i] = p.law.d2f(p.u_eps[i]) * du * du + p.advection(i) * u2[i] -
            p.eps * p.law.dg(p.u_eps[i]) * du;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    // Values use tails so that increments keep relative precision.
    double du_val = p.tail_eps[i + 1] - p.tail_eps[i];
    if (i + 1 == p.grid.center()) du_val = p.u_eps[i + 1] - p.u_eps[i];
    const double r0 = du_val - 0.5 * h * (p.du_eps[i] + p.du_eps[i + 1]) -
                      h * h / 12.0 * (u2[i] - u2[i + 1]);
    const double r1 = p.du_eps[i + 1] - p.du_eps[i] - 0.5 * h * (u2[i] + u2[i + 1]) -
                      h * h / 12.0 * (u3[i] - u3[i + 1]);
    res.max_residual = std::max({res.max_residual, std::abs(r0) / h, std::abs(r1) / h});
  }
  const double sign = p.shock.jump() > 0 ? 1.0 : -1.0;
  res.monotone = std::all_of(p.du_eps.begin(), p.du_eps.end(),
                             [sign](double d) { return sign * d > 0.0; });
  res.anchored = std::abs(p.u_eps[p.grid.center()] - p.shock.midpoint()) < 1e-12;
  return res;
}

AsymptoticsReport verify_profile_asymptotics(const LayerProfile& layer,
                                             const std::vector<EpsProfile>& profiles, int k_max) {
  if (k_max < 0 || k_max > 2) throw RangeError("k_max must be 0, 1 or 2");
  AsymptoticsReport rep;
  const EpsProfile base = layer_as_profile(layer);
  const auto base_u2 = base.second_derivatives();
  const DecayRates theta0 = decay_rates(layer.law, layer.shock, layer.shock.sigma0, 0.0);
  const double w_rate = 0.4 * theta0.min();
  for (const auto& p : profiles) {
    if (p.grid.size() != layer.grid.size()) throw RangeError("profile grid differs from layer");
    AsymptoticsRow row;
    row.eps = p.eps;
    row.left_diff.assign(k_max + 1, 0.0);
    row.right_diff.assign(k_max + 1, 0.0);
    row.ratio.assign(k_max + 1, 0.0);
    const DecayRates theta = decay_rates(p.law, p.shock, p.sigma_eps, p.eps);
    const auto u2 = p.second_derivatives();
    for (std::size_t i = 0; i < p.grid.size(); ++i) {
      const double x = p.grid.x(i);
      const double ax = std::abs(x);
      const double te = x <= 0 ? theta.theta_l : theta.theta_r;
      const double t0 = x <= 0 ? theta0.theta_l : theta0.theta_r;
      const std::array<double, 3> de{p.tail_eps[i], p.du_eps[i], u2[i]};
      const std::array<double, 3> d0{layer.tail0[i], layer.du0[i], base_u2[i]};
      for (int k = 0; k <= k_max; ++k) {
        const double diff = std::abs(std::exp(te * ax) * de[k] - std::exp(t0 * ax) * d0[k]);
        auto& slot = x <= 0 ? row.left_diff[k] : row.right_diff[k];
        slot = std::max(slot, diff);
        if (x == 0.0) row.right_diff[k] = std::max(row.right_diff[k], diff);
      }
      row.weighted_diff = std::max(row.weighted_diff,
                                   std::exp(w_rate * ax) * std::abs(p.tail_eps[i] - layer.tail0[i]));
    }
    row.sigma_drift = std::abs(p.sigma_eps - layer.shock.sigma0);
    if (p.eps > 0) {
      for (int k = 0; k <= k_max; ++k)
        row.ratio[k] = std::max(row.left_diff[k], row.right_diff[k]) / p.eps;
      row.weighted_ratio = row.weighted_diff / p.eps;
    }
    rep.rows.push_back(std::move(row));
  }
  rep.ratio_spread.assign(k_max + 1, 1.0);
  bool finite = true;
  for (int k = 0; k <= k_max; ++k) {
    double lo = INFINITY, hi = 0.0;
    for (const auto& row : rep.rows) {
      if (row.eps <= 0) continue;
      lo = std::min(lo, row.ratio[k]);
      hi = std::max(hi, row.ratio[k]);
      finite = finite && std::isfinite(row.ratio[k]);
    }
    if (hi > 0) rep.ratio_spread[k] = hi / lo;
  }
  double lo = INFINITY, hi = 0.0;
  for (const auto& row : rep.rows) {
    if (row.eps <= 0) continue;
    lo = std::min(lo, row.weighted_ratio);
    hi = std::max(hi, row.weighted_ratio);
  }
  rep.weighted_spread = hi > 0 ? hi / lo : 1.0;
  rep.pass = finite && rep.weighted_spread <= 2.0 &&
             std::all_of(rep.ratio_spread.begin(), rep.ratio_spread.end(),
                         [](double s) { return s <= 2.0; });
  return rep;
}

void write_profile_csv(const std::string& path, const LayerProfile& layer, const EpsProfile& p) {
  if (p.grid.size() != layer.grid.size()) throw RangeError("profile grid differs from layer");
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "x,u0,du0,u_eps,du_eps,u_tilde\n" << std::setprecision(17);
  for (std::size_t i = 0; i < p.grid.size(); ++i)
    out << p.grid.x(i) << ',' << layer.u0[i] << ',' << layer.du0[i] << ',' << p.u_eps[i] << ','
        << p.du_eps[i] << ',' << p.u_tilde[i] << '\n';
  nlohmann::json meta{{"model", p.law.name()},
                      {"eps", p.eps},
                      {"sigma_eps", p.sigma_eps},
                      {"sigma_tilde", p.sigma_tilde},
                      {"half_width", p.grid.half_width()},
                      {"spacing", p.grid.spacing()}};
  std::ofstream side(path + ".json");
  side << meta.dump(2) << '\n';
}

EpsProfile read_profile_csv(const std::string& path, const Model& model) {
  std::ifstream side(path + ".json");
  if (!side) throw ConfigError("missing metadata sidecar " + path + ".json");
  const auto meta = nlohmann::json::parse(side);
  EpsProfile p{model.law, model.shock,
               ProfileGrid(meta.at("half_width").get<double>(), meta.at("spacing").get<double>())};
  p.eps = meta.at("eps").get<double>();
  p.sigma_eps = meta.at("sigma_eps").get<double>();
  p.sigma_tilde = meta.at("sigma_tilde").get<double>();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::array<double, 6> v{};
    char comma;
    ss >> v[0];
    for (std::size_t k = 1; k < v.size(); ++k) ss >> comma >> v[k];
    p.u_eps.push_back(v[3]);
    p.du_eps.push_back(v[4]);
    p.u_tilde.push_back(v[5]);
  }
  if (p.u_eps.size() != p.grid.size()) throw ConfigError("profile CSV length mismatch");
  p.tail_eps.resize(p.u_eps.size());
  for (std::size_t i = 0; i < p.u_eps.size(); ++i) p.tail_eps[i] = p.u_eps[i] - p.endstate(i);
  return p;
}

}  // namespace shocklab
