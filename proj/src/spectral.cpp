#include "shocklab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "shocklab/parallel.hpp"

namespace shocklab {
namespace {

constexpr double kGaussOffset = 0.5 / std::numbers::sqrt3;  // Gauss points at 1/2 -+ this
constexpr double kRenormLo = 0.1;
constexpr double kRenormHi = 10.0;

// Quintic Hermite interpolant on a cell of width h from value, slope, curvature.
double quintic(double y0, double d0, double s0, double y1, double d1, double s1, double h,
               double t) {
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
  const double h1 = t - 6 * t3 + 8 * t4 - 3 * t5;
  const double h2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5);
  const double h5 = 10 * t3 - 15 * t4 + 6 * t5;
  const double h4 = -4 * t3 + 7 * t4 - 3 * t5;
  const double h3 = 0.5 * (t3 - 2 * t4 + t5);
  return h0 * y0 + h * h1 * d0 + h * h * h2 * s0 + h5 * y1 + h * h4 * d1 + h * h * h3 * s1;
}

double sup(const Vec2& v) { return std::max(std::abs(v[0]), std::abs(v[1])); }

Complex det(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }

Vec2 mat_vec(const Mat2& m, const Vec2& v) {
  return {m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]};
}

// Profile value at fractional position t of cell i.
double profile_at(const EpsProfile& p, const std::vector<double>& u2, std::size_t i, double t) {
  const double h = p.grid.spacing();
  return quintic(p.u_eps[i], p.du_eps[i], u2[i], p.u_eps[i + 1], p.du_eps[i + 1], u2[i + 1], h, t);
}

EndstateEigen eigen_or_throw(Complex lambda, const FrozenCoefficients& c) {
  try {
    const auto e = mu_pm(lambda, c);
    if (std::abs(e.mu_plus.real() - e.mu_minus.real()) < 1e-10)
      throw NearBranchError("spectral gap of the frozen matrix collapsed");
    return e;
  } catch (const BranchCutError& err) {
    throw NearBranchError(err.what());
  }
}

// Complex scalar of modulus `1 / |c|` with phase cancelling c, combined with
// exp(i phase).
Complex phase_over(double phase, Complex c) { return std::polar(1.0, phase) / c; }

struct Renormalized {
  Vec2 v;
  double log = 0.0;
};

void renormalize(Renormalized& s) {
  const double n = sup(s.v);
  if (n < kRenormLo || n > kRenormHi) {
    s.v[0] /= n;
    s.v[1] /= n;
    s.log += std::log(n);
  }
}

// exp(i Im(z)) with the real part moved into the log scale.
Renormalized exponential_times(Complex z, const Vec2& r) {
  const Complex phase = std::polar(1.0, z.imag());
  Renormalized s{{phase * r[0], phase * r[1]}, z.real()};
  renormalize(s);
  return s;
}

}  // namespace

double SpectralCoefficients::branch_tip() const {
  return std::max(frozen_plus().branch_point(), frozen_minus().branch_point());
}

CoefficientsPtr make_coefficients(const EpsProfile& p) {
  auto c = std::make_shared<SpectralCoefficients>();
  c->grid = p.grid;
  c->eps = p.eps;
  c->sigma = p.sigma_eps;
  const std::size_t n = p.grid.size();
  const double h = p.grid.spacing();
  const auto u2 = p.second_derivatives();

  c->a_node.resize(n);
  c->du = p.du_eps;
  std::vector<double> da(n);
  for (std::size_t i = 0; i < n; ++i) {
    c->a_node[i] = p.advection(i);
    da[i] = p.law.d2f(p.u_eps[i]) * p.du_eps[i];
  }
  c->a_gauss.resize(2 * (n - 1));
  c->beta_gauss.resize(2 * (n - 1));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (int k = 0; k < 2; ++k) {
      const double t = 0.5 + (k == 0 ? -kGaussOffset : kGaussOffset);
      const double u = profile_at(p, u2, i, t);
      c->a_gauss[2 * i + k] = p.law.df(u) - p.sigma_eps;
      c->beta_gauss[2 * i + k] = p.eps * p.law.dg(u);
    }
  }
  c->cum_a = num::cumulative_hermite(c->a_node, da, h, p.grid.center());

  const auto& s = p.shock;
  c->a_plus = p.law.df(s.u_plus) - p.sigma_eps;
  c->a_minus = p.law.df(s.u_minus) - p.sigma_eps;
  c->beta_plus = p.eps * p.law.dg(s.u_plus);
  c->beta_minus = p.eps * p.law.dg(s.u_minus);

  const std::size_t m = p.grid.center();
  std::vector<double> right(n - m), dright(n - m), left(m + 1), dleft(m + 1);
  for (std::size_t i = m; i < n; ++i) {
    right[i - m] = c->a_node[i] - c->a_plus;
    dright[i - m] = da[i];
  }
  for (std::size_t i = 0; i <= m; ++i) {
    left[i] = c->a_node[i] - c->a_minus;
    dleft[i] = da[i];
  }
  c->I_plus = num::cumulative_hermite(right, dright, h, 0).back();
  c->I_minus = -num::cumulative_hermite(left, dleft, h, m).front();
  return c;
}

Vec2 ManifoldSolution::at(std::size_t i) const {
  const double s = std::exp(log_scale[i]);
  return {values[i][0] * s, values[i][1] * s};
}

Complex EvansValue::full() const { return value * std::exp(log_scale); }

SpectralProblem::SpectralProblem(CoefficientsPtr coeffs, Complex lambda)
    : coeffs_(std::move(coeffs)),
      lambda_(lambda),
      eig_plus_(eigen_or_throw(lambda, coeffs_->frozen_plus())),
      eig_minus_(eigen_or_throw(lambda, coeffs_->frozen_minus())),
      cache_(coeffs_->grid.size() - 1),
      cached_(coeffs_->grid.size() - 1, false) {}

double SpectralProblem::dual_factor_log(std::size_t cell) const {
  const double h = coeffs_->grid.spacing();
  return -0.5 * h * (coeffs_->a_gauss[2 * cell] + coeffs_->a_gauss[2 * cell + 1]);
}

// Fourth-order Magnus step: Omega = h/2 (A1 + A2) + sqrt(3) h^2 / 12 [A2, A1],
// exponentiated in closed form through N^2 = q I for the traceless part N.
const Mat2& SpectralProblem::propagator(std::size_t cell) const {
  if (cached_[cell]) return cache_[cell];
  const auto& c = *coeffs_;
  const double h = c.grid.spacing();
  const double a1 = c.a_gauss[2 * cell], a2 = c.a_gauss[2 * cell + 1];
  const Complex c1 = lambda_ - c.beta_gauss[2 * cell];
  const Complex c2 = lambda_ - c.beta_gauss[2 * cell + 1];
  const double k = std::numbers::sqrt3 / 12.0 * h * h;
  const Complex o11 = 0.5 * h * (a1 + a2) + k * (c1 - c2);
  const Complex o12 = h + k * (a2 - a1);
  const Complex o21 = 0.5 * h * (c1 + c2) + k * (c2 * a1 - c1 * a2);
  const Complex o22 = k * (c2 - c1);
  const Complex m = 0.5 * (o11 + o22);
  const Complex n11 = o11 - m, n22 = o22 - m;
  const Complex q = n11 * n11 + o12 * o21;
  Complex ch, sh;  // cosh(sqrt q) and sinh(sqrt q) / sqrt q, even in sqrt q
  if (std::abs(q) < 1e-6) {
    ch = 1.0 + q / 2.0 + q * q / 24.0 + q * q * q / 720.0;
    sh = 1.0 + q / 6.0 + q * q / 120.0 + q * q * q / 5040.0;
  } else {
    const Complex s = std::sqrt(q);
    ch = std::cosh(s);
    sh = std::sinh(s) / s;
  }
  const Complex em = std::exp(m);
  cache_[cell] = {em * (ch + sh * n11), em * sh * o12, em * sh * o21, em * (ch + sh * n22)};
  cached_[cell] = true;
  return cache_[cell];
}

ManifoldSolution SpectralProblem::integrate(Side side, Kind kind, bool dual,
                                            bool half_only) const {
  const auto& c = *coeffs_;
  const std::size_t n = c.grid.size();
  const std::size_t mid = c.grid.center();
  const double L = c.grid.half_width();
  ManifoldSolution out;
  out.side = side;
  out.kind = kind;
  out.dual = dual;
  out.values.assign(n, Vec2{});
  out.log_scale.assign(n, 0.0);

  auto store = [&](std::size_t i, const Renormalized& s) {
    out.values[i] = s.v;
    out.log_scale[i] = s.log;
  };
  auto step_forward = [&](Renormalized& s, std::size_t cell) {
    s.v = mat_vec(propagator(cell), s.v);
    if (dual) s.log += dual_factor_log(cell);
    renormalize(s);
  };
  auto step_backward = [&](Renormalized& s, std::size_t cell) {
    // Inverse of a unimodular-up-to-exp(tr) 2x2 matrix through its adjugate.
    const Mat2& e = propagator(cell);
    const Vec2 v = s.v;
    s.v = {e[3] * v[0] - e[1] * v[1], -e[2] * v[0] + e[0] * v[1]};
    s.log += dual_factor_log(cell);  // det E = exp(tr Omega) = exp(-dual_factor_log)
    if (dual) s.log -= dual_factor_log(cell);
    renormalize(s);
  };
  auto sweep_down = [&](Renormalized s, std::size_t from, std::size_t to) {
    store(from, s);
    for (std::size_t i = from; i > to; --i) {
      step_backward(s, i - 1);
      store(i - 1, s);
    }
  };
  auto sweep_up = [&](Renormalized s, std::size_t from, std::size_t to) {
    store(from, s);
    for (std::size_t i = from; i < to; ++i) {
      step_forward(s, i);
      store(i + 1, s);
    }
  };

  const double shift_plus = dual ? c.a_plus : 0.0;
  const double shift_minus = dual ? c.a_minus : 0.0;
  const auto& ep = eig_plus_;
  const auto& em = eig_minus_;

  if (side == Side::right && kind == Kind::stable) {
    sweep_down(exponential_times(L * (ep.mu_minus - shift_plus), ep.r_minus), n - 1,
               half_only ? mid : 0);
    return out;
  }
  if (side == Side::left && kind == Kind::unstable) {
    sweep_up(exponential_times(-L * (em.mu_plus - shift_minus), em.r_plus), 0,
             half_only ? mid : n - 1);
    return out;
  }

  // Growing kinds: seed at x = 0 with J times the decaying partner, then fix
  // the component along the growing eigenvector at the far end.
  const bool right = side == Side::right;
  const ManifoldSolution partner =
      integrate(right ? Side::right : Side::left, right ? Kind::stable : Kind::unstable, dual,
                true);
  const Vec2 p = partner.values[mid];
  Vec2 seed{-p[1], p[0]};
  if (std::abs(det(p, seed)) < 0.1 * sup(p) * sup(seed)) {
    seed = std::abs(p[0]) < std::abs(p[1]) ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
  }
  Renormalized s{seed, 0.0};
  renormalize(s);
  sweep_up(s, mid, n - 1);
  sweep_down(s, mid, 0);

  const std::size_t end = right ? n - 1 : 0;
  const Vec2& l = right ? ep.l_plus : em.l_minus;
  const Complex mu = right ? ep.mu_plus - shift_plus : em.mu_minus - shift_minus;
  const double x_end = right ? L : -L;
  const Complex proj = l[0] * out.values[end][0] + l[1] * out.values[end][1];
  if (std::abs(proj) == 0.0) throw NearBranchError("growing manifold has no growing component");
  const Complex target = x_end * mu;
  const Complex scale = phase_over(target.imag(), proj);
  const double log_shift = target.real() - out.log_scale[end];
  for (std::size_t i = 0; i < n; ++i) {
    Renormalized r{{out.values[i][0] * scale, out.values[i][1] * scale},
                   out.log_scale[i] + log_shift};
    renormalize(r);
    out.values[i] = r.v;
    out.log_scale[i] = r.log;
  }
  return out;
}

ManifoldSolution integrate_manifold(const SpectralProblem& problem, Side side, Kind kind,
                                    bool dual) {
  return problem.integrate(side, kind, dual);
}

double manifold_step_residual(const SpectralProblem& problem, const ManifoldSolution& m,
                              const EpsProfile& profile) {
  const auto& c = problem.coeffs();
  const double h = c.grid.spacing();
  const auto u2 = profile.second_derivatives();
  const Complex lambda = problem.lambda();
  constexpr int kSub = 8;
  const double dt = 1.0 / kSub;
  auto rhs = [&](std::size_t cell, double t, const Vec2& v) {
    const double u = profile_at(profile, u2, cell, t);
    double a = profile.law.df(u) - profile.sigma_eps;
    const Complex cc = lambda - profile.eps * profile.law.dg(u);
    if (m.dual) a = 0.0;  // A - a I has zero (1,1) entry and -a on (2,2)
    const double a22 = m.dual ? -(profile.law.df(u) - profile.sigma_eps) : 0.0;
    return Vec2{h * (a * v[0] + v[1]), h * (cc * v[0] + a22 * v[1])};
  };
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < c.grid.size(); ++i) {
    Vec2 v = m.values[i];
    for (int s = 0; s < kSub; ++s) {
      const double t = s * dt;
      auto axpy = [](const Vec2& a, Complex k, const Vec2& b) {
        return Vec2{a[0] + k * b[0], a[1] + k * b[1]};
      };
      const Vec2 k1 = rhs(i, t, v);
      const Vec2 k2 = rhs(i, t + dt / 2, axpy(v, dt / 2, k1));
      const Vec2 k3 = rhs(i, t + dt / 2, axpy(v, dt / 2, k2));
      const Vec2 k4 = rhs(i, t + dt, axpy(v, dt, k3));
      for (int j = 0; j < 2; ++j) v[j] += dt / 6 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    const double scale = std::exp(m.log_scale[i] - m.log_scale[i + 1]);
    const Vec2& w = m.values[i + 1];
    const double err = std::max(std::abs(v[0] * scale - w[0]), std::abs(v[1] * scale - w[1]));
    worst = std::max(worst, err / sup(w));
  }
  return worst;
}

EvansValue evans(const CoefficientsPtr& coeffs, Complex lambda) {
  const SpectralProblem problem(coeffs, lambda);
  const std::size_t mid = coeffs->grid.center();
  const auto rs = problem.integrate(Side::right, Kind::stable, false, true);
  const auto lu = problem.integrate(Side::left, Kind::unstable, false, true);
  return {lambda, det(rs.values[mid], lu.values[mid]), rs.log_scale[mid] + lu.log_scale[mid]};
}

EvansValue evans(const EpsProfile& profile, Complex lambda) {
  return evans(make_coefficients(profile), lambda);
}

SpectralSolution solve_spectral(const CoefficientsPtr& coeffs, Complex lambda) {
  const SpectralProblem problem(coeffs, lambda);
  SpectralSolution s;
  s.lambda = lambda;
  s.eig_plus = problem.eigen_plus();
  s.eig_minus = problem.eigen_minus();
  s.rs = problem.integrate(Side::right, Kind::stable);
  s.ru = problem.integrate(Side::right, Kind::unstable);
  s.ls = problem.integrate(Side::left, Kind::stable);
  s.lu = problem.integrate(Side::left, Kind::unstable);
  s.d_rs = problem.integrate(Side::right, Kind::stable, true);
  s.d_ru = problem.integrate(Side::right, Kind::unstable, true);
  s.d_ls = problem.integrate(Side::left, Kind::stable, true);
  s.d_lu = problem.integrate(Side::left, Kind::unstable, true);

  const std::size_t mid = coeffs->grid.center();
  s.evans = {lambda, det(s.rs.values[mid], s.lu.values[mid]),
             s.rs.log_scale[mid] + s.lu.log_scale[mid]};

  // Cramer's rule at x = 0; exact values are O(1) there by normalization.
  auto expand = [&](const ManifoldSolution& target, const ManifoldSolution& b1,
                    const ManifoldSolution& b2, Complex& c1, Complex& c2) {
    const Vec2 t = target.at(mid), v1 = b1.at(mid), v2 = b2.at(mid);
    const Complex d = det(v1, v2);
    if (std::abs(d) < 1e-13 * sup(v1) * sup(v2))
      throw NearBranchError("expansion basis is degenerate at x = 0");
    c1 = det(t, v2) / d;
    c2 = det(v1, t) / d;
  };
  auto& k = s.coeffs;
  expand(s.rs, s.ls, s.lu, k.rho_r, k.tau_r);
  expand(s.lu, s.ru, s.rs, k.rho_l, k.tau_l);
  expand(s.d_rs, s.d_ls, s.d_lu, k.tilde_rho_r, k.tilde_tau_r);
  expand(s.d_lu, s.d_ru, s.d_rs, k.tilde_rho_l, k.tilde_tau_l);
  return s;
}

ScatteringCoeffs scattering_coeffs(const EpsProfile& profile, Complex lambda) {
  return solve_spectral(make_coefficients(profile), lambda).coeffs;
}

ScatteringCheck check_scattering(const SpectralSolution& s, const SpectralCoefficients& c,
                                 const std::vector<double>& x_samples) {
  ScatteringCheck out;
  const Complex d = s.evans.full();
  const Complex gap = s.eig_minus.mu_plus - s.eig_minus.mu_minus;
  const Complex closed = d * std::exp(-c.I_minus) / gap;
  out.closed_form_error = std::abs(s.coeffs.rho_r - closed) / std::max(std::abs(closed), 1e-300);

  auto pairing = [](const Vec2& v, const Vec2& w) { return -det(v, w); };  // v . J w
  const double expected_a = std::abs(d * std::exp(-c.I_minus));
  const double expected_b = std::abs(d * std::exp(c.I_plus));
  for (double x : x_samples) {
    const std::size_t i = c.grid.index_of(x);
    auto rel = [](const Vec2& lhs, const Vec2& rhs) {
      return std::max(std::abs(lhs[0] - rhs[0]), std::abs(lhs[1] - rhs[1])) /
             std::max(sup(lhs), 1e-300);
    };
    auto comb = [&](Complex a, const ManifoldSolution& p, Complex b, const ManifoldSolution& q) {
      const Vec2 u = p.at(i), v = q.at(i);
      return Vec2{a * u[0] + b * v[0], a * u[1] + b * v[1]};
    };
    const auto& k = s.coeffs;
    out.expansion_error = std::max(
        {out.expansion_error, rel(s.rs.at(i), comb(k.rho_r, s.ls, k.tau_r, s.lu)),
         rel(s.lu.at(i), comb(k.rho_l, s.ru, k.tau_l, s.rs)),
         rel(s.d_rs.at(i), comb(k.tilde_rho_r, s.d_ls, k.tilde_tau_r, s.d_lu)),
         rel(s.d_lu.at(i), comb(k.tilde_rho_l, s.d_ru, k.tilde_tau_l, s.d_rs))});

    const Vec2 v = s.rs.at(i), w = s.d_rs.at(i);
    out.self_pairing = std::max(out.self_pairing, std::abs(pairing(v, w)) / (sup(v) * sup(w)));
    const Complex pa = pairing(s.rs.at(i), s.d_lu.at(i));
    const Complex pb = pairing(s.lu.at(i), s.d_rs.at(i));
    const Complex ea = -d * std::exp(-c.I_minus);
    const Complex eb = d * std::exp(c.I_plus);
    out.cross_pairing_error = std::max({out.cross_pairing_error, std::abs(pa - ea) / expected_a,
                                        std::abs(pb - eb) / expected_b});
  }
  return out;
}

WronskianReport check_wronskian_transport(const EpsProfile& profile, Complex lambda,
                                          const std::vector<double>& x_samples) {
  const auto coeffs = make_coefficients(profile);
  const SpectralProblem problem(coeffs, lambda);
  const auto rs = problem.integrate(Side::right, Kind::stable);
  const auto lu = problem.integrate(Side::left, Kind::unstable);
  const std::size_t mid = coeffs->grid.center();
  const Complex d0 = det(rs.values[mid], lu.values[mid]);
  const double log0 = rs.log_scale[mid] + lu.log_scale[mid];
  WronskianReport out;
  for (double x : x_samples) {
    const std::size_t i = coeffs->grid.index_of(x);
    const Complex w = det(rs.values[i], lu.values[i]);
    // Compare w e^{logs(x)} with d0 e^{log0 + A(x)} after dividing by e^{log0}.
    const double shift = rs.log_scale[i] + lu.log_scale[i] - log0 - coeffs->cum_a[i];
    const Complex lhs = w * std::exp(shift);
    const double err = std::abs(lhs - d0) / std::abs(d0);
    out.x.push_back(x);
    out.rel_error.push_back(err);
    out.max_rel_error = std::max(out.max_rel_error, err);
  }
  return out;
}

HfReport evans_hf_limit(const EpsProfile& profile, const std::vector<Complex>& lambdas) {
  const auto coeffs = make_coefficients(profile);
  HfReport out;
  out.limit = 2.0 * std::exp(-0.5 * coeffs->I_plus + 0.5 * coeffs->I_minus);
  const auto values = parallel_map<EvansValue>(
      lambdas.size(), [&](std::size_t k) { return evans(coeffs, lambdas[k]); });
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    const Complex ratio = values[k].full() / std::sqrt(lambdas[k]);
    out.rows.push_back({lambdas[k], ratio, std::abs(ratio - out.limit)});
  }
  return out;
}

double cauchy_riemann_residual(const CoefficientsPtr& coeffs, Complex lambda, double h) {
  const Complex i(0.0, 1.0);
  const auto d = parallel_map<Complex>(4, [&](std::size_t k) {
    const Complex offsets[4] = {h, -h, i * h, -i * h};
    return evans(coeffs, lambda + offsets[k]).full();
  });
  const Complex dx = (d[0] - d[1]) / (2 * h);
  const Complex dy = (d[2] - d[3]) / (2 * h);
  return std::abs(dy - i * dx);
}

WindingResult winding_number(const std::function<Complex(Complex)>& fn,
                             const std::vector<Complex>& nodes, int max_depth) {
  if (nodes.size() < 3) throw InvalidContourError("winding contour needs at least 3 nodes");
  auto checked = [&](Complex z) {
    const Complex v = fn(z);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()) || v == 0.0)
      throw NearRootError("function vanishes or is not finite on the contour");
    return v;
  };
  const auto values = parallel_map<Complex>(nodes.size(), [&](std::size_t k) {
    return checked(nodes[k]);
  });

  WindingResult out;
  double total = 0.0;
  out.nodes.push_back(nodes[0]);
  out.argument.push_back(std::arg(values[0]));
  // Recursive bisection of one segment, appending its interior and end point.
  std::function<void(Complex, Complex, Complex, Complex, int)> segment =
      [&](Complex za, Complex fa, Complex zb, Complex fb, int depth) {
        const double jump = std::arg(fb / fa);
        if (std::abs(jump) > std::numbers::pi / 4 && depth < max_depth) {
          const Complex zm = 0.5 * (za + zb);
          const Complex fm = checked(zm);
          segment(za, fa, zm, fm, depth + 1);
          segment(zm, fm, zb, fb, depth + 1);
          return;
        }
        if (std::abs(jump) > std::numbers::pi)
          throw RefineContourError("argument jump above pi survives refinement");
        total += jump;
        out.nodes.push_back(zb);
        out.argument.push_back(out.argument.front() + total);
      };
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const std::size_t j = (k + 1) % nodes.size();
    segment(nodes[k], values[k], nodes[j], values[j], 0);
  }
  out.winding = total / (2 * std::numbers::pi);
  out.count = static_cast<int>(std::lround(out.winding));
  return out;
}

WindingResult count_roots(const EpsProfile& profile, const std::vector<Complex>& contour_nodes) {
  const auto coeffs = make_coefficients(profile);
  // The argument of D only depends on the mantissa.
  return winding_number([&](Complex z) { return evans(coeffs, z).value; }, contour_nodes);
}

std::vector<Complex> circle_contour(Complex center, double radius, int n) {
  std::vector<Complex> out;
  for (int k = 0; k < n; ++k) out.push_back(center + std::polar(radius, 2 * std::numbers::pi * k / n));
  return out;
}

std::vector<Complex> rectangle_contour(double re_lo, double re_hi, double im_lo, double im_hi,
                                       int n_per_side) {
  const Complex corners[4] = {{re_lo, im_lo}, {re_hi, im_lo}, {re_hi, im_hi}, {re_lo, im_hi}};
  std::vector<Complex> out;
  for (int side = 0; side < 4; ++side) {
    const Complex a = corners[side], b = corners[(side + 1) % 4];
    for (int k = 0; k < n_per_side; ++k) out.push_back(a + (b - a) * (double(k) / n_per_side));
  }
  return out;
}

std::vector<Complex> keyhole_contour(Complex center, double radius, double branch_tip, double gap,
                                     int n) {
  const double reach = center.real() - std::sqrt(radius * radius - center.imag() * center.imag());
  const bool hits = std::abs(center.imag()) < radius && reach < branch_tip;
  if (!hits) return circle_contour(center, radius, n);
  if (branch_tip + gap > center.real() + radius)
    throw InvalidContourError("branch half-line crosses the whole circle");
  // Counter-clockwise outer arc between the slit edges, then back along the
  // upper edge, around the tip on its right, and out along the lower edge.
  const double delta = std::asin(std::clamp((gap - center.imag()) / radius, -1.0, 1.0));
  const double th_upper = std::numbers::pi - delta;
  const double th_lower = -std::numbers::pi + std::asin(std::clamp((gap + center.imag()) / radius,
                                                                   -1.0, 1.0));
  std::vector<Complex> out;
  const int n_arc = std::max(8, n);
  for (int k = 0; k < n_arc; ++k) {
    const double th = th_lower + (th_upper - th_lower) * k / n_arc;
    out.push_back(center + std::polar(radius, th));
  }
  const Complex upper_start = center + std::polar(radius, th_upper);
  const int n_slit = std::max(4, n / 4);
  for (int k = 0; k < n_slit; ++k) {
    const double x = upper_start.real() + (branch_tip - upper_start.real()) * k / n_slit;
    out.emplace_back(x, gap);
  }
  const int n_tip = 8;
  for (int k = 0; k < n_tip; ++k) {
    const double th = std::numbers::pi / 2 - std::numbers::pi * k / n_tip;
    out.push_back(Complex(branch_tip, 0.0) + std::polar(gap, th));
  }
  const Complex lower_end = center + std::polar(radius, th_lower);
  for (int k = 0; k < n_slit; ++k) {
    const double x = branch_tip + (lower_end.real() - branch_tip) * k / n_slit;
    out.emplace_back(x, -gap);
  }
  return out;
}

double estimate_eta0(const SpectralCoefficients& c, double floor) {
  // Rightmost real part over the endstate dispersion curves beta - k^2 - i alpha k.
  double edge = -std::numeric_limits<double>::infinity();
  for (const auto& f : {c.frozen_plus(), c.frozen_minus()}) {
    for (int j = 0; j <= 400; ++j) {
      const double k = -10.0 + 0.05 * j;
      edge = std::max(edge, f.beta - k * k);
    }
  }
  const double margin = std::max(0.0, -edge);
  // The small contours need alpha^2 - 2 eta0 > 0 at both endstates.
  const double cap = 0.45 * std::min(c.a_plus * c.a_plus, c.a_minus * c.a_minus);
  return std::min(std::max(floor, 0.5 * margin), cap);
}

}  // namespace shocklab
