#include "shocklab/green.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "shocklab/parallel.hpp"

namespace shocklab {

Complex Scaled::value() const { return m == 0.0 ? Complex{} : m * std::exp(log); }

Scaled operator*(const Scaled& a, const Scaled& b) { return {a.m * b.m, a.log + b.log}; }
Scaled operator*(const Scaled& a, Complex c) { return {a.m * c, a.log}; }

Scaled operator+(const Scaled& a, const Scaled& b) {
  if (a.m == 0.0) return b;
  if (b.m == 0.0) return a;
  const double top = std::max(a.log, b.log);
  return {a.m * std::exp(a.log - top) + b.m * std::exp(b.log - top), top};
}

namespace {

Scaled first(const ManifoldSolution& s, std::size_t i) { return {s.values[i][0], s.log_scale[i]}; }
Scaled second(const ManifoldSolution& s, std::size_t i) { return {s.values[i][1], s.log_scale[i]}; }

Scaled inverse_evans(const EvansValue& d, double log_factor) {
  return {1.0 / d.value, log_factor - d.log_scale};
}

void check_admissible(const SpectralSolution& s) {
  for (const auto* e : {&s.eig_plus, &s.eig_minus}) {
    if (!(e->mu_plus.real() > 0.0 && e->mu_minus.real() < 0.0))
      throw InvalidContourError("contour node left of the essential spectrum");
  }
}

// e^{Lambda t} Lambda' as a scaled number.
Scaled time_factor(const ContourNode& n, double t, bool times_lambda = false) {
  Complex m = std::polar(1.0, n.lambda.imag() * t) * n.dlambda;
  if (times_lambda) m *= n.lambda;
  return {m, n.lambda.real() * t};
}

// Contribution (1/pi) Im(e^{Lambda t} Lambda' piece) of a node, without weight.
double integrand(const Scaled& piece, const ContourNode& n, double t) {
  if (piece.m == 0.0) return 0.0;
  return (piece * time_factor(n, t)).value().imag() / std::numbers::pi;
}

constexpr double kRoundoff = 1e-15;

}  // namespace

// ---------------------------------------------------------------------------
// SpectralGreen

SpectralGreen::SpectralGreen(CoefficientsPtr coeffs, Complex lambda, double det_floor)
    : coeffs_(std::move(coeffs)), sol_(solve_spectral(coeffs_, lambda)) {
  check_admissible(sol_);
  if (std::abs(sol_.evans.value) * std::exp(sol_.evans.log_scale) < det_floor)
    throw NearRootError("Evans function below floor; use a contour around the root");
  pre_minus_ = inverse_evans(sol_.evans, coeffs_->I_minus);
  pre_plus_ = inverse_evans(sol_.evans, -coeffs_->I_plus);
}

Complex SpectralGreen::component(std::size_t i, std::size_t j, bool upper, int comp) const {
  const std::size_t mid = coeffs_->grid.center();
  const bool rx = i >= mid, ry = j >= mid;
  const auto& k = sol_.coeffs;
  auto v = [&](const ManifoldSolution& m) { return comp == 0 ? first(m, i) : second(m, i); };
  auto dy = [&](const ManifoldSolution& m) { return first(m, j); };
  if (upper && !(rx == false && ry == true)) {
    if (rx && !ry) return (pre_minus_ * v(sol_.rs) * dy(sol_.d_lu)).value();
    if (rx) {
      return (pre_minus_ * v(sol_.rs) * (dy(sol_.d_ru) * k.tilde_rho_l + dy(sol_.d_rs) * k.tilde_tau_l))
          .value();
    }
    return (pre_minus_ * (v(sol_.ls) * k.rho_r + v(sol_.lu) * k.tau_r) * dy(sol_.d_lu)).value();
  }
  if (!rx && ry) return (pre_plus_ * v(sol_.lu) * dy(sol_.d_rs)).value();
  if (!rx) {
    return (pre_plus_ * v(sol_.lu) * (dy(sol_.d_ls) * k.tilde_rho_r + dy(sol_.d_lu) * k.tilde_tau_r))
        .value();
  }
  return (pre_plus_ * (v(sol_.ru) * k.rho_l + v(sol_.rs) * k.tau_l) * dy(sol_.d_rs)).value();
}

Complex SpectralGreen::value(std::size_t i, std::size_t j, bool upper) const {
  return component(i, j, upper, 0);
}

Complex SpectralGreen::flux(std::size_t i, std::size_t j, bool upper) const {
  return component(i, j, upper, 1);
}

Complex SpectralGreen::unexpanded(std::size_t i, std::size_t j) const {
  if (i >= j) return (pre_minus_ * first(sol_.rs, i) * first(sol_.d_lu, j)).value();
  return (pre_plus_ * first(sol_.lu, i) * first(sol_.d_rs, j)).value();
}

double SpectralGreen::residual(const EpsProfile& profile, std::size_t j, std::size_t gap) const {
  const auto& c = *coeffs_;
  const std::size_t n = c.grid.size();
  const double h = c.grid.spacing();
  std::vector<Complex> g(n), ag(n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = (*this)(i, j);
    ag[i] = c.a_node[i] * g[i];
    scale = std::max(scale, std::abs(g[i]));
  }
  const Complex lambda = sol_.lambda;
  double worst = 0.0;
  const std::size_t reach = 3 + gap;
  for (std::size_t i = 3; i + 3 < n; ++i) {
    if ((i > j ? i - j : j - i) < reach) continue;
    auto at = [&](const std::vector<Complex>& f, int o) { return f[i + o]; };
    const Complex d2 = (2.0 * at(g, -3) - 27.0 * at(g, -2) + 270.0 * at(g, -1) - 490.0 * g[i] +
                        270.0 * at(g, 1) - 27.0 * at(g, 2) + 2.0 * at(g, 3)) /
                       (180.0 * h * h);
    const Complex d1 = (-at(ag, -3) + 9.0 * at(ag, -2) - 45.0 * at(ag, -1) + 45.0 * at(ag, 1) -
                        9.0 * at(ag, 2) + at(ag, 3)) /
                       (60.0 * h);
    const double beta = profile.eps * profile.law.dg(profile.u_eps[i]);
    const Complex r = lambda * g[i] - (d2 - d1 + beta * g[i]);
    worst = std::max(worst, std::abs(r));
  }
  return scale > 0.0 ? worst / scale : 0.0;
}

Complex spectral_green(const EpsProfile& profile, Complex lambda, double x, double y) {
  const SpectralGreen g(make_coefficients(profile), lambda);
  return g(profile.grid.index_of(x), profile.grid.index_of(y));
}

// ---------------------------------------------------------------------------
// ContourBundle

ContourBundle::ContourBundle(CoefficientsPtr coeffs, const ContourSpec& spec, double t_min,
                             const Options& opts)
    : coeffs_(std::move(coeffs)), spec_(spec), t_min_(t_min) {
  const auto& grid = coeffs_->grid;
  mid_ = grid.center();
  const auto half = static_cast<std::size_t>(
      std::min<double>(grid.n_half(), std::floor(opts.window / grid.spacing() + 1e-9)));
  lo_ = mid_ - half;
  hi_ = mid_ + half;
  nodes_ = quadrature_nodes(spec_, t_min_, opts.quadrature);
  data_.resize(nodes_.size());
  parallel_for(nodes_.size(), [&](std::size_t k) {
    const SpectralSolution s = solve_spectral(coeffs_, nodes_[k].lambda);
    check_admissible(s);
    NodeData& d = data_[k];
    d.pre_minus = inverse_evans(s.evans, coeffs_->I_minus);
    d.pre_plus = inverse_evans(s.evans, -coeffs_->I_plus);
    d.sc = s.coeffs;
    auto right = [&](const ManifoldSolution& m, std::vector<Scaled>& out) {
      out.resize(hi_ - mid_ + 1);
      for (std::size_t i = mid_; i <= hi_; ++i) out[i - mid_] = first(m, i);
    };
    auto left = [&](const ManifoldSolution& m, std::vector<Scaled>& out) {
      out.resize(mid_ - lo_ + 1);
      for (std::size_t i = lo_; i <= mid_; ++i) out[mid_ - i] = first(m, i);
    };
    right(s.rs, d.rs);
    right(s.ru, d.ru);
    right(s.d_rs, d.d_rs);
    right(s.d_ru, d.d_ru);
    left(s.lu, d.lu);
    left(s.ls, d.ls);
    left(s.d_lu, d.d_lu);
    left(s.d_ls, d.d_ls);
  });
}

Scaled ContourBundle::dual_decaying(std::size_t k, std::size_t j) const {
  const NodeData& d = data_[k];
  return j >= mid_ ? d.d_rs[j - mid_] : d.d_lu[mid_ - j];
}

GreenPieces ContourBundle::pieces(std::size_t k, std::size_t i, std::size_t j) const {
  if (!covers(i) || !covers(j)) throw RangeError("Green evaluation outside the stored window");
  const NodeData& d = data_[k];
  const bool rx = i >= mid_, ry = j >= mid_;
  auto R = [&](const std::vector<Scaled>& v, std::size_t idx) { return v[idx - mid_]; };
  auto L = [&](const std::vector<Scaled>& v, std::size_t idx) { return v[mid_ - idx]; };
  GreenPieces p;
  if (i >= j) {
    if (rx && !ry) {
      p.cross = d.pre_minus * R(d.rs, i) * L(d.d_lu, j);
    } else if (rx) {
      const Scaled base = d.pre_minus * R(d.rs, i);
      p.tau = base * R(d.d_rs, j) * d.sc.tilde_tau_l;
      p.rho = base * R(d.d_ru, j) * d.sc.tilde_rho_l;
    } else {
      const Scaled base = d.pre_minus * L(d.d_lu, j);
      p.tau = base * L(d.lu, i) * d.sc.tau_r;
      p.rho = base * L(d.ls, i) * d.sc.rho_r;
    }
  } else {
    if (!rx && ry) {
      p.cross = d.pre_plus * L(d.lu, i) * R(d.d_rs, j);
    } else if (!rx) {
      const Scaled base = d.pre_plus * L(d.lu, i);
      p.tau = base * L(d.d_lu, j) * d.sc.tilde_tau_r;
      p.rho = base * L(d.d_ls, j) * d.sc.tilde_rho_r;
    } else {
      const Scaled base = d.pre_plus * R(d.d_rs, j);
      p.tau = base * R(d.rs, i) * d.sc.tau_l;
      p.rho = base * R(d.ru, i) * d.sc.rho_l;
    }
  }
  return p;
}

std::vector<GreenPieces> ContourBundle::apply(std::size_t k, const std::vector<double>& w,
                                              double weight_h) const {
  const NodeData& d = data_[k];
  const std::size_t nr = hi_ - mid_ + 1, nl = mid_ - lo_ + 1;
  auto wr = [&](std::size_t r) { return w[mid_ + r] * weight_h; };
  auto wl = [&](std::size_t l) { return w[mid_ - l] * weight_h; };

  // Right half, r = i - mid.
  // C_*(r) = sum_{0 <= s <= r}, T_rs(r) = sum_{s > r}.
  std::vector<Scaled> c_rs(nr), c_ru(nr), t_rs(nr);
  Scaled acc_rs, acc_ru, acc_t;
  for (std::size_t r = 0; r < nr; ++r) {
    acc_rs = acc_rs + d.d_rs[r] * Complex(wr(r));
    acc_ru = acc_ru + d.d_ru[r] * Complex(wr(r));
    c_rs[r] = acc_rs;
    c_ru[r] = acc_ru;
  }
  for (std::size_t r = nr; r-- > 0;) {
    t_rs[r] = acc_t;
    acc_t = acc_t + d.d_rs[r] * Complex(wr(r));
  }
  const Scaled sum_right_rs = acc_t;  // all y >= 0

  // Left half, l = mid - i. P_lu(l) = sum over y <= x, S_*(l) = sum over x < y < 0.
  std::vector<Scaled> p_lu(nl), s_lu(nl), s_ls(nl);
  Scaled acc_p;
  for (std::size_t l = nl; l-- > 1;) {
    acc_p = acc_p + d.d_lu[l] * Complex(wl(l));
    p_lu[l] = acc_p;
  }
  const Scaled sum_left_lu = acc_p;  // all y < 0
  Scaled acc_slu, acc_sls;
  for (std::size_t l = 1; l < nl; ++l) {
    s_lu[l] = acc_slu;
    s_ls[l] = acc_sls;
    acc_slu = acc_slu + d.d_lu[l] * Complex(wl(l));
    acc_sls = acc_sls + d.d_ls[l] * Complex(wl(l));
  }

  std::vector<GreenPieces> out(hi_ - lo_ + 1);
  for (std::size_t r = 0; r < nr; ++r) {
    GreenPieces& p = out[mid_ + r - lo_];
    const Scaled base_m = d.pre_minus * d.rs[r];
    p.cross = base_m * sum_left_lu;
    p.tau = base_m * c_rs[r] * d.sc.tilde_tau_l + d.pre_plus * d.rs[r] * t_rs[r] * d.sc.tau_l;
    p.rho = base_m * c_ru[r] * d.sc.tilde_rho_l + d.pre_plus * d.ru[r] * t_rs[r] * d.sc.rho_l;
  }
  for (std::size_t l = 1; l < nl; ++l) {
    GreenPieces& p = out[mid_ - l - lo_];
    const Scaled base_p = d.pre_plus * d.lu[l];
    p.cross = base_p * sum_right_rs;
    p.tau = base_p * s_lu[l] * d.sc.tilde_tau_r + d.pre_minus * d.lu[l] * p_lu[l] * d.sc.tau_r;
    p.rho = base_p * s_ls[l] * d.sc.tilde_rho_r + d.pre_minus * d.ls[l] * p_lu[l] * d.sc.rho_r;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Method of lines

struct MolPropagator::Impl {
  using Sparse = Eigen::SparseMatrix<double>;
  std::size_t n = 0;
  double h = 0.0;
  double dt = 0.0;
  Sparse forward, adjoint;  // L and its formal adjoint on interior nodes

  std::vector<double> run(const Sparse& op, const std::vector<double>& w0, double t) const {
    const std::size_t m = n - 2;
    Eigen::VectorXd w(m);
    for (std::size_t i = 0; i < m; ++i) w[i] = w0[i + 1];
    if (t > 0.0) {
      const int steps = std::max(2, static_cast<int>(std::ceil(t / dt - 1e-9)));
      const double k = t / steps;
      Sparse id(m, m);
      id.setIdentity();
      const Sparse implicit = id - 0.5 * k * op;
      const Sparse explicit_part = id + 0.5 * k * op;
      Eigen::SparseLU<Sparse> lu;
      lu.compute(implicit);
      if (lu.info() != Eigen::Success) throw Error("MOL factorization failed");
      // Two backward-Euler half steps, then Crank-Nicolson.
      w = lu.solve(w);
      w = lu.solve(w);
      for (int s = 1; s < steps; ++s) w = lu.solve(explicit_part * w);
    }
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < m; ++i) out[i + 1] = w[i];
    return out;
  }
};

MolPropagator::MolPropagator(const EpsProfile& profile, double dt) {
  auto impl = std::make_shared<Impl>();
  const auto& grid = profile.grid;
  impl->n = grid.size();
  impl->h = grid.spacing();
  impl->dt = dt;
  const std::size_t n = impl->n, m = n - 2;
  const double h = impl->h;
  std::vector<double> a(n), beta(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = profile.advection(i);
    beta[i] = profile.eps * profile.law.dg(profile.u_eps[i]);
  }
  std::vector<Eigen::Triplet<double>> fw, adj;
  auto add = [&](std::vector<Eigen::Triplet<double>>& t, std::size_t row, std::size_t col,
                 double v) {
    if (col == 0 || col == n - 1) return;  // Dirichlet
    t.emplace_back(static_cast<int>(row - 1), static_cast<int>(col - 1), v);
  };
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const bool wide = i >= 2 && i + 2 < n;
    if (wide) {
      const double c2[5] = {-1.0, 16.0, -30.0, 16.0, -1.0};
      const double c1[5] = {1.0, -8.0, 0.0, 8.0, -1.0};
      for (int o = -2; o <= 2; ++o) {
        const std::size_t col = i + o;
        const double d2 = c2[o + 2] / (12.0 * h * h);
        const double d1 = c1[o + 2] / (12.0 * h);
        // L w = w'' - (a w)' + beta w, L* w = w'' + a w' + beta w.
        add(fw, i, col, d2 - d1 * a[col] + (o == 0 ? beta[i] : 0.0));
        add(adj, i, col, d2 + a[i] * d1 + (o == 0 ? beta[i] : 0.0));
      }
    } else {
      for (int o = -1; o <= 1; ++o) {
        const std::size_t col = i + o;
        const double d2 = (o == 0 ? -2.0 : 1.0) / (h * h);
        const double d1 = o / (2.0 * h);
        add(fw, i, col, d2 - d1 * a[col] + (o == 0 ? beta[i] : 0.0));
        add(adj, i, col, d2 + a[i] * d1 + (o == 0 ? beta[i] : 0.0));
      }
    }
  }
  impl->forward.resize(static_cast<int>(m), static_cast<int>(m));
  impl->forward.setFromTriplets(fw.begin(), fw.end());
  impl->adjoint.resize(static_cast<int>(m), static_cast<int>(m));
  impl->adjoint.setFromTriplets(adj.begin(), adj.end());
  impl_ = impl;
}

std::vector<double> MolPropagator::apply(const std::vector<double>& w0, double t) const {
  if (w0.size() != impl_->n) throw RangeError("MOL data does not match the grid");
  return impl_->run(impl_->forward, w0, t);
}

std::vector<double> MolPropagator::column(std::size_t j, double t) const {
  std::vector<double> delta(impl_->n, 0.0);
  delta.at(j) = 1.0 / impl_->h;
  return impl_->run(impl_->forward, delta, t);
}

std::vector<double> MolPropagator::row(std::size_t i, double t) const {
  std::vector<double> delta(impl_->n, 0.0);
  delta.at(i) = 1.0 / impl_->h;
  return impl_->run(impl_->adjoint, delta, t);
}

// ---------------------------------------------------------------------------
// TimeGreen

std::string to_string(Representation r) {
  switch (r) {
    case Representation::mol: return "mol";
    case Representation::cross: return "cross";
    case Representation::same_side_inside: return "same-side-inside";
    case Representation::same_side_outside: return "same-side-outside";
  }
  return "unknown";
}

double phase_cutoff(double t) {
  const double s = std::clamp(t - 1.0, 0.0, 1.0);
  return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double phase_cutoff_derivative(double t) {
  const double s = std::clamp(t - 1.0, 0.0, 1.0);
  return 30.0 * s * s * (1.0 - s) * (1.0 - s);
}

namespace {

bool same_curve(const ContourSpec& a, const ContourSpec& b) {
  return a.alpha * a.alpha == b.alpha * b.alpha && a.b == b.b && a.omega0 == b.omega0 &&
         a.zeta_plus == b.zeta_plus && a.zeta_minus == b.zeta_minus && a.xi_split == b.xi_split;
}

// Low-frequency panels keep the phase change per panel below about 4 radians
// for times up to t_max and separations up to twice the window.
QuadratureOptions oscillation_aware(QuadratureOptions q, const ContourSpec& s, double t_max,
                                    double window) {
  const double rate = 0.5 * s.omega0 * t_max + window;
  q.lf_panels = std::max(q.lf_panels, static_cast<int>(std::ceil(s.xi_split * rate / 4.0)));
  return q;
}

}  // namespace

TimeGreen::TimeGreen(const EpsProfile& profile, const TimeGreenOptions& opts)
    : profile_(profile), coeffs_(make_coefficients(profile)), opts_(opts) {
  const double eta0 = opts.eta0 > 0.0 ? opts.eta0 : estimate_eta0(*coeffs_);
  curves_ = curve_parameters(*coeffs_, eta0, opts.kappa0);
  const auto rc = curves_.right_curve(*coeffs_);
  const auto lc = curves_.left_curve(*coeffs_);
  auto bopts = opts.bundle;
  bopts.quadrature = oscillation_aware(bopts.quadrature, rc, opts.t_max, bopts.window);
  right_ = std::make_shared<ContourBundle>(coeffs_, rc, opts.t_min, bopts);
  if (same_curve(rc, lc)) {
    left_ = right_;
  } else {
    auto lopts = opts.bundle;
    lopts.quadrature = oscillation_aware(lopts.quadrature, lc, opts.t_max, lopts.window);
    left_ = std::make_shared<ContourBundle>(coeffs_, lc, opts.t_min, lopts);
  }
  mol_ = std::make_shared<MolPropagator>(profile_, opts.mol_dt);

  // Phase constants a^r, a^l: first components of the decaying solutions at
  // lambda = 0 divided by U'.
  const SpectralProblem zero(coeffs_, 0.0);
  const auto rs = zero.integrate(Side::right, Kind::stable);
  const auto lu = zero.integrate(Side::left, Kind::unstable);
  const auto& grid = profile_.grid;
  const std::size_t mid = grid.center();
  a_r_ = rs.first(mid).real() / coeffs_->du[mid];
  a_l_ = lu.first(mid).real() / coeffs_->du[mid];
  const std::size_t span = grid.index_of(10.0) - mid;
  for (std::size_t i = mid - span; i <= mid + span; ++i) {
    a_spread_ = std::max(a_spread_, std::abs(rs.first(i) / coeffs_->du[i] / a_r_ - 1.0));
    a_spread_ = std::max(a_spread_, std::abs(lu.first(i) / coeffs_->du[i] / a_l_ - 1.0));
  }

  // Time-independent factors of the phase kernel on each half-window.
  auto fill = [&](PhaseCache& pc, const ContourBundle& b, std::size_t j0, std::size_t j1,
                  bool ry) {
    pc.j0 = j0;
    pc.j1 = j1;
    const auto& nodes = b.nodes();
    for (std::size_t k = 0; k < nodes.size(); ++k)
      if (nodes[k].low_frequency) pc.nodes.push_back(k);
    const std::size_t w = j1 - j0 + 1;
    pc.base.resize(pc.nodes.size() * w);
    for (std::size_t q = 0; q < pc.nodes.size(); ++q) {
      const std::size_t k = pc.nodes[q];
      const Scaled pre = ry ? b.pre_plus(k) * Complex(a_l_) : b.pre_minus(k) * Complex(a_r_);
      for (std::size_t j = j0; j <= j1; ++j) pc.base[q * w + j - j0] = (pre * b.dual_decaying(k, j)).value();
    }
  };
  fill(phase_right_, *right_, mid, right_->last_index(), true);
  fill(phase_left_, *left_, left_->first_index(), mid - 1, false);
}

bool TimeGreen::inside_cone(double t, double y) const {
  return y >= 0.0 ? y < cone_right(t) : y > -cone_left(t);
}

double TimeGreen::total(double t, std::size_t i, std::size_t j) const {
  if (t < opts_.mol_below) return mol_->column(j, t)[i];
  return split(t, i, j).total;
}

GreenSample TimeGreen::split(double t, std::size_t i, std::size_t j) const {
  GreenSample out;
  if (t < opts_.mol_below) {
    out.total = out.ess = mol_->column(j, t)[i];
    out.pt_tilde = 0.0;
    out.representation = Representation::mol;
    return out;
  }
  const std::size_t mid = profile_.grid.center();
  const bool ry = j >= mid;
  const bool same = (i >= mid) == ry;
  const double y = profile_.grid.x(j);
  const bool inside = inside_cone(t, y);
  const ContourBundle& b = bundle(ry);
  const auto& nodes = b.nodes();
  double lf_tau = 0, lf_rho = 0, hf = 0, cross = 0, abs_sum = 0, gauss = 0, total_k = 0;
  double last = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto& n = nodes[k];
    const GreenPieces p = b.pieces(k, i, j);
    const double c = integrand(p.cross, n, t);
    const double ta = integrand(p.tau, n, t);
    const double rh = integrand(p.rho, n, t);
    cross += n.weight * c;
    if (n.low_frequency) {
      lf_tau += n.weight * ta;
      lf_rho += n.weight * rh;
    } else {
      hf += n.weight * (ta + rh);
    }
    const double f = c + ta + rh;
    total_k += n.weight * f;
    gauss += n.embedded_weight * f;
    abs_sum += n.weight * (std::abs(c) + std::abs(ta) + std::abs(rh));
    last = f;
  }
  const double c2 = (b.spec().zeta_plus * b.spec().zeta_plus).real() * t / 4.0;
  const double xi_max = nodes.back().xi;
  const double tail = std::abs(last) / (2.0 * c2 * xi_max);
  if (tail > opts_.truncation_tol)
    throw ExtendContourError("contour tail estimate " + std::to_string(tail) + " at t=" +
                             std::to_string(t));
  out.total = total_k;
  out.error_estimate = tail + std::abs(total_k - gauss) + kRoundoff * abs_sum;
  if (!same) {
    out.representation = Representation::cross;
    out.pt = cross;
    out.ess = 0.0;
  } else if (!inside) {
    out.representation = Representation::same_side_outside;
    out.pt = 0.0;
    out.ess = lf_tau + lf_rho + hf;
  } else {
    out.representation = Representation::same_side_inside;
    out.pt = lf_tau;
    out.ess = lf_rho + hf;
  }
  out.phase = phase(t, j).G_p;
  out.pt_tilde = out.pt - coeffs_->du[i] * out.phase;
  return out;
}

GreenSample TimeGreen::split_at(double t, double x, double y) const {
  return split(t, profile_.grid.index_of(x), profile_.grid.index_of(y));
}

PhaseValue TimeGreen::phase(double t, std::size_t j) const {
  PhaseValue out;
  const std::size_t mid = profile_.grid.center();
  if (!(t > 0.0) || !inside_cone(t, profile_.grid.x(j))) return out;
  const PhaseCache& pc = j >= mid ? phase_right_ : phase_left_;
  if (j < pc.j0 || j > pc.j1) throw RangeError("phase kernel requested outside the window");
  const auto& nodes = bundle(j >= mid).nodes();
  const std::size_t w = pc.j1 - pc.j0 + 1;
  for (std::size_t q = 0; q < pc.nodes.size(); ++q) {
    const auto& n = nodes[pc.nodes[q]];
    const Complex tf = n.weight / std::numbers::pi * time_factor(n, t).value();
    const Complex v = tf * pc.base[q * w + j - pc.j0];
    out.G_p += v.imag();
    out.dG_p += (v * n.lambda).imag();
  }
  return out;
}

std::vector<PhaseValue> TimeGreen::phase_row(double t) const {
  const std::size_t lo = right_->first_index(), hi = right_->last_index();
  std::vector<PhaseValue> out(hi - lo + 1);
  if (!(t > 0.0)) return out;
  const auto& grid = profile_.grid;
  for (const PhaseCache* pc : {&phase_left_, &phase_right_}) {
    const bool ry = pc == &phase_right_;
    const auto& nodes = bundle(ry).nodes();
    // Cone-limited index range on this side.
    std::size_t a = pc->j0, b = pc->j1;
    while (a <= b && !inside_cone(t, grid.x(a))) ++a;
    while (b >= a && b > 0 && !inside_cone(t, grid.x(b))) --b;
    if (a > b) continue;
    const std::size_t w = pc->j1 - pc->j0 + 1;
    std::vector<Complex> g(b - a + 1), dg(b - a + 1);
    for (std::size_t q = 0; q < pc->nodes.size(); ++q) {
      const auto& n = nodes[pc->nodes[q]];
      const Complex tf = n.weight / std::numbers::pi * time_factor(n, t).value();
      const Complex tfl = tf * n.lambda;
      const Complex* base = pc->base.data() + q * w + (a - pc->j0);
      for (std::size_t r = 0; r < g.size(); ++r) {
        g[r] += tf * base[r];
        dg[r] += tfl * base[r];
      }
    }
    for (std::size_t r = 0; r < g.size(); ++r) out[a + r - lo] = {g[r].imag(), dg[r].imag()};
  }
  return out;
}

TimeGreen::Action TimeGreen::apply(double t, const std::vector<double>& w) const {
  const auto& grid = profile_.grid;
  const std::size_t n = grid.size(), mid = grid.center();
  if (w.size() != n) throw RangeError("Green action data does not match the grid");
  const std::size_t lo = right_->first_index(), hi = right_->last_index();
  const std::size_t m = hi - lo + 1;
  Action out;
  out.total.assign(m, 0.0);
  out.pt.assign(m, 0.0);
  out.ess.assign(m, 0.0);
  if (t < opts_.mol_below) {
    const auto full = mol_->apply(w, t);
    for (std::size_t i = lo; i <= hi; ++i) out.total[i - lo] = out.ess[i - lo] = full[i];
    return out;
  }
  const double h = grid.spacing();
  std::vector<double> r_in(n, 0.0), r_out(n, 0.0), l_in(n, 0.0), l_out(n, 0.0);
  for (std::size_t j = lo; j <= hi; ++j) {
    const double y = grid.x(j);
    const bool in = inside_cone(t, y);
    auto& dst = j >= mid ? (in ? r_in : r_out) : (in ? l_in : l_out);
    dst[j] = w[j];
  }
  struct Partial {
    std::vector<double> pt, ess, gauss_total, abs_sum;
    double last = 0.0;
  };
  auto run = [&](const ContourBundle& b, const std::vector<double>& w_in,
                 const std::vector<double>& w_out) {
    const auto& nodes = b.nodes();
    auto parts = parallel_map<Partial>(nodes.size(), [&](std::size_t k) {
      const auto& nd = nodes[k];
      const auto in = b.apply(k, w_in, h);
      const auto outside = b.apply(k, w_out, h);
      Partial p;
      p.pt.assign(m, 0.0);
      p.ess.assign(m, 0.0);
      p.gauss_total.assign(m, 0.0);
      p.abs_sum.assign(m, 0.0);
      for (std::size_t r = 0; r < m; ++r) {
        const double c = integrand(in[r].cross, nd, t) + integrand(outside[r].cross, nd, t);
        const double ta = integrand(in[r].tau, nd, t);
        const double rh = integrand(in[r].rho, nd, t);
        const double oo = integrand(outside[r].tau + outside[r].rho, nd, t);
        p.pt[r] = c + (nd.low_frequency ? ta : 0.0);
        p.ess[r] = oo + (nd.low_frequency ? rh : ta + rh);
        p.gauss_total[r] = c + ta + rh + oo;
        p.abs_sum[r] = std::abs(c) + std::abs(ta) + std::abs(rh) + std::abs(oo);
        p.last = std::max(p.last, std::abs(p.gauss_total[r]));
      }
      return p;
    });
    double tail = 0.0, panel = 0.0, round = 0.0;
    std::vector<double> gauss(m, 0.0), abs_sum(m, 0.0), total(m, 0.0);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const auto& nd = nodes[k];
      for (std::size_t r = 0; r < m; ++r) {
        out.pt[r] += nd.weight * parts[k].pt[r];
        out.ess[r] += nd.weight * parts[k].ess[r];
        total[r] += nd.weight * parts[k].gauss_total[r];
        gauss[r] += nd.embedded_weight * parts[k].gauss_total[r];
        abs_sum[r] += nd.weight * parts[k].abs_sum[r];
      }
    }
    const double c2 = (b.spec().zeta_plus * b.spec().zeta_plus).real() * t / 4.0;
    tail = parts.back().last / (2.0 * c2 * nodes.back().xi);
    for (std::size_t r = 0; r < m; ++r) {
      panel = std::max(panel, std::abs(total[r] - gauss[r]));
      round = std::max(round, kRoundoff * abs_sum[r]);
    }
    if (tail > opts_.truncation_tol)
      throw ExtendContourError("contour tail estimate " + std::to_string(tail) + " at t=" +
                               std::to_string(t));
    out.error_estimate += tail + panel + round;
  };
  if (right_ == left_) {
    std::vector<double> in(n), o(n);
    for (std::size_t j = 0; j < n; ++j) {
      in[j] = r_in[j] + l_in[j];
      o[j] = r_out[j] + l_out[j];
    }
    run(*right_, in, o);
  } else {
    run(*right_, r_in, r_out);
    run(*left_, l_in, l_out);
  }
  for (std::size_t r = 0; r < m; ++r) out.total[r] = out.pt[r] + out.ess[r];
  return out;
}

TimeGreenValue time_green(const ContourBundle& bundle, double t, std::size_t i, std::size_t j,
                          double tol) {
  const auto& nodes = bundle.nodes();
  TimeGreenValue out;
  double gauss = 0.0, abs_sum = 0.0, last = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto& n = nodes[k];
    const GreenPieces p = bundle.pieces(k, i, j);
    const double f = integrand(p.cross + p.tau + p.rho, n, t);
    out.value += n.weight * f;
    gauss += n.embedded_weight * f;
    abs_sum += n.weight * std::abs(f);
    last = f;
  }
  const double c2 = (bundle.spec().zeta_plus * bundle.spec().zeta_plus).real() * t / 4.0;
  out.truncation = std::abs(last) / (2.0 * c2 * nodes.back().xi);
  const bool embedded = std::any_of(nodes.begin(), nodes.end(),
                                    [](const ContourNode& n) { return n.embedded_weight != 0.0; });
  out.panel_error = embedded ? std::abs(out.value - gauss) : 0.0;
  out.roundoff = kRoundoff * abs_sum;
  if (out.truncation > tol)
    throw ExtendContourError("contour tail estimate " + std::to_string(out.truncation));
  return out;
}

}  // namespace shocklab
