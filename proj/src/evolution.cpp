#include "shocklab/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace shocklab {

std::string to_string(PhaseMethod m) {
  switch (m) {
    case PhaseMethod::none: return "none";
    case PhaseMethod::anchor: return "anchor";
    case PhaseMethod::duhamel: return "duhamel";
  }
  return "?";
}

std::string to_string(Scheme s) { return s == Scheme::imex1 ? "imex1" : "cnab2"; }

PhaseMethod parse_phase_method(const std::string& s) {
  if (s == "none") return PhaseMethod::none;
  if (s == "anchor") return PhaseMethod::anchor;
  if (s == "duhamel") return PhaseMethod::duhamel;
  throw ConfigError("unknown phase method '" + s + "'");
}

Scheme parse_scheme(const std::string& s) {
  if (s == "imex1") return Scheme::imex1;
  if (s == "cnab2") return Scheme::cnab2;
  throw ConfigError("unknown scheme '" + s + "'");
}

std::string to_string(InitSpec::Kind k) {
  switch (k) {
    case InitSpec::Kind::zero: return "zero";
    case InitSpec::Kind::gaussian: return "gaussian";
    case InitSpec::Kind::plateau: return "plateau";
    case InitSpec::Kind::translate: return "translate";
    case InitSpec::Kind::csv: return "csv";
  }
  return "?";
}

InitSpec::Kind parse_init_kind(const std::string& s) {
  for (auto k : {InitSpec::Kind::zero, InitSpec::Kind::gaussian, InitSpec::Kind::plateau,
                 InitSpec::Kind::translate, InitSpec::Kind::csv})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown initial data kind '" + s + "'");
}

namespace {

double smoothstep(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double weight(double x, double eps, double theta, int j) {
  if (j == 0) return 1.0 / (1.0 + std::exp(-theta * std::abs(x)));
  if (eps <= 0.0) return 0.0;
  return 1.0 / (1.0 + std::exp(-theta * std::abs(x)) / std::pow(eps, j));
}

// Four-point Lagrange interpolation of nodal values at x; values outside the
// grid are `left` / `right`.
double interpolate(std::span<const double> f, const ProfileGrid& grid, double x, double left,
                   double right) {
  const double h = grid.spacing();
  const double s = (x + grid.half_width()) / h;
  const double n = static_cast<double>(f.size() - 1);
  if (s <= 0.0) return s > -1e-12 ? f.front() : left;
  if (s >= n) return s < n + 1e-12 ? f.back() : right;
  std::size_t k = static_cast<std::size_t>(std::floor(s));
  const double r = s - static_cast<double>(k);
  if (r == 0.0) return f[k];
  std::size_t base = k == 0 ? 0 : k - 1;
  base = std::min(base, f.size() - 4);
  double out = 0.0;
  const double p = s - static_cast<double>(base);
  for (int a = 0; a < 4; ++a) {
    double l = 1.0;
    for (int b = 0; b < 4; ++b)
      if (b != a) l *= (p - b) / static_cast<double>(a - b);
    out += l * f[base + a];
  }
  return out;
}

// Constant-coefficient tridiagonal (1 + 2c) on the diagonal, -c off it,
// factored once.
class TridiagonalFactor {
 public:
  TridiagonalFactor() = default;
  TridiagonalFactor(std::size_t m, double c) : off_(-c), cp_(m), inv_(m) {
    double denom = 1.0 + 2.0 * c;
    inv_[0] = 1.0 / denom;
    cp_[0] = off_ * inv_[0];
    for (std::size_t i = 1; i < m; ++i) {
      denom = 1.0 + 2.0 * c - off_ * cp_[i - 1];
      inv_[i] = 1.0 / denom;
      cp_[i] = off_ * inv_[i];
    }
  }
  void solve(std::span<double> r) const {
    const std::size_t m = r.size();
    r[0] *= inv_[0];
    for (std::size_t i = 1; i < m; ++i) r[i] = (r[i] - off_ * r[i - 1]) * inv_[i];
    for (std::size_t i = m - 1; i > 0; --i) r[i - 1] -= cp_[i - 1] * r[i];
  }

 private:
  double off_ = 0.0;
  std::vector<double> cp_, inv_;
};

double omega_infinity(const EpsProfile& p) {
  return std::min(std::abs(p.law.dg(p.shock.u_minus)), std::abs(p.law.dg(p.shock.u_plus)));
}

}  // namespace

WeightedNorm weighted_norm(std::span<const double> v, const ProfileGrid& grid, double eps,
                           double theta, int k) {
  WeightedNorm out{theta, eps, k, 0.0, {}};
  std::vector<double> d(v.begin(), v.end());
  for (int j = 0; j <= k; ++j) {
    if (j > 0) d = num::derivative(d, grid.spacing());
    double m = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
      m = std::max(m, weight(grid.x(i), eps, theta, j) * std::abs(d[i]));
    out.terms.push_back(m);
    out.value += m;
  }
  return out;
}

double max_principle_monitor(std::span<const double> v, const ProfileGrid& grid, double eps,
                             double x_star, double theta) {
  const auto d = num::derivative(v, grid.spacing());
  double m = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double x = grid.x(i);
    if (std::abs(x) < x_star) continue;
    m = std::max(m, std::abs(d[i]) / (eps + std::exp(-theta * std::abs(x))));
  }
  return m;
}

std::vector<double> nonlinear_residual(const EpsProfile& p, std::span<const double> w,
                                       double phi) {
  if (w.size() != p.grid.size()) throw RangeError("perturbation does not match the grid");
  const auto wx = num::derivative(w, p.grid.spacing());
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double u = p.u_eps[i], wi = w[i];
    const double dfu = p.law.df(u), dfw = p.law.df(u + wi);
    out[i] = -(dfw - dfu + phi) * wx[i] +
             p.eps * (p.law.g(u + wi) - p.law.g(u) - p.law.dg(u) * wi) -
             (dfw - dfu - p.law.d2f(u) * wi) * p.du_eps[i];
  }
  return out;
}

DecayFit fit_decay(std::span<const double> t, std::span<const double> value, double t0,
                   double t1, double noise_floor) {
  DecayFit fit;
  std::vector<double> ts, ls;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0 || t[i] > t1) continue;
    const double v = std::abs(value[i]);
    if (!std::isfinite(v) || v <= 100.0 * noise_floor) continue;
    ts.push_back(t[i]);
    ls.push_back(std::log(v));
  }
  fit.points = ts.size();
  if (ts.size() < 2) return fit;
  const auto line = num::fit_line(ts, ls);
  fit.rate = -line.slope;
  fit.amplitude = std::exp(line.intercept);
  fit.residual = line.rms;
  fit.t0 = ts.front();
  fit.t1 = ts.back();
  return fit;
}

// ---------------------------------------------------------------------------

struct Evolver::Impl {
  Impl(const EpsProfile& p, const EvolutionOptions& o)
      : base(p), prof(extend_profile(p, o.half_width)), opts(o) {}

  EpsProfile base;   // profile on its own grid (Green kernel)
  EpsProfile prof;   // padded to the evolution grid
  EvolutionOptions opts;
  ProfileGrid grid;
  std::size_t n = 0, center = 0;
  double h = 0.0, dt = 0.0, theta = 0.0, mid = 0.0;
  std::vector<double> U, dU, dfU, gU;
  TridiagonalFactor full, half;
  PhaseMethod method = PhaseMethod::anchor;

  EvolutionState st;
  double v0_sup = 0.0;
  long step_count = 0;
  std::vector<double> E, E_prev, rhs, work;
  bool have_prev = false;
  std::vector<std::string> warnings;

  // Duhamel phase.
  std::shared_ptr<const TimeGreen> green;
  std::size_t win_lo = 0, win_hi = 0;  // evolution-grid indices
  long n_sub = 1;
  double coarse_dt = 0.0;
  std::vector<double> v0_window;
  std::vector<std::vector<double>> kernel;   // d/dt s^p kernel at tau = k coarse_dt
  std::vector<std::vector<double>> history;  // N[v, psi'] at coarse times
  std::vector<double> coarse_psi;  // psi - psi0 at coarse times
  bool warned_horizon = false;

  // Explicit part of the frame equation; psi' enters the advection and the
  // profile coupling.
  void explicit_part(const std::vector<double>& v, double dpsi, std::vector<double>& out) const {
    const auto& law = prof.law;
    const double eps = prof.eps, sigma = prof.sigma_eps, inv2h = 0.5 / h;
    out[0] = out[n - 1] = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double u = U[i] + v[i];
      const double vx = (v[i + 1] - v[i - 1]) * inv2h;
      const double dfu = law.df(u);
      out[i] = -(dfu - sigma + dpsi) * vx + eps * (law.g(u) - gU[i]) - (dfu - dfU[i] + dpsi) * dU[i];
    }
  }

  // psi' keeping v(t, 0) fixed, from the frame equation at x = 0.
  double anchor_rate(const std::vector<double>& v, const std::vector<double>& e0) const {
    const std::size_t c = center;
    const double vxx = (v[c - 1] - 2.0 * v[c] + v[c + 1]) / (h * h);
    const double vx = (v[c + 1] - v[c - 1]) / (2.0 * h);
    return (vxx + e0[c]) / (dU[c] + vx);
  }

  // Position where U + v crosses the midpoint, nearest to x = 0.
  double crossing(const std::vector<double>& v) const {
    auto w = [&](std::size_t i) { return U[i] + v[i] - mid; };
    for (std::size_t d = 0; d + 2 < center; ++d) {
      for (std::size_t i : {center + d, center - 1 - d}) {
        const double a = w(i), b = w(i + 1);
        if (a == 0.0) return grid.x(i);
        if (a * b > 0.0) continue;
        std::vector<double> full_w(4);
        const std::size_t s = std::clamp<std::size_t>(i, 1, n - 3) - 1;
        for (int q = 0; q < 4; ++q) full_w[q] = w(s + q);
        auto cubic = [&](double x) {
          const double p = (x - grid.x(s)) / h;
          double out = 0.0;
          for (int q = 0; q < 4; ++q) {
            double l = 1.0;
            for (int r = 0; r < 4; ++r)
              if (r != q) l *= (p - r) / static_cast<double>(q - r);
            out += l * full_w[q];
          }
          return out;
        };
        double lo = grid.x(i), hi = grid.x(i + 1), flo = a;
        for (int it = 0; it < 80 && hi - lo > 1e-15 * h; ++it) {
          const double m = 0.5 * (lo + hi), fm = cubic(m);
          if ((fm > 0.0) == (flo > 0.0)) {
            lo = m;
            flo = fm;
          } else {
            hi = m;
          }
        }
        return 0.5 * (lo + hi);
      }
    }
    throw DivergenceError("the perturbed solution no longer crosses the midpoint");
  }

  // Re-centres so that U + v crosses the midpoint at x = 0; returns the shift.
  double recentre() {
    const double z0 = crossing(st.v);
    if (z0 == 0.0) return 0.0;
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = U[i] + st.v[i];
    for (std::size_t i = 1; i + 1 < n; ++i)
      st.v[i] = interpolate(w, grid, grid.x(i) + z0, prof.shock.u_minus, prof.shock.u_plus) - U[i];
    st.v[0] = st.v[n - 1] = 0.0;
    return z0;
  }

  // ---- Duhamel phase ----
  void setup_duhamel() {
    if (!green) green = std::make_shared<TimeGreen>(base, opts.green);
    const auto& b = green->bundle(true);
    const std::size_t offset = center - base.grid.center();
    win_lo = b.first_index() + offset;
    win_hi = b.last_index() + offset;
    n_sub = std::max<long>(1, std::lround(opts.duhamel_step / dt));
    coarse_dt = static_cast<double>(n_sub) * dt;
    v0_window.assign(st.v.begin() + win_lo, st.v.begin() + win_hi + 1);
    history.clear();
    coarse_psi.assign(1, 0.0);
    history.push_back(window_residual(st.v, 0.0));
  }

  std::vector<double> window_residual(const std::vector<double>& v, double dpsi) const {
    const auto& law = prof.law;
    std::vector<double> out(win_hi - win_lo + 1);
    for (std::size_t i = win_lo; i <= win_hi; ++i) {
      const double u = U[i], w = v[i];
      const double wx = (v[i + 1] - v[i - 1]) / (2.0 * h);
      const double dfw = law.df(u + w);
      out[i - win_lo] = -(dfw - dfU[i] + dpsi) * wx +
                        prof.eps * (law.g(u + w) - gU[i] - law.dg(u) * w) -
                        (dfw - dfU[i] - law.d2f(u) * w) * dU[i];
    }
    return out;
  }

  // chi(tau) G^p_tau over the window. The kernel jumps where nodes enter the
  // high-frequency cone, so the phase is accumulated in integrated form
  // rather than through the pointwise time derivative.
  const std::vector<double>& kernel_row(std::size_t k) {
    while (kernel.size() <= k) {
      const double tau = static_cast<double>(kernel.size()) * coarse_dt;
      std::vector<double> row(win_hi - win_lo + 1, 0.0);
      // k * coarse_dt may round just above 1, where the kernel vanishes exactly.
      if (tau > 1.0 + 1e-9 * coarse_dt) {
        if (tau > opts.green.t_max && !warned_horizon) {
          warnings.push_back("Duhamel phase evaluated beyond the kernel horizon t_max");
          warned_horizon = true;
        }
        const auto ph = green->phase_row(tau);
        const double chi = phase_cutoff(tau);
        for (std::size_t q = 0; q < row.size(); ++q) row[q] = chi * ph[q].G_p;
      }
      kernel.push_back(std::move(row));
    }
    return kernel[k];
  }

  double pair(const std::vector<double>& a, const std::vector<double>& b) const {
    double s = 0.0;
    for (std::size_t q = 0; q < a.size(); ++q) s += a[q] * b[q];
    return s * h;
  }

  // psi(t_m) - psi0 = s^p(t_m)(v0) + int_0^{t_m} s^p(t_m - s)(N(s)) ds, which
  // needs the history up to t_{m-1} only since s^p(0) = 0.
  double coarse_phase(std::size_t m) {
    while (coarse_psi.size() <= m) {
      const std::size_t j = coarse_psi.size();
      if (history.size() < j) throw Error("Duhamel history is incomplete");
      double s = pair(kernel_row(j), v0_window);
      for (std::size_t l = 0; l < j; ++l)
        s += (l == 0 ? 0.5 : 1.0) * coarse_dt * pair(kernel_row(j - l), history[l]);
      coarse_psi.push_back(s);
    }
    return coarse_psi[m];
  }

  // Rate over the coarse interval containing the current step.
  double coarse_rate(std::size_t m) {
    return (coarse_phase(m + 1) - coarse_phase(m)) / coarse_dt;
  }

  bool within_memory_cap(std::size_t coarse_steps) const {
    const std::size_t bytes = 2 * coarse_steps * (win_hi - win_lo + 1) * sizeof(double);
    return bytes <= opts.duhamel_max_bytes;
  }

  double duhamel_rate() {
    const long m = step_count / n_sub;
    if (!within_memory_cap(static_cast<std::size_t>(m + 2))) {
      warnings.push_back("Duhamel history exceeds the memory cap at t = " +
                         std::to_string(st.t) + "; switching to the anchor phase");
      method = PhaseMethod::anchor;
      kernel.clear();
      history.clear();
      st.psi -= recentre();
      return anchor_from_scratch();
    }
    return coarse_rate(static_cast<std::size_t>(m));
  }

  double anchor_from_scratch() {
    explicit_part(st.v, 0.0, E);
    return anchor_rate(st.v, E);
  }

  void step() {
    double dpsi = 0.0;
    switch (method) {
      case PhaseMethod::none: explicit_part(st.v, 0.0, E); break;
      case PhaseMethod::anchor:
        explicit_part(st.v, 0.0, E);
        dpsi = anchor_rate(st.v, E);
        for (std::size_t i = 1; i + 1 < n; ++i)
          E[i] -= dpsi * ((st.v[i + 1] - st.v[i - 1]) / (2.0 * h) + dU[i]);
        break;
      case PhaseMethod::duhamel:
        dpsi = duhamel_rate();
        if (method == PhaseMethod::duhamel) {
          explicit_part(st.v, dpsi, E);
        } else {
          for (std::size_t i = 1; i + 1 < n; ++i)
            E[i] -= dpsi * ((st.v[i + 1] - st.v[i - 1]) / (2.0 * h) + dU[i]);
        }
        break;
    }
    const std::size_t m = n - 2;
    const bool second = opts.scheme == Scheme::cnab2 && have_prev;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      double r = st.v[i];
      if (second) {
        r += 0.5 * dt * (st.v[i - 1] - 2.0 * st.v[i] + st.v[i + 1]) / (h * h);
        r += dt * (1.5 * E[i] - 0.5 * E_prev[i]);
      } else {
        r += dt * E[i];
      }
      rhs[i - 1] = r;
    }
    (second ? half : full).solve(std::span<double>(rhs.data(), m));
    const double psi_old = st.psi;
    for (std::size_t i = 1; i + 1 < n; ++i) st.v[i] = rhs[i - 1];
    st.v[0] = st.v[n - 1] = 0.0;
    std::swap(E, E_prev);
    have_prev = true;
    ++step_count;
    st.t = static_cast<double>(step_count) * dt;
    st.psi += dt * dpsi;
    if (method == PhaseMethod::anchor) {
      // Within a step the layer moves by O(dt); a jump means the crossing it
      // tracked has annihilated and another front was picked up.
      const double z0 = recentre();
      if (std::abs(z0) > 1.0)
        throw DivergenceError("tracked shock lost at t = " + std::to_string(st.t) +
                              " (crossing jumped by " + std::to_string(z0) + ")");
      st.psi -= z0;
      st.dpsi = (st.psi - psi_old) / dt;
    } else {
      st.dpsi = dpsi;
    }
    if (method == PhaseMethod::duhamel && step_count % n_sub == 0)
      history.push_back(window_residual(st.v, st.dpsi));

    const double sup = num::sup_norm(st.v);
    if (!std::isfinite(sup) || sup > opts.blowup_factor * std::max(v0_sup, 1e-6))
      throw DivergenceError("perturbation grew from " + std::to_string(v0_sup) + " to " +
                            std::to_string(sup) + " by t = " + std::to_string(st.t));
  }
};

Evolver::Evolver(const EpsProfile& profile, const EvolutionOptions& opts)
    : impl_(std::make_unique<Impl>(profile, opts)) {
  auto& m = *impl_;
  m.grid = m.prof.grid;
  m.n = m.grid.size();
  m.center = m.grid.center();
  m.h = m.grid.spacing();
  m.dt = opts.dt > 0.0 ? opts.dt : opts.cfl * m.h;
  m.mid = profile.shock.midpoint();
  m.method = opts.phase;
  const auto rates = decay_rates(profile.law, profile.shock, profile.shock.sigma0, 0.0);
  m.theta = opts.theta > 0.0 ? opts.theta : 0.1 * rates.min();
  m.U = m.prof.u_eps;
  m.dU = m.prof.du_eps;
  m.dfU.resize(m.n);
  m.gU.resize(m.n);
  double max_a = 0.0;
  for (std::size_t i = 0; i < m.n; ++i) {
    m.dfU[i] = m.prof.law.df(m.U[i]);
    m.gU[i] = m.prof.law.g(m.U[i]);
    max_a = std::max(max_a, std::abs(m.dfU[i] - m.prof.sigma_eps));
  }
  if (m.dt * max_a > m.h)
    throw ConfigError("time step violates the advection CFL bound dt max|a| <= h");
  const double c = m.dt / (m.h * m.h);
  m.full = TridiagonalFactor(m.n - 2, c);
  m.half = TridiagonalFactor(m.n - 2, 0.5 * c);
  m.E.assign(m.n, 0.0);
  m.E_prev.assign(m.n, 0.0);
  m.rhs.assign(m.n, 0.0);
  m.st.v.assign(m.n, 0.0);
}

Evolver::~Evolver() = default;
Evolver::Evolver(Evolver&&) noexcept = default;

const ProfileGrid& Evolver::grid() const { return impl_->grid; }
const EpsProfile& Evolver::frame_profile() const { return impl_->prof; }
double Evolver::dt() const { return impl_->dt; }
double Evolver::theta() const { return impl_->theta; }
PhaseMethod Evolver::phase_method() const { return impl_->method; }
const std::vector<std::string>& Evolver::warnings() const { return impl_->warnings; }
const EvolutionState& Evolver::state() const { return impl_->st; }

std::vector<double> Evolver::initial_data(const InitSpec& spec) const {
  const auto& m = *impl_;
  std::vector<double> v(m.n, 0.0);
  const double eps = m.prof.eps, L = m.grid.half_width();
  switch (spec.kind) {
    case InitSpec::Kind::zero: break;
    case InitSpec::Kind::gaussian:
      for (std::size_t i = 0; i < m.n; ++i) {
        const double z = (m.grid.x(i) - spec.center) / spec.width;
        v[i] = std::exp(-z * z);
      }
      break;
    case InitSpec::Kind::plateau: {
      if (!(eps > 0.0)) throw ConfigError("plateau data is placed in slow units and needs eps > 0");
      const double rise = spec.slow_start / eps, width = spec.slow_ramp / eps;
      if (rise + width + spec.boundary_ramp >= L)
        throw ConfigError("plateau does not fit in the evolution domain");
      for (std::size_t i = 0; i < m.n; ++i) {
        const double x = m.grid.x(i);
        v[i] = smoothstep((x - rise) / width + 0.5) * smoothstep((L - x) / spec.boundary_ramp);
      }
      break;
    }
    case InitSpec::Kind::translate:
      for (std::size_t i = 0; i < m.n; ++i)
        v[i] = interpolate(m.U, m.grid, m.grid.x(i) + spec.shift, m.prof.shock.u_minus,
                           m.prof.shock.u_plus) - m.U[i];
      break;
    case InitSpec::Kind::csv: {
      std::ifstream in(spec.path);
      if (!in) throw ConfigError("cannot open initial data file '" + spec.path + "'");
      std::vector<double> xs, vs;
      std::string line;
      while (std::getline(in, line)) {
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double x, val;
        if (ss >> x >> val) {
          if (!xs.empty() && x <= xs.back())
            throw ConfigError("initial data abscissae must increase");
          xs.push_back(x);
          vs.push_back(val);
        }
      }
      if (xs.size() < 2) throw ConfigError("initial data file has fewer than two rows");
      for (std::size_t i = 0; i < m.n; ++i) {
        const double x = m.grid.x(i);
        if (x < xs.front() || x > xs.back()) continue;
        const auto it = std::upper_bound(xs.begin(), xs.end(), x);
        const std::size_t k = std::min<std::size_t>(it - xs.begin(), xs.size() - 1);
        const double r = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
        v[i] = (1.0 - r) * vs[k - 1] + r * vs[k];
      }
      break;
    }
  }
  v.front() = v.back() = 0.0;
  const bool scalable = spec.kind == InitSpec::Kind::gaussian || spec.kind == InitSpec::Kind::plateau;
  if (scalable || spec.weighted) {
    const double ref = spec.weighted ? weighted_norm(v, m.grid, eps, m.theta, 1).value
                                     : num::sup_norm(v);
    if (ref > 0.0)
      for (double& x : v) x *= spec.amplitude / ref;
  }
  return v;
}

void Evolver::reset(std::vector<double> v0, double psi0) {
  auto& m = *impl_;
  if (v0.size() != m.n) throw RangeError("initial data does not match the evolution grid");
  m.method = m.opts.phase;
  m.st = EvolutionState{0.0, std::move(v0), psi0, 0.0};
  m.st.v.front() = m.st.v.back() = 0.0;
  m.v0_sup = num::sup_norm(m.st.v);
  m.step_count = 0;
  m.have_prev = false;
  m.warnings.clear();
  m.kernel.clear();
  m.history.clear();
  m.coarse_psi.clear();
  m.warned_horizon = false;
  if (m.method == PhaseMethod::anchor) m.st.psi -= m.recentre();
  if (m.method == PhaseMethod::duhamel) m.setup_duhamel();
}

const EvolutionState& Evolver::step() {
  impl_->step();
  return impl_->st;
}

SeriesRow Evolver::sample() const {
  const auto& m = *impl_;
  const double eps = m.prof.eps;
  SeriesRow r;
  r.t = m.st.t;
  r.psi = m.st.psi;
  r.dpsi = m.st.dpsi;
  r.sup = num::sup_norm(m.st.v);
  const auto w = weighted_norm(m.st.v, m.grid, eps, m.theta, 1);
  r.norm0 = w.terms[0];
  r.norm1 = w.value;
  r.monitor = max_principle_monitor(m.st.v, m.grid, eps, m.opts.x_star, m.theta);
  return r;
}

std::vector<SeriesRow> Evolver::run(double t_end, const std::function<bool(const SeriesRow&)>& stop) {
  auto& m = *impl_;
  const long stride = std::max<long>(1, std::lround(m.opts.sample_every / m.dt));
  const long last = std::lround(t_end / m.dt);
  std::vector<SeriesRow> rows;
  if (m.step_count == 0 || m.step_count % stride == 0) rows.push_back(sample());
  while (m.step_count < last) {
    m.step();
    if (m.step_count % stride == 0 || m.step_count == last) {
      rows.push_back(sample());
      if (stop && stop(rows.back())) break;
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------

bool DecayReport::rates_in_band(double lo, double hi) const {
  auto in = [&](const DecayFit& f) {
    return f.ok() && f.rate >= lo * target_rate && f.rate <= hi * target_rate;
  };
  return in(norm_fit) && in(dpsi_fit);
}

DecayReport decay_experiment(const EpsProfile& profile, const DecayOptions& opts) {
  DecayReport rep;
  rep.eps = profile.eps;
  rep.target_rate = profile.eps * omega_infinity(profile);
  Evolver evo(profile, opts.evolution);
  InitSpec init = opts.init;
  if (init.kind == InitSpec::Kind::zero) init.kind = InitSpec::Kind::plateau;
  init.amplitude = opts.amplitude;
  init.weighted = true;
  auto v0 = evo.initial_data(init);
  rep.v0_sup = num::sup_norm(v0);
  rep.v0_weighted = weighted_norm(v0, evo.grid(), profile.eps, evo.theta(), 1).value;
  rep.psi0 = 0.0;
  evo.reset(std::move(v0), rep.psi0);
  const double t0 = opts.window_start / profile.eps, t1 = opts.window_end / profile.eps;
  rep.series = evo.run(t1);
  rep.warnings = evo.warnings();

  std::vector<double> t, norm, dpsi, mon;
  for (const auto& r : rep.series) {
    t.push_back(r.t);
    norm.push_back(r.norm1);
    dpsi.push_back(r.dpsi);
    mon.push_back(r.monitor);
  }
  rep.norm_fit = fit_decay(t, norm, t0, t1);
  rep.dpsi_fit = fit_decay(t, dpsi, t0, t1);
  rep.monitor_fit = fit_decay(t, mon, t0, t1);
  const auto& last = rep.series.back();
  rep.psi_inf = last.psi;
  if (rep.dpsi_fit.ok() && rep.dpsi_fit.rate > 0.0) {
    const double sign = last.dpsi < 0.0 ? -1.0 : 1.0;
    rep.psi_inf += sign * rep.dpsi_fit.amplitude * std::exp(-rep.dpsi_fit.rate * last.t) /
                   rep.dpsi_fit.rate;
  }
  rep.phase_constant = profile.eps * std::abs(rep.psi_inf - rep.psi0) / rep.v0_sup;
  return rep;
}

BasinReport basin_threshold(const EpsProfile& profile, const BasinOptions& opts) {
  BasinReport rep;
  rep.eps = profile.eps;
  Evolver evo(profile, opts.evolution);
  InitSpec init = opts.init;
  if (init.kind == InitSpec::Kind::zero) init.kind = InitSpec::Kind::plateau;
  init.amplitude = 1.0;
  init.weighted = false;
  const auto shape = evo.initial_data(init);
  const double unit_weighted = weighted_norm(shape, evo.grid(), profile.eps, evo.theta(), 1).value;
  const double t_end = opts.horizon / profile.eps;

  auto decays = [&](double amp) {
    std::vector<double> v0(shape);
    for (double& x : v0) x *= amp;
    const double n0 = amp * unit_weighted;
    bool decayed = false;
    try {
      evo.reset(std::move(v0));
      evo.run(t_end, [&](const SeriesRow& r) {
        decayed = r.norm1 < 0.5 * n0;
        return decayed;
      });
    } catch (const DivergenceError&) {
      decayed = false;
    }
    rep.trials.emplace_back(amp, decayed);
    return decayed;
  };

  double lo = opts.lo, hi = opts.hi;
  rep.bracketed = decays(lo) && !decays(hi);
  if (rep.bracketed) {
    for (int it = 0; it < opts.iterations; ++it) {
      const double mid = 0.5 * (lo + hi);
      (decays(mid) ? lo : hi) = mid;
    }
  }
  rep.threshold_sup = lo;
  rep.threshold_weighted = lo * unit_weighted;
  return rep;
}

FrameCheck frame_consistency(const EpsProfile& profile, double slow_time, double dt,
                             const InitSpec& init) {
  const double eps = profile.eps;
  EvolutionOptions o;
  o.half_width = profile.grid.half_width();
  o.phase = PhaseMethod::none;
  o.dt = dt;
  Evolver evo(profile, o);
  auto v0 = evo.initial_data(init);
  const auto& grid = evo.grid();
  const std::size_t n = grid.size();
  const double h = grid.spacing();
  const long steps = std::lround(slow_time / (eps * dt));
  if (std::abs(static_cast<double>(steps) * eps * dt - slow_time) > 1e-9 * slow_time)
    throw RangeError("slow time is not a whole number of steps");
  const double shift = profile.sigma_eps * slow_time / (eps * h);
  const long m_shift = std::lround(shift);
  if (std::abs(shift - static_cast<double>(m_shift)) > 1e-6)
    throw RangeError("shock displacement is not a whole number of slow cells");

  // Slow frame: u_t + f(u)_X = eps u_XX + g(u) on nodes X_j = eps (x_0 + j h),
  // extended to the right by the shock displacement.
  const std::size_t ns = n + static_cast<std::size_t>(m_shift);
  std::vector<double> u(ns, profile.shock.u_plus);
  const auto& U = evo.frame_profile().u_eps;
  for (std::size_t j = 0; j < n; ++j) u[j] = U[j] + v0[j];
  const double hs = eps * h, dts = eps * dt;
  const double c = dts * eps / (hs * hs);
  TridiagonalFactor factor(ns - 2, c);
  std::vector<double> rhs(ns - 2);
  const auto& law = profile.law;
  for (long s = 0; s < steps; ++s) {
    for (std::size_t j = 1; j + 1 < ns; ++j) {
      const double ux = (u[j + 1] - u[j - 1]) / (2.0 * hs);
      rhs[j - 1] = u[j] + dts * (-law.df(u[j]) * ux + law.g(u[j]));
    }
    rhs.front() += c * u.front();
    rhs.back() += c * u.back();
    factor.solve(rhs);
    for (std::size_t j = 1; j + 1 < ns; ++j) u[j] = rhs[j - 1];
  }

  evo.reset(std::move(v0));
  evo.run(static_cast<double>(steps) * dt);
  const auto& v = evo.state().v;
  FrameCheck out;
  out.slow_time = slow_time;
  for (std::size_t j = 0; j < n; ++j)
    out.max_difference = std::max(
        out.max_difference, std::abs(U[j] + v[j] - u[j + static_cast<std::size_t>(m_shift)]));
  return out;
}

void write_series_csv(const std::string& path, const std::vector<SeriesRow>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << "t,psi,dpsi,sup,norm0,norm1,monitor\n";
  out.precision(17);
  for (const auto& r : rows)
    out << r.t << ',' << r.psi << ',' << r.dpsi << ',' << r.sup << ',' << r.norm0 << ','
        << r.norm1 << ',' << r.monitor << '\n';
}

}  // namespace shocklab
