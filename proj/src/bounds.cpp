#include <algorithm>
#include <cmath>

#include "shocklab/green.hpp"
#include "shocklab/parallel.hpp"

namespace shocklab {

bool BoundsReport::pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const BoundRow& r) { return r.pass; });
}

namespace {

struct Sample {
  double t, x, y;
};

bool stable(double base, double refined) {
  return std::isfinite(base) && std::isfinite(refined) && base > 0.0 && refined <= 2.0 * base;
}

// Peak of |f| over the nodes, refined by a parabola through its neighbours.
double peak_position(const std::vector<double>& x, const std::vector<double>& f) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < f.size(); ++i)
    if (std::abs(f[i]) > std::abs(f[best])) best = i;
  if (best == 0 || best + 1 == f.size()) return x[best];
  const double a = std::abs(f[best - 1]), b = std::abs(f[best]), c = std::abs(f[best + 1]);
  const double denom = a - 2.0 * b + c;
  const double shift = denom != 0.0 ? 0.5 * (a - c) / denom : 0.0;
  return x[best] + shift * (x[best + 1] - x[best]);
}

}  // namespace

BoundsReport sample_pointwise_bounds(const TimeGreen& green) {
  const auto& prof = green.profile();
  const auto& grid = prof.grid;
  const auto& c = green.coeffs();
  const auto rates0 = decay_rates(prof.law, prof.shock, prof.shock.sigma0, 0.0);
  BoundsReport rep;
  rep.theta = 0.1 * std::min(rates0.theta_l, rates0.theta_r);
  rep.omega = 0.5 * std::min(std::abs(c.beta_plus), std::abs(c.beta_minus));
  const double theta = rep.theta, omega = rep.omega;
  const double lo = grid.x(green.bundle(true).first_index());
  const double hi = grid.x(green.bundle(true).last_index());
  auto idx = [&](double x) { return grid.index_of(x); };

  // G_ess along the characteristic of the source side: Gaussian envelope
  // constant and peak drift.
  {
    const double y = 10.0;
    const double speed = c.a_plus;
    std::vector<double> ts;
    for (double t = 1.0; t <= 8.0 + 1e-9; t += 0.5) ts.push_back(t);
    std::vector<double> xs;
    for (double x = std::max(lo, y - 15.0); x <= std::min(hi, y + 5.0) + 1e-9; x += grid.spacing())
      xs.push_back(grid.x(idx(std::round(x / grid.spacing()) * grid.spacing())));
    std::vector<Sample> samples;
    for (double t : ts)
      for (double x : xs) samples.push_back({t, x, y});
    const auto values = parallel_map<double>(samples.size(), [&](std::size_t s) {
      return green.split(samples[s].t, idx(samples[s].x), idx(samples[s].y)).ess;
    });
    std::vector<double> peaks;
    double base = 0.0, refined = 0.0;
    for (std::size_t ti = 0; ti < ts.size(); ++ti) {
      const double t = ts[ti];
      std::vector<double> row(values.begin() + ti * xs.size(),
                              values.begin() + (ti + 1) * xs.size());
      peaks.push_back(peak_position(xs, row));
      for (std::size_t xi = 0; xi < xs.size(); ++xi) {
        const double z = xs[xi] - y - speed * t;
        const double k = std::abs(row[xi]) * std::sqrt(t) * std::exp(omega * t + theta * z * z / t);
        refined = std::max(refined, k);
        if (ti % 2 == 0 && xi % 4 == 0) base = std::max(base, k);
      }
    }
    const auto fit = num::fit_line(ts, peaks);
    rep.ess_speed = fit.slope;
    rep.ess_speed_target = speed;
    const bool drift_ok = std::abs(fit.slope - speed) <= 0.1 * std::abs(speed);
    rep.rows.push_back({"ess-envelope", base, refined, stable(base, refined) && drift_ok,
                        "peak speed " + std::to_string(fit.slope) + " vs " +
                            std::to_string(speed)});
  }

  // G~pt localization in x.
  {
    const std::vector<double> t_base{2.0, 5.0, 10.0}, t_ref{2.0, 3.0, 5.0, 7.0, 10.0};
    const std::vector<double> y_base{-5.0, 2.0, 5.0}, y_ref{-5.0, -2.0, 2.0, 5.0, 8.0};
    std::vector<double> xs;
    for (double x = -20.0; x <= 20.0 + 1e-9; x += 0.25) xs.push_back(x);
    std::vector<Sample> samples;
    for (double t : t_ref)
      for (double y : y_ref)
        for (double x : xs) samples.push_back({t, x, y});
    const auto values = parallel_map<double>(samples.size(), [&](std::size_t s) {
      return green.split(samples[s].t, idx(samples[s].x), idx(samples[s].y)).pt_tilde;
    });
    double base = 0.0, refined = 0.0, slope = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < samples.size(); ++s) {
      const auto& p = samples[s];
      const double k = std::abs(values[s]) * std::exp(theta * std::abs(p.x) + omega * p.t);
      refined = std::max(refined, k);
      const bool in_base = std::find(t_base.begin(), t_base.end(), p.t) != t_base.end() &&
                           std::find(y_base.begin(), y_base.end(), p.y) != y_base.end();
      if (in_base) base = std::max(base, k);
    }
    for (std::size_t b = 0; b < samples.size(); b += xs.size()) {
      for (int side : {-1, 1}) {
        std::vector<double> ax, ly;
        for (std::size_t q = 0; q < xs.size(); ++q) {
          const double ax_q = std::abs(xs[q]);
          if (xs[q] * side < 0 || ax_q < 5.0 || ax_q > 20.0) continue;
          const double v = std::abs(values[b + q]);
          if (v <= 1e-13) continue;  // below the quadrature floor
          ax.push_back(ax_q);
          ly.push_back(std::log(v));
        }
        if (ax.size() >= 10) slope = std::max(slope, num::fit_line(ax, ly).slope);
      }
    }
    rep.pt_tilde_slope = slope;
    rep.rows.push_back({"pt-tilde-localization", base, refined,
                        stable(base, refined) && slope <= -theta,
                        "largest log-slope " + std::to_string(slope)});
  }

  // Short-time total mass, on a dedicated contour reaching t = 0.01.
  {
    TimeGreenOptions o;
    o.t_min = 0.01;
    o.t_max = 1.0;
    o.bundle.window = 12.0;
    const TimeGreen short_green(prof, o);
    const std::vector<double> t_base{0.01, 0.05, 0.25, 1.0};
    const std::vector<double> t_ref{0.01, 0.02, 0.05, 0.1, 0.25, 0.5, 1.0};
    const std::vector<double> xs{-2.0, 0.0, 3.0};
    auto mass = [&](double t, double x) {
      const double h = grid.spacing();
      std::vector<double> ys;
      for (double y = x - 8.0; y <= x + 8.0 + 1e-9; y += h) ys.push_back(y);
      const auto g = parallel_map<double>(ys.size(), [&](std::size_t q) {
        return short_green.split(t, idx(x), idx(ys[q])).total;
      });
      double m = 0.0;
      for (double v : g) m += std::abs(v) * h;
      return m;
    };
    double base = 0.0, refined = 0.0;
    for (double t : t_ref)
      for (double x : xs) {
        const double m = mass(t, x);
        refined = std::max(refined, m);
        if (std::find(t_base.begin(), t_base.end(), t) != t_base.end()) base = std::max(base, m);
      }
    rep.short_time_mass = refined;
    rep.rows.push_back({"short-time-mass", base, refined, stable(base, refined),
                        "sup over t in [0.01, 1] of int |G_t(x, y)| dy"});
  }

  // Phase derivative: |d/dt G^p_t(y)| <= C exp(-omega t).
  {
    const std::vector<double> t_base{2.0, 4.0, 8.0, 16.0, 32.0};
    const std::vector<double> t_ref{2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0};
    double base = 0.0, refined = 0.0;
    for (double t : t_ref)
      for (double y : {-3.0, 0.0, 3.0}) {
        const double k = std::abs(green.phase(t, idx(y)).dG_p) * std::exp(omega * t);
        refined = std::max(refined, k);
        if (std::find(t_base.begin(), t_base.end(), t) != t_base.end()) base = std::max(base, k);
      }
    rep.rows.push_back({"phase-derivative", base, refined, stable(base, refined),
                        "|dG^p/dt| exp(omega t)"});
  }
  return rep;
}

}  // namespace shocklab
