#include "shocklab/grid.hpp"

#include <cmath>
#include <sstream>

#include "shocklab/common.hpp"

namespace shocklab {

ProfileGrid::ProfileGrid(double half_width, double spacing)
    : half_width_(half_width), spacing_(spacing) {
  if (!(spacing > 0.0) || !(half_width > 0.0)) throw ConfigError("grid needs L > 0 and h > 0");
  const double ratio = half_width / spacing;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * ratio) {
    std::ostringstream msg;
    msg << "grid half-width " << half_width << " is not a multiple of spacing " << spacing;
    throw ConfigError(msg.str());
  }
  n_half_ = static_cast<std::size_t>(rounded);
}

std::vector<double> ProfileGrid::nodes() const {
  std::vector<double> xs(size());
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = x(i);
  return xs;
}

bool ProfileGrid::contains_node(double x) const {
  const double k = x / spacing_;
  return std::abs(k - std::round(k)) <= 1e-9 && std::abs(x) <= half_width_ * (1 + 1e-12);
}

std::size_t ProfileGrid::index_of(double x) const {
  if (!contains_node(x)) {
    std::ostringstream msg;
    msg << "x=" << x << " is not a grid node (h=" << spacing_ << ", L=" << half_width_ << ")";
    throw RangeError(msg.str());
  }
  const auto k = static_cast<long>(std::lround(x / spacing_));
  return static_cast<std::size_t>(k + static_cast<long>(n_half_));
}

namespace num {

std::vector<double> derivative(std::span<const double> v, double h) {
  const std::size_t n = v.size();
  std::vector<double> d(n, 0.0);
  if (n < 3) return d;
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2 * h);
  d[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h);
  d[n - 1] = (3 * v[n - 1] - 4 * v[n - 2] + v[n - 3]) / (2 * h);
  return d;
}

std::vector<double> cumulative_hermite(std::span<const double> f, std::span<const double> df,
                                       double h, std::size_t anchor) {
  std::vector<double> out(f.size(), 0.0);
  auto cell = [&](std::size_t i) {
    return 0.5 * h * (f[i] + f[i + 1]) + h * h / 12.0 * (df[i] - df[i + 1]);
  };
  for (std::size_t i = anchor; i + 1 < f.size(); ++i) out[i + 1] = out[i] + cell(i);
  for (std::size_t i = anchor; i > 0; --i) out[i - 1] = out[i] - cell(i - 1);
  return out;
}

std::vector<double> cumulative_sixth(std::span<const double> f, double h, std::size_t anchor) {
  const std::size_t n = f.size();
  std::vector<double> out(n, 0.0);
  auto cell = [&](std::size_t i) {
    if (i >= 2 && i + 3 < n)
      return h / 1440.0 *
             (11 * (f[i - 2] + f[i + 3]) - 93 * (f[i - 1] + f[i + 2]) + 802 * (f[i] + f[i + 1]));
    return 0.5 * h * (f[i] + f[i + 1]);
  };
  for (std::size_t i = anchor; i + 1 < n; ++i) out[i + 1] = out[i] + cell(i);
  for (std::size_t i = anchor; i > 0; --i) out[i - 1] = out[i] - cell(i - 1);
  return out;
}

std::vector<double> cumulative_trapezoid(std::span<const double> f, double h, std::size_t anchor) {
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t i = anchor; i + 1 < f.size(); ++i) out[i + 1] = out[i] + 0.5 * h * (f[i] + f[i + 1]);
  for (std::size_t i = anchor; i > 0; --i) out[i - 1] = out[i] - 0.5 * h * (f[i - 1] + f[i]);
  return out;
}

double trapezoid(std::span<const double> f, double h) {
  if (f.empty()) return 0.0;
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * h;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw RangeError("line fit needs at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += r * r;
  }
  fit.rms = std::sqrt(ss / n);
  return fit;
}

void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs) {
  const std::size_t n = rhs.size();
  std::vector<double> c(n);
  double denom = diag[0];
  c[0] = upper[0] / denom;
  rhs[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag[i] - lower[i] * c[i - 1];
    c[i] = upper[i] / denom;
    rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i > 0; --i) rhs[i - 1] -= c[i - 1] * rhs[i];
}

double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace num
}  // namespace shocklab
