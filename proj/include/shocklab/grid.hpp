#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace shocklab {

// Uniform grid on [-L, L] with node n_half() at x = 0.
class ProfileGrid {
 public:
  ProfileGrid() = default;
  ProfileGrid(double half_width, double spacing);

  double half_width() const { return half_width_; }
  double spacing() const { return spacing_; }
  std::size_t n_half() const { return n_half_; }
  std::size_t size() const { return 2 * n_half_ + 1; }
  std::size_t center() const { return n_half_; }
  double x(std::size_t i) const {
    return (static_cast<double>(i) - static_cast<double>(n_half_)) * spacing_;
  }
  std::vector<double> nodes() const;
  // Index of the node at x; throws RangeError unless x is a node within 1e-9 h.
  std::size_t index_of(double x) const;
  bool contains_node(double x) const;

 private:
  double half_width_ = 0.0;
  double spacing_ = 0.0;
  std::size_t n_half_ = 0;
};

namespace num {

// Centered second-order differences, one-sided second order at the ends.
std::vector<double> derivative(std::span<const double> v, double h);

// Cumulative integral from node `anchor` using the corrected trapezoid rule
// with endpoint derivative data (fourth order).
std::vector<double> cumulative_hermite(std::span<const double> f, std::span<const double> df,
                                       double h, std::size_t anchor);

// Cumulative integral from node `anchor` with six-point cell weights (sixth
// order in the interior, trapezoid on the outermost two cells).
std::vector<double> cumulative_sixth(std::span<const double> f, double h, std::size_t anchor);

std::vector<double> cumulative_trapezoid(std::span<const double> f, double h, std::size_t anchor);
double trapezoid(std::span<const double> f, double h);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Solves a tridiagonal system in place; lower/diag/upper have the size of rhs.
void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs);

double sup_norm(std::span<const double> v);

}  // namespace num
}  // namespace shocklab
