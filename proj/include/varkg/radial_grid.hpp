#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "varkg/error.hpp"

namespace varkg {

/// Uniform radial grid r_i = i*h, i = 0..M, with h = R/M.
///
/// Quadrature weights fold in the radial measure. For N = 1 the functions are
/// even and the weights are the full-line trapezoid weights on [-R, R] folded
/// onto the half line. For N >= 2 each node carries the volume of its cell
/// [r_i - h/2, r_i + h/2] clipped to [0, R], so the weights sum exactly to the
/// ball volume and coincide with the trapezoid weights in the 2-d interior.
class RadialGrid {
 public:
  static std::shared_ptr<const RadialGrid> make(int dimension, double radius, int intervals);

  int dimension() const noexcept { return dimension_; }
  double radius() const noexcept { return radius_; }
  int intervals() const noexcept { return intervals_; }
  std::size_t size() const noexcept { return weights_.size(); }
  double spacing() const noexcept { return spacing_; }
  double r(std::size_t i) const noexcept { return static_cast<double>(i) * spacing_; }
  std::span<const double> weights() const noexcept { return weights_; }
  /// Shell measure at each edge midpoint r_{i+1/2}; M entries.
  std::span<const double> edge_weights() const noexcept { return edge_weights_; }

  /// Measure of the truncated domain: 2R, pi R^2 or 4/3 pi R^3.
  double domain_measure() const noexcept;

  bool same_as(const RadialGrid& other) const noexcept {
    return dimension_ == other.dimension_ && radius_ == other.radius_ &&
           intervals_ == other.intervals_;
  }

 private:
  RadialGrid(int dimension, double radius, int intervals);

  int dimension_;
  double radius_;
  int intervals_;
  double spacing_;
  std::vector<double> weights_;
  std::vector<double> edge_weights_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

inline constexpr int kMinIntervals = 16;

/// Radial profile sampled on a grid. Values are finite, and for N >= 2 the
/// outer node carries the homogeneous Dirichlet value.
template <typename T>
class BasicGridFunction {
 public:
  using value_type = T;

  BasicGridFunction(GridPtr grid, std::vector<T> values);

  static BasicGridFunction zeros(GridPtr grid) {
    const std::size_t n = grid->size();
    return BasicGridFunction(std::move(grid), std::vector<T>(n, T{}));
  }

  /// Samples f(r) at every node; the outer node is zeroed for N >= 2.
  static BasicGridFunction sample(GridPtr grid, const std::function<T(double)>& f);

  const RadialGrid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::span<const T> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  T operator[](std::size_t i) const noexcept { return values_[i]; }

  BasicGridFunction scaled(double factor) const;

 private:
  GridPtr grid_;
  std::vector<T> values_;
};

using GridFunction = BasicGridFunction<double>;
using ComplexGridFunction = BasicGridFunction<std::complex<double>>;

extern template class BasicGridFunction<double>;
extern template class BasicGridFunction<std::complex<double>>;

void require_same_grid(const RadialGrid& a, const RadialGrid& b);

/// Centered differences, v'(0) = 0 by even symmetry, one-sided at r = R.
std::vector<double> radial_derivative(const GridFunction& v);
std::vector<std::complex<double>> radial_derivative(const ComplexGridFunction& v);

/// Radial Laplacian whose quadratic form is exactly -grad_norm_sq: at r = 0 it
/// reduces to 2N (u_1 - u_0)/h², and for N <= 2 it is the centered
/// u'' + (N-1)/r u' stencil elsewhere. The outer node is left at 0.
void apply_laplacian(const RadialGrid& grid, std::span<const double> u, std::span<double> out);

double l2_norm_sq(const GridFunction& v);
double l2_norm_sq(const ComplexGridFunction& v);
/// Sum over cell edges of the squared difference quotient times the edge
/// shell measure. Per-edge differences keep ||a| - |b|| <= |a - b| intact.
double grad_norm_sq(const GridFunction& v);
double grad_norm_sq(const ComplexGridFunction& v);
double h1_norm(const GridFunction& v);

/// Sum_i w_i |v_i|^q.
double lebesgue_norm_pow(const GridFunction& v, double q);

GridFunction modulus(const ComplexGridFunction& v);

struct DecayProfile {
  std::vector<double> r;
  std::vector<double> ratio;
};

/// r^{(N-1)/2} |v(r)| / ||v||_{H^1} on the interior nodes; bounded for radial
/// H^1 functions when N >= 2.
DecayProfile strauss_decay_profile(const GridFunction& v);

/// Largest node radius where |v| exceeds rel_threshold * max|v| (0 for v = 0).
double support_radius(const GridFunction& v, double rel_threshold = 1e-8);

/// Cubic Lagrange interpolation of v at radius r: even reflection through
/// r = 0, zero extension beyond R.
double interpolate(const GridFunction& v, double r);

/// Two-column CSV with a `# N=<dim> R=<radius> M=<intervals>` header line.
void write_csv(std::ostream& out, const GridFunction& v);
void write_csv(std::ostream& out, const ComplexGridFunction& v);
GridFunction read_grid_function_csv(std::istream& in);
ComplexGridFunction read_complex_grid_function_csv(std::istream& in);

/// Shortest round-trip decimal form, used for every numeric CSV/JSON cell.
std::string format_number(double x);

}  // namespace varkg
