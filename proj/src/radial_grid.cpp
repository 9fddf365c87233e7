#include "varkg/radial_grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace varkg {

namespace {

double ball_volume(int dimension, double radius) {
  switch (dimension) {
    case 1: return 2.0 * radius;
    case 2: return std::numbers::pi * radius * radius;
    default: return 4.0 / 3.0 * std::numbers::pi * radius * radius * radius;
  }
}

template <typename T>
bool is_finite(const T& x) {
  if constexpr (std::is_same_v<T, double>) {
    return std::isfinite(x);
  } else {
    return std::isfinite(x.real()) && std::isfinite(x.imag());
  }
}

template <typename T>
std::vector<T> derivative_impl(const RadialGrid& grid, std::span<const T> v) {
  const std::size_t n = v.size();
  const double h = grid.spacing();
  std::vector<T> d(n, T{});
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
  d[n - 1] = (v[n - 1] - v[n - 2]) / h;
  return d;
}

template <typename T>
double l2_impl(const RadialGrid& grid, std::span<const T> v) {
  const auto w = grid.weights();
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) sum += w[i] * std::norm(v[i]);
  return sum;
}

// Difference quotient on each cell edge, weighted by the shell measure at the
// edge midpoint.
template <typename T>
double grad_impl(const RadialGrid& grid, std::span<const T> v) {
  const auto a = grid.edge_weights();
  const double h2 = grid.spacing() * grid.spacing();
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) sum += a[i] * std::norm(v[i + 1] - v[i]);
  return sum / h2;
}

double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidInput, "malformed number '" + s + "'");
  }
  if (pos != s.size()) throw Error(ErrorCode::InvalidInput, "malformed number '" + s + "'");
  return x;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  return out;
}

GridPtr parse_header(const std::string& line) {
  int dim = 0, intervals = 0;
  double radius = 0.0;
  bool have_n = false, have_r = false, have_m = false;
  std::istringstream ss(line.substr(1));
  std::string tok;
  while (ss >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = tok.substr(0, eq);
    const std::string val = tok.substr(eq + 1);
    if (key == "N") {
      dim = static_cast<int>(parse_double(val));
      have_n = true;
    } else if (key == "R") {
      radius = parse_double(val);
      have_r = true;
    } else if (key == "M") {
      intervals = static_cast<int>(parse_double(val));
      have_m = true;
    }
  }
  if (!have_n || !have_r || !have_m)
    throw Error(ErrorCode::InvalidInput, "grid header must carry N, R and M");
  return RadialGrid::make(dim, radius, intervals);
}

template <typename T>
BasicGridFunction<T> read_csv_impl(std::istream& in, std::size_t value_columns) {
  std::string line;
  if (!std::getline(in, line) || line.empty() || line[0] != '#')
    throw Error(ErrorCode::InvalidInput, "missing '# N=.. R=.. M=..' header");
  GridPtr grid = parse_header(line);
  std::vector<T> values;
  values.reserve(grid->size());
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == 'r') continue;  // column header row
    const auto cells = split(line, ',');
    if (cells.size() != 1 + value_columns)
      throw Error(ErrorCode::InvalidInput, "unexpected column count in '" + line + "'");
    const double r = parse_double(cells[0]);
    const double expected_r = grid->r(values.size());
    if (std::abs(r - expected_r) > 1e-9 * std::max(1.0, grid->radius()))
      throw Error(ErrorCode::GridMismatch, "node radius " + cells[0] + " does not match header");
    if constexpr (std::is_same_v<T, double>) {
      values.push_back(parse_double(cells[1]));
    } else {
      values.emplace_back(parse_double(cells[1]), parse_double(cells[2]));
    }
  }
  if (values.size() != grid->size())
    throw Error(ErrorCode::InvalidInput, "expected " + std::to_string(grid->size()) +
                                             " rows, found " + std::to_string(values.size()));
  return BasicGridFunction<T>(std::move(grid), std::move(values));
}

void write_header(std::ostream& out, const RadialGrid& grid) {
  out << "# N=" << grid.dimension() << " R=" << format_number(grid.radius())
      << " M=" << grid.intervals() << '\n';
}

}  // namespace

std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

RadialGrid::RadialGrid(int dimension, double radius, int intervals)
    : dimension_(dimension),
      radius_(radius),
      intervals_(intervals),
      spacing_(radius / intervals),
      weights_(static_cast<std::size_t>(intervals) + 1),
      edge_weights_(static_cast<std::size_t>(intervals)) {
  const std::size_t n = weights_.size();
  const double h = spacing_;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double mid = (static_cast<double>(i) + 0.5) * h;
    switch (dimension) {
      case 1: edge_weights_[i] = 2.0 * h; break;
      case 2: edge_weights_[i] = 2.0 * std::numbers::pi * mid * h; break;
      default: edge_weights_[i] = 4.0 * std::numbers::pi * mid * mid * h; break;
    }
  }
  if (dimension == 1) {
    std::fill(weights_.begin(), weights_.end(), 2.0 * h);
    weights_.front() = h;
    weights_.back() = h;
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = i == 0 ? 0.0 : (static_cast<double>(i) - 0.5) * h;
    const double hi = i + 1 == n ? radius : (static_cast<double>(i) + 0.5) * h;
    weights_[i] = ball_volume(dimension, hi) - ball_volume(dimension, lo);
  }
}

std::shared_ptr<const RadialGrid> RadialGrid::make(int dimension, double radius, int intervals) {
  if (dimension < 1 || dimension > 3)
    throw Error(ErrorCode::InvalidParameter, "dimension must be 1, 2 or 3");
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw Error(ErrorCode::InvalidParameter, "radius must be positive");
  if (intervals < kMinIntervals)
    throw Error(ErrorCode::InvalidParameter,
                "grid needs at least " + std::to_string(kMinIntervals) + " intervals");
  return std::shared_ptr<const RadialGrid>(new RadialGrid(dimension, radius, intervals));
}

double RadialGrid::domain_measure() const noexcept { return ball_volume(dimension_, radius_); }

template <typename T>
BasicGridFunction<T>::BasicGridFunction(GridPtr grid, std::vector<T> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw Error(ErrorCode::InvalidInput, "null grid");
  if (values_.size() != grid_->size())
    throw Error(ErrorCode::InvalidInput, "value count does not match grid");
  for (const auto& x : values_)
    if (!is_finite(x)) throw Error(ErrorCode::InvalidInput, "non-finite grid value");
  if (grid_->dimension() >= 2 && values_.back() != T{})
    throw Error(ErrorCode::InvalidInput, "outer boundary value must vanish for N >= 2");
}

template <typename T>
BasicGridFunction<T> BasicGridFunction<T>::sample(GridPtr grid, const std::function<T(double)>& f) {
  std::vector<T> values(grid->size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = f(grid->r(i));
  if (grid->dimension() >= 2) values.back() = T{};
  return BasicGridFunction(std::move(grid), std::move(values));
}

template <typename T>
BasicGridFunction<T> BasicGridFunction<T>::scaled(double factor) const {
  std::vector<T> out(values_);
  for (auto& x : out) x *= factor;
  return BasicGridFunction(grid_, std::move(out));
}

template class BasicGridFunction<double>;
template class BasicGridFunction<std::complex<double>>;

void apply_laplacian(const RadialGrid& grid, std::span<const double> u, std::span<double> out) {
  const auto a = grid.edge_weights();
  const auto w = grid.weights();
  const std::size_t n = u.size();
  const double h2 = grid.spacing() * grid.spacing();
  double left = 0.0;  // flux through the inner edge of the current cell
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double right = a[i] * (u[i + 1] - u[i]);
    out[i] = (right - left) / (h2 * w[i]);
    left = right;
  }
  out[n - 1] = 0.0;
}

void require_same_grid(const RadialGrid& a, const RadialGrid& b) {
  if (!a.same_as(b)) throw Error(ErrorCode::GridMismatch, "functions live on different grids");
}

std::vector<double> radial_derivative(const GridFunction& v) {
  return derivative_impl<double>(v.grid(), v.values());
}

std::vector<std::complex<double>> radial_derivative(const ComplexGridFunction& v) {
  return derivative_impl<std::complex<double>>(v.grid(), v.values());
}

double l2_norm_sq(const GridFunction& v) { return l2_impl<double>(v.grid(), v.values()); }
double l2_norm_sq(const ComplexGridFunction& v) {
  return l2_impl<std::complex<double>>(v.grid(), v.values());
}
double grad_norm_sq(const GridFunction& v) { return grad_impl<double>(v.grid(), v.values()); }
double grad_norm_sq(const ComplexGridFunction& v) {
  return grad_impl<std::complex<double>>(v.grid(), v.values());
}

double h1_norm(const GridFunction& v) { return std::sqrt(l2_norm_sq(v) + grad_norm_sq(v)); }

double lebesgue_norm_pow(const GridFunction& v, double q) {
  const auto w = v.grid().weights();
  const auto x = v.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = std::abs(x[i]);
    if (a == 0.0) continue;
    sum += w[i] * std::pow(a, q);
  }
  return sum;
}

GridFunction modulus(const ComplexGridFunction& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(v[i]);
  return GridFunction(v.grid_ptr(), std::move(out));
}

DecayProfile strauss_decay_profile(const GridFunction& v) {
  const int dim = v.grid().dimension();
  if (dim < 2) throw Error(ErrorCode::Unsupported, "the radial decay bound needs N >= 2");
  const double norm = h1_norm(v);
  if (norm == 0.0) throw Error(ErrorCode::InvalidInput, "zero function has no decay ratio");
  const double power = 0.5 * (dim - 1);
  DecayProfile out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    const double r = v.grid().r(i);
    out.r.push_back(r);
    out.ratio.push_back(std::pow(r, power) * std::abs(v[i]) / norm);
  }
  return out;
}

double support_radius(const GridFunction& v, double rel_threshold) {
  double peak = 0.0;
  for (double x : v.values()) peak = std::max(peak, std::abs(x));
  if (peak == 0.0) return 0.0;
  for (std::size_t i = v.size(); i-- > 0;)
    if (std::abs(v[i]) > rel_threshold * peak) return v.grid().r(i);
  return 0.0;
}

double interpolate(const GridFunction& v, double r) {
  const RadialGrid& grid = v.grid();
  r = std::abs(r);
  if (r > grid.radius()) return 0.0;
  const long last = grid.intervals();
  const double x = r / grid.spacing();
  long i = std::min(static_cast<long>(std::floor(x)), last - 1);
  const double t = x - static_cast<double>(i);
  auto at = [&](long k) -> double {
    if (k < 0) k = -k;
    return k > last ? 0.0 : v[static_cast<std::size_t>(k)];
  };
  const double pm = at(i - 1), p0 = at(i), p1 = at(i + 1), p2 = at(i + 2);
  const double wm = -t * (t - 1.0) * (t - 2.0) / 6.0;
  const double w0 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
  const double w1 = -(t + 1.0) * t * (t - 2.0) / 2.0;
  const double w2 = (t + 1.0) * t * (t - 1.0) / 6.0;
  return wm * pm + w0 * p0 + w1 * p1 + w2 * p2;
}

void write_csv(std::ostream& out, const GridFunction& v) {
  write_header(out, v.grid());
  out << "r,value\n";
  for (std::size_t i = 0; i < v.size(); ++i)
    out << format_number(v.grid().r(i)) << ',' << format_number(v[i]) << '\n';
}

void write_csv(std::ostream& out, const ComplexGridFunction& v) {
  write_header(out, v.grid());
  out << "r,re,im\n";
  for (std::size_t i = 0; i < v.size(); ++i)
    out << format_number(v.grid().r(i)) << ',' << format_number(v[i].real()) << ','
        << format_number(v[i].imag()) << '\n';
}

GridFunction read_grid_function_csv(std::istream& in) { return read_csv_impl<double>(in, 1); }

ComplexGridFunction read_complex_grid_function_csv(std::istream& in) {
  return read_csv_impl<std::complex<double>>(in, 2);
}

}  // namespace varkg
