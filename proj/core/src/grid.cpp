#include "pfgb/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pfgb/error.hpp"

namespace pfgb {

GridSpec GridSpec::line(int n, double dx) {
  GridSpec g{1, {n, 1}, dx};
  g.validate();
  return g;
}

GridSpec GridSpec::plane(int n1, int n2, double dx) {
  GridSpec g{2, {n1, n2}, dx};
  g.validate();
  return g;
}

void GridSpec::validate() const {
  if (dim != 1 && dim != 2) throw InvalidArgument("grid dim must be 1 or 2");
  if (shape[0] < 2 || (dim == 2 && shape[1] < 2)) throw InvalidArgument("grid extents must be >= 2");
  if (!(dx > 0.0) || !std::isfinite(dx)) throw InvalidArgument("grid spacing must be positive");
}

std::string GridSpec::shape_string() const {
  std::string s = std::to_string(shape[0]);
  if (dim == 2) s += "x" + std::to_string(shape[1]);
  return s;
}

ScalarField::ScalarField(const GridSpec& grid, double value) : grid_(grid), values_(grid.size(), value) {
  grid_.validate();
}

ScalarField::ScalarField(const GridSpec& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  grid_.validate();
  if (values_.size() != grid_.size()) throw InvalidArgument("field size does not match grid");
}

double ScalarField::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double ScalarField::min() const noexcept {
  double m = std::numeric_limits<double>::infinity();
  for (double v : values_) m = std::min(m, v);
  return m;
}

double ScalarField::max() const noexcept {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values_) m = std::max(m, v);
  return m;
}

bool ScalarField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

VectorField::VectorField(const GridSpec& g) : grid(g), x(g.size(), 0.0) {
  if (g.dim == 2) y.assign(g.size(), 0.0);
}

double VectorField::norm_at(std::size_t k) const noexcept {
  if (y.empty()) return std::abs(x[k]);
  return std::sqrt(x[k] * x[k] + y[k] * y[k]);
}

void gradient_into(const GridSpec& grid, std::span<const double> f, std::span<double> gx,
                   std::span<double> gy) {
  const double inv = 1.0 / grid.dx;
  const int n1 = grid.shape[0];
  if (grid.dim == 1) {
    for (int i = 0; i + 1 < n1; ++i) gx[i] = (f[i + 1] - f[i]) * inv;
    gx[n1 - 1] = 0.0;
    return;
  }
  const int n2 = grid.shape[1];
  for (int i = 0; i < n1; ++i) {
    const std::size_t row = static_cast<std::size_t>(i) * n2;
    if (i + 1 < n1) {
      for (int j = 0; j < n2; ++j) gx[row + j] = (f[row + n2 + j] - f[row + j]) * inv;
    } else {
      for (int j = 0; j < n2; ++j) gx[row + j] = 0.0;
    }
    for (int j = 0; j + 1 < n2; ++j) gy[row + j] = (f[row + j + 1] - f[row + j]) * inv;
    gy[row + n2 - 1] = 0.0;
  }
}

void divergence_into(const GridSpec& grid, std::span<const double> px, std::span<const double> py,
                     std::span<double> out) {
  const double inv = 1.0 / grid.dx;
  const int n1 = grid.shape[0];
  if (grid.dim == 1) {
    out[0] = px[0] * inv;
    for (int i = 1; i + 1 < n1; ++i) out[i] = (px[i] - px[i - 1]) * inv;
    out[n1 - 1] = -px[n1 - 2] * inv;
    return;
  }
  const int n2 = grid.shape[1];
  for (int i = 0; i < n1; ++i) {
    const std::size_t row = static_cast<std::size_t>(i) * n2;
    const double* cur = px.data() + row;
    const double* up = px.data() + row - (i > 0 ? n2 : 0);
    const double* py_row = py.data() + row;
    double* o = out.data() + row;
    const bool has_next = i + 1 < n1;
    const bool has_prev = i > 0;
    for (int j = 0; j < n2; ++j) o[j] = (has_next ? cur[j] : 0.0) - (has_prev ? up[j] : 0.0);
    o[0] += py_row[0];
    for (int j = 1; j + 1 < n2; ++j) o[j] += py_row[j] - py_row[j - 1];
    o[n2 - 1] -= py_row[n2 - 2];
    for (int j = 0; j < n2; ++j) o[j] *= inv;
  }
}

VectorField gradient(const ScalarField& f) {
  VectorField g(f.grid());
  gradient_into(f.grid(), f.values(), g.x, g.y);
  return g;
}

ScalarField divergence(const VectorField& p) {
  ScalarField out(p.grid);
  divergence_into(p.grid, p.x, p.y, out.values());
  return out;
}

ScalarField neumann_laplacian(const ScalarField& f) { return divergence(gradient(f)); }

ScalarField gradient_magnitude(const ScalarField& f) {
  const VectorField g = gradient(f);
  ScalarField out(f.grid());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = g.norm_at(k);
  return out;
}

double weighted_tv(const ScalarField& rho, const ScalarField& f) {
  require_same_grid(rho.grid(), f.grid(), "weighted_tv");
  const VectorField g = gradient(f);
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (rho[k] < 0.0) throw InvalidArgument("weighted_tv: negative weight");
    s += rho[k] * g.norm_at(k);
  }
  return s * f.grid().cell_measure();
}

double dirichlet_energy(const ScalarField& f) {
  const VectorField g = gradient(f);
  return 0.5 * inner(g, g);
}

double weighted_dirichlet_energy(const ScalarField& b, const ScalarField& f) {
  require_same_grid(b.grid(), f.grid(), "weighted_dirichlet_energy");
  const VectorField g = gradient(f);
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (b[k] < 0.0) throw InvalidArgument("weighted_dirichlet_energy: negative weight");
    const double n = g.norm_at(k);
    s += b[k] * n * n;
  }
  return s * f.grid().cell_measure();
}

ScalarField truncate(const ScalarField& f, double a, double b) {
  if (a > b) throw InvalidArgument("truncate: lower bound exceeds upper bound");
  ScalarField out = f;
  for (double& v : out.values()) v = std::max(a, std::min(b, v));
  return out;
}

double grad_operator_norm_bound(const GridSpec& grid) {
  return 4.0 * grid.dim / (grid.dx * grid.dx);
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double inner(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid(), "inner");
  return dot(a.values(), b.values()) * a.grid().cell_measure();
}

double inner(const VectorField& a, const VectorField& b) {
  require_same_grid(a.grid, b.grid, "inner");
  return (dot(a.x, b.x) + dot(a.y, b.y)) * a.grid.cell_measure();
}

double l2_norm(const ScalarField& f) { return std::sqrt(inner(f, f)); }

double l2_distance(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid(), "l2_distance");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s * a.grid().cell_measure());
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) throw InvalidArgument(std::string(what) + ": fields live on different grids");
}

}  // namespace pfgb
