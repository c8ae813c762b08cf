#pragma once

// Discrete calculus on a uniform 1D/2D rectangular grid with zero-Neumann
// boundary semantics.
//
// Layout is row-major: index = i * n2 + j, axis 0 runs over i.  The gradient
// is a forward difference whose last slice along each axis is zero; the
// divergence is its exact negative adjoint, so
//   <gradient(f), p> = -<f, divergence(p)>
// holds to round-off for every f, p.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace pfgb {

struct GridSpec {
  int dim = 1;
  std::array<int, 2> shape{2, 1};
  double dx = 1.0;

  static GridSpec line(int n, double dx);
  static GridSpec plane(int n1, int n2, double dx);

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(shape[0]) * static_cast<std::size_t>(dim == 2 ? shape[1] : 1);
  }
  /// Cell measure dx^dim used as the quadrature weight.
  double cell_measure() const noexcept { return dim == 2 ? dx * dx : dx; }
  /// |Omega| = size * dx^dim.
  double volume() const noexcept { return static_cast<double>(size()) * cell_measure(); }

  void validate() const;
  /// "64" or "32x32".
  std::string shape_string() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const GridSpec& grid, double value = 0.0);
  ScalarField(const GridSpec& grid, std::vector<double> values);

  const GridSpec& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator[](std::size_t k) noexcept { return values_[k]; }
  double operator[](std::size_t k) const noexcept { return values_[k]; }
  double& at(int i, int j = 0) noexcept { return values_[index(i, j)]; }
  double at(int i, int j = 0) const noexcept { return values_[index(i, j)]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  double max_abs() const noexcept;
  double min() const noexcept;
  double max() const noexcept;
  bool all_finite() const noexcept;

  friend bool operator==(const ScalarField&, const ScalarField&) = default;

 private:
  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(grid_.dim == 2 ? grid_.shape[1] : 1) +
           static_cast<std::size_t>(j);
  }

  GridSpec grid_{};
  std::vector<double> values_;
};

/// One component array per axis; `y` is empty on 1D grids.
struct VectorField {
  GridSpec grid{};
  std::vector<double> x;
  std::vector<double> y;

  VectorField() = default;
  explicit VectorField(const GridSpec& g);

  /// Euclidean norm of the cell vector at k.
  double norm_at(std::size_t k) const noexcept;
};

// --- difference operators ---------------------------------------------------

VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& p);
ScalarField neumann_laplacian(const ScalarField& f);

/// Allocation-free kernels used by the solvers.  `gx`, `gy` (and `px`, `py`)
/// have one entry per cell; `gy`/`py` are ignored for 1D grids.
void gradient_into(const GridSpec& grid, std::span<const double> f, std::span<double> gx,
                   std::span<double> gy);
void divergence_into(const GridSpec& grid, std::span<const double> px, std::span<const double> py,
                     std::span<double> out);

/// Cell-wise |grad f|.
ScalarField gradient_magnitude(const ScalarField& f);

// --- functionals -------------------------------------------------------------

/// sum_c rho_c |grad f|_c dx^dim (isotropic cell norm).  Throws on rho < 0.
double weighted_tv(const ScalarField& rho, const ScalarField& f);
/// 1/2 sum |grad f|^2 dx^dim.
double dirichlet_energy(const ScalarField& f);
/// sum b |grad f|^2 dx^dim.  Throws on b < 0.
double weighted_dirichlet_energy(const ScalarField& b, const ScalarField& f);

/// Pointwise a v (b ^ f).  Throws if a > b.
ScalarField truncate(const ScalarField& f, double a, double b);

/// Certified upper bound on ||gradient||^2, namely 4 dim / dx^2.
double grad_operator_norm_bound(const GridSpec& grid);

// --- inner products on cell arrays --------------------------------------------

/// Plain Euclidean sum, fixed left-to-right reduction order.
double dot(std::span<const double> a, std::span<const double> b) noexcept;
double inner(const ScalarField& a, const ScalarField& b);
double inner(const VectorField& a, const VectorField& b);
/// Discrete L2 norm with quadrature weight dx^dim.
double l2_norm(const ScalarField& f);
double l2_distance(const ScalarField& a, const ScalarField& b);

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what);

}  // namespace pfgb
