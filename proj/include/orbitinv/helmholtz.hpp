#pragma once

// Split a sampled planar field F into -grad U + (psi_y, -psi_x).
//
// Periodic grids use Fourier differentiation and exact spectral Poisson
// inversion; Dirichlet-zero grids use second-order stencils, the 5-point
// Laplacian and red-black SOR. Without boundary conditions the split is not
// unique: constant (and, in general, harmonic) fields fit either part, and
// are left in the reported residual.

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "orbitinv/dynamics.hpp"
#include "orbitinv/scalar_field.hpp"

namespace orbitinv {

enum class BoundaryMode { Periodic, DirichletZero };

const char* to_string(BoundaryMode mode);
BoundaryMode boundary_mode_from_string(const std::string& s);

/// Nodes at (x0 + i hx, y0 + j hy). A periodic grid has period nx*hx by ny*hy.
struct GridGeometry {
  std::size_t nx = 0, ny = 0;
  double x0 = 0.0, y0 = 0.0;
  double hx = 1.0, hy = 1.0;

  /// [xmin, xmax) x [ymin, ymax) with the right/top edge excluded.
  static GridGeometry periodic_box(std::size_t nx, std::size_t ny, double xmin, double xmax,
                                   double ymin, double ymax);
  /// Nodes on both ends of each axis.
  static GridGeometry closed_box(std::size_t nx, std::size_t ny, double xmin, double xmax,
                                 double ymin, double ymax);

  double x(std::size_t i) const { return x0 + static_cast<double>(i) * hx; }
  double y(std::size_t j) const { return y0 + static_cast<double>(j) * hy; }
  std::size_t size() const { return nx * ny; }
  std::size_t index(std::size_t i, std::size_t j) const { return j * nx + i; }
  void validate() const;
};

struct GridScalar {
  GridGeometry geom;
  std::vector<double> values;  // row-major, x fastest

  explicit GridScalar(GridGeometry g = {}) : geom(g), values(g.size(), 0.0) {}
  double& at(std::size_t i, std::size_t j) { return values[geom.index(i, j)]; }
  double at(std::size_t i, std::size_t j) const { return values[geom.index(i, j)]; }
  double mean() const;
};

struct GridField {
  GridGeometry geom;
  std::vector<double> fx, fy;

  explicit GridField(GridGeometry g = {}) : geom(g), fx(g.size(), 0.0), fy(g.size(), 0.0) {}
  /// nx, ny >= 8 and every sample finite.
  void validate() const;
};

/// Second-order central differences; periodic wrap, or second-order
/// one-sided differences on the boundary of a Dirichlet grid.
GridScalar divergence(const GridField& f, BoundaryMode mode);
GridScalar curl_z(const GridField& f, BoundaryMode mode);

class PoissonNotConverged : public std::runtime_error {
 public:
  PoissonNotConverged(double achieved, std::size_t sweeps);
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

struct PoissonSolution {
  GridScalar u;
  double removed_mean = 0.0;  // periodic: mean subtracted from the rhs
  double residual = 0.0;      // dirichlet: relative residual reached
  std::size_t sweeps = 0;
};

/// Solves lap(u) = rhs. Periodic: zero-mean u; a nonzero rhs mean is removed
/// and reported. Dirichlet: u = 0 on the boundary, interior by SOR until the
/// relative residual is <= 1e-10 (at most 1e5 sweeps).
PoissonSolution solve_poisson(const GridScalar& rhs, BoundaryMode mode);

struct DecompositionResult {
  GridScalar potential;  // U
  GridScalar stream;     // psi
  double residual = 0.0; // |F - recomposed|_2 / |F|_2
  BoundaryMode mode = BoundaryMode::Periodic;
  std::vector<std::string> warnings;
};

DecompositionResult decompose(const GridField& f, BoundaryMode mode);

/// -grad U and (psi_y, -psi_x) evaluated with the operators decompose uses.
GridField gradient_part(const GridScalar& potential, BoundaryMode mode);
GridField rotational_part(const GridScalar& stream, BoundaryMode mode);

/// Node samples of -grad U + (psi_y, -psi_x) from symbolic derivatives.
GridField compose(const SystemSpec& spec, const GridGeometry& geom);
GridField compose(const ScalarField& potential, const ScalarField& stream, const GridGeometry& geom);

GridScalar sample(const ScalarField& f, const GridGeometry& geom);

// CSV: optional first line "# {json geometry}", then `x,y,Fx,Fy` rows with x
// varying fastest. Geometry is inferred from the nodes when no header is given.
class GridFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

GridField read_grid_field_csv(std::istream& is);
void write_grid_field_csv(std::ostream& os, const GridField& f, bool with_header = true);
void write_grid_scalar_csv(std::ostream& os, const GridScalar& s, const std::string& column);

}  // namespace orbitinv
