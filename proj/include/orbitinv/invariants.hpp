#pragma once

// Three ways of writing the same closed-orbit integral of the vortical
// potential psi:
//
//   time form     I7 = int_0^T (psi_x y' - psi_y x') dt
//   contour form  I8 = oint_L (psi_x dy - psi_y dx)
//   area form     I9 = iint w(x, y) (psi_xx + psi_yy) dx dy
//
// w is the winding number of L, so I8 == I9 in the continuum even when the
// projected orbit crosses itself; for a simple counterclockwise curve w is
// the indicator of the enclosed region. On a periodic orbit I7 vanishes
// because H returns to its initial value.

#include <cstddef>
#include <vector>

#include "orbitinv/curve.hpp"
#include "orbitinv/dynamics.hpp"
#include "orbitinv/resonance.hpp"

namespace orbitinv {

/// A signed integral together with the integral of the absolute integrand.
struct SignedIntegral {
  double value = 0.0;
  double absolute = 0.0;
};

SignedIntegral time_integral(const SystemSpec& spec, const Trajectory& traj);
SignedIntegral time_integral(const SystemSpec& spec, const PeriodicOrbit& orbit);

/// 4-point Gauss-Legendre on every polyline segment. absolute integrates
/// |psi_x t_y - psi_y t_x| against arc length.
SignedIntegral line_integral(const ScalarField& psi, const ClosedCurve& curve);
SignedIntegral line_integral(const SystemSpec& spec, const ClosedCurve& curve);

/// Integer winding numbers at the cell centres of a uniform grid over the
/// curve's bounding box, padded by 5% per side.
class WindingGrid {
 public:
  WindingGrid(const ClosedCurve& curve, std::size_t resolution);

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  const Box& box() const { return box_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  Point2 center(std::size_t i, std::size_t j) const;
  /// Where the winding number was evaluated (the centre unless perturbed).
  Point2 sample_point(std::size_t i, std::size_t j) const { return samples_[j * nx_ + i]; }
  int winding(std::size_t i, std::size_t j) const { return winding_[j * nx_ + i]; }
  std::size_t perturbed_cells() const { return perturbed_; }

 private:
  std::size_t nx_, ny_;
  Box box_;
  double dx_, dy_;
  std::vector<int> winding_;
  std::vector<Point2> samples_;
  std::size_t perturbed_ = 0;
};

/// Midpoint rule over the winding grid; resolution >= 32. absolute sums
/// |w lap(psi)| dA.
SignedIntegral area_integral(const ScalarField& psi, const ClosedCurve& curve, std::size_t resolution);
SignedIntegral area_integral(const SystemSpec& spec, const ClosedCurve& curve, std::size_t resolution);

inline constexpr double kNormalizerFloor = 1e-12;

struct InvariantReport {
  double I7 = 0.0, I8 = 0.0, I9 = 0.0;
  double N7 = 0.0, N8 = 0.0, N9 = 0.0;
  double residual_78 = 0.0;  // |I7 - I8|
  double residual_89 = 0.0;  // |I8 - I9|
  double tolerance = 0.0;
  std::size_t resolution = 0;
  bool holds_time = false;
  bool holds_contour = false;
  bool holds = false;
  bool self_intersecting = false;  // I9 used signed winding weights
  double period = 0.0;
  double closure = 0.0;
};

InvariantReport report(const SystemSpec& spec, const PeriodicOrbit& orbit, std::size_t resolution,
                       double tol);

/// Pairwise (cascade) summation; fixed order for a given input.
double pairwise_sum(const double* data, std::size_t n);

}  // namespace orbitinv
