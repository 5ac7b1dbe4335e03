#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "orbitinv/curve.hpp"
#include "orbitinv/dynamics.hpp"

namespace orbitinv {

/// The line y = offset, crossed with sign(r) == direction.
struct SectionSpec {
  double offset = 0.0;
  int direction = +1;
};

/// Transversal crossings of the section in [t_begin, t_end), polished on the
/// dense output to |y - offset| <= 1e-10. Grazing contacts are skipped.
std::vector<PhaseState> find_crossings(const Trajectory& traj, const SectionSpec& section);

struct ToneEstimate {
  double frequency = 0.0;  // angular
  double confidence = 0.0;
};

/// Dominant angular frequency of uniformly spaced samples: Hann window,
/// quadratic interpolation of the log-magnitude peak, then a local maximisation
/// of the windowed transform magnitude.
ToneEstimate estimate_tone(std::span<const double> samples, double dt);

struct FrequencyEstimate {
  double f1 = 0.0;  // dominant angular frequency of x(t)
  double f2 = 0.0;  // dominant angular frequency of y(t)
  double confidence1 = 0.0;
  double confidence2 = 0.0;

  double confidence() const { return confidence1 < confidence2 ? confidence1 : confidence2; }
};

/// samples must be a power of two >= 1024.
FrequencyEstimate estimate_frequencies(const Trajectory& traj, std::size_t samples);

/// Periodic(m, n, T) means T = n T1 = m T2, T1 = 2 pi / f1, T2 = 2 pi / f2,
/// with gcd(m, n) = 1. Hence f1 / f2 ~ n / m.
struct ResonanceLabel {
  enum class Kind { Periodic, QuasiPeriodic };
  Kind kind = Kind::QuasiPeriodic;
  unsigned m = 0;
  unsigned n = 0;
  double period = 0.0;

  bool periodic() const { return kind == Kind::Periodic; }
};

/// Walks the continued-fraction convergents of f1/f2 and returns the first
/// (smallest denominator, at most max_den) within tol.
ResonanceLabel classify(const FrequencyEstimate& freqs, unsigned max_den, double tol);

struct PeriodicOrbit {
  PhaseState initial;
  double period = 0.0;
  double closure = 0.0;  // max-norm of Phi_T(s) - s
  Trajectory one_period;
  ClosedCurve curve;
  bool self_intersecting = false;
  std::size_t iterations = 0;
  std::optional<ResonanceLabel> label;
};

class OrbitNotFound : public std::runtime_error {
 public:
  OrbitNotFound(const std::string& message, double best_closure);
  double best_closure() const noexcept { return best_closure_; }

 private:
  double best_closure_;
};

struct OrbitOptions {
  std::size_t max_iterations = 40;
  /// Iterates may move at most max_drift * (1 + |seed|_inf) from the seed.
  double max_drift = 0.25;
  std::size_t curve_vertices = 4096;
};

/// Newton shooting on Phi_T(s) - s. The section y = seed.y, crossed in the
/// direction of seed.r, pins the phase; the return time nearest seed_period
/// defines T. Steps use the Jacobian pseudo-inverse, so continuous families
/// of periodic orbits (rank-deficient Jacobians) converge to a nearby member.
/// A seed with r ~ 0 falls back to shooting with T as an explicit unknown.
///
/// Throws OrbitNotFound; IntegrationError escapes from the flow map.
PeriodicOrbit refine_orbit(const SystemSpec& spec, const PhaseState& seed, double seed_period,
                           const IntegratorConfig& cfg, double orbit_tol,
                           const OrbitOptions& options = {});

/// Closed curve through the (x, y) projection of one period.
ClosedCurve project_curve(const Trajectory& one_period, std::size_t vertices);

}  // namespace orbitinv
