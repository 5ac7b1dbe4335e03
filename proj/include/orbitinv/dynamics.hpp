#pragma once

// Planar motion of a unit mass under F = -grad U + (psi_y, -psi_x):
//
//   x' = p,  p' = -U_x + psi_y,
//   y' = r,  r' = -U_y - psi_x.
//
// H = (p^2 + r^2)/2 + U is not conserved; dH/dt = psi_y p - psi_x r.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "orbitinv/scalar_field.hpp"

namespace orbitinv {

using StateVec = std::array<double, 4>;  // (x, y, p, r)

struct PhaseState {
  double x = 0.0;
  double y = 0.0;
  double p = 0.0;  // dx/dt
  double r = 0.0;  // dy/dt
  double t = 0.0;

  StateVec vec() const { return {x, y, p, r}; }
  static PhaseState from(const StateVec& v, double t) { return {v[0], v[1], v[2], v[3], t}; }
  bool finite() const;
};

class SystemSpec {
 public:
  SystemSpec(std::string name, ScalarField potential, ScalarField stream);

  static SystemSpec from_text(std::string name, std::string_view potential,
                              std::string_view stream, const ParameterMap& params = {});

  const std::string& name() const { return name_; }
  const ScalarField& potential() const { return U_; }
  const ScalarField& stream() const { return psi_; }
  const ScalarField& potential_x() const { return U_x_; }
  const ScalarField& potential_y() const { return U_y_; }
  const ScalarField& stream_x() const { return psi_x_; }
  const ScalarField& stream_y() const { return psi_y_; }
  const ScalarField& stream_laplacian() const { return psi_lap_; }

 private:
  std::string name_;
  ScalarField U_, psi_;
  ScalarField U_x_, U_y_, psi_x_, psi_y_, psi_lap_;
};

struct Force {
  double fx = 0.0;
  double fy = 0.0;
};

// These throw DomainErrorException when a field is undefined at (x, y).
Force force(const SystemSpec& spec, double x, double y);
StateVec rhs(const SystemSpec& spec, const PhaseState& s);
double energy(const SystemSpec& spec, const PhaseState& s);
double power(const SystemSpec& spec, const PhaseState& s);

struct IntegratorConfig {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0 selects automatically
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 1'000'000;

  /// Throws std::invalid_argument when out of range.
  void validate() const;
};

class IntegrationError : public std::runtime_error {
 public:
  enum class Kind { MaxSteps, StepUnderflow, NonFinite };
  IntegrationError(Kind kind, double t, const std::string& message);
  Kind kind() const noexcept { return kind_; }
  double time() const noexcept { return t_; }

 private:
  Kind kind_;
  double t_;
};

struct IntegratorStats {
  std::size_t steps = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
};

/// Accepted steps of a Dormand-Prince 5(4) run with their 4th-order
/// continuous extension.
class Trajectory {
 public:
  struct Step {
    double t0 = 0.0;
    double t1 = 0.0;
    StateVec y0{};
    StateVec y1{};
    // Continuous extension: y(t0 + s h) = y0 + s (d + (1-s)(c3 + s (c4 + (1-s) c5)))
    StateVec d{}, c3{}, c4{}, c5{};

    double h() const { return t1 - t0; }
    StateVec at(double t) const;
  };

  Trajectory() = default;
  Trajectory(PhaseState start, std::vector<Step> steps, IntegratorStats stats);

  bool empty() const { return steps_.empty(); }
  double t_begin() const { return start_.t; }
  double t_end() const { return steps_.empty() ? start_.t : steps_.back().t1; }
  const PhaseState& front() const { return start_; }
  PhaseState back() const;
  const std::vector<Step>& steps() const { return steps_; }
  const IntegratorStats& stats() const { return stats_; }

  /// Dense-output state, t clamped into [t_begin, t_end].
  PhaseState at(double t) const;

  /// n + 1 states at uniform spacing from t_begin to t_end inclusive.
  std::vector<PhaseState> sample(std::size_t n) const;

 private:
  std::size_t locate(double t) const;

  PhaseState start_;
  std::vector<Step> steps_;
  IntegratorStats stats_;
};

/// Integrates forward from s0 to t_end. Forces depend on position only, so
/// backward motion is obtained by negating p and r in s0.
Trajectory integrate(const SystemSpec& spec, const PhaseState& s0, double t_end,
                     const IntegratorConfig& cfg = {});

struct PowerIntegral {
  double work = 0.0;      // integral of power dt
  double absolute = 0.0;  // integral of |power| dt
};

/// Gauss-Legendre (5 nodes per accepted step) over the dense output.
PowerIntegral integrate_power(const SystemSpec& spec, const Trajectory& traj);

/// H(end) - H(start) - integral of power dt. Zero for exact solutions.
double energy_balance(const SystemSpec& spec, const Trajectory& traj);

/// CSV `t,x,y,p,r,H,power` sampled every dt (the last row lands on t_end).
void write_trajectory_csv(std::ostream& os, const SystemSpec& spec, const Trajectory& traj,
                          double dt);

}  // namespace orbitinv
