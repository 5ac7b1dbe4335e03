#include "orbitinv/dynamics.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <ostream>

#include "orbitinv/number_format.hpp"

namespace orbitinv {

bool PhaseState::finite() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(p) && std::isfinite(r) &&
         std::isfinite(t);
}

SystemSpec::SystemSpec(std::string name, ScalarField potential, ScalarField stream)
    : name_(std::move(name)), U_(std::move(potential)), psi_(std::move(stream)) {
  std::tie(U_x_, U_y_) = grad(U_);
  std::tie(psi_x_, psi_y_) = grad(psi_);
  psi_lap_ = laplacian(psi_);
}

SystemSpec SystemSpec::from_text(std::string name, std::string_view potential,
                                 std::string_view stream, const ParameterMap& params) {
  // Each field keeps only the parameters it uses.
  auto field = [&](std::string_view text) {
    Expr e = parse(text);
    ParameterMap used;
    for (const auto& p : e.parameters()) {
      if (auto it = params.find(p); it != params.end()) used.emplace(p, it->second);
    }
    return ScalarField(std::move(e), std::move(used));
  };
  return SystemSpec(std::move(name), field(potential), field(stream));
}

Force force(const SystemSpec& spec, double x, double y) {
  return {-spec.potential_x()(x, y) + spec.stream_y()(x, y),
          -spec.potential_y()(x, y) - spec.stream_x()(x, y)};
}

StateVec rhs(const SystemSpec& spec, const PhaseState& s) {
  const Force f = force(spec, s.x, s.y);
  return {s.p, s.r, f.fx, f.fy};
}

double energy(const SystemSpec& spec, const PhaseState& s) {
  return 0.5 * (s.p * s.p + s.r * s.r) + spec.potential()(s.x, s.y);
}

double power(const SystemSpec& spec, const PhaseState& s) {
  if (spec.stream().is_zero()) return 0.0;
  return spec.stream_y()(s.x, s.y) * s.p - spec.stream_x()(s.x, s.y) * s.r;
}

void IntegratorConfig::validate() const {
  if (!(rtol > 0.0 && rtol < 1.0)) throw std::invalid_argument("rtol must lie in (0, 1)");
  if (!(atol > 0.0 && atol < 1.0)) throw std::invalid_argument("atol must lie in (0, 1)");
  if (!(initial_step >= 0.0)) throw std::invalid_argument("initial_step must be >= 0");
  if (!(max_step > 0.0)) throw std::invalid_argument("max_step must be > 0");
  if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
}

IntegrationError::IntegrationError(Kind kind, double t, const std::string& message)
    : std::runtime_error(message), kind_(kind), t_(t) {}

// ---------------------------------------------------------------------------
// Trajectory

StateVec Trajectory::Step::at(double t) const {
  const double s = (t - t0) / (t1 - t0);
  const double s1 = 1.0 - s;
  StateVec out;
  for (int i = 0; i < 4; ++i) {
    out[i] = y0[i] + s * (d[i] + s1 * (c3[i] + s * (c4[i] + s1 * c5[i])));
  }
  return out;
}

Trajectory::Trajectory(PhaseState start, std::vector<Step> steps, IntegratorStats stats)
    : start_(start), steps_(std::move(steps)), stats_(stats) {}

PhaseState Trajectory::back() const {
  if (steps_.empty()) return start_;
  return PhaseState::from(steps_.back().y1, steps_.back().t1);
}

std::size_t Trajectory::locate(double t) const {
  auto it = std::upper_bound(steps_.begin(), steps_.end(), t,
                             [](double v, const Step& s) { return v < s.t1; });
  if (it == steps_.end()) return steps_.size() - 1;
  return static_cast<std::size_t>(it - steps_.begin());
}

PhaseState Trajectory::at(double t) const {
  if (steps_.empty() || t <= t_begin()) return start_;
  if (t >= t_end()) return back();
  const Step& s = steps_[locate(t)];
  return PhaseState::from(s.at(t), t);
}

std::vector<PhaseState> Trajectory::sample(std::size_t n) const {
  std::vector<PhaseState> out;
  out.reserve(n + 1);
  const double a = t_begin();
  const double span = t_end() - a;
  for (std::size_t k = 0; k <= n; ++k) {
    out.push_back(k == n ? back() : at(a + span * static_cast<double>(k) / static_cast<double>(n)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)

namespace {

namespace dp {
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
// 5th minus 4th order weights
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// continuous extension
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
}  // namespace dp

class Stepper {
 public:
  Stepper(const SystemSpec& spec, IntegratorStats& stats) : spec_(spec), stats_(stats) {}

  // False when a field is undefined somewhere inside the stage set.
  bool f(const StateVec& y, StateVec& out) {
    ++stats_.evaluations;
    try {
      const Force fr = force(spec_, y[0], y[1]);
      out = {y[2], y[3], fr.fx, fr.fy};
    } catch (const DomainErrorException&) {
      return false;
    }
    for (double v : out) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

 private:
  const SystemSpec& spec_;
  IntegratorStats& stats_;
};

template <class F>
StateVec combine(const StateVec& y, double h, F&& weights) {
  StateVec out;
  for (int i = 0; i < 4; ++i) out[i] = y[i] + h * weights(i);
  return out;
}

double rms_norm(const StateVec& v, const StateVec& scale) {
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) acc += (v[i] / scale[i]) * (v[i] / scale[i]);
  return std::sqrt(acc / 4.0);
}

double initial_step(Stepper& st, const StateVec& y0, const StateVec& f0, double span,
                    const IntegratorConfig& cfg) {
  StateVec sc;
  for (int i = 0; i < 4; ++i) sc[i] = cfg.atol + cfg.rtol * std::abs(y0[i]);
  const double d0 = rms_norm(y0, sc);
  const double d1 = rms_norm(f0, sc);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min({h0, span, cfg.max_step});
  StateVec y1 = combine(y0, h0, [&](int i) { return f0[i]; });
  StateVec f1;
  if (!st.f(y1, f1)) return h0 * 1e-3;
  StateVec diff;
  for (int i = 0; i < 4; ++i) diff[i] = f1[i] - f0[i];
  const double d2 = rms_norm(diff, sc) / h0;
  const double dm = std::max(d1, d2);
  const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
  return std::min({100.0 * h0, h1, span, cfg.max_step});
}

}  // namespace

Trajectory integrate(const SystemSpec& spec, const PhaseState& s0, double t_end,
                     const IntegratorConfig& cfg) {
  cfg.validate();
  if (!(t_end > s0.t)) throw std::invalid_argument("integrate: t_end must exceed start time");
  if (!s0.finite()) throw IntegrationError(IntegrationError::Kind::NonFinite, s0.t, "non-finite initial state");

  IntegratorStats stats;
  Stepper st(spec, stats);
  std::vector<Trajectory::Step> steps;

  StateVec y = s0.vec();
  StateVec k1;
  if (!st.f(y, k1)) {
    // Report the actual field failure at the initial state.
    (void)force(spec, y[0], y[1]);
    throw IntegrationError(IntegrationError::Kind::NonFinite, s0.t, "non-finite force at initial state");
  }

  double t = s0.t;
  double h = cfg.initial_step > 0.0 ? std::min(cfg.initial_step, t_end - t)
                                    : initial_step(st, y, k1, t_end - t, cfg);
  bool last_rejected = false;

  while (t < t_end) {
    if (steps.size() >= cfg.max_steps) {
      throw IntegrationError(IntegrationError::Kind::MaxSteps, t,
                             "maximum number of steps (" + std::to_string(cfg.max_steps) +
                                 ") exceeded at t=" + fmt17(t));
    }
    const double h_min = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    if (h < h_min) {
      throw IntegrationError(IntegrationError::Kind::StepUnderflow, t,
                             "step size underflow at t=" + fmt17(t));
    }
    h = std::min(h, cfg.max_step);
    bool final_step = false;
    if (t + h >= t_end || t_end - (t + h) < h_min) {
      h = t_end - t;
      final_step = true;
    }

    using namespace dp;
    StateVec k2, k3, k4, k5, k6, k7;
    StateVec y1;
    bool defined =
        st.f(combine(y, h, [&](int i) { return a21 * k1[i]; }), k2) &&
        st.f(combine(y, h, [&](int i) { return a31 * k1[i] + a32 * k2[i]; }), k3) &&
        st.f(combine(y, h, [&](int i) { return a41 * k1[i] + a42 * k2[i] + a43 * k3[i]; }), k4) &&
        st.f(combine(y, h,
                     [&](int i) { return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]; }),
             k5) &&
        st.f(combine(y, h,
                     [&](int i) {
                       return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i];
                     }),
             k6);
    if (defined) {
      y1 = combine(y, h, [&](int i) {
        return a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i];
      });
      defined = st.f(y1, k7);
    }
    if (!defined) {
      ++stats.rejected;
      last_rejected = true;
      h *= 0.2;
      continue;
    }

    double err = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = cfg.atol + cfg.rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
      err = std::max(err, std::abs(e) / sc);
    }
    if (!std::isfinite(err)) err = 1e10;

    if (err <= 1.0) {
      Trajectory::Step step;
      step.t0 = t;
      step.t1 = final_step ? t_end : t + h;
      step.y0 = y;
      step.y1 = y1;
      for (int i = 0; i < 4; ++i) {
        step.d[i] = y1[i] - y[i];
        step.c3[i] = h * k1[i] - step.d[i];
        step.c4[i] = step.d[i] - h * k7[i] - step.c3[i];
        step.c5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      steps.push_back(step);
      ++stats.steps;
      t = step.t1;
      y = y1;
      k1 = k7;
      double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (last_rejected) fac = std::min(fac, 1.0);
      last_rejected = false;
      h *= fac;
    } else {
      ++stats.rejected;
      last_rejected = true;
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
    }
  }
  return Trajectory(s0, std::move(steps), stats);
}

// ---------------------------------------------------------------------------

PowerIntegral integrate_power(const SystemSpec& spec, const Trajectory& traj) {
  using Quad = boost::math::quadrature::gauss<double, 5>;
  PowerIntegral out;
  if (spec.stream().is_zero()) return out;
  for (const auto& step : traj.steps()) {
    auto pw = [&](double t) { return power(spec, PhaseState::from(step.at(t), t)); };
    out.work += Quad::integrate(pw, step.t0, step.t1);
    out.absolute += Quad::integrate([&](double t) { return std::abs(pw(t)); }, step.t0, step.t1);
  }
  return out;
}

double energy_balance(const SystemSpec& spec, const Trajectory& traj) {
  if (traj.empty()) return 0.0;
  const double dH = energy(spec, traj.back()) - energy(spec, traj.front());
  return dH - integrate_power(spec, traj).work;
}

void write_trajectory_csv(std::ostream& os, const SystemSpec& spec, const Trajectory& traj,
                          double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("output dt must be positive");
  os << "t,x,y,p,r,H,power\n";
  auto row = [&](const PhaseState& s) {
    os << fmt17(s.t) << ',' << fmt17(s.x) << ',' << fmt17(s.y) << ',' << fmt17(s.p) << ','
       << fmt17(s.r) << ',' << fmt17(energy(spec, s)) << ',' << fmt17(power(spec, s)) << '\n';
  };
  const double a = traj.t_begin();
  const double b = traj.t_end();
  for (std::size_t k = 0;; ++k) {
    const double t = a + static_cast<double>(k) * dt;
    if (t >= b - 1e-9 * dt) break;
    row(traj.at(t));
  }
  row(traj.back());
}

}  // namespace orbitinv
