#include "orbitinv/resonance.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <complex>
#include <numbers>

#include "fft.hpp"

namespace orbitinv {

// ---------------------------------------------------------------------------
// Section crossings

namespace {

constexpr double kCrossingTolerance = 1e-10;
constexpr double kGrazingSpeed = 1e-8;

std::optional<double> polish_root(const Trajectory::Step& step, double offset) {
  auto g = [&](double t) { return step.at(t)[1] - offset; };
  const double g0 = g(step.t0);
  const double g1 = g(step.t1);
  if (g0 == 0.0) return step.t0;
  if (g1 == 0.0) return step.t1;
  std::uintmax_t iters = 100;
  auto tol = [&](double a, double b) { return std::abs(b - a) <= 4e-16 * std::max(1.0, std::abs(a)); };
  auto [a, b] = boost::math::tools::toms748_solve(g, step.t0, step.t1, g0, g1, tol, iters);
  const double t = std::abs(g(a)) <= std::abs(g(b)) ? a : b;
  if (std::abs(g(t)) > kCrossingTolerance) return std::nullopt;
  return t;
}

}  // namespace

std::vector<PhaseState> find_crossings(const Trajectory& traj, const SectionSpec& section) {
  if (section.direction != 1 && section.direction != -1) {
    throw std::invalid_argument("SectionSpec: direction must be +1 or -1");
  }
  std::vector<PhaseState> out;
  const double c = section.offset;
  const int dir = section.direction;
  const double t_stop = traj.t_end() - 1e-9 * std::max(1.0, std::abs(traj.t_end()));

  auto accept = [&](const PhaseState& s) {
    if (s.t >= t_stop) return;
    if (std::abs(s.r) <= kGrazingSpeed) return;
    if ((s.r > 0.0 ? 1 : -1) != dir) return;
    out.push_back(s);
  };

  const PhaseState& start = traj.front();
  if (std::abs(start.y - c) <= kCrossingTolerance) accept(start);

  for (const auto& step : traj.steps()) {
    const double g0 = step.y0[1] - c;
    const double g1 = step.y1[1] - c;
    const bool crosses = dir > 0 ? (g0 < 0.0 && g1 >= 0.0) : (g0 > 0.0 && g1 <= 0.0);
    if (!crosses) continue;
    if (auto t = polish_root(step, c)) accept(PhaseState::from(step.at(*t), *t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Frequencies

ToneEstimate estimate_tone(std::span<const double> samples, double dt) {
  const std::size_t n = samples.size();
  if (n < 8) throw std::invalid_argument("estimate_tone: need at least 8 samples");
  if (!(dt > 0.0)) throw std::invalid_argument("estimate_tone: dt must be positive");

  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(n);
  double spread = 0.0;
  for (double v : samples) spread = std::max(spread, std::abs(v - mean));
  if (spread <= 1e-12 * std::max(1.0, std::abs(mean))) return {};

  std::vector<double> windowed(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n)));
    windowed[k] = w * (samples[k] - mean);
  }

  std::vector<std::complex<double>> spec;
  {
    detail::RealFft fft(1, n);
    spec = fft.forward(windowed);
  }
  const std::size_t half = n / 2;
  std::vector<double> mag(half + 1);
  for (std::size_t k = 0; k <= half; ++k) mag[k] = std::abs(spec[k]);

  std::size_t peak = 1;
  for (std::size_t k = 1; k < half; ++k) {
    if (mag[k] > mag[peak]) peak = k;
  }
  if (mag[peak] <= 0.0) return {};

  double side = 0.0;
  for (std::size_t k = 1; k <= half; ++k) {
    if (k + 3 < peak || k > peak + 3) side = std::max(side, mag[k]);
  }

  // Log-magnitude parabola through the peak bin and its neighbours.
  double bin = static_cast<double>(peak);
  {
    const double tiny = 1e-300;
    const double a = std::log(std::max(mag[peak - 1], tiny));
    const double b = std::log(std::max(mag[peak], tiny));
    const double c = std::log(std::max(mag[peak + 1], tiny));
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) bin += std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
  }

  // Polish on the continuous windowed transform.
  auto neg_magnitude = [&](double b) {
    const double theta = -2.0 * std::numbers::pi * b / static_cast<double>(n);
    const std::complex<double> step = std::polar(1.0, theta);
    std::complex<double> phase = 1.0;
    std::complex<double> acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      acc += windowed[k] * phase;
      phase *= step;
      if ((k & 255) == 255) phase = std::polar(1.0, theta * static_cast<double>(k + 1));
    }
    return -std::abs(acc);
  };
  const double lo = std::max(0.5, bin - 0.5);
  const double hi = std::min(static_cast<double>(half) - 0.5, bin + 0.5);
  if (lo < hi) {
    std::uintmax_t iters = 200;
    bin = boost::math::tools::brent_find_minima(neg_magnitude, lo, hi, 48, iters).first;
  }

  ToneEstimate out;
  out.frequency = 2.0 * std::numbers::pi * bin / (static_cast<double>(n) * dt);
  out.confidence = bin < 2.0 ? 0.0 : std::clamp(1.0 - side / mag[peak], 0.0, 1.0);
  return out;
}

FrequencyEstimate estimate_frequencies(const Trajectory& traj, std::size_t samples) {
  if (samples < 1024 || (samples & (samples - 1)) != 0) {
    throw std::invalid_argument("estimate_frequencies: samples must be a power of two >= 1024");
  }
  if (traj.empty()) throw std::invalid_argument("estimate_frequencies: empty trajectory");
  const double dt = (traj.t_end() - traj.t_begin()) / static_cast<double>(samples);
  std::vector<double> xs(samples), ys(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    const PhaseState s = traj.at(traj.t_begin() + static_cast<double>(k) * dt);
    xs[k] = s.x;
    ys[k] = s.y;
  }
  const ToneEstimate tx = estimate_tone(xs, dt);
  const ToneEstimate ty = estimate_tone(ys, dt);
  return {tx.frequency, ty.frequency, tx.confidence, ty.confidence};
}

ResonanceLabel classify(const FrequencyEstimate& freqs, unsigned max_den, double tol) {
  if (max_den < 1) throw std::invalid_argument("classify: max_den must be >= 1");
  if (!(freqs.confidence() > 0.0) || !(freqs.f1 > 0.0) || !(freqs.f2 > 0.0)) {
    throw std::invalid_argument("classify: both frequencies need positive confidence");
  }
  const double ratio = freqs.f1 / freqs.f2;

  // Convergents h/k of the continued fraction of ratio.
  double x = ratio;
  double h_prev = 1.0, h_prev2 = 0.0;
  double k_prev = 0.0, k_prev2 = 1.0;
  for (int iter = 0; iter < 64; ++iter) {
    const double a = std::floor(x);
    const double h = a * h_prev + h_prev2;
    const double k = a * k_prev + k_prev2;
    if (k > static_cast<double>(max_den)) break;
    if (h > 0.0 && std::abs(ratio - h / k) <= tol) {
      ResonanceLabel label;
      label.kind = ResonanceLabel::Kind::Periodic;
      label.n = static_cast<unsigned>(h);
      label.m = static_cast<unsigned>(k);
      label.period = 2.0 * std::numbers::pi * h / freqs.f1;
      return label;
    }
    const double frac = x - a;
    if (frac < 1e-15) break;
    x = 1.0 / frac;
    h_prev2 = h_prev;
    h_prev = h;
    k_prev2 = k_prev;
    k_prev = k;
  }
  return {};
}

// ---------------------------------------------------------------------------
// Shooting

OrbitNotFound::OrbitNotFound(const std::string& message, double best_closure)
    : std::runtime_error(message), best_closure_(best_closure) {}

ClosedCurve project_curve(const Trajectory& one_period, std::size_t vertices) {
  if (vertices < 3) throw std::invalid_argument("project_curve: need at least 3 vertices");
  std::vector<Point2> pts;
  pts.reserve(vertices);
  const double a = one_period.t_begin();
  const double span = one_period.t_end() - a;
  for (std::size_t k = 0; k < vertices; ++k) {
    const PhaseState s = one_period.at(a + span * static_cast<double>(k) / static_cast<double>(vertices));
    pts.push_back({s.x, s.y});
  }
  return ClosedCurve(std::move(pts));
}

namespace {

double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Minimum-norm least-squares solution of J d = rhs from the `keep` largest
// singular directions.
Eigen::VectorXd truncated_solve(const Eigen::JacobiSVD<Eigen::MatrixXd>& svd, const Eigen::VectorXd& rhs,
                                Eigen::Index keep) {
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  // Finite-difference Jacobians carry ~1e-6 noise; treat such directions as null.
  const double cut = std::max(1e-8 * smax, 1e-5);
  Eigen::VectorXd coeff = svd.matrixU().transpose() * rhs;
  for (Eigen::Index i = 0; i < sv.size(); ++i) coeff(i) = (i < keep && sv(i) > cut) ? coeff(i) / sv(i) : 0.0;
  return svd.matrixV() * coeff;
}

struct Evaluation {
  Eigen::VectorXd residual;
  double closure = 0.0;
  double period = 0.0;
  StateVec end{};
};

// Unknowns z map to a start state and a period; the residual is driven to zero.
class ShootingProblem {
 public:
  virtual ~ShootingProblem() = default;
  virtual StateVec state(const Eigen::VectorXd& z) const = 0;
  virtual std::optional<Evaluation> evaluate(const Eigen::VectorXd& z) const = 0;
};

// Section-pinned variant: z = (x, p, r), y fixed to the section offset.
class SectionShooting final : public ShootingProblem {
 public:
  SectionShooting(const SystemSpec& spec, const IntegratorConfig& cfg, SectionSpec section,
                  double seed_period)
      : spec_(spec), cfg_(cfg), section_(section), seed_period_(seed_period) {}

  StateVec state(const Eigen::VectorXd& z) const override {
    return {z(0), section_.offset, z(1), z(2)};
  }

  std::optional<Evaluation> evaluate(const Eigen::VectorXd& z) const override {
    const StateVec s = state(z);
    const Trajectory traj = integrate(spec_, PhaseState::from(s, 0.0), 1.5 * seed_period_, cfg_);
    const auto hits = find_crossings(traj, section_);
    const PhaseState* best = nullptr;
    for (const auto& h : hits) {
      if (h.t <= 0.1 * seed_period_) continue;
      if (best == nullptr || std::abs(h.t - seed_period_) < std::abs(best->t - seed_period_)) best = &h;
    }
    if (best == nullptr) return std::nullopt;
    Evaluation ev;
    ev.period = best->t;
    ev.end = best->vec();
    ev.residual.resize(3);
    ev.residual << ev.end[0] - s[0], ev.end[2] - s[2], ev.end[3] - s[3];
    ev.closure = std::max(max_abs(ev.residual), std::abs(ev.end[1] - s[1]));
    return ev;
  }

 private:
  const SystemSpec& spec_;
  IntegratorConfig cfg_;
  SectionSpec section_;
  double seed_period_;
};

// General variant: z = (x, y, p, r, T) with the phase anchored on the plane
// through the seed orthogonal to the seed's velocity in phase space.
class FreeShooting final : public ShootingProblem {
 public:
  FreeShooting(const SystemSpec& spec, const IntegratorConfig& cfg, const PhaseState& seed)
      : spec_(spec), cfg_(cfg), anchor_(seed.vec()), anchor_dir_(rhs(spec, seed)) {}

  StateVec state(const Eigen::VectorXd& z) const override { return {z(0), z(1), z(2), z(3)}; }

  std::optional<Evaluation> evaluate(const Eigen::VectorXd& z) const override {
    const double T = z(4);
    if (!(T > 0.0)) return std::nullopt;
    const StateVec s = state(z);
    const Trajectory traj = integrate(spec_, PhaseState::from(s, 0.0), T, cfg_);
    Evaluation ev;
    ev.period = T;
    ev.end = traj.back().vec();
    ev.residual.resize(5);
    double phase = 0.0;
    for (int i = 0; i < 4; ++i) {
      ev.residual(i) = ev.end[i] - s[i];
      phase += (s[i] - anchor_[i]) * anchor_dir_[i];
    }
    ev.residual(4) = phase;
    ev.closure = max_abs(ev.residual.head(4));
    return ev;
  }

 private:
  const SystemSpec& spec_;
  IntegratorConfig cfg_;
  StateVec anchor_;
  StateVec anchor_dir_;
};

struct NewtonResult {
  Eigen::VectorXd z;
  Evaluation eval;
  std::size_t iterations = 0;
};

NewtonResult newton(const ShootingProblem& problem, Eigen::VectorXd z, const StateVec& seed,
                    double fd_step, double orbit_tol, const OrbitOptions& opt) {
  double seed_scale = 0.0;
  for (double v : seed) seed_scale = std::max(seed_scale, std::abs(v));
  const double radius = opt.max_drift * (1.0 + seed_scale);
  auto drift = [&](const Eigen::VectorXd& cand) {
    const StateVec s = problem.state(cand);
    double d = 0.0;
    for (int i = 0; i < 4; ++i) d = std::max(d, std::abs(s[i] - seed[i]));
    return d;
  };

  auto ev = problem.evaluate(z);
  if (!ev) throw OrbitNotFound("seed trajectory never returns to its section", INFINITY);

  for (std::size_t it = 0;; ++it) {
    if (ev->closure <= orbit_tol) return {z, *ev, it};
    if (it >= opt.max_iterations) {
      throw OrbitNotFound("no convergence after " + std::to_string(it) + " iterations", ev->closure);
    }

    const Eigen::Index n = z.size();
    Eigen::MatrixXd J(ev->residual.size(), n);
    for (Eigen::Index j = 0; j < n; ++j) {
      Eigen::VectorXd zp = z;
      const double h = fd_step * (1.0 + std::abs(z(j)));
      zp(j) += h;
      auto evp = problem.evaluate(zp);
      if (!evp) throw OrbitNotFound("return map undefined near iterate", ev->closure);
      J.col(j) = (evp->residual - ev->residual) / h;
    }

    // Full Gauss-Newton step first. Near-degenerate families (isochronous
    // systems) leave small but nonzero singular values whose directions are
    // dominated by curvature; dropping them one at a time recovers a step.
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
    bool improved = false;
    bool inside = false;
    for (Eigen::Index keep = svd.singularValues().size(); keep > 0 && !improved; --keep) {
      const Eigen::VectorXd step = -truncated_solve(svd, ev->residual, keep);
      if (drift(z + step) > radius) continue;
      inside = true;
      double lambda = 1.0;
      for (int ls = 0; ls < 8 && !improved; ++ls, lambda *= 0.5) {
        const Eigen::VectorXd cand = z + lambda * step;
        auto evc = problem.evaluate(cand);
        if (evc && evc->closure < ev->closure) {
          z = cand;
          ev = std::move(evc);
          improved = true;
        }
      }
    }
    if (!inside) {
      throw OrbitNotFound("no convergence: Newton step leaves the neighbourhood of the seed",
                          ev->closure);
    }
    if (!improved) throw OrbitNotFound("no convergence: closure stagnates", ev->closure);
  }
}

}  // namespace

PeriodicOrbit refine_orbit(const SystemSpec& spec, const PhaseState& seed, double seed_period,
                           const IntegratorConfig& cfg, double orbit_tol,
                           const OrbitOptions& options) {
  if (!(seed_period > 0.0)) throw std::invalid_argument("refine_orbit: seed period must be positive");
  if (!(orbit_tol > 0.0)) throw std::invalid_argument("refine_orbit: orbit tolerance must be positive");
  cfg.validate();

  PhaseState start = seed;
  start.t = 0.0;
  const StateVec seed_vec = start.vec();
  const double fd_step = std::max(std::sqrt(cfg.rtol), 1e-7);

  double seed_scale = 0.0;
  for (double v : seed_vec) seed_scale = std::max(seed_scale, std::abs(v));

  NewtonResult result;
  bool solved = false;
  if (std::abs(start.r) > 1e-6 * (1.0 + seed_scale)) {
    SectionShooting problem(spec, cfg, {start.y, start.r > 0.0 ? 1 : -1}, seed_period);
    Eigen::VectorXd z(3);
    z << start.x, start.p, start.r;
    try {
      result = newton(problem, z, seed_vec, fd_step, orbit_tol, options);
      solved = true;
    } catch (const OrbitNotFound& e) {
      // Only a missing section return warrants the general formulation.
      if (std::isfinite(e.best_closure())) throw;
    }
    if (solved) {
      const StateVec s = problem.state(result.z);
      start = PhaseState::from(s, 0.0);
    }
  }
  if (!solved) {
    FreeShooting problem(spec, cfg, start);
    Eigen::VectorXd z(5);
    z << start.x, start.y, start.p, start.r, seed_period;
    result = newton(problem, z, seed_vec, fd_step, orbit_tol, options);
    start = PhaseState::from(problem.state(result.z), 0.0);
  }

  Trajectory one_period = integrate(spec, start, result.eval.period, cfg);
  ClosedCurve curve = project_curve(one_period, options.curve_vertices);
  const bool crossing = curve.self_intersecting();
  return PeriodicOrbit{start,          result.eval.period, result.eval.closure,
                       std::move(one_period), std::move(curve), crossing,
                       result.iterations,     std::nullopt};
}

}  // namespace orbitinv
