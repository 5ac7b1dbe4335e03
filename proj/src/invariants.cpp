#include "orbitinv/invariants.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <stdexcept>

namespace orbitinv {

double pairwise_sum(const double* data, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

// ---------------------------------------------------------------------------
// Time form

SignedIntegral time_integral(const SystemSpec& spec, const Trajectory& traj) {
  using Quad = boost::math::quadrature::gauss<double, 5>;
  SignedIntegral out;
  if (spec.stream().is_zero()) return out;
  const ScalarField& px = spec.stream_x();
  const ScalarField& py = spec.stream_y();
  for (const auto& step : traj.steps()) {
    auto integrand = [&](double t) {
      const StateVec s = step.at(t);
      return px(s[0], s[1]) * s[3] - py(s[0], s[1]) * s[2];
    };
    out.value += Quad::integrate(integrand, step.t0, step.t1);
    out.absolute += Quad::integrate([&](double t) { return std::abs(integrand(t)); }, step.t0, step.t1);
  }
  return out;
}

SignedIntegral time_integral(const SystemSpec& spec, const PeriodicOrbit& orbit) {
  return time_integral(spec, orbit.one_period);
}

// ---------------------------------------------------------------------------
// Contour form

namespace {

SignedIntegral contour(const ScalarField& px, const ScalarField& py, const ClosedCurve& curve) {
  using Quad = boost::math::quadrature::gauss<double, 4>;
  SignedIntegral out;
  const auto& v = curve.vertices();
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const Point2 a = v[i];
    const double dx = v[i + 1].x - a.x;
    const double dy = v[i + 1].y - a.y;
    auto form = [&](double s) {
      const double x = a.x + s * dx;
      const double y = a.y + s * dy;
      return px(x, y) * dy - py(x, y) * dx;
    };
    out.value += Quad::integrate(form, 0.0, 1.0);
    out.absolute += Quad::integrate([&](double s) { return std::abs(form(s)); }, 0.0, 1.0);
  }
  return out;
}

}  // namespace

SignedIntegral line_integral(const ScalarField& psi, const ClosedCurve& curve) {
  auto [px, py] = grad(psi);
  return contour(px, py, curve);
}

SignedIntegral line_integral(const SystemSpec& spec, const ClosedCurve& curve) {
  if (spec.stream().is_zero()) return {};
  return contour(spec.stream_x(), spec.stream_y(), curve);
}

// ---------------------------------------------------------------------------
// Area form

WindingGrid::WindingGrid(const ClosedCurve& curve, std::size_t resolution)
    : nx_(resolution), ny_(resolution) {
  if (resolution < 1) throw std::invalid_argument("WindingGrid: resolution must be positive");
  const Box& b = curve.bounds();
  const double wx = std::max(b.xmax - b.xmin, 1e-12);
  const double wy = std::max(b.ymax - b.ymin, 1e-12);
  box_ = {b.xmin - 0.05 * wx, b.xmax + 0.05 * wx, b.ymin - 0.05 * wy, b.ymax + 0.05 * wy};
  dx_ = (box_.xmax - box_.xmin) / static_cast<double>(nx_);
  dy_ = (box_.ymax - box_.ymin) / static_cast<double>(ny_);
  winding_.assign(nx_ * ny_, 0);
  samples_.resize(nx_ * ny_);

  const auto& v = curve.vertices();
  const std::size_t nseg = v.size() - 1;
  struct Crossing {
    double x;
    int delta;
  };
  std::vector<Crossing> crossings;
  std::vector<int> suffix;
  std::vector<char> suspect(nx_);

  for (std::size_t j = 0; j < ny_; ++j) {
    const double yc = box_.ymin + (static_cast<double>(j) + 0.5) * dy_;
    crossings.clear();
    std::fill(suspect.begin(), suspect.end(), 0);

    for (std::size_t s = 0; s < nseg; ++s) {
      const Point2 a = v[s];
      const Point2 c = v[s + 1];
      const bool up = a.y <= yc && c.y > yc;
      const bool down = c.y <= yc && a.y > yc;
      if (up || down) {
        const double xc = a.x + (yc - a.y) * (c.x - a.x) / (c.y - a.y);
        crossings.push_back({xc, up ? +1 : -1});
      }
      // Cells whose centre may sit within tolerance of this segment.
      const double tol = kOnCurveTolerance;
      if (std::min(a.y, c.y) - tol <= yc && yc <= std::max(a.y, c.y) + tol) {
        double xlo = std::min(a.x, c.x);
        double xhi = std::max(a.x, c.x);
        if (std::abs(c.y - a.y) > tol) {
          const double t0 = std::clamp((yc - tol - a.y) / (c.y - a.y), 0.0, 1.0);
          const double t1 = std::clamp((yc + tol - a.y) / (c.y - a.y), 0.0, 1.0);
          xlo = std::min(a.x + t0 * (c.x - a.x), a.x + t1 * (c.x - a.x));
          xhi = std::max(a.x + t0 * (c.x - a.x), a.x + t1 * (c.x - a.x));
        }
        const double f0 = (xlo - tol - box_.xmin) / dx_ - 0.5;
        const double f1 = (xhi + tol - box_.xmin) / dx_ - 0.5;
        const long i0 = std::max(0L, static_cast<long>(std::ceil(f0)));
        const long i1 = std::min(static_cast<long>(nx_) - 1, static_cast<long>(std::floor(f1)));
        for (long i = i0; i <= i1; ++i) suspect[static_cast<std::size_t>(i)] = 1;
      }
    }

    std::sort(crossings.begin(), crossings.end(),
              [](const Crossing& l, const Crossing& r) { return l.x < r.x; });
    suffix.assign(crossings.size() + 1, 0);
    for (std::size_t k = crossings.size(); k-- > 0;) suffix[k] = suffix[k + 1] + crossings[k].delta;

    std::size_t first_right = 0;  // first crossing strictly right of the centre
    for (std::size_t i = 0; i < nx_; ++i) {
      const Point2 c = center(i, j);
      while (first_right < crossings.size() && crossings[first_right].x <= c.x) ++first_right;
      int w = suffix[first_right];
      Point2 at = c;
      if (suspect[i]) {
        auto exact = winding_number(curve, c);
        // Deterministic nudge along +x, +y by half a cell diagonal, then smaller.
        for (double f = 0.5; !exact && f > 1e-6; f *= 0.5) {
          at = {c.x + f * dx_, c.y + f * dy_};
          exact = winding_number(curve, at);
        }
        if (!exact) throw std::runtime_error("WindingGrid: could not move a cell sample off the curve");
        if (at.x != c.x || at.y != c.y) ++perturbed_;
        w = *exact;
      }
      winding_[j * nx_ + i] = w;
      samples_[j * nx_ + i] = at;
    }
  }
}

Point2 WindingGrid::center(std::size_t i, std::size_t j) const {
  return {box_.xmin + (static_cast<double>(i) + 0.5) * dx_,
          box_.ymin + (static_cast<double>(j) + 0.5) * dy_};
}

namespace {

SignedIntegral area(const ScalarField& lap, const ClosedCurve& curve, std::size_t resolution) {
  if (resolution < 32) throw std::invalid_argument("area_integral: resolution must be >= 32");
  if (lap.is_zero()) return {};
  const WindingGrid grid(curve, resolution);
  const double cell = grid.dx() * grid.dy();
  std::vector<double> signed_terms(grid.nx() * grid.ny(), 0.0);
  std::vector<double> abs_terms(signed_terms.size(), 0.0);
  for (std::size_t j = 0; j < grid.ny(); ++j) {
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const int w = grid.winding(i, j);
      if (w == 0) continue;
      const Point2 c = grid.center(i, j);
      const double term = static_cast<double>(w) * lap(c.x, c.y) * cell;
      signed_terms[j * grid.nx() + i] = term;
      abs_terms[j * grid.nx() + i] = std::abs(term);
    }
  }
  return {pairwise_sum(signed_terms.data(), signed_terms.size()),
          pairwise_sum(abs_terms.data(), abs_terms.size())};
}

}  // namespace

SignedIntegral area_integral(const ScalarField& psi, const ClosedCurve& curve, std::size_t resolution) {
  return area(laplacian(psi), curve, resolution);
}

SignedIntegral area_integral(const SystemSpec& spec, const ClosedCurve& curve, std::size_t resolution) {
  return area(spec.stream_laplacian(), curve, resolution);
}

// ---------------------------------------------------------------------------

InvariantReport report(const SystemSpec& spec, const PeriodicOrbit& orbit, std::size_t resolution,
                       double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("report: tolerance must be positive");
  const SignedIntegral t = time_integral(spec, orbit);
  const SignedIntegral l = line_integral(spec, orbit.curve);
  const SignedIntegral a = area_integral(spec, orbit.curve, resolution);

  InvariantReport rep;
  rep.I7 = t.value;
  rep.N7 = t.absolute;
  rep.I8 = l.value;
  rep.N8 = l.absolute;
  rep.I9 = a.value;
  rep.N9 = a.absolute;
  rep.residual_78 = std::abs(rep.I7 - rep.I8);
  rep.residual_89 = std::abs(rep.I8 - rep.I9);
  rep.tolerance = tol;
  rep.resolution = resolution;
  rep.holds_time = std::abs(rep.I7) <= tol * std::max(rep.N7, kNormalizerFloor);
  rep.holds_contour = std::abs(rep.I8) <= tol * std::max(rep.N8, kNormalizerFloor);
  rep.holds = rep.holds_time && rep.holds_contour;
  rep.self_intersecting = orbit.curve.self_intersecting();
  rep.period = orbit.period;
  rep.closure = orbit.closure;
  return rep;
}

}  // namespace orbitinv
