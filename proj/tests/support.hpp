#pragma once

// Closed-form oracles and generators shared by the unit and acceptance tests.

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "orbitinv/curve.hpp"
#include "orbitinv/dynamics.hpp"

namespace orbitinv::testing {

inline constexpr double kPi = std::numbers::pi;

// x'' = -w1^2 x, y'' = -w2^2 y from (x0, y0, p0, r0).
struct DecoupledOscillator {
  double w1, w2;
  PhaseState s0;

  PhaseState at(double t) const {
    const double c1 = std::cos(w1 * t), s1 = std::sin(w1 * t);
    const double c2 = std::cos(w2 * t), s2 = std::sin(w2 * t);
    return {s0.x * c1 + s0.p / w1 * s1, s0.y * c2 + s0.r / w2 * s2, -s0.x * w1 * s1 + s0.p * c1,
            -s0.y * w2 * s2 + s0.r * c2, t};
  }
};

inline ClosedCurve circle(std::size_t n, double radius = 1.0, bool ccw = true) {
  std::vector<Point2> v;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
    v.push_back({radius * std::cos(t), (ccw ? 1.0 : -1.0) * radius * std::sin(t)});
  }
  return ClosedCurve(v);
}

// (cos t, sin 2t): right lobe traversed counterclockwise, left lobe clockwise.
inline std::vector<Point2> lissajous_points(std::size_t n, double t0 = 0.0) {
  std::vector<Point2> v;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = t0 + 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
    v.push_back({std::cos(t), std::sin(2.0 * t)});
  }
  return v;
}

inline double shoelace(const std::vector<Point2>& open_polygon) {
  double a = 0.0;
  for (std::size_t k = 0; k < open_polygon.size(); ++k) {
    const Point2& p = open_polygon[k];
    const Point2& q = open_polygon[(k + 1) % open_polygon.size()];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * a;
}

// Signed shoelace areas of the two figure-eight lobes, split at the crossing
// (origin, t = pi/2 and 3pi/2). n must be divisible by 4.
inline std::pair<double, double> lissajous_lobe_areas(std::size_t n) {
  const auto pts = lissajous_points(n, -kPi / 2.0);
  std::vector<Point2> right(pts.begin(), pts.begin() + static_cast<long>(n / 2) + 1);
  std::vector<Point2> left(pts.begin() + static_cast<long>(n / 2), pts.end());
  left.push_back(pts.front());
  return {shoelace(right), shoelace(left)};
}

// Bounded random expressions over x, y for derivative checks.
class ExpressionGenerator {
 public:
  explicit ExpressionGenerator(unsigned seed) : rng_(seed) {}

  std::string next(int depth = 3) {
    if (depth == 0 || pick(4) == 0) return leaf();
    switch (pick(9)) {
      case 0: return "(" + next(depth - 1) + "+" + next(depth - 1) + ")";
      case 1: return "(" + next(depth - 1) + "-" + next(depth - 1) + ")";
      case 2:
      case 3: return "(" + next(depth - 1) + "*" + next(depth - 1) + ")";
      case 4: return "(" + next(depth - 1) + ")/(2+" + squared(depth - 1) + ")";
      case 5: return "(" + next(depth - 1) + ")^" + std::to_string(1 + pick(3));
      case 6: return "-" + atom(depth - 1);
      case 7: {
        static const char* fns[] = {"sin", "cos", "tanh", "exp"};
        return std::string(fns[pick(4)]) + "(" + next(depth - 1) + ")";
      }
      default: {
        // log and sqrt of arguments kept positive by construction
        static const char* fns[] = {"log", "sqrt"};
        return std::string(fns[pick(2)]) + "(1+" + squared(depth - 1) + ")";
      }
    }
  }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

 private:
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  std::string squared(int depth) { return "(" + next(depth) + ")^2"; }
  std::string atom(int depth) { return "(" + next(depth) + ")"; }
  std::string leaf() {
    switch (pick(3)) {
      case 0: return "x";
      case 1: return "y";
      default: {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", uniform(0.1, 2.0));
        return buf;
      }
    }
  }

  std::mt19937_64 rng_;
};

// Random polynomial of total degree <= 3 with coefficients in [-1, 1].
inline std::string random_cubic(std::mt19937_64& rng, double quad_diag_min = -1.0) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> diag(quad_diag_min, 1.0);
  const char* monomials[] = {"x", "y", "x^2", "x*y", "y^2", "x^3", "x^2*y", "x*y^2", "y^3"};
  std::string out;
  char buf[64];
  for (int k = 0; k < 9; ++k) {
    const bool is_diag = k == 2 || k == 4;
    const double c = is_diag ? diag(rng) : coef(rng);
    std::snprintf(buf, sizeof buf, "%s(%.6f)*%s", out.empty() ? "" : "+", c, monomials[k]);
    out += buf;
  }
  return out;
}

}  // namespace orbitinv::testing
