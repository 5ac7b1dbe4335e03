#include "orbitinv/curve.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace orbitinv {

namespace {

double cross(Point2 o, Point2 a, Point2 b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

bool on_segment(Point2 a, Point2 b, Point2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_touch(Point2 a, Point2 b, Point2 c, Point2 d) {
  const int d1 = sign(cross(c, d, a));
  const int d2 = sign(cross(c, d, b));
  const int d3 = sign(cross(a, b, c));
  const int d4 = sign(cross(a, b, d));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  if (d1 == 0 && on_segment(c, d, a)) return true;
  if (d2 == 0 && on_segment(c, d, b)) return true;
  if (d3 == 0 && on_segment(a, b, c)) return true;
  if (d4 == 0 && on_segment(a, b, d)) return true;
  return false;
}

}  // namespace

ClosedCurve::ClosedCurve(std::vector<Point2> vertices) {
  vertices_.reserve(vertices.size() + 1);
  for (const Point2& v : vertices) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
      throw std::invalid_argument("ClosedCurve: non-finite vertex");
    }
    if (!vertices_.empty() && vertices_.back().x == v.x && vertices_.back().y == v.y) continue;
    vertices_.push_back(v);
  }
  if (vertices_.size() >= 2) {
    const Point2 first = vertices_.front();
    const Point2 last = vertices_.back();
    if (first.x != last.x || first.y != last.y) vertices_.push_back(first);
  }
  if (vertices_.size() < 4) throw std::invalid_argument("ClosedCurve: needs at least 3 distinct vertices");

  double twice_area = 0.0;
  bounds_ = {vertices_[0].x, vertices_[0].x, vertices_[0].y, vertices_[0].y};
  for (std::size_t i = 0; i + 1 < vertices_.size(); ++i) {
    const Point2 a = vertices_[i];
    const Point2 b = vertices_[i + 1];
    twice_area += a.x * b.y - b.x * a.y;
    bounds_.xmin = std::min(bounds_.xmin, b.x);
    bounds_.xmax = std::max(bounds_.xmax, b.x);
    bounds_.ymin = std::min(bounds_.ymin, b.y);
    bounds_.ymax = std::max(bounds_.ymax, b.y);
  }
  signed_area_ = 0.5 * twice_area;
  const double box_area = (bounds_.xmax - bounds_.xmin) * (bounds_.ymax - bounds_.ymin);
  orientation_ = std::abs(signed_area_) <= 1e-12 * std::max(box_area, 1e-300) ? 0 : sign(signed_area_);
  self_intersecting_ = has_self_intersection(vertices_);
}

ClosedCurve ClosedCurve::reversed() const {
  std::vector<Point2> rev(vertices_.rbegin(), vertices_.rend());
  return ClosedCurve(std::move(rev));
}

double distance_to_segment(Point2 p, Point2 a, Point2 b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double s = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return std::hypot(p.x - (a.x + s * dx), p.y - (a.y + s * dy));
}

std::optional<int> winding_number(const ClosedCurve& curve, Point2 pt) {
  const auto& v = curve.vertices();
  int w = 0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const Point2 a = v[i];
    const Point2 b = v[i + 1];
    if (distance_to_segment(pt, a, b) <= kOnCurveTolerance) return std::nullopt;
    if (a.y <= pt.y) {
      if (b.y > pt.y && cross(a, b, pt) > 0.0) ++w;
    } else if (b.y <= pt.y && cross(a, b, pt) < 0.0) {
      --w;
    }
  }
  return w;
}

bool has_self_intersection(std::span<const Point2> poly) {
  if (poly.size() < 4) return false;
  const std::size_t nseg = poly.size() - 1;
  struct Seg {
    double xmin, xmax, ymin, ymax;
  };
  std::vector<Seg> segs(nseg);
  for (std::size_t i = 0; i < nseg; ++i) {
    const Point2 a = poly[i];
    const Point2 b = poly[i + 1];
    segs[i] = {std::min(a.x, b.x), std::max(a.x, b.x), std::min(a.y, b.y), std::max(a.y, b.y)};
  }
  std::vector<std::size_t> order(nseg);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return segs[i].xmin < segs[j].xmin; });

  auto adjacent = [nseg](std::size_t i, std::size_t j) {
    const std::size_t lo = std::min(i, j);
    const std::size_t hi = std::max(i, j);
    return hi - lo == 1 || (lo == 0 && hi == nseg - 1);
  };

  std::vector<std::size_t> active;
  for (std::size_t idx : order) {
    const Seg& s = segs[idx];
    std::erase_if(active, [&](std::size_t j) { return segs[j].xmax < s.xmin; });
    for (std::size_t j : active) {
      if (segs[j].ymax < s.ymin || segs[j].ymin > s.ymax) continue;
      if (adjacent(idx, j)) continue;
      if (segments_touch(poly[idx], poly[idx + 1], poly[j], poly[j + 1])) return true;
    }
    active.push_back(idx);
  }
  return false;
}

}  // namespace orbitinv
