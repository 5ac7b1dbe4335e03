#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace orbitinv {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Box {
  double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
};

/// Closed polyline in the plane. The last vertex repeats the first.
class ClosedCurve {
 public:
  /// Drops consecutive duplicates and appends the first vertex when the input
  /// is open. Throws std::invalid_argument if fewer than 4 vertices remain.
  explicit ClosedCurve(std::vector<Point2> vertices);

  const std::vector<Point2>& vertices() const { return vertices_; }
  std::size_t segment_count() const { return vertices_.size() - 1; }

  /// Shoelace area, positive for counterclockwise traversal.
  double signed_area() const { return signed_area_; }
  /// +1 counterclockwise, -1 clockwise, 0 when the signed area vanishes.
  int orientation() const { return orientation_; }
  bool self_intersecting() const { return self_intersecting_; }
  const Box& bounds() const { return bounds_; }

  ClosedCurve reversed() const;

 private:
  std::vector<Point2> vertices_;
  double signed_area_ = 0.0;
  int orientation_ = 0;
  bool self_intersecting_ = false;
  Box bounds_;
};

/// Distance under which a point counts as lying on the curve.
inline constexpr double kOnCurveTolerance = 1e-9;

/// Signed number of turns of the curve around pt (crossing-number rule).
/// Empty when pt lies within kOnCurveTolerance of a segment.
std::optional<int> winding_number(const ClosedCurve& curve, Point2 pt);

double distance_to_segment(Point2 p, Point2 a, Point2 b);

/// True when two non-adjacent segments of the closed polyline touch or cross.
/// Sweep over segments ordered by their left end.
bool has_self_intersection(std::span<const Point2> closed_polyline);

}  // namespace orbitinv
