#pragma once

#include <string_view>

#include "wgl/expected.hpp"

namespace wgl::geom {

/// Degeneracy threshold shared by every predicate in the kernel.
inline constexpr double kEpsilon = 1e-9;
/// Allowed drift of a² + b² from 1 for a normalized line.
inline constexpr double kNormTolerance = 1e-12;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Locus a·x + b·y + c = 0 with (a, b) a unit normal; a > 0, or a = 0 and b > 0.
struct Line {
  double a = 0.0;
  double b = 1.0;
  double c = 0.0;

  friend bool operator==(const Line&, const Line&) = default;

  /// Signed value of the line equation at p; equals the signed distance.
  double eval(Point p) const { return a * p.x + b * p.y + c; }
};

struct Circle {
  Point center;
  double radius = 1.0;

  friend bool operator==(const Circle&, const Circle&) = default;
};

enum class ErrorKind { ParallelLines, CoincidentPoints, NoIntersection, DegenerateAngle };

std::string_view to_string(ErrorKind kind);

/// Which of the two solutions of a line/circle or circle/circle intersection.
enum class Branch { First = 1, Second = 2 };

template <class T>
using GeomResult = Expected<T, ErrorKind>;

double distance(Point p, Point q);

/// Scales (a, b, c) so (a, b) is a unit vector and applies the sign rule.
/// The caller guarantees (a, b) is not the zero vector.
Line normalized_line(double a, double b, double c);

GeomResult<Line> line_through(Point p, Point q);
Point midpoint(Point p, Point q);
GeomResult<Line> perp_bisector(Point p, Point q);
/// Internal bisector of the angle at `vertex` between rays toward `a` and `b`.
GeomResult<Line> angle_bisector(Point a, Point vertex, Point b);
Line perp_through(Point p, const Line& l);
Line parallel_through(Point p, const Line& l);
GeomResult<Point> intersect_ll(const Line& l1, const Line& l2);
GeomResult<Circle> circle_center_through(Point center, Point through);
Point foot_on_line(Point p, const Line& l);

// Branch ordering for both intersections: the solutions are F + t·(b, −a),
// F the foot of the center on the (radical) line; branch 1 has the smaller t.
GeomResult<Point> intersect_lc(const Line& l, const Circle& c, Branch branch);
GeomResult<Point> intersect_cc(const Circle& c1, const Circle& c2, Branch branch);

}  // namespace wgl::geom
