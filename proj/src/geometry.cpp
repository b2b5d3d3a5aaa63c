#include "wgl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace wgl::geom {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParallelLines:
      return "ParallelLines";
    case ErrorKind::CoincidentPoints:
      return "CoincidentPoints";
    case ErrorKind::NoIntersection:
      return "NoIntersection";
    case ErrorKind::DegenerateAngle:
      return "DegenerateAngle";
  }
  return "Unknown";
}

double distance(Point p, Point q) { return std::hypot(q.x - p.x, q.y - p.y); }

Line normalized_line(double a, double b, double c) {
  const double n = std::hypot(a, b);
  a /= n;
  b /= n;
  c /= n;
  if (a < 0.0 || (a == 0.0 && b < 0.0)) {
    a = -a;
    b = -b;
    c = -c;
  }
  // Adding +0.0 folds negative zeros so equal lines compare bit-identical.
  return Line{a + 0.0, b + 0.0, c + 0.0};
}

namespace {

// Line through p with direction (dx, dy).
Line line_with_direction(Point p, double dx, double dy) {
  const double a = -dy;
  const double b = dx;
  return normalized_line(a, b, -(a * p.x + b * p.y));
}

}  // namespace

GeomResult<Line> line_through(Point p, Point q) {
  if (distance(p, q) < kEpsilon) return unexpected(ErrorKind::CoincidentPoints);
  return line_with_direction(p, q.x - p.x, q.y - p.y);
}

Point midpoint(Point p, Point q) { return {(p.x + q.x) / 2.0, (p.y + q.y) / 2.0}; }

GeomResult<Line> perp_bisector(Point p, Point q) {
  if (distance(p, q) < kEpsilon) return unexpected(ErrorKind::CoincidentPoints);
  const Point m = midpoint(p, q);
  const double a = q.x - p.x;
  const double b = q.y - p.y;
  return normalized_line(a, b, -(a * m.x + b * m.y));
}

GeomResult<Line> angle_bisector(Point a, Point vertex, Point b) {
  const double la = distance(vertex, a);
  const double lb = distance(vertex, b);
  if (la < kEpsilon || lb < kEpsilon) return unexpected(ErrorKind::DegenerateAngle);
  const double dx = (a.x - vertex.x) / la + (b.x - vertex.x) / lb;
  const double dy = (a.y - vertex.y) / la + (b.y - vertex.y) / lb;
  if (std::hypot(dx, dy) < kEpsilon) return unexpected(ErrorKind::DegenerateAngle);
  return line_with_direction(vertex, dx, dy);
}

Line perp_through(Point p, const Line& l) { return line_with_direction(p, l.a, l.b); }

Line parallel_through(Point p, const Line& l) {
  if (std::abs(l.eval(p)) < kEpsilon) return l;
  return Line{l.a, l.b, -(l.a * p.x + l.b * p.y) + 0.0};
}

GeomResult<Point> intersect_ll(const Line& l1, const Line& l2) {
  // Canonical argument order makes the result independent of call order.
  const bool swap = std::tie(l2.a, l2.b, l2.c) < std::tie(l1.a, l1.b, l1.c);
  const Line& u = swap ? l2 : l1;
  const Line& v = swap ? l1 : l2;
  const double det = u.a * v.b - v.a * u.b;
  if (std::abs(det) < kEpsilon) return unexpected(ErrorKind::ParallelLines);
  return Point{(u.b * v.c - v.b * u.c) / det, (u.c * v.a - v.c * u.a) / det};
}

GeomResult<Circle> circle_center_through(Point center, Point through) {
  const double r = distance(center, through);
  if (r < kEpsilon) return unexpected(ErrorKind::CoincidentPoints);
  return Circle{center, r};
}

Point foot_on_line(Point p, const Line& l) {
  const double d = l.eval(p);
  return {p.x - d * l.a, p.y - d * l.b};
}

GeomResult<Point> intersect_lc(const Line& l, const Circle& c, Branch branch) {
  const double d = std::abs(l.eval(c.center));
  if (d > c.radius + kEpsilon) return unexpected(ErrorKind::NoIntersection);
  const Point f = foot_on_line(c.center, l);
  const double h = std::sqrt(std::max(0.0, c.radius * c.radius - d * d));
  const double t = branch == Branch::First ? -h : h;
  return Point{f.x + t * l.b, f.y - t * l.a};
}

GeomResult<Point> intersect_cc(const Circle& c1, const Circle& c2, Branch branch) {
  const double dx = c2.center.x - c1.center.x;
  const double dy = c2.center.y - c1.center.y;
  if (std::hypot(dx, dy) < kEpsilon) return unexpected(ErrorKind::NoIntersection);
  const double k1 = c1.center.x * c1.center.x + c1.center.y * c1.center.y - c1.radius * c1.radius;
  const double k2 = c2.center.x * c2.center.x + c2.center.y * c2.center.y - c2.radius * c2.radius;
  const Line radical = normalized_line(2.0 * dx, 2.0 * dy, k1 - k2);
  return intersect_lc(radical, c1, branch);
}

}  // namespace wgl::geom
