#include "wgl/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "wgl/format.hpp"

namespace wgl::svg {

namespace {

struct Rect {
  double min_x, min_y, max_x, max_y;
};

struct Segment {
  geom::Point p, q;
};

// Liang-Barsky clip of an infinite line against the rectangle.
std::optional<Segment> clip(const geom::Line& l, const Rect& r) {
  const geom::Point origin{-l.a * l.c, -l.b * l.c};
  const double dx = l.b;
  const double dy = -l.a;
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {origin.x - r.min_x, r.max_x - origin.x, origin.y - r.min_y,
                       r.max_y - origin.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return std::nullopt;
      continue;
    }
    const double t = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, t);
    } else {
      t1 = std::min(t1, t);
    }
  }
  if (t0 > t1) return std::nullopt;
  return Segment{{origin.x + t0 * dx, origin.y + t0 * dy}, {origin.x + t1 * dx, origin.y + t1 * dy}};
}

std::string num(double v) { return format::format_number(v + 0.0); }

}  // namespace

std::string render(const Construction& c, const Figure& figure) {
  Rect box{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  auto extend = [&](double x0, double y0, double x1, double y1) {
    box.min_x = std::min(box.min_x, x0);
    box.min_y = std::min(box.min_y, y0);
    box.max_x = std::max(box.max_x, x1);
    box.max_y = std::max(box.max_y, y1);
  };
  for (const auto& [id, obj] : figure.objects) {
    if (const auto* pt = std::get_if<geom::Point>(&obj)) {
      extend(pt->x, pt->y, pt->x, pt->y);
    } else if (const auto* cr = std::get_if<geom::Circle>(&obj)) {
      extend(cr->center.x - cr->radius, cr->center.y - cr->radius, cr->center.x + cr->radius,
             cr->center.y + cr->radius);
    }
  }
  if (!std::isfinite(box.min_x)) box = {-1.0, -1.0, 1.0, 1.0};
  double span = std::max(box.max_x - box.min_x, box.max_y - box.min_y);
  if (span <= 0.0) span = 2.0;
  const double margin = 0.1 * span;
  box = {box.min_x - margin, box.min_y - margin, box.max_x + margin, box.max_y + margin};

  const double width = box.max_x - box.min_x;
  const double height = box.max_y - box.min_y;
  const double stroke = 0.004 * std::max(width, height);
  const double dot = 2.5 * stroke;

  // SVG's y axis points down; world y is negated on output.
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << num(box.min_x) << ' '
      << num(-box.max_y) << ' ' << num(width) << ' ' << num(height) << "\">\n";
  out << "<g fill=\"none\" stroke=\"#1f4e79\" stroke-width=\"" << num(stroke) << "\">\n";
  for (const auto& s : c.steps()) {
    auto it = figure.objects.find(s.id);
    if (it == figure.objects.end()) continue;
    if (const auto* l = std::get_if<geom::Line>(&it->second)) {
      if (auto seg = clip(*l, box)) {
        out << "<line id=\"" << s.id.str() << "\" x1=\"" << num(seg->p.x) << "\" y1=\""
            << num(-seg->p.y) << "\" x2=\"" << num(seg->q.x) << "\" y2=\"" << num(-seg->q.y)
            << "\"/>\n";
      }
    } else if (const auto* cr = std::get_if<geom::Circle>(&it->second)) {
      out << "<circle id=\"" << s.id.str() << "\" cx=\"" << num(cr->center.x) << "\" cy=\""
          << num(-cr->center.y) << "\" r=\"" << num(cr->radius) << "\"/>\n";
    }
  }
  out << "</g>\n<g fill=\"#c0392b\" font-size=\"" << num(6 * stroke) << "\">\n";
  for (const auto& s : c.steps()) {
    const geom::Point* p = figure.point(s.id);
    if (p == nullptr) continue;
    const double x = p->x;
    const double y = -p->y;
    out << "<path id=\"" << s.id.str() << "\" d=\"M" << num(x - dot) << ',' << num(y) << " a"
        << num(dot) << ',' << num(dot) << " 0 1,0 " << num(2 * dot) << ",0 a" << num(dot) << ','
        << num(dot) << " 0 1,0 " << num(-2 * dot) << ",0\"/>\n";
    out << "<text x=\"" << num(x + 1.5 * dot) << "\" y=\"" << num(y - 1.5 * dot) << "\">"
        << s.id.str() << "</text>\n";
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

}  // namespace wgl::svg
