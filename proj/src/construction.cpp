#include "wgl/construction.hpp"

#include <cmath>
#include <stdexcept>

namespace wgl {

namespace {

bool is_alpha(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

}  // namespace

bool ObjectId::is_valid(std::string_view s) {
  if (s.empty() || s.size() > kMaxLength || !is_alpha(s.front())) return false;
  for (char c : s) {
    if (!is_alpha(c) && !is_digit(c) && c != '_') return false;
  }
  return true;
}

std::optional<ObjectId> ObjectId::make(std::string_view s) {
  if (!is_valid(s)) return std::nullopt;
  return ObjectId(std::string(s));
}

ObjectId ObjectId::from(std::string_view s) {
  auto id = make(s);
  if (!id) throw std::invalid_argument("malformed object id '" + std::string(s) + "'");
  return *id;
}

std::string_view to_string(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::Point:
      return "point";
    case ObjectKind::Line:
      return "line";
    case ObjectKind::Circle:
      return "circle";
  }
  return "object";
}

std::string_view to_string(ConstructionError::Kind kind) {
  using K = ConstructionError::Kind;
  switch (kind) {
    case K::DuplicateId:
      return "DuplicateId";
    case K::ForwardReference:
      return "ForwardReference";
    case K::KindMismatch:
      return "KindMismatch";
    case K::UnknownId:
      return "UnknownId";
    case K::Referenced:
      return "Referenced";
    case K::NotFreePoint:
      return "NotFreePoint";
  }
  return "Unknown";
}

ObjectKind result_kind(const StepKind& kind) {
  return std::visit(
      Overloaded{
          [](const step::LineThrough&) { return ObjectKind::Line; },
          [](const step::PerpBisector&) { return ObjectKind::Line; },
          [](const step::AngleBisector&) { return ObjectKind::Line; },
          [](const step::PerpThrough&) { return ObjectKind::Line; },
          [](const step::ParallelThrough&) { return ObjectKind::Line; },
          [](const step::CircleCenterThrough&) { return ObjectKind::Circle; },
          [](const auto&) { return ObjectKind::Point; },
      },
      kind);
}

std::vector<Operand> operands(const StepKind& kind) {
  constexpr auto P = ObjectKind::Point;
  constexpr auto L = ObjectKind::Line;
  constexpr auto C = ObjectKind::Circle;
  return std::visit(
      Overloaded{
          [](const step::Free&) { return std::vector<Operand>{}; },
          [&](const step::LineThrough& s) { return std::vector<Operand>{{&s.p, P}, {&s.q, P}}; },
          [&](const step::Midpoint& s) { return std::vector<Operand>{{&s.p, P}, {&s.q, P}}; },
          [&](const step::PerpBisector& s) { return std::vector<Operand>{{&s.p, P}, {&s.q, P}}; },
          [&](const step::AngleBisector& s) {
            return std::vector<Operand>{{&s.a, P}, {&s.vertex, P}, {&s.b, P}};
          },
          [&](const step::PerpThrough& s) { return std::vector<Operand>{{&s.p, P}, {&s.line, L}}; },
          [&](const step::ParallelThrough& s) {
            return std::vector<Operand>{{&s.p, P}, {&s.line, L}};
          },
          [&](const step::IntersectLL& s) { return std::vector<Operand>{{&s.l1, L}, {&s.l2, L}}; },
          [&](const step::CircleCenterThrough& s) {
            return std::vector<Operand>{{&s.center, P}, {&s.through, P}};
          },
          [&](const step::IntersectLC& s) {
            return std::vector<Operand>{{&s.line, L}, {&s.circle, C}};
          },
          [&](const step::IntersectCC& s) { return std::vector<Operand>{{&s.c1, C}, {&s.c2, C}}; },
          [&](const step::FootOnLine& s) { return std::vector<Operand>{{&s.p, P}, {&s.line, L}}; },
      },
      kind);
}

std::string_view keyword(const StepKind& kind) {
  static constexpr std::string_view kKeywords[] = {"free",     "line", "mid",    "perpbis",
                                                   "bisector", "perp", "parallel", "xll",
                                                   "circle",   "xlc",  "xcc",    "foot"};
  return kKeywords[kind.index()];
}

std::string_view describe(const StepKind& kind) {
  static constexpr std::string_view kNames[] = {
      "free point",
      "line through two points",
      "midpoint",
      "perpendicular bisector",
      "angle bisector",
      "perpendicular line",
      "parallel line",
      "line–line intersection",
      "circle by center and point",
      "line–circle intersection",
      "circle–circle intersection",
      "foot of perpendicular",
  };
  return kNames[kind.index()];
}

Expected<Construction, ConstructionError> Construction::from_steps(std::vector<Step> steps) {
  Construction c;
  c.steps_.reserve(steps.size());
  for (auto& s : steps) {
    if (auto r = c.add(std::move(s)); !r) return unexpected(r.error());
  }
  return c;
}

const Step* Construction::find(const ObjectId& id) const {
  auto it = index_.find(id.str());
  return it == index_.end() ? nullptr : &steps_[it->second];
}

std::optional<std::size_t> Construction::index_of(const ObjectId& id) const {
  auto it = index_.find(id.str());
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Expected<void, ConstructionError> Construction::check_step(const Step& s) const {
  using K = ConstructionError::Kind;
  if (index_.contains(s.id.str())) {
    return unexpected(ConstructionError{K::DuplicateId, -1, "duplicate id '" + s.id.str() + "'"});
  }
  const auto ops = operands(s.kind);
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const ObjectId& ref = *ops[i].id;
    const Step* target = find(ref);
    if (target == nullptr) {
      return unexpected(ConstructionError{K::ForwardReference, static_cast<int>(i),
                                          "'" + ref.str() + "' is not defined before '" +
                                              s.id.str() + "'"});
    }
    const ObjectKind actual = result_kind(target->kind);
    if (actual != ops[i].expected) {
      return unexpected(ConstructionError{
          K::KindMismatch, static_cast<int>(i),
          "'" + ref.str() + "' is a " + std::string(to_string(actual)) + ", expected a " +
              std::string(to_string(ops[i].expected))});
    }
  }
  return {};
}

Expected<void, ConstructionError> Construction::add(Step s) {
  if (auto r = check_step(s); !r) return r;
  index_.emplace(s.id.str(), steps_.size());
  steps_.push_back(std::move(s));
  return {};
}

Expected<void, ConstructionError> Construction::remove(const ObjectId& id) {
  using K = ConstructionError::Kind;
  const auto pos = index_of(id);
  if (!pos) return unexpected(ConstructionError{K::UnknownId, -1, "unknown id '" + id.str() + "'"});
  for (std::size_t i = *pos + 1; i < steps_.size(); ++i) {
    for (const auto& op : operands(steps_[i].kind)) {
      if (*op.id == id) {
        return unexpected(ConstructionError{
            K::Referenced, -1, "'" + id.str() + "' is referenced by '" + steps_[i].id.str() + "'"});
      }
    }
  }
  steps_.erase(steps_.begin() + static_cast<std::ptrdiff_t>(*pos));
  index_.clear();
  for (std::size_t i = 0; i < steps_.size(); ++i) index_.emplace(steps_[i].id.str(), i);
  return {};
}

const geom::Point* Figure::point(const ObjectId& id) const {
  auto it = objects.find(id);
  return it == objects.end() ? nullptr : std::get_if<geom::Point>(&it->second);
}

const geom::Line* Figure::line(const ObjectId& id) const {
  auto it = objects.find(id);
  return it == objects.end() ? nullptr : std::get_if<geom::Line>(&it->second);
}

const geom::Circle* Figure::circle(const ObjectId& id) const {
  auto it = objects.find(id);
  return it == objects.end() ? nullptr : std::get_if<geom::Circle>(&it->second);
}

namespace {

using geom::ErrorKind;

bool finite(const GeomObject& obj) {
  return std::visit(Overloaded{
                        [](const geom::Point& p) { return std::isfinite(p.x) && std::isfinite(p.y); },
                        [](const geom::Line& l) {
                          return std::isfinite(l.a) && std::isfinite(l.b) && std::isfinite(l.c);
                        },
                        [](const geom::Circle& c) {
                          return std::isfinite(c.center.x) && std::isfinite(c.center.y) &&
                                 std::isfinite(c.radius);
                        },
                    },
                    obj);
}

// Error kind reported when a step overflows to a non-finite value.
ErrorKind overflow_kind(const StepKind& kind) {
  return std::visit(Overloaded{
                        [](const step::IntersectLL&) { return ErrorKind::ParallelLines; },
                        [](const step::IntersectLC&) { return ErrorKind::NoIntersection; },
                        [](const step::IntersectCC&) { return ErrorKind::NoIntersection; },
                        [](const step::AngleBisector&) { return ErrorKind::DegenerateAngle; },
                        [](const auto&) { return ErrorKind::CoincidentPoints; },
                    },
                    kind);
}

std::string error_message(const Step& s, ErrorKind kind) {
  std::string what;
  switch (kind) {
    case ErrorKind::ParallelLines:
      what = "the lines are parallel";
      break;
    case ErrorKind::CoincidentPoints:
      what = "the defining points coincide";
      break;
    case ErrorKind::NoIntersection:
      what = "the objects do not intersect";
      break;
    case ErrorKind::DegenerateAngle:
      what = "the angle is degenerate";
      break;
  }
  return "step '" + s.id.str() + "' (" + std::string(describe(s.kind)) + "): " + what;
}

class Evaluator {
 public:
  explicit Evaluator(const Overrides& overrides) : overrides_(overrides) {}

  geom::GeomResult<GeomObject> eval(const Step& s) {
    return std::visit([&](const auto& k) { return apply(s, k); }, s.kind);
  }

  Figure figure;

 private:
  geom::Point pt(const ObjectId& id) const { return *figure.point(id); }
  const geom::Line& ln(const ObjectId& id) const { return *figure.line(id); }
  const geom::Circle& cr(const ObjectId& id) const { return *figure.circle(id); }

  template <class T>
  static geom::GeomResult<GeomObject> lift(geom::GeomResult<T> r) {
    if (!r) return unexpected(r.error());
    return GeomObject{*r};
  }

  geom::GeomResult<GeomObject> apply(const Step& s, const step::Free& f) {
    if (auto it = overrides_.find(s.id); it != overrides_.end()) return GeomObject{it->second};
    return GeomObject{geom::Point{f.x, f.y}};
  }
  geom::GeomResult<GeomObject> apply(const Step&, const step::LineThrough& k) {
    return lift(geom::line_through(pt(k.p), pt(k.q)));
  }
  geom::GeomResult<GeomObject> apply(const Step&, const step::Midpoint& k) {
    return GeomObject{geom::midpoint(pt(k.p), pt(k.q))};
  }
  geom::GeomResult<GeomObject> apply(const Step&, const step::PerpBisector& k) {
    return lift(geom::perp_bisector(pt(k.p), pt(k.q)));
  }
  geom::GeomResult<GeomObject> apply(const Step&, const step::AngleBisector& k) {
    return lift(geom::angle_bisector(pt(k.a), pt(k.vertex), pt(k.b)));
  }
  geom::GeomResult<GeomObject> apply(const Step&, const step::PerpThrough& k) {
    return GeomObject{geom::perp_through(pt(k.p), ln(k.line))};
  }
  geom::GeomResult<GeomObject> apply(const Step&, const step::ParallelThrough& k) {
    return GeomObject{geom::parallel_through(pt(k.p), ln(k.line))};
  }
  geom::GeomResult<GeomObject> apply(const Step&, const step::IntersectLL& k) {
    return lift(geom::intersect_ll(ln(k.l1), ln(k.l2)));
  }
  geom::GeomResult<GeomObject> apply(const Step&, const step::CircleCenterThrough& k) {
    return lift(geom::circle_center_through(pt(k.center), pt(k.through)));
  }
  geom::GeomResult<GeomObject> apply(const Step&, const step::IntersectLC& k) {
    return lift(geom::intersect_lc(ln(k.line), cr(k.circle), k.branch));
  }
  geom::GeomResult<GeomObject> apply(const Step&, const step::IntersectCC& k) {
    return lift(geom::intersect_cc(cr(k.c1), cr(k.c2), k.branch));
  }
  geom::GeomResult<GeomObject> apply(const Step&, const step::FootOnLine& k) {
    return GeomObject{geom::foot_on_line(pt(k.p), ln(k.line))};
  }

  const Overrides& overrides_;
};

}  // namespace

Expected<Figure, EvalError> evaluate(const Construction& c, const Overrides& overrides) {
  for (const auto& [id, _] : overrides) {
    const Step* s = c.find(id);
    if (s == nullptr || !std::holds_alternative<step::Free>(s->kind)) {
      throw std::invalid_argument("override '" + id.str() + "' does not name a free point");
    }
  }
  Evaluator ev(overrides);
  for (const Step& s : c.steps()) {
    auto r = ev.eval(s);
    if (r && !finite(*r)) r = unexpected(overflow_kind(s.kind));
    if (!r) return unexpected(EvalError{s.id, r.error(), error_message(s, r.error())});
    ev.figure.objects.emplace(s.id, *r);
  }
  return std::move(ev.figure);
}

Expected<Construction, ConstructionError> move_free(const Construction& c, const ObjectId& id,
                                                    double x, double y) {
  using K = ConstructionError::Kind;
  const Step* s = c.find(id);
  if (s == nullptr) return unexpected(ConstructionError{K::UnknownId, -1, "unknown id '" + id.str() + "'"});
  if (!std::holds_alternative<step::Free>(s->kind)) {
    return unexpected(ConstructionError{K::NotFreePoint, -1, "'" + id.str() + "' is not a free point"});
  }
  std::vector<Step> steps = c.steps();
  for (auto& st : steps) {
    if (st.id == id) st.kind = step::Free{x, y};
  }
  return Construction::from_steps(std::move(steps)).value();
}

}  // namespace wgl
