#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "wgl/expected.hpp"
#include "wgl/geometry.hpp"

namespace wgl {

/// Name of a construction object: `[A-Za-z][A-Za-z0-9_]*`, at most 32 chars.
class ObjectId {
 public:
  static constexpr std::size_t kMaxLength = 32;

  static bool is_valid(std::string_view s);
  /// Returns nullopt when `s` does not match the identifier pattern.
  static std::optional<ObjectId> make(std::string_view s);
  /// Like make(), but throws std::invalid_argument on a malformed name.
  static ObjectId from(std::string_view s);

  const std::string& str() const { return name_; }

  friend bool operator==(const ObjectId&, const ObjectId&) = default;
  friend auto operator<=>(const ObjectId&, const ObjectId&) = default;

 private:
  explicit ObjectId(std::string s) : name_(std::move(s)) {}
  std::string name_;
};

enum class ObjectKind { Point, Line, Circle };

std::string_view to_string(ObjectKind kind);

namespace step {

struct Free {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Free&, const Free&) = default;
};
struct LineThrough {
  ObjectId p, q;
  friend bool operator==(const LineThrough&, const LineThrough&) = default;
};
struct Midpoint {
  ObjectId p, q;
  friend bool operator==(const Midpoint&, const Midpoint&) = default;
};
struct PerpBisector {
  ObjectId p, q;
  friend bool operator==(const PerpBisector&, const PerpBisector&) = default;
};
struct AngleBisector {
  ObjectId a, vertex, b;
  friend bool operator==(const AngleBisector&, const AngleBisector&) = default;
};
struct PerpThrough {
  ObjectId p, line;
  friend bool operator==(const PerpThrough&, const PerpThrough&) = default;
};
struct ParallelThrough {
  ObjectId p, line;
  friend bool operator==(const ParallelThrough&, const ParallelThrough&) = default;
};
struct IntersectLL {
  ObjectId l1, l2;
  friend bool operator==(const IntersectLL&, const IntersectLL&) = default;
};
struct CircleCenterThrough {
  ObjectId center, through;
  friend bool operator==(const CircleCenterThrough&, const CircleCenterThrough&) = default;
};
struct IntersectLC {
  ObjectId line, circle;
  geom::Branch branch = geom::Branch::First;
  friend bool operator==(const IntersectLC&, const IntersectLC&) = default;
};
struct IntersectCC {
  ObjectId c1, c2;
  geom::Branch branch = geom::Branch::First;
  friend bool operator==(const IntersectCC&, const IntersectCC&) = default;
};
struct FootOnLine {
  ObjectId p, line;
  friend bool operator==(const FootOnLine&, const FootOnLine&) = default;
};

}  // namespace step

using StepKind = std::variant<step::Free, step::LineThrough, step::Midpoint, step::PerpBisector,
                              step::AngleBisector, step::PerpThrough, step::ParallelThrough,
                              step::IntersectLL, step::CircleCenterThrough, step::IntersectLC,
                              step::IntersectCC, step::FootOnLine>;

/// Kind of object a step produces.
ObjectKind result_kind(const StepKind& kind);

/// An operand reference together with the object kind it must name.
struct Operand {
  const ObjectId* id;
  ObjectKind expected;
};

/// Operands in textual order; empty for Free steps.
std::vector<Operand> operands(const StepKind& kind);

/// Keyword of the step in the `.wgl` format, e.g. "xll".
std::string_view keyword(const StepKind& kind);
/// Human-readable operation name used in diagnostics.
std::string_view describe(const StepKind& kind);

struct Step {
  ObjectId id;
  StepKind kind;
  friend bool operator==(const Step&, const Step&) = default;
};

struct ConstructionError {
  enum class Kind { DuplicateId, ForwardReference, KindMismatch, UnknownId, Referenced, NotFreePoint };
  Kind kind;
  /// Index of the offending operand within the step (0-based), or −1 for the id itself.
  int operand = -1;
  std::string message;
};

std::string_view to_string(ConstructionError::Kind kind);

/// Ordered, acyclic list of steps. Every mutator preserves the invariants:
/// unique ids, strictly backward references, kind-correct operands.
class Construction {
 public:
  Construction() = default;

  static Expected<Construction, ConstructionError> from_steps(std::vector<Step> steps);

  const std::vector<Step>& steps() const { return steps_; }
  std::size_t size() const { return steps_.size(); }
  bool empty() const { return steps_.empty(); }

  const Step* find(const ObjectId& id) const;
  std::optional<std::size_t> index_of(const ObjectId& id) const;

  Expected<void, ConstructionError> add(Step s);
  /// Fails when the id is unknown or a later step references it.
  Expected<void, ConstructionError> remove(const ObjectId& id);

  friend bool operator==(const Construction& lhs, const Construction& rhs) {
    return lhs.steps_ == rhs.steps_;
  }

 private:
  Expected<void, ConstructionError> check_step(const Step& s) const;

  std::vector<Step> steps_;
  std::unordered_map<std::string, std::size_t> index_;
};

using GeomObject = std::variant<geom::Point, geom::Line, geom::Circle>;

/// Concrete evaluation of a construction, keyed by object id.
struct Figure {
  std::map<ObjectId, GeomObject> objects;
  friend bool operator==(const Figure&, const Figure&) = default;

  const geom::Point* point(const ObjectId& id) const;
  const geom::Line* line(const ObjectId& id) const;
  const geom::Circle* circle(const ObjectId& id) const;
};

struct EvalError {
  ObjectId failing_step;
  geom::ErrorKind kind;
  std::string message;
};

using Overrides = std::map<ObjectId, geom::Point>;

/// Evaluates every step in order; the first failing step aborts evaluation.
/// Overrides replace the coordinates of Free steps. Throws std::invalid_argument
/// when an override key does not name a Free step.
Expected<Figure, EvalError> evaluate(const Construction& c, const Overrides& overrides = {});

/// Copy of `c` with the Free step `id` moved to (x, y).
Expected<Construction, ConstructionError> move_free(const Construction& c, const ObjectId& id,
                                                    double x, double y);

}  // namespace wgl
