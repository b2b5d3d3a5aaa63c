#include "wgl/probe.hpp"

#include <stdexcept>

namespace wgl::probe {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::GenericallySound:
      return "GenericallySound";
    case Verdict::InstanceDegenerate:
      return "InstanceDegenerate";
    case Verdict::AlwaysDegenerate:
      return "AlwaysDegenerate";
    case Verdict::ConditionallySound:
      return "ConditionallySound";
  }
  return "Unknown";
}

SoundnessReport probe(const Construction& c, const ProbeConfig& cfg) {
  if (cfg.samples == 0) throw std::invalid_argument("probe needs at least one sample");
  const double width = cfg.box.max_x - cfg.box.min_x;
  const double height = cfg.box.max_y - cfg.box.min_y;
  if (!(width > 0.0) || !(height > 0.0)) throw std::invalid_argument("probe box has no area");

  SoundnessReport report;
  report.samples = cfg.samples;

  const auto current = evaluate(c);
  report.current_ok = current.has_value();
  if (!current) {
    report.first_failing_step = current.error().failing_step;
    report.first_failure_kind = current.error().kind;
  }

  std::vector<ObjectId> free_ids;
  for (const auto& s : c.steps()) {
    if (std::holds_alternative<step::Free>(s.kind)) free_ids.push_back(s.id);
  }

  SplitMix64 rng(cfg.seed);
  Overrides overrides;
  for (std::uint64_t i = 0; i < cfg.samples; ++i) {
    for (const auto& id : free_ids) {
      const double x = cfg.box.min_x + rng.next_unit() * width;
      const double y = cfg.box.min_y + rng.next_unit() * height;
      overrides.insert_or_assign(id, geom::Point{x, y});
    }
    const auto r = evaluate(c, overrides);
    if (!r) {
      ++report.failures;
      if (!report.first_failing_step) {
        report.first_failing_step = r.error().failing_step;
        report.first_failure_kind = r.error().kind;
      }
    }
  }

  report.failure_rate =
      static_cast<double>(report.failures) / static_cast<double>(report.samples);
  if (report.failures == report.samples) {
    report.verdict = Verdict::AlwaysDegenerate;
  } else if (!report.current_ok) {
    report.verdict = Verdict::InstanceDegenerate;
  } else if (report.failure_rate < kSoundThreshold) {
    report.verdict = Verdict::GenericallySound;
  } else {
    report.verdict = Verdict::ConditionallySound;
  }
  return report;
}

namespace {

std::string_view constant_phrase(geom::ErrorKind kind) {
  switch (kind) {
    case geom::ErrorKind::ParallelLines:
      return "the lines are parallel by construction";
    case geom::ErrorKind::CoincidentPoints:
      return "the points coincide by construction";
    case geom::ErrorKind::NoIntersection:
      return "the objects never meet";
    case geom::ErrorKind::DegenerateAngle:
      return "the angle is degenerate by construction";
  }
  return "the step is degenerate";
}

std::string_view instance_phrase(geom::ErrorKind kind) {
  switch (kind) {
    case geom::ErrorKind::ParallelLines:
      return "the lines are parallel";
    case geom::ErrorKind::CoincidentPoints:
      return "the defining points coincide";
    case geom::ErrorKind::NoIntersection:
      return "the objects do not intersect";
    case geom::ErrorKind::DegenerateAngle:
      return "the angle is degenerate";
  }
  return "the step is degenerate";
}

std::string step_label(const SoundnessReport& r, const Construction& c) {
  if (!r.first_failing_step) return "an unnamed step";
  std::string label = "step '" + r.first_failing_step->str() + "'";
  if (const Step* s = c.find(*r.first_failing_step)) {
    label += " (" + std::string(describe(s->kind)) + ")";
  }
  return label;
}

}  // namespace

std::string explain(const SoundnessReport& r, const Construction& c) {
  const std::string n = std::to_string(r.samples);
  const std::string ok = std::to_string(r.samples - r.failures);
  const auto kind = r.first_failure_kind.value_or(geom::ErrorKind::NoIntersection);
  switch (r.verdict) {
    case Verdict::AlwaysDegenerate:
      return step_label(r, c) + " fails for all sampled placements: " +
             std::string(constant_phrase(kind)) + ".";
    case Verdict::InstanceDegenerate:
      return step_label(r, c) + " fails only for the current placement (" +
             std::string(instance_phrase(kind)) + "); it succeeded at " + ok + " of " + n +
             " sampled placements.";
    case Verdict::ConditionallySound:
      return "construction succeeded at the stored placement, but " + step_label(r, c) +
             " fails at " + std::to_string(r.failures) + " of " + n + " sampled placements (" +
             std::string(instance_phrase(kind)) + ").";
    case Verdict::GenericallySound:
      if (r.failures == 0) {
        return "construction succeeded at the stored placement and at all " + n +
               " sampled placements.";
      }
      return "construction succeeded at the stored placement and at " + ok + " of " + n +
             " sampled placements; " + step_label(r, c) +
             " failed at the rest within numerical tolerance.";
  }
  return {};
}

}  // namespace wgl::probe
