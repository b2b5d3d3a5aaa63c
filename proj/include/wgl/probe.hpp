#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "wgl/construction.hpp"

namespace wgl::probe {

/// SplitMix64 (Steele, Lea, Flood 2014). The algorithm is pinned so reports
/// are reproducible across implementations:
///
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
///
/// next_unit() maps the top 53 bits to [0, 1).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

struct Box {
  double min_x = -10.0;
  double min_y = -10.0;
  double max_x = 10.0;
  double max_y = 10.0;
};

struct ProbeConfig {
  std::uint64_t samples = 1000;
  std::uint64_t seed = 0;
  Box box;
};

enum class Verdict {
  GenericallySound,
  InstanceDegenerate,
  AlwaysDegenerate,
  /// Succeeds at the stored placement but fails for a non-negligible share
  /// (at least 1%, not all) of sampled placements.
  ConditionallySound,
};

std::string_view to_string(Verdict v);

inline constexpr double kSoundThreshold = 0.01;

struct SoundnessReport {
  Verdict verdict = Verdict::GenericallySound;
  bool current_ok = true;
  double failure_rate = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t failures = 0;
  std::optional<ObjectId> first_failing_step;
  std::optional<geom::ErrorKind> first_failure_kind;
};

/// Throws std::invalid_argument for samples == 0 or an empty box.
SoundnessReport probe(const Construction& c, const ProbeConfig& cfg);

/// Fixed-template explanation of a report.
std::string explain(const SoundnessReport& report, const Construction& c);

/// JSON object with the report fields, the config seed and the explanation.
std::string to_json(const SoundnessReport& report, const ProbeConfig& cfg, const Construction& c);

}  // namespace wgl::probe
