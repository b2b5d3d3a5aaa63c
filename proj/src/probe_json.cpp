#include <nlohmann/json.hpp>

#include "wgl/probe.hpp"

namespace wgl::probe {

std::string to_json(const SoundnessReport& r, const ProbeConfig& cfg, const Construction& c) {
  nlohmann::ordered_json j;
  j["verdict"] = std::string(to_string(r.verdict));
  j["current_ok"] = r.current_ok;
  j["failure_rate"] = r.failure_rate;
  j["failures"] = r.failures;
  j["samples"] = r.samples;
  j["seed"] = cfg.seed;
  j["first_failing_step"] =
      r.first_failing_step ? nlohmann::ordered_json(r.first_failing_step->str()) : nlohmann::ordered_json(nullptr);
  j["first_failure_kind"] = r.first_failure_kind
                                ? nlohmann::ordered_json(std::string(geom::to_string(*r.first_failure_kind)))
                                : nlohmann::ordered_json(nullptr);
  j["explanation"] = explain(r, c);
  return j.dump();
}

}  // namespace wgl::probe
