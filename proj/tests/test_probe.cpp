#include <doctest.h>

#include <nlohmann/json.hpp>

#include "support/fixtures.hpp"
#include "support/generator.hpp"
#include "wgl/format.hpp"
#include "wgl/probe.hpp"

using namespace wgl;
using probe::Verdict;

namespace {

Construction load(std::string_view text) { return format::parse(text).value(); }

probe::ProbeConfig seeded(std::uint64_t seed, std::uint64_t samples = 1000) {
  probe::ProbeConfig cfg;
  cfg.seed = seed;
  cfg.samples = samples;
  return cfg;
}

void check_consistent(const probe::SoundnessReport& r) {
  CHECK(r.failure_rate >= 0.0);
  CHECK(r.failure_rate <= 1.0);
  switch (r.verdict) {
    case Verdict::GenericallySound:
      CHECK(r.current_ok);
      CHECK(r.failure_rate < 0.01);
      break;
    case Verdict::InstanceDegenerate:
      CHECK_FALSE(r.current_ok);
      CHECK(r.failure_rate < 1.0);
      break;
    case Verdict::AlwaysDegenerate:
      CHECK(r.failure_rate == 1.0);
      break;
    case Verdict::ConditionallySound:
      CHECK(r.current_ok);
      CHECK(r.failure_rate >= 0.01);
      CHECK(r.failure_rate < 1.0);
      break;
  }
}

}  // namespace

TEST_CASE("SplitMix64 reference sequence") {
  // Reference outputs of the published SplitMix64 algorithm for seed 0.
  probe::SplitMix64 g(0);
  CHECK(g.next() == 0xE220A8397B1DCDAFull);
  CHECK(g.next() == 0x6E789E6AA1B965F4ull);
  CHECK(g.next() == 0x06C45D188009454Full);
  probe::SplitMix64 u(42);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.next_unit();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
}

TEST_CASE("incenter fixture is generically sound") {
  const auto c = load(testing::kIncenter);
  const auto r = probe::probe(c, seeded(42));
  CHECK(r.verdict == Verdict::GenericallySound);
  CHECK(r.current_ok);
  CHECK(r.failure_rate == 0.0);
  CHECK_FALSE(r.first_failing_step.has_value());
  CHECK(probe::explain(r, c) ==
        "construction succeeded at the stored placement and at all 1000 sampled placements.");
}

TEST_CASE("parallel by construction is always degenerate") {
  const auto c = load(testing::kParallelByConstruction);
  const auto r = probe::probe(c, seeded(42));
  CHECK(r.verdict == Verdict::AlwaysDegenerate);
  CHECK(r.failure_rate == 1.0);
  CHECK(r.first_failing_step == ObjectId::from("X"));
  CHECK(probe::explain(r, c) ==
        "step 'X' (line–line intersection) fails for all sampled placements: the lines are "
        "parallel by construction.");
}

TEST_CASE("crafted parallel placement is instance degenerate") {
  const auto c = load(testing::kInstanceParallel);
  CHECK_FALSE(evaluate(c).has_value());
  const auto r = probe::probe(c, seeded(42));
  CHECK(r.verdict == Verdict::InstanceDegenerate);
  CHECK_FALSE(r.current_ok);
  CHECK(r.failure_rate < 0.01);
  const std::string text = probe::explain(r, c);
  CHECK(text.find("'X'") != std::string::npos);
  CHECK(text.find("only for the current placement") != std::string::npos);
  check_consistent(r);
}

TEST_CASE("configuration-dependent steps") {
  // A line through two free points meets a fixed-size circle only sometimes.
  const auto c = load(
      "wgl 1\nfree A 0 0\nfree B 1 0\nfree O 0 0\nfree R 1 0\n"
      "line l A B\ncircle k O R\nfree S 5 5\nfree T 5 6\nline m S T\nxlc X m k 1\n");
  const auto r = probe::probe(c, seeded(7));
  check_consistent(r);
  CHECK_FALSE(r.current_ok);
  CHECK(r.verdict == Verdict::InstanceDegenerate);
  CHECK(r.failure_rate > 0.01);

  const auto ok_here = move_free(move_free(c, ObjectId::from("S"), 0.5, -3).value(),
                                 ObjectId::from("T"), 0.5, 3)
                           .value();
  const auto r2 = probe::probe(ok_here, seeded(7));
  CHECK(r2.current_ok);
  CHECK(r2.verdict == Verdict::ConditionallySound);
  CHECK(probe::explain(r2, ok_here).find("sampled placements") != std::string::npos);
}

TEST_CASE("probe is deterministic") {
  for (auto text : {testing::kIncenter, testing::kInstanceParallel, testing::kParallelByConstruction}) {
    const auto c = load(text);
    const auto a = probe::probe(c, seeded(1234, 300));
    const auto b = probe::probe(c, seeded(1234, 300));
    CHECK(a.failures == b.failures);
    CHECK(a.verdict == b.verdict);
    CHECK(a.first_failing_step == b.first_failing_step);
    CHECK(probe::explain(a, c) == probe::explain(b, c));
    CHECK(probe::to_json(a, seeded(1234, 300), c) == probe::to_json(b, seeded(1234, 300), c));
  }
}

TEST_CASE("constructions without intersection steps never fail") {
  testing::ConstructionGenerator gen(77);
  int checked = 0;
  while (checked < 50) {
    Construction c = gen.make(20);
    bool has_intersection = false;
    for (const auto& s : c.steps()) {
      if (std::holds_alternative<step::IntersectLL>(s.kind) ||
          std::holds_alternative<step::IntersectLC>(s.kind) ||
          std::holds_alternative<step::IntersectCC>(s.kind)) {
        has_intersection = true;
      }
    }
    if (has_intersection) continue;
    // Repeated operands are degenerate everywhere, not by chance.
    bool repeated = false;
    for (const auto& note : format::validate(c)) repeated |= note.kind == format::ValidationNote::Kind::RepeatedOperand;
    if (repeated) continue;
    ++checked;
    // Evaluate only at sampled placements: stored coordinates may coincide.
    const auto r = probe::probe(c, seeded(static_cast<std::uint64_t>(checked), 200));
    CHECK(r.failures == 0);
  }
}

TEST_CASE("verdict constraints hold for random constructions") {
  testing::ConstructionGenerator gen(31);
  for (int i = 0; i < 150; ++i) {
    const auto c = gen.make(12);
    check_consistent(probe::probe(c, seeded(static_cast<std::uint64_t>(i), 100)));
  }
}

TEST_CASE("explanations never claim proof") {
  testing::ConstructionGenerator gen(8);
  for (int i = 0; i < 100; ++i) {
    const auto c = gen.make(12);
    const auto text = probe::explain(probe::probe(c, seeded(3, 50)), c);
    CHECK(text.find("prove") == std::string::npos);
    CHECK(text.find("sampled") != std::string::npos);
  }
}

TEST_CASE("probe config validation") {
  const auto c = load(testing::kIncenter);
  CHECK_THROWS_AS(probe::probe(c, seeded(1, 0)), std::invalid_argument);
  auto cfg = seeded(1);
  cfg.box = {0, 0, 0, 5};
  CHECK_THROWS_AS(probe::probe(c, cfg), std::invalid_argument);
}

TEST_CASE("report JSON") {
  const auto c = load(testing::kParallelByConstruction);
  const auto cfg = seeded(42);
  const auto j = nlohmann::json::parse(probe::to_json(probe::probe(c, cfg), cfg, c));
  CHECK(j["verdict"] == "AlwaysDegenerate");
  CHECK(j["failure_rate"] == 1.0);
  CHECK(j["first_failing_step"] == "X");
  CHECK(j["first_failure_kind"] == "ParallelLines");
  CHECK(j["seed"] == 42);
}
