// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "support/classroom_sim.hpp"
#include "support/fixtures.hpp"
#include "support/generator.hpp"
#include "support/perm_sweep.hpp"
#include "support/relations.hpp"
#include "support/world.hpp"
#include "wgl/format.hpp"
#include "wgl/probe.hpp"

using namespace wgl;

namespace {

constexpr double kTangency = 1e-9;
constexpr double kEquidistance = 1e-9;
constexpr double kAltitudeSpread = 1e-6;
constexpr double kRightTriangle = 1e-9;
constexpr double kIncenterSeconds = 1.0;
constexpr double kRoundTripSeconds = 5.0;
constexpr double kSimulationSeconds = 10.0;
constexpr int kDrags = 100;
constexpr int kTriangles = 100;
constexpr int kRoundTrips = 1000;
constexpr std::uint64_t kProbeSeed = 42;
constexpr std::uint64_t kProbeSamples = 1000;

struct Outcome {
  bool pass = true;
  std::ostringstream note;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) note << what;
    pass = pass && ok;
  }
};

ObjectId id(const char* s) { return ObjectId::from(s); }

Construction load(std::string_view text) { return format::parse(text).value(); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Three distinct vertices in [-10, 10]^2 per draw.
std::vector<Overrides> placements(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-10.0, 10.0);
  std::vector<Overrides> out;
  for (int i = 0; i < n; ++i) {
    out.push_back({{id("A"), {box(rng), box(rng)}}, {id("B"), {box(rng), box(rng)}}, {id("C"), {box(rng), box(rng)}}});
  }
  return out;
}

void incenter(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const Construction c = load(testing::kIncenter);
  std::vector<Overrides> drags = placements(2024, kDrags);
  drags.insert(drags.begin(), Overrides{});  // stored placement first
  int checked = 0, skipped = 0;
  double worst = 0.0;
  for (const auto& drag : drags) {
    auto f = evaluate(c, drag);
    if (!f) {
      ++skipped;  // degenerate sample
      continue;
    }
    ++checked;
    const geom::Point A = *f->point(id("A")), B = *f->point(id("B")), C = *f->point(id("C"));
    const geom::Point I = *f->point(id("I"));
    const double d[3] = {testing::detail::dist_to_line(I, A, B), testing::detail::dist_to_line(I, B, C),
                         testing::detail::dist_to_line(I, C, A)};
    const double r = f->circle(id("incircle"))->radius;
    for (int i = 0; i < 3; ++i) {
      worst = std::max({worst, std::abs(d[i] - d[(i + 1) % 3]), std::abs(r - d[i])});
    }
  }
  const double secs = seconds_since(t0);
  o.note << checked << " placements (" << skipped << " degenerate skipped), worst residual " << worst << ", "
         << secs << " s";
  o.pass = checked == kDrags + 1 - skipped && checked > 0 && worst < kTangency && secs < kIncenterSeconds;
}

void circum_ortho(Outcome& o) {
  const Construction c = load(testing::kCircumOrtho);
  int checked = 0;
  double worst_eq = 0.0, worst_alt = 0.0;
  for (const auto& drag : placements(7, kTriangles)) {
    auto f = evaluate(c, drag);
    if (!f) continue;
    ++checked;
    const geom::Point A = *f->point(id("A")), B = *f->point(id("B")), C = *f->point(id("C"));
    const geom::Point O = *f->point(id("O"));
    const double da = testing::detail::dist(O, A), db = testing::detail::dist(O, B), dc = testing::detail::dist(O, C);
    worst_eq = std::max({worst_eq, std::abs(da - db), std::abs(db - dc), std::abs(da - dc)});
    const auto ab = geom::intersect_ll(*f->line(id("hA")), *f->line(id("hB")));
    const auto bc = geom::intersect_ll(*f->line(id("hB")), *f->line(id("hC")));
    const auto ca = geom::intersect_ll(*f->line(id("hC")), *f->line(id("hA")));
    if (!ab || !bc || !ca) {
      worst_alt = INFINITY;
      continue;
    }
    worst_alt = std::max({worst_alt, testing::detail::dist(*ab, *bc), testing::detail::dist(*bc, *ca), testing::detail::dist(*ca, *ab)});
  }
  const auto right = evaluate(c).value();
  const geom::Point O = *right.point(id("O")), H = *right.point(id("H"));
  const double right_err = std::max({std::abs(O.x - 2.0), std::abs(O.y - 1.5), std::abs(H.x), std::abs(H.y)});
  o.note << checked << " triangles, equidistance " << worst_eq << ", altitude spread " << worst_alt
         << ", 3-4-5 error " << right_err;
  o.pass = checked > 0 && worst_eq < kEquidistance && worst_alt < kAltitudeSpread && right_err < kRightTriangle;
}

void round_trip(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  testing::ConstructionGenerator gen(1);
  int ok = 0;
  for (int i = 0; i < kRoundTrips; ++i) {
    const Construction c = gen.make();
    const std::string text = format::serialize(c);
    auto back = format::parse(text);
    if (back && *back == c && format::serialize(*back) == text) ++ok;
  }
  const double secs = seconds_since(t0);
  o.note << ok << "/" << kRoundTrips << " round trips, " << secs << " s";
  o.pass = ok == kRoundTrips && secs < kRoundTripSeconds;
}

void soundness(Outcome& o) {
  probe::ProbeConfig cfg;
  cfg.samples = kProbeSamples;
  cfg.seed = kProbeSeed;
  const auto run = [&](std::string_view text) {
    const Construction c = load(text);
    const auto a = probe::probe(c, cfg);
    const auto b = probe::probe(c, cfg);
    return std::make_tuple(a, probe::to_json(a, cfg, c) == probe::to_json(b, cfg, c));
  };
  const auto [parallel, parallel_same] = run(testing::kParallelByConstruction);
  const auto [instance, instance_same] = run(testing::kInstanceParallel);
  const auto [inc, inc_same] = run(testing::kIncenter);

  // SplitMix64 reference outputs for seed 0.
  probe::SplitMix64 rng(0);
  const bool pinned = rng.next() == 0xE220A8397B1DCDAFull && rng.next() == 0x6E789E6AA1B965F4ull &&
                      rng.next() == 0x06C45D188009454Full;

  o.note << "parallel " << probe::to_string(parallel.verdict) << " rate " << parallel.failure_rate << ", instance "
         << probe::to_string(instance.verdict) << ", incenter " << probe::to_string(inc.verdict);
  o.pass = parallel.verdict == probe::Verdict::AlwaysDegenerate && parallel.failure_rate == 1.0 &&
           parallel.samples == kProbeSamples && instance.verdict == probe::Verdict::InstanceDegenerate &&
           inc.verdict == probe::Verdict::GenericallySound && parallel_same && instance_same && inc_same && pinned;
  if (!pinned) o.note << ", PRNG reference mismatch";
}

void permissions(Outcome& o) {
  testing::World w;
  const auto m = testing::build_perm_matrix(w);
  const auto repo = testing::sweep_repository(w, m);
  const auto http = testing::sweep_http(w, m);

  // Legacy levels: -1 is teacher-only, 0 is published.
  PutRequest req;
  req.title = "legacy";
  req.body = std::string(testing::kIncenter);
  const auto hidden = w.repo->put_construction(w.teacher.user_id, req).value().record_id;
  const auto shown = w.repo->put_construction(w.teacher.user_id, req).value().record_id;
  w.repo->import_legacy_level(hidden, -1).value();
  w.repo->import_legacy_level(shown, 0).value();
  bool legacy = true;
  for (const auto* s : {&w.s2, &w.s3}) {
    bool saw_hidden = false, saw_shown = false;
    for (const auto& e : w.repo->list_visible(s->user_id)) {
      saw_hidden |= e.record_id == hidden;
      saw_shown |= e.record_id == shown;
    }
    classroom::SessionManager sessions(*w.repo);
    i18n::Catalogs catalogs;
    http::Api api(*w.repo, sessions, catalogs);
    const auto listing =
        nlohmann::json::parse(testing::call(api, "GET", "/api/constructions", testing::login(api, *s)).body);
    bool http_hidden = false, http_shown = false;
    for (const auto& e : listing["constructions"]) {
      http_hidden |= e["record_id"] == hidden;
      http_shown |= e["record_id"] == shown;
    }
    legacy = legacy && !saw_hidden && saw_shown && !http_hidden && http_shown;
  }
  o.note << repo.cases << " cases, repository deviations " << repo.deviations << ", HTTP deviations "
         << http.deviations << ", legacy " << (legacy ? "ok" : "wrong");
  o.pass = repo.cases == 512 * 8 && http.cases == 512 * 8 && repo.deviations == 0 && http.deviations == 0 && legacy;
}

void convergence(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  testing::World w;
  const auto r = testing::run_classroom_simulation(w, 8, 2026);
  const double secs = seconds_since(t0);
  o.note << r.equal_after_broadcast << "/" << r.workbenches << " workbenches equal, " << r.replays_identical << "/"
         << r.replays_checked << " replays identical, " << r.ops_applied << " ops, " << secs << " s";
  o.pass = r.workbenches == 9 && r.converged() && r.replay_ok() && secs < kSimulationSeconds;
  if (!o.pass && !r.detail.empty()) o.note << " (" << r.detail << ")";
}

void gap_rejection(Outcome& o) {
  testing::World w;
  classroom::SessionManager m(*w.repo);
  const auto sid = m.create_session(w.teacher.user_id).value();
  const auto& owner = w.s1.user_id;
  testing::SimClient rui(m, sid, w.s1);
  rui.open();
  rui.join();
  rui.add(owner, "free A 0 0");
  rui.add(owner, "free B 1 0");
  // A second writer advances the workbench behind the client's back.
  m.apply_op(sid, owner, classroom::WorkbenchOp{classroom::op::MoveFree{id("B"), 2, 0}, 3, w.teacher.user_id}).value();
  const std::uint64_t seq = m.snapshot(sid, owner, owner)->seq;

  rui.send({{"t", "op"}, {"target", owner}, {"op_seq", seq + 2}, {"kind", "move"}, {"id", "A"}, {"x", 1}, {"y", 1}});
  const auto reject = rui.last("reject");
  const auto server = m.snapshot(sid, owner, owner).value();
  const auto& mirror = rui.mirrors().at(owner);
  const bool rejected = reject.is_object() && reject["code"] == "ExpectedSeq" && reject["expected"] == seq + 1;
  const bool restored = mirror.seq == server.seq && server.seq == seq &&
                        format::serialize(mirror.construction) == format::serialize(server.construction);
  rui.move(owner, "A", 1, 1);
  const bool resumed = m.snapshot(sid, owner, owner)->seq == seq + 1 &&
                       rui.mirrors().at(owner).construction == m.snapshot(sid, owner, owner)->construction;
  o.note << "reject " << (rejected ? "ExpectedSeq" : "missing") << ", resync " << (restored ? "exact" : "diverged")
         << ", next op " << (resumed ? "accepted" : "refused");
  o.pass = rejected && restored && resumed && rui.resyncs() == 1;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria = {
      {"incenter case study", incenter},
      {"circumcenter and orthocenter", circum_ortho},
      {"parser round-trip", round_trip},
      {"soundness probing", soundness},
      {"permission matrix", permissions},
      {"protocol convergence and replay", convergence},
      {"gap rejection", gap_rejection},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      check(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.note << " threw " << e.what();
    }
    std::printf("%s: %s (%s)\n", o.pass ? "PASS" : "FAIL", name, o.note.str().c_str());
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
