#include <doctest.h>

#include <fstream>
#include <nlohmann/json.hpp>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "support/fixtures.hpp"
#include "support/perm_sweep.hpp"
#include "support/world.hpp"
#include "wgl/util.hpp"

using namespace wgl;
using testing::World;
using K = RepoError::Kind;

namespace {

PutRequest request(std::string title, std::string_view body, std::optional<Perm> perm = std::nullopt) {
  PutRequest r;
  r.title = std::move(title);
  r.body = std::string(body);
  r.perm = perm;
  return r;
}

std::set<std::string> listed(const Repository& repo, const std::string& actor) {
  std::set<std::string> ids;
  for (const auto& s : repo.list_visible(actor)) ids.insert(s.record_id);
  return ids;
}

std::vector<std::string> log_lines(const World& w) {
  std::ifstream in(w.dir.path() / "events.log");
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::map<std::string, std::string> snapshot_files(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && e.path().filename() != "events.log") {
      out[e.path().lexically_relative(root).string()] = *util::read_file(e.path());
    }
  }
  return out;
}

const Perm kPublished = *Perm::parse("rwv---r-v");

}  // namespace

TEST_CASE("create_user follows the role hierarchy") {
  World w;
  CHECK(w.teacher.role == Role::Teacher);
  CHECK(w.teacher.created_by == w.admin.user_id);
  CHECK(w.s1.role == Role::Student);
  CHECK(w.s1.created_by == w.teacher.user_id);
  CHECK(w.s1.pass_hash.rfind("$argon2id$", 0) == 0);

  CHECK(w.repo->create_user(w.s1.user_id, "zed", "Zed", Role::Student, "pw").error().kind == K::Forbidden);
  CHECK(w.repo->create_user(w.admin.user_id, "zed", "Zed", Role::Student, "pw").error().kind == K::Forbidden);
  CHECK(w.repo->create_user(w.teacher.user_id, "zed", "Zed", Role::Teacher, "pw").error().kind == K::Forbidden);
  CHECK(w.repo->create_user(w.admin.user_id, "zed", "Zed", Role::Admin, "pw").error().kind == K::Forbidden);
  CHECK(w.repo->create_user(w.teacher.user_id, "rui", "Rui 2", Role::Student, "pw").error().kind ==
        K::DuplicateLogin);
  CHECK(w.repo->create_user(w.teacher.user_id, "ab", "", Role::Student, "pw").error().kind == K::InvalidArgument);
  CHECK(w.repo->create_user(w.teacher.user_id, "a b", "", Role::Student, "pw").error().kind == K::InvalidArgument);
  CHECK(w.repo->create_user("nobody", "zed", "Zed", Role::Student, "pw").error().kind == K::Forbidden);
  CHECK(w.repo->seed_admin("admin", "again", "pw").error().kind == K::DuplicateLogin);
}

TEST_CASE("authenticate") {
  World w;
  auto t = w.repo->authenticate("ana", "ana-pw");
  REQUIRE(t);
  CHECK(t->token.size() == 32);
  auto who = w.repo->introspect(t->token);
  REQUIRE(who);
  CHECK(who->role == Role::Teacher);
  CHECK(who->user_id == w.teacher.user_id);

  auto wrong = w.repo->authenticate("ana", "nope");
  auto unknown = w.repo->authenticate("nobody", "nope");
  REQUIRE_FALSE(wrong);
  REQUIRE_FALSE(unknown);
  CHECK(wrong.error().kind == K::AuthFailure);
  CHECK(unknown.error().kind == K::AuthFailure);
  CHECK(wrong.error().message == unknown.error().message);

  CHECK_FALSE(w.repo->introspect("deadbeef"));
  w.tick(601);
  CHECK_FALSE(w.repo->introspect(t->token));

  auto t2 = w.repo->authenticate("rui", "rui-pw").value();
  CHECK(t2.token != t->token);
  w.repo->revoke_token(t2.token);
  CHECK_FALSE(w.repo->introspect(t2.token));
}

TEST_CASE("published teacher record is listed and loadable by students") {
  World w;
  auto rec = w.repo->put_construction(w.teacher.user_id, request("Incenter", testing::kIncenter, kPublished));
  REQUIRE(rec);
  CHECK_FALSE(rec->is_scrapbook);
  CHECK(rec->body == testing::kIncenter);
  CHECK(listed(*w.repo, w.s1.user_id).count(rec->record_id));
  auto got = w.repo->get_construction(w.s1.user_id, rec->record_id);
  REQUIRE(got);
  CHECK(got->body == testing::kIncenter);

  // Student overwrite without write permission.
  PutRequest overwrite = request("mine now", "wgl 1\n");
  overwrite.record_id = rec->record_id;
  CHECK(w.repo->put_construction(w.s1.user_id, overwrite).error().kind == K::Forbidden);
}

TEST_CASE("student saves go to the scrapbook") {
  World w;
  auto rec = w.repo->put_construction(w.s1.user_id, request("try 1", "wgl  1\nfree A 0.50 1\n"));
  REQUIRE(rec);
  CHECK(rec->is_scrapbook);
  CHECK(rec->perm == Perm::owner_only());
  CHECK(rec->body == "wgl 1\nfree A 0.5 1\n");

  auto own = w.repo->scrapbook(w.s1.user_id, w.s1.user_id);
  REQUIRE(own);
  REQUIRE(own->size() == 1);
  auto teachers_view = w.repo->scrapbook(w.teacher.user_id, w.s1.user_id);
  REQUIRE(teachers_view);
  CHECK(teachers_view->size() == 1);
  CHECK(w.repo->scrapbook(w.teacher2.user_id, w.s1.user_id).error().kind == K::Forbidden);
  CHECK(w.repo->scrapbook(w.s2.user_id, w.s1.user_id).error().kind == K::Forbidden);
  CHECK(w.repo->scrapbook(w.teacher.user_id, w.teacher.user_id).error().kind == K::Forbidden);

  CHECK(w.repo->get_construction(w.teacher.user_id, rec->record_id));
  CHECK(w.repo->get_construction(w.s2.user_id, rec->record_id).error().kind == K::Forbidden);
  CHECK(w.repo->get_construction(w.teacher2.user_id, rec->record_id).error().kind == K::Forbidden);

  auto fresh = w.repo->scrapbook(w.s3.user_id, w.s3.user_id);
  REQUIRE(fresh);
  CHECK(fresh->empty());
  CHECK(w.repo->list_visible(w.s3.user_id).empty());
}

TEST_CASE("put rejects bad bodies and titles") {
  World w;
  auto bad = w.repo->put_construction(w.teacher.user_id, request("t", "wgl 1\nline l A B\n"));
  REQUIRE_FALSE(bad);
  CHECK(bad.error().kind == K::ParseRejected);
  REQUIRE(bad.error().parse);
  CHECK(bad.error().parse->line == 2);
  CHECK(bad.error().parse->column == 8);
  CHECK(w.repo->put_construction(w.teacher.user_id, request(std::string(129, 't'), "wgl 1\n")).error().kind ==
        K::InvalidArgument);
  // 128 two-byte characters are within the limit.
  std::string accents;
  for (int i = 0; i < 128; ++i) accents += "\xc3\xa9";
  CHECK(w.repo->put_construction(w.teacher.user_id, request(accents, "wgl 1\n")));
}

TEST_CASE("no existence oracle") {
  World w;
  auto hidden = w.repo->put_construction(w.teacher.user_id, request("secret", testing::kIncenter)).value();
  auto a = w.repo->get_construction(w.s1.user_id, hidden.record_id);
  auto b = w.repo->get_construction(w.s1.user_id, "r0123456789abcdef");
  REQUIRE_FALSE(a);
  REQUIRE_FALSE(b);
  CHECK(a.error().kind == b.error().kind);
  CHECK(a.error().message == b.error().message);

  PutRequest up = request("x", "wgl 1\n");
  up.record_id = hidden.record_id;
  auto c = w.repo->put_construction(w.s1.user_id, up);
  up.record_id = "r0123456789abcdef";
  auto d = w.repo->put_construction(w.s1.user_id, up);
  CHECK(c.error().kind == d.error().kind);
  CHECK(c.error().message == d.error().message);
}

TEST_CASE("legacy levels") {
  World w;
  auto neg = w.repo->put_construction(w.teacher.user_id, request("teachers only", testing::kIncenter)).value();
  auto zero = w.repo->put_construction(w.teacher.user_id, request("zero", testing::kIncenter)).value();
  auto pos = w.repo->put_construction(w.teacher.user_id, request("all", testing::kIncenter)).value();
  CHECK(w.repo->import_legacy_level(neg.record_id, -1).value().str() == "rwv------");
  CHECK(w.repo->import_legacy_level(zero.record_id, 0).value().str() == "rwv---r-v");
  CHECK(w.repo->import_legacy_level(pos.record_id, 1).value().str() == "rwv---r-v");
  CHECK(w.repo->import_legacy_level("rmissing", 1).error().kind == K::UnknownRecord);

  const auto student = listed(*w.repo, w.s1.user_id);
  CHECK_FALSE(student.count(neg.record_id));
  CHECK(student.count(zero.record_id));
  CHECK(student.count(pos.record_id));

  auto stored = w.repo->get_construction(w.teacher.user_id, neg.record_id).value();
  CHECK(stored.legacy_level == -1);
}

TEST_CASE("teacher listing includes own negatives and students' scrapbooks") {
  World w;
  auto neg = w.repo->put_construction(w.teacher.user_id, request("teachers only", testing::kIncenter)).value();
  w.repo->import_legacy_level(neg.record_id, -1);
  auto scrap = w.repo->put_construction(w.s2.user_id, request("eva's", testing::kIncenter)).value();
  const auto ids = listed(*w.repo, w.teacher.user_id);
  CHECK(ids.count(neg.record_id));
  CHECK(ids.count(scrap.record_id));
  CHECK(listed(*w.repo, w.teacher2.user_id).empty());
}

TEST_CASE("listing order and content") {
  World w;
  std::vector<std::string> ids;
  for (int i = 0; i < 4; ++i) {
    w.tick();
    ids.push_back(w.repo->put_construction(w.teacher.user_id, request("r" + std::to_string(i), "wgl 1\n", kPublished))
                      .value()
                      .record_id);
  }
  w.tick();
  PutRequest touch = request("r0 again", "wgl 1\nfree A 1 1\n");
  touch.record_id = ids[0];
  REQUIRE(w.repo->put_construction(w.teacher.user_id, touch));
  const auto list = w.repo->list_visible(w.s1.user_id);
  REQUIRE(list.size() == 4);
  CHECK(list[0].record_id == ids[0]);
  CHECK(list[1].record_id == ids[3]);
  CHECK(list[2].record_id == ids[2]);
  CHECK(list[3].record_id == ids[1]);
  CHECK(list[0].title == "r0 again");
  CHECK(list[0].perm == kPublished);
}

TEST_CASE("set_perm") {
  World w;
  const Group project = w.repo->create_group(w.teacher.user_id, "project", {w.s1.user_id, w.s2.user_id}).value();
  auto rec = w.repo->put_construction(w.s1.user_id, request("ours", testing::kIncenter)).value();
  CHECK_FALSE(listed(*w.repo, w.s2.user_id).count(rec.record_id));

  auto shared = w.repo->set_perm(w.s1.user_id, rec.record_id, *Perm::parse("rwvr-v---"), project.group_id);
  REQUIRE(shared);
  CHECK(listed(*w.repo, w.s2.user_id).count(rec.record_id));
  CHECK(w.repo->get_construction(w.s2.user_id, rec.record_id));
  CHECK_FALSE(listed(*w.repo, w.s3.user_id).count(rec.record_id));

  auto normalized = w.repo->set_perm(w.s1.user_id, rec.record_id, *Perm::parse("----w----"), project.group_id);
  REQUIRE(normalized);
  CHECK(normalized->perm.str() == "rwvrw----");

  CHECK(w.repo->set_perm(w.s2.user_id, rec.record_id, kPublished, std::nullopt).error().kind == K::Forbidden);
  CHECK(w.repo->set_perm(w.s1.user_id, rec.record_id, kPublished, "gmissing").error().kind == K::UnknownGroup);
  // s3 is not in the group: sharing with it is refused.
  auto other = w.repo->put_construction(w.s3.user_id, request("leo's", testing::kIncenter)).value();
  CHECK(w.repo->set_perm(w.s3.user_id, other.record_id, kPublished, project.group_id).error().kind == K::Forbidden);
}

TEST_CASE("writers who are not owners change content only") {
  World w;
  auto rec = w.repo->put_construction(w.teacher.user_id, request("shared", testing::kIncenter,
                                                                  *Perm::parse("rwv---rwv")))
                 .value();
  PutRequest edit = request("edited", "wgl 1\nfree A 0 0\n");
  edit.record_id = rec.record_id;
  auto ok = w.repo->put_construction(w.s1.user_id, edit);
  REQUIRE(ok);
  CHECK(ok->owner == w.teacher.user_id);
  CHECK(ok->title == "edited");
  edit.perm = Perm::owner_only();
  CHECK(w.repo->put_construction(w.s1.user_id, edit).error().kind == K::Forbidden);
}

TEST_CASE("groups") {
  World w;
  CHECK(w.repo->create_group(w.s1.user_id, "mine", {}).error().kind == K::Forbidden);
  CHECK(w.repo->create_group(w.teacher2.user_id, "steal", {w.s1.user_id}).error().kind == K::InvalidArgument);
  auto g = w.repo->create_group(w.teacher.user_id, "A", {w.s1.user_id}).value();
  auto up = w.repo->update_group(w.teacher.user_id, g.group_id, "A2", std::set<std::string>{w.s2.user_id});
  REQUIRE(up);
  CHECK(up->name == "A2");
  CHECK(up->members == std::set<std::string>{w.s2.user_id});
  CHECK(w.repo->update_group(w.teacher2.user_id, g.group_id, "x", std::nullopt).error().kind == K::Forbidden);
  CHECK(w.repo->update_group(w.teacher.user_id, "gnone", "x", std::nullopt).error().kind == K::UnknownGroup);
}

TEST_CASE("owner-only delete") {
  World w;
  auto rec = w.repo->put_construction(w.teacher.user_id, request("x", "wgl 1\n", *Perm::parse("rwv---rwv"))).value();
  CHECK(w.repo->delete_construction(w.s1.user_id, rec.record_id).error().kind == K::Forbidden);
  CHECK(w.repo->delete_construction(w.teacher.user_id, rec.record_id));
  CHECK_FALSE(std::filesystem::exists(w.dir.path() / "records" / (rec.record_id + ".wgl")));
  CHECK(w.repo->get_construction(w.teacher.user_id, rec.record_id).error().kind == K::Forbidden);
}

TEST_CASE("event log") {
  World w;
  const auto before = log_lines(w).size();
  auto rec = w.repo->put_construction(w.teacher.user_id, request("x", "wgl 1\n")).value();
  auto lines = log_lines(w);
  REQUIRE(lines.size() == before + 1);
  CHECK(lines.back() == R"({"ts":"2025-10-09T08:53:20Z","actor":")" + w.teacher.user_id +
                            R"(","action":"construction.put","subject":")" + rec.record_id + "\"}");

  w.tick(5);
  PutRequest again = request("x", "wgl 1\n");
  again.record_id = rec.record_id;
  w.repo->put_construction(w.teacher.user_id, again);
  w.clock -= 100;  // a clock step backwards never reorders the log
  w.repo->put_construction(w.teacher.user_id, again);
  lines = log_lines(w);
  REQUIRE(lines.size() == before + 3);
  const std::regex shape(R"(\{"ts":"\d{4}-\d\d-\d\dT\d\d:\d\d:\d\dZ","actor":"[^"]+","action":"[a-z.]+","subject":"[^"]+"\})");
  std::string prev;
  for (const auto& l : lines) {
    CHECK(std::regex_match(l, shape));
    const std::string ts = nlohmann::json::parse(l)["ts"];
    CHECK(ts >= prev);
    prev = ts;
  }
}

TEST_CASE("event log failures do not reach the caller") {
  World w;
  std::vector<std::string> reported;
  w.repo.reset();
  auto opts = w.options();
  opts.on_log_failure = [&](const std::string& m) { reported.push_back(m); };
  w.repo = std::make_unique<Repository>(w.dir.path(), opts);
  std::filesystem::remove(w.dir.path() / "events.log");
  std::filesystem::create_directory(w.dir.path() / "events.log");
  auto rec = w.repo->put_construction(w.teacher.user_id, request("x", "wgl 1\n"));
  CHECK(rec);
  CHECK(reported.size() == 1);
}

TEST_CASE("restart round trip") {
  World w;
  const Group g = w.repo->create_group(w.teacher.user_id, "A", {w.s1.user_id}).value();
  PutRequest req = request("incenter", testing::kIncenter, kPublished);
  req.group = g.group_id;
  auto rec = w.repo->put_construction(w.teacher.user_id, req).value();
  w.repo->import_legacy_level(rec.record_id, 3);
  w.repo->put_construction(w.s1.user_id, request("scrap", testing::kCircumOrtho));

  const auto users = w.repo->users();
  const auto listing = w.repo->list_visible(w.teacher.user_id);
  const auto files = snapshot_files(w.dir.path());
  w.reopen();
  CHECK(w.repo->users() == users);
  CHECK(w.repo->find_group(g.group_id) == g);
  const auto again = w.repo->list_visible(w.teacher.user_id);
  REQUIRE(again.size() == listing.size());
  for (const auto& s : listing) {
    const auto before = w.repo->get_construction(w.teacher.user_id, s.record_id).value();
    CHECK(before.record_id == s.record_id);
    CHECK(before.modified == s.modified);
  }
  CHECK(w.repo->get_construction(w.teacher.user_id, rec.record_id)->legacy_level == 3);
  CHECK(snapshot_files(w.dir.path()) == files);
  CHECK(w.repo->authenticate("rui", "rui-pw"));
}

TEST_CASE("permission matrix at the repository layer") {
  World w;
  const auto m = testing::build_perm_matrix(w);
  const auto r = testing::sweep_repository(w, m);
  CHECK(r.cases == 512 * 8);
  CHECK_MESSAGE(r.deviations == 0, r.detail);
}

TEST_CASE("concurrent readers and writers") {
  World w;
  std::vector<std::thread> threads;
  std::atomic<int> failures{0};
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 25; ++i) {
        auto rec = w.repo->put_construction(w.teacher.user_id,
                                            request("t" + std::to_string(t), testing::kIncenter, kPublished));
        if (!rec || !w.repo->get_construction(w.s1.user_id, rec->record_id)) ++failures;
        w.repo->list_visible(w.s2.user_id);
      }
    });
  }
  for (auto& th : threads) th.join();
  CHECK(failures == 0);
  CHECK(w.repo->list_visible(w.s1.user_id).size() == 100);
}
