#include "wgl/classroom.hpp"

#include <nlohmann/json.hpp>

#include "wgl/format.hpp"
#include "wgl/util.hpp"

namespace wgl::classroom {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

SessionError fail(SessionError::Kind kind, std::string message) { return SessionError{kind, std::move(message), 0, {}}; }

SessionError forbidden() { return fail(SessionError::Kind::Forbidden, "not allowed in this session"); }

SessionError unknown_session() { return fail(SessionError::Kind::UnknownSession, "unknown session"); }

SessionError from_repo(RepoError e) {
  SessionError out;
  out.kind = e.kind == RepoError::Kind::Forbidden ? SessionError::Kind::Forbidden : SessionError::Kind::Repository;
  out.message = e.message;
  out.repo = std::move(e);
  return out;
}

}  // namespace

std::string_view op_keyword(const OpKind& kind) {
  return std::visit(Overloaded{[](const op::AddStep&) { return "add"; }, [](const op::RemoveStep&) { return "remove"; },
                               [](const op::MoveFree&) { return "move"; },
                               [](const op::ReplaceAll&) { return "replace"; }},
                    kind);
}

Expected<Construction, std::string> apply_to(const Construction& c, const OpKind& kind) {
  return std::visit(
      Overloaded{
          [&](const op::AddStep& a) -> Expected<Construction, std::string> {
            Construction next = c;
            if (auto r = next.add(a.step); !r) return unexpected(r.error().message);
            return next;
          },
          [&](const op::RemoveStep& r) -> Expected<Construction, std::string> {
            Construction next = c;
            if (auto res = next.remove(r.id); !res) return unexpected(res.error().message);
            return next;
          },
          [&](const op::MoveFree& m) -> Expected<Construction, std::string> {
            auto moved = move_free(c, m.id, m.x, m.y);
            if (!moved) return unexpected(moved.error().message);
            return std::move(*moved);
          },
          [&](const op::ReplaceAll& r) -> Expected<Construction, std::string> { return r.construction; },
      },
      kind);
}

Construction replay(const std::vector<WorkbenchOp>& log) {
  Construction c;
  for (const auto& o : log) {
    auto next = apply_to(c, o.kind);
    if (!next) throw std::invalid_argument("op log does not replay at seq " + std::to_string(o.op_seq));
    c = std::move(*next);
  }
  return c;
}

std::string_view to_string(GrantMode m) { return m == GrantMode::Watch ? "watch" : "edit"; }

std::optional<GrantMode> parse_grant_mode(std::string_view s) {
  if (s == "watch") return GrantMode::Watch;
  if (s == "edit") return GrantMode::Edit;
  return std::nullopt;
}

std::string_view to_string(SessionError::Kind kind) {
  switch (kind) {
    case SessionError::Kind::ExpectedSeq:
      return "ExpectedSeq";
    case SessionError::Kind::Forbidden:
      return "Forbidden";
    case SessionError::Kind::InvalidOp:
      return "InvalidOp";
    case SessionError::Kind::UnknownSession:
      return "UnknownSession";
    case SessionError::Kind::UnknownTarget:
      return "UnknownTarget";
    case SessionError::Kind::UnknownMember:
      return "UnknownMember";
    case SessionError::Kind::Repository:
      return "Repository";
  }
  return "Unknown";
}

struct SessionManager::Bench {
  mutable std::mutex mutex;
  /// Serializes saves of this workbench without blocking its op stream.
  std::mutex save_mutex;
  std::string owner;
  Construction construction;
  std::uint64_t seq = 0;
  bool dirty = false;
  std::optional<std::string> saved_record;
  std::set<std::string> watchers;
  std::vector<WorkbenchOp> log;
};

struct SessionManager::Session {
  mutable std::shared_mutex mutex;
  std::string id;
  std::string teacher;
  std::int64_t created = 0;
  std::map<std::string, std::unique_ptr<Bench>> benches;
  /// (grantor, grantee) -> mode
  std::map<std::pair<std::string, std::string>, GrantMode> grants;
  std::map<std::uint64_t, std::pair<std::string, Sink>> sinks;

  Bench* bench(const std::string& owner) const {
    auto it = benches.find(owner);
    return it == benches.end() ? nullptr : it->second.get();
  }
};

SessionManager::SessionManager(Repository& repo) : repo_(repo) {}

SessionManager::~SessionManager() = default;

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& session_id) const {
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(session_id);
  return it == sessions_.end() ? nullptr : it->second;
}

bool SessionManager::may_watch(const Session& s, const std::string& watcher, const std::string& target) const {
  if (watcher == target || watcher == s.teacher) return true;
  return s.grants.count({target, watcher}) > 0;
}

bool SessionManager::may_edit(const Session& s, const std::string& author, const std::string& target) const {
  if (author == target || author == s.teacher) return true;
  auto it = s.grants.find({target, author});
  return it != s.grants.end() && it->second == GrantMode::Edit;
}

void SessionManager::notify_locked(const Session& s, const Bench& b, const Notification& n,
                                   const std::string& extra_recipient) const {
  for (const auto& [id, entry] : s.sinks) {
    const std::string& user = entry.first;
    if (user == b.owner || user == s.teacher || user == extra_recipient || b.watchers.count(user)) entry.second(n);
  }
}

SessionResult<std::uint64_t> SessionManager::apply_locked(Session& s, Bench& b, const WorkbenchOp& o, bool clean) {
  if (o.op_seq != b.seq + 1) {
    SessionError e = fail(SessionError::Kind::ExpectedSeq, "expected op_seq " + std::to_string(b.seq + 1));
    e.expected = b.seq + 1;
    return unexpected(std::move(e));
  }
  auto next = apply_to(b.construction, o.kind);
  if (!next) return unexpected(fail(SessionError::Kind::InvalidOp, next.error()));
  b.construction = std::move(*next);
  b.seq = o.op_seq;
  b.dirty = !clean;
  b.log.push_back(o);
  notify_locked(s, b, OpApplied{b.owner, b.seq, o}, o.author);
  return b.seq;
}

SessionResult<std::string> SessionManager::create_session(const std::string& teacher) {
  const auto user = repo_.find_user(teacher);
  if (!user || user->role != Role::Teacher) return unexpected(forbidden());
  auto s = std::make_shared<Session>();
  s->teacher = teacher;
  s->created = repo_.now();
  auto bench = std::make_unique<Bench>();
  bench->owner = teacher;
  s->benches.emplace(teacher, std::move(bench));
  {
    std::unique_lock lock(mutex_);
    do {
      s->id = "s" + util::random_hex(8);
    } while (sessions_.count(s->id));
    sessions_[s->id] = s;
  }
  repo_.log_event(teacher, "session.create", s->id);
  return s->id;
}

SessionResult<Snapshot> SessionManager::join(const std::string& session_id, const std::string& user) {
  auto s = find(session_id);
  if (!s) return unexpected(unknown_session());
  if (user != s->teacher && !repo_.is_student_of(user, s->teacher)) return unexpected(forbidden());
  Snapshot snap;
  bool fresh = false;
  {
    std::unique_lock lock(s->mutex);
    auto& slot = s->benches[user];
    if (!slot) {
      slot = std::make_unique<Bench>();
      slot->owner = user;
      fresh = true;
    }
    std::lock_guard bl(slot->mutex);
    snap = Snapshot{user, slot->seq, slot->construction};
  }
  if (fresh) repo_.log_event(user, "session.join", session_id);
  return snap;
}

SessionResult<SessionInfo> SessionManager::info(const std::string& session_id, const std::string& actor) const {
  auto s = find(session_id);
  if (!s) return unexpected(unknown_session());
  std::shared_lock lock(s->mutex);
  if (actor != s->teacher && !s->benches.count(actor) && !repo_.is_student_of(actor, s->teacher)) {
    return unexpected(forbidden());
  }
  SessionInfo out{s->id, s->teacher, s->created, {}};
  for (const auto& [owner, b] : s->benches) {
    std::lock_guard bl(b->mutex);
    out.seqs[owner] = b->seq;
  }
  return out;
}

SessionResult<std::uint64_t> SessionManager::apply_op(const std::string& session_id, const std::string& target,
                                                      const WorkbenchOp& o) {
  auto s = find(session_id);
  if (!s) return unexpected(unknown_session());
  std::shared_lock lock(s->mutex);
  Bench* b = s->bench(target);
  if (!b) return unexpected(fail(SessionError::Kind::UnknownTarget, "no such workbench"));
  if (!may_edit(*s, o.author, target)) return unexpected(forbidden());
  std::lock_guard bl(b->mutex);
  return apply_locked(*s, *b, o, false);
}

SessionResult<Snapshot> SessionManager::watch(const std::string& session_id, const std::string& watcher,
                                              const std::string& target) {
  auto s = find(session_id);
  if (!s) return unexpected(unknown_session());
  std::shared_lock lock(s->mutex);
  Bench* b = s->bench(target);
  if (!b) return unexpected(fail(SessionError::Kind::UnknownTarget, "no such workbench"));
  if (!may_watch(*s, watcher, target)) return unexpected(forbidden());
  // Snapshot and subscription under the workbench lock: no op falls between them.
  std::lock_guard bl(b->mutex);
  b->watchers.insert(watcher);
  return Snapshot{target, b->seq, b->construction};
}

SessionResult<Snapshot> SessionManager::snapshot(const std::string& session_id, const std::string& actor,
                                                 const std::string& target) const {
  auto s = find(session_id);
  if (!s) return unexpected(unknown_session());
  std::shared_lock lock(s->mutex);
  const Bench* b = s->bench(target);
  if (!b) return unexpected(fail(SessionError::Kind::UnknownTarget, "no such workbench"));
  if (!may_watch(*s, actor, target)) return unexpected(forbidden());
  std::lock_guard bl(b->mutex);
  return Snapshot{target, b->seq, b->construction};
}

RepoResult<std::string> SessionManager::persist(const Session& s, const Bench& b, const std::string& body) {
  PutRequest req;
  req.record_id = b.saved_record;
  req.title = "Workbench " + s.id;
  req.body = body;
  auto r = repo_.put_construction(b.owner, req);
  if (!r && req.record_id && r.error().kind == RepoError::Kind::Forbidden) {
    // The earlier save was deleted meanwhile; start a new record.
    req.record_id.reset();
    r = repo_.put_construction(b.owner, req);
  }
  if (!r) return unexpected(r.error());
  return r->record_id;
}

SessionResult<std::size_t> SessionManager::broadcast(const std::string& session_id, const std::string& teacher,
                                                     const Construction& construction) {
  auto s = find(session_id);
  if (!s) return unexpected(unknown_session());
  std::size_t count = 0;
  {
    std::shared_lock lock(s->mutex);
    if (teacher != s->teacher) return unexpected(forbidden());
    for (auto& [owner, b] : s->benches) {
      std::lock_guard save(b->save_mutex);
      std::lock_guard bl(b->mutex);
      if (b->dirty && owner != s->teacher) {
        auto saved = persist(*s, *b, format::serialize(b->construction));
        if (!saved) return unexpected(from_repo(saved.error()));
        b->saved_record = *saved;
        repo_.log_event(owner, "workbench.autosave", *saved);
      }
      auto r = apply_locked(*s, *b, WorkbenchOp{op::ReplaceAll{construction}, b->seq + 1, teacher}, true);
      if (!r) return unexpected(r.error());
      ++count;
    }
  }
  repo_.log_event(teacher, "session.broadcast", session_id);
  return count;
}

SessionResult<void> SessionManager::grant(const std::string& session_id, const std::string& grantor,
                                          const std::string& grantee, GrantMode mode) {
  auto s = find(session_id);
  if (!s) return unexpected(unknown_session());
  std::unique_lock lock(s->mutex);
  if (!s->benches.count(grantor) || grantor == grantee) return unexpected(forbidden());
  if (!s->benches.count(grantee)) return unexpected(fail(SessionError::Kind::UnknownMember, "grantee has not joined"));
  s->grants[{grantor, grantee}] = mode;
  const GrantChanged n{grantor, grantee, mode};
  for (const auto& [id, entry] : s->sinks) {
    if (entry.first == grantor || entry.first == grantee) entry.second(n);
  }
  return {};
}

SessionResult<void> SessionManager::revoke(const std::string& session_id, const std::string& grantor,
                                           const std::string& grantee) {
  auto s = find(session_id);
  if (!s) return unexpected(unknown_session());
  std::unique_lock lock(s->mutex);
  Bench* b = s->bench(grantor);
  if (!b) return unexpected(forbidden());
  if (!s->benches.count(grantee)) return unexpected(fail(SessionError::Kind::UnknownMember, "grantee has not joined"));
  s->grants.erase({grantor, grantee});
  if (grantee != s->teacher) {
    std::lock_guard bl(b->mutex);
    b->watchers.erase(grantee);
  }
  const GrantChanged n{grantor, grantee, std::nullopt};
  for (const auto& [id, entry] : s->sinks) {
    if (entry.first == grantor || entry.first == grantee) entry.second(n);
  }
  return {};
}

SessionResult<std::string> SessionManager::save_workbench(const std::string& session_id, const std::string& actor,
                                                          const std::string& owner) {
  auto s = find(session_id);
  if (!s) return unexpected(unknown_session());
  std::shared_lock lock(s->mutex);
  Bench* b = s->bench(owner);
  if (!b) return unexpected(fail(SessionError::Kind::UnknownTarget, "no such workbench"));
  if (actor != owner && actor != s->teacher) return unexpected(forbidden());

  std::lock_guard save(b->save_mutex);
  std::string body;
  std::uint64_t seq = 0;
  {
    std::lock_guard bl(b->mutex);
    body = format::serialize(b->construction);
    seq = b->seq;
  }
  // Repository I/O happens outside the workbench lock so ops keep flowing.
  auto saved = persist(*s, *b, body);
  if (!saved) return unexpected(from_repo(saved.error()));
  {
    std::lock_guard bl(b->mutex);
    b->saved_record = *saved;
    if (b->seq == seq) b->dirty = false;
  }
  repo_.log_event(actor, "workbench.save", *saved);
  return *saved;
}

SessionResult<std::uint64_t> SessionManager::load_into_workbench(const std::string& session_id,
                                                                 const std::string& actor, const std::string& owner,
                                                                 const std::string& record_id) {
  auto s = find(session_id);
  if (!s) return unexpected(unknown_session());
  std::shared_lock lock(s->mutex);
  Bench* b = s->bench(owner);
  if (!b) return unexpected(fail(SessionError::Kind::UnknownTarget, "no such workbench"));
  if (!may_edit(*s, actor, owner)) return unexpected(forbidden());
  auto rec = repo_.get_construction(actor, record_id);
  if (!rec) return unexpected(from_repo(rec.error()));
  auto parsed = format::parse(rec->body);
  if (!parsed) return unexpected(fail(SessionError::Kind::InvalidOp, parsed.error().message));
  std::lock_guard bl(b->mutex);
  return apply_locked(*s, *b, WorkbenchOp{op::ReplaceAll{std::move(*parsed)}, b->seq + 1, actor}, false);
}

SessionResult<void> SessionManager::end_session(const std::string& session_id, const std::string& teacher) {
  auto s = find(session_id);
  if (!s) return unexpected(unknown_session());
  {
    std::shared_lock lock(s->mutex);
    if (teacher != s->teacher) return unexpected(forbidden());
    write_snapshot(*s);
  }
  {
    std::unique_lock lock(mutex_);
    sessions_.erase(session_id);
  }
  repo_.log_event(teacher, "session.end", session_id);
  return {};
}

SessionResult<std::vector<WorkbenchOp>> SessionManager::op_log(const std::string& session_id,
                                                               const std::string& owner) const {
  auto s = find(session_id);
  if (!s) return unexpected(unknown_session());
  std::shared_lock lock(s->mutex);
  const Bench* b = s->bench(owner);
  if (!b) return unexpected(fail(SessionError::Kind::UnknownTarget, "no such workbench"));
  std::lock_guard bl(b->mutex);
  return b->log;
}

SessionResult<bool> SessionManager::is_dirty(const std::string& session_id, const std::string& owner) const {
  auto s = find(session_id);
  if (!s) return unexpected(unknown_session());
  std::shared_lock lock(s->mutex);
  const Bench* b = s->bench(owner);
  if (!b) return unexpected(fail(SessionError::Kind::UnknownTarget, "no such workbench"));
  std::lock_guard bl(b->mutex);
  return b->dirty;
}

SessionResult<std::uint64_t> SessionManager::attach(const std::string& session_id, const std::string& user,
                                                    Sink sink) {
  auto s = find(session_id);
  if (!s) return unexpected(unknown_session());
  if (user != s->teacher && !repo_.is_student_of(user, s->teacher)) return unexpected(forbidden());
  std::unique_lock lock(s->mutex);
  const std::uint64_t id = next_connection_++;
  s->sinks[id] = {user, std::move(sink)};
  return id;
}

void SessionManager::detach(const std::string& session_id, std::uint64_t connection) {
  auto s = find(session_id);
  if (!s) return;
  std::unique_lock lock(s->mutex);
  auto it = s->sinks.find(connection);
  if (it == s->sinks.end()) return;
  const std::string user = it->second.first;
  s->sinks.erase(it);
  for (const auto& [id, entry] : s->sinks) {
    if (entry.first == user) return;
  }
  // Last connection of this user: drop its subscriptions.
  for (auto& [owner, b] : s->benches) {
    std::lock_guard bl(b->mutex);
    b->watchers.erase(user);
  }
}

void SessionManager::write_snapshot(const Session& s) const {
  nlohmann::json benches = nlohmann::json::object();
  for (const auto& [owner, b] : s.benches) {
    std::lock_guard bl(b->mutex);
    benches[owner] = {{"seq", b->seq},
                      {"dirty", b->dirty},
                      {"saved_record", b->saved_record ? nlohmann::json(*b->saved_record) : nlohmann::json(nullptr)},
                      {"construction", format::serialize(b->construction)}};
  }
  nlohmann::json grants = nlohmann::json::array();
  for (const auto& [key, mode] : s.grants) {
    grants.push_back({{"grantor", key.first}, {"grantee", key.second}, {"mode", std::string(to_string(mode))}});
  }
  const nlohmann::json j = {{"session_id", s.id},
                            {"teacher", s.teacher},
                            {"created", util::to_rfc3339(s.created)},
                            {"snapshot_at", util::to_rfc3339(repo_.now())},
                            {"workbenches", benches},
                            {"grants", grants}};
  const auto dir = repo_.data_dir() / "sessions";
  std::filesystem::create_directories(dir);
  util::write_file_atomic(dir / (s.id + ".json"), j.dump(2) + "\n");
}

void SessionManager::snapshot_all() const {
  std::vector<std::shared_ptr<Session>> all;
  {
    std::shared_lock lock(mutex_);
    for (const auto& [id, s] : sessions_) all.push_back(s);
  }
  for (const auto& s : all) {
    std::shared_lock lock(s->mutex);
    write_snapshot(*s);
  }
}

}  // namespace wgl::classroom
