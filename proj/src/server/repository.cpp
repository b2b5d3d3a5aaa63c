#include "wgl/repository.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "wgl/util.hpp"

namespace wgl {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(RepoError::Kind kind) {
  switch (kind) {
    case RepoError::Kind::Forbidden:
      return "Forbidden";
    case RepoError::Kind::DuplicateLogin:
      return "DuplicateLogin";
    case RepoError::Kind::AuthFailure:
      return "AuthFailure";
    case RepoError::Kind::ParseRejected:
      return "ParseRejected";
    case RepoError::Kind::UnknownRecord:
      return "UnknownRecord";
    case RepoError::Kind::UnknownGroup:
      return "UnknownGroup";
    case RepoError::Kind::UnknownUser:
      return "UnknownUser";
    case RepoError::Kind::InvalidArgument:
      return "InvalidArgument";
  }
  return "Unknown";
}

namespace {

RepoError error(RepoError::Kind kind, std::string message) { return RepoError{kind, std::move(message), {}}; }

RepoError forbidden() { return error(RepoError::Kind::Forbidden, "permission denied"); }

std::size_t utf8_length(std::string_view s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char ch) { return (static_cast<unsigned char>(ch) & 0xC0) != 0x80; }));
}

RecordSummary summarize(const ConstructionRecord& r) {
  return {r.record_id, r.title, r.owner, r.perm, r.is_scrapbook, r.legacy_level, r.modified};
}

json user_json(const User& u) {
  return {{"user_id", u.user_id},         {"login_name", u.login_name},
          {"display_name", u.display_name}, {"role", std::string(to_string(u.role))},
          {"pass_hash", u.pass_hash},     {"created_by", u.created_by}};
}

User user_from(const json& j) {
  User u;
  j.at("user_id").get_to(u.user_id);
  j.at("login_name").get_to(u.login_name);
  j.at("display_name").get_to(u.display_name);
  const auto role = parse_role(j.at("role").get<std::string>());
  if (!role) throw std::runtime_error("users.json: bad role for " + u.user_id);
  u.role = *role;
  j.at("pass_hash").get_to(u.pass_hash);
  j.at("created_by").get_to(u.created_by);
  return u;
}

json group_json(const Group& g) {
  return {{"group_id", g.group_id}, {"name", g.name}, {"owner", g.owner}, {"members", g.members}};
}

Group group_from(const json& j) {
  Group g;
  j.at("group_id").get_to(g.group_id);
  j.at("name").get_to(g.name);
  j.at("owner").get_to(g.owner);
  g.members = j.at("members").get<std::set<std::string>>();
  return g;
}

json meta_json(const ConstructionRecord& r) {
  json j = {{"record_id", r.record_id},
            {"owner", r.owner},
            {"group", r.group ? json(*r.group) : json(nullptr)},
            {"perm", r.perm.str()},
            {"legacy_level", r.legacy_level ? json(*r.legacy_level) : json(nullptr)},
            {"title", r.title},
            {"is_scrapbook", r.is_scrapbook},
            {"created", util::to_rfc3339(r.created)},
            {"modified", util::to_rfc3339(r.modified)}};
  return j;
}

std::int64_t timestamp_from(const json& j, const char* key) {
  const auto t = util::parse_rfc3339(j.at(key).get<std::string>());
  if (!t) throw std::runtime_error(std::string("record metadata: bad timestamp in ") + key);
  return *t;
}

ConstructionRecord record_from(const json& j, std::string body) {
  ConstructionRecord r;
  j.at("record_id").get_to(r.record_id);
  j.at("owner").get_to(r.owner);
  if (!j.at("group").is_null()) r.group = j.at("group").get<std::string>();
  const auto perm = Perm::parse(j.at("perm").get<std::string>());
  if (!perm) throw std::runtime_error("record metadata: bad perm for " + r.record_id);
  r.perm = perm->normalized();
  if (!j.at("legacy_level").is_null()) r.legacy_level = j.at("legacy_level").get<std::int64_t>();
  j.at("title").get_to(r.title);
  j.at("is_scrapbook").get_to(r.is_scrapbook);
  r.created = timestamp_from(j, "created");
  r.modified = timestamp_from(j, "modified");
  r.body = std::move(body);
  return r;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

Repository::Repository(fs::path data_dir, RepositoryOptions options)
    : data_dir_(std::move(data_dir)), options_(std::move(options)) {
  std::error_code ec;
  fs::create_directories(data_dir_ / "records", ec);
  if (ec) throw std::runtime_error("cannot create data directory " + data_dir_.string() + ": " + ec.message());
  load();
  // Verified against when the login is unknown, so both failure paths cost the same.
  dummy_hash_ = hash_password("unused dummy password", options_.password);
}

std::int64_t Repository::now() const { return options_.clock ? options_.clock() : util::now_seconds(); }

bool Repository::valid_login(std::string_view login) {
  if (login.size() < 3 || login.size() > 32) return false;
  return std::all_of(login.begin(), login.end(), [](char ch) {
    return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '_' ||
           ch == '.' || ch == '-';
  });
}

std::string Repository::fresh_id(char prefix) const {
  for (;;) {
    std::string id = prefix + util::random_hex(8);
    if (!users_.count(id) && !groups_.count(id) && !records_.count(id)) return id;
  }
}

const User* Repository::user_locked(const std::string& id) const {
  auto it = users_.find(id);
  return it == users_.end() ? nullptr : &it->second;
}

// ---- users and authentication ---------------------------------------------

RepoResult<User> Repository::insert_user(User u, std::string_view password) {
  if (!valid_login(u.login_name)) {
    return unexpected(error(RepoError::Kind::InvalidArgument, "login names are 3-32 characters of [A-Za-z0-9_.-]"));
  }
  if (password.empty()) return unexpected(error(RepoError::Kind::InvalidArgument, "empty password"));
  if (u.display_name.empty()) u.display_name = u.login_name;
  u.pass_hash = hash_password(password, options_.password);
  {
    std::unique_lock lock(mutex_);
    for (const auto& [id, other] : users_) {
      if (other.login_name == u.login_name) {
        return unexpected(error(RepoError::Kind::DuplicateLogin, "login name already taken"));
      }
    }
    u.user_id = fresh_id('u');
    users_[u.user_id] = u;
    save_users();
  }
  log_event(u.created_by.empty() ? u.user_id : u.created_by, "user.create", u.user_id);
  return u;
}

RepoResult<User> Repository::seed_admin(std::string_view login, std::string_view display_name,
                                        std::string_view password) {
  return insert_user(User{{}, std::string(login), std::string(display_name), Role::Admin, {}, {}}, password);
}

RepoResult<User> Repository::create_user(const std::string& actor, std::string_view login,
                                         std::string_view display_name, Role role, std::string_view password) {
  {
    std::shared_lock lock(mutex_);
    const User* a = user_locked(actor);
    const bool allowed = a && ((role == Role::Teacher && a->role == Role::Admin) ||
                               (role == Role::Student && a->role == Role::Teacher));
    if (!allowed) return unexpected(forbidden());
  }
  return insert_user(User{{}, std::string(login), std::string(display_name), role, {}, actor}, password);
}

RepoResult<AuthToken> Repository::authenticate(std::string_view login, std::string_view password) {
  std::optional<User> user = find_user_by_login(login);
  const bool ok = verify_password(user ? user->pass_hash : dummy_hash_, password);
  if (!ok || !user) return unexpected(error(RepoError::Kind::AuthFailure, "invalid login or password"));
  AuthToken t{util::random_hex(16), user->user_id, user->role, now() + options_.token_ttl};
  {
    std::lock_guard lock(token_mutex_);
    const std::int64_t current = now();
    std::erase_if(tokens_, [&](const auto& kv) { return kv.second.expires <= current; });
    tokens_[t.token] = t;
  }
  log_event(user->user_id, "login", user->user_id);
  return t;
}

std::optional<AuthToken> Repository::introspect(std::string_view token) const {
  std::lock_guard lock(token_mutex_);
  auto it = tokens_.find(token);
  if (it == tokens_.end() || it->second.expires <= now()) return std::nullopt;
  return it->second;
}

void Repository::revoke_token(std::string_view token) {
  std::lock_guard lock(token_mutex_);
  auto it = tokens_.find(token);
  if (it != tokens_.end()) tokens_.erase(it);
}

std::optional<User> Repository::find_user(const std::string& user_id) const {
  std::shared_lock lock(mutex_);
  const User* u = user_locked(user_id);
  return u ? std::optional<User>(*u) : std::nullopt;
}

std::optional<User> Repository::find_user_by_login(std::string_view login) const {
  std::shared_lock lock(mutex_);
  for (const auto& [id, u] : users_) {
    if (u.login_name == login) return u;
  }
  return std::nullopt;
}

std::vector<User> Repository::users() const {
  std::shared_lock lock(mutex_);
  std::vector<User> out;
  for (const auto& [id, u] : users_) out.push_back(u);
  return out;
}

bool Repository::is_student_of(const std::string& student_id, const std::string& teacher_id) const {
  std::shared_lock lock(mutex_);
  const User* s = user_locked(student_id);
  return s && s->role == Role::Student && s->created_by == teacher_id;
}

// ---- records --------------------------------------------------------------

AccessContext Repository::context_locked(const User& actor, const ConstructionRecord& r) const {
  AccessContext ctx;
  ctx.is_owner = r.owner == actor.user_id;
  if (r.group) {
    auto g = groups_.find(*r.group);
    ctx.in_group = g != groups_.end() && (g->second.owner == actor.user_id || g->second.members.count(actor.user_id));
  }
  if (actor.role == Role::Teacher && r.is_scrapbook) {
    const User* owner = user_locked(r.owner);
    ctx.teacher_of_scrapbook = owner && owner->created_by == actor.user_id;
  }
  return ctx;
}

std::optional<AccessContext> Repository::access_context(const std::string& actor,
                                                        const std::string& record_id) const {
  std::shared_lock lock(mutex_);
  const User* a = user_locked(actor);
  auto it = records_.find(record_id);
  if (!a || it == records_.end()) return std::nullopt;
  return context_locked(*a, it->second);
}

bool Repository::is_visible(const std::string& actor, const std::string& record_id) const {
  std::shared_lock lock(mutex_);
  const User* a = user_locked(actor);
  auto it = records_.find(record_id);
  return a && it != records_.end() && can_see(it->second.perm, context_locked(*a, it->second));
}

RepoResult<ConstructionRecord> Repository::put_construction(const std::string& actor, const PutRequest& req) {
  auto parsed = format::parse(req.body);
  if (!parsed) {
    RepoError e = error(RepoError::Kind::ParseRejected, parsed.error().message);
    e.parse = parsed.error();
    return unexpected(std::move(e));
  }
  if (utf8_length(req.title) > kMaxTitleChars) {
    return unexpected(error(RepoError::Kind::InvalidArgument, "title longer than 128 characters"));
  }

  ConstructionRecord result;
  {
    std::unique_lock lock(mutex_);
    const User* a = user_locked(actor);
    if (!a) return unexpected(forbidden());

    ConstructionRecord r;
    if (req.record_id) {
      auto it = records_.find(*req.record_id);
      if (it == records_.end()) return unexpected(forbidden());
      r = it->second;
      const AccessContext ctx = context_locked(*a, r);
      if (!can_write(r.perm, ctx)) return unexpected(forbidden());
      // Non-owners with write access may change content only.
      if (!ctx.is_owner && ((req.perm && req.perm->normalized() != r.perm) || (req.group && req.group != r.group))) {
        return unexpected(forbidden());
      }
      if (req.perm) r.perm = req.perm->normalized();
    } else {
      r.record_id = fresh_id('r');
      r.owner = actor;
      r.is_scrapbook = a->role == Role::Student;
      r.perm = req.perm ? req.perm->normalized() : Perm::owner_only();
      r.created = now();
    }
    if (req.group && req.group != r.group) {
      auto g = groups_.find(*req.group);
      if (g == groups_.end()) return unexpected(error(RepoError::Kind::UnknownGroup, "unknown group"));
      if (g->second.owner != r.owner && !g->second.members.count(r.owner)) return unexpected(forbidden());
      r.group = *req.group;
    }
    r.title = req.title;
    r.body = format::serialize(*parsed);
    r.modified = std::max(now(), r.created);
    records_[r.record_id] = r;
    save_record(r);
    result = r;
  }
  log_event(actor, "construction.put", result.record_id);
  return result;
}

RepoResult<ConstructionRecord> Repository::get_construction(const std::string& actor,
                                                            const std::string& record_id) const {
  std::shared_lock lock(mutex_);
  const User* a = user_locked(actor);
  auto it = records_.find(record_id);
  // Missing and invisible records are indistinguishable.
  if (!a || it == records_.end()) return unexpected(forbidden());
  if (!can_read(it->second.perm, context_locked(*a, it->second))) return unexpected(forbidden());
  return it->second;
}

std::vector<RecordSummary> Repository::sorted(std::vector<RecordSummary> v) const {
  std::sort(v.begin(), v.end(), [](const RecordSummary& x, const RecordSummary& y) {
    if (x.modified != y.modified) return x.modified > y.modified;
    return x.record_id < y.record_id;
  });
  return v;
}

std::vector<RecordSummary> Repository::list_visible(const std::string& actor) const {
  std::shared_lock lock(mutex_);
  std::vector<RecordSummary> out;
  const User* a = user_locked(actor);
  if (!a) return out;
  for (const auto& [id, r] : records_) {
    if (can_see(r.perm, context_locked(*a, r))) out.push_back(summarize(r));
  }
  return sorted(std::move(out));
}

RepoResult<std::vector<RecordSummary>> Repository::scrapbook(const std::string& actor,
                                                             const std::string& student_id) const {
  std::shared_lock lock(mutex_);
  const User* a = user_locked(actor);
  const User* s = user_locked(student_id);
  if (!a || !s || s->role != Role::Student) return unexpected(forbidden());
  const bool allowed = a->user_id == s->user_id || (a->role == Role::Teacher && s->created_by == a->user_id);
  if (!allowed) return unexpected(forbidden());
  std::vector<RecordSummary> out;
  for (const auto& [id, r] : records_) {
    if (r.is_scrapbook && r.owner == student_id) out.push_back(summarize(r));
  }
  return sorted(std::move(out));
}

RepoResult<ConstructionRecord> Repository::set_perm(const std::string& actor, const std::string& record_id,
                                                    const Perm& perm, std::optional<std::string> group) {
  ConstructionRecord result;
  {
    std::unique_lock lock(mutex_);
    auto it = records_.find(record_id);
    if (it == records_.end() || it->second.owner != actor) return unexpected(forbidden());
    if (group) {
      auto g = groups_.find(*group);
      if (g == groups_.end()) return unexpected(error(RepoError::Kind::UnknownGroup, "unknown group"));
      if (g->second.owner != actor && !g->second.members.count(actor)) return unexpected(forbidden());
    }
    it->second.perm = perm.normalized();
    it->second.group = std::move(group);
    save_record(it->second);
    result = it->second;
  }
  log_event(actor, "perm.set", record_id);
  return result;
}

RepoResult<Perm> Repository::import_legacy_level(const std::string& record_id, std::int64_t level) {
  Perm perm;
  std::string owner;
  {
    std::unique_lock lock(mutex_);
    auto it = records_.find(record_id);
    if (it == records_.end()) return unexpected(error(RepoError::Kind::UnknownRecord, "unknown record"));
    it->second.perm = perm_from_legacy_level(level);
    it->second.legacy_level = level;
    save_record(it->second);
    perm = it->second.perm;
    owner = it->second.owner;
  }
  log_event(owner, "legacy.import", record_id);
  return perm;
}

RepoResult<void> Repository::delete_construction(const std::string& actor, const std::string& record_id) {
  {
    std::unique_lock lock(mutex_);
    auto it = records_.find(record_id);
    if (it == records_.end() || it->second.owner != actor) return unexpected(forbidden());
    records_.erase(it);
    std::error_code ec;
    fs::remove(data_dir_ / "records" / (record_id + ".meta.json"), ec);
    fs::remove(data_dir_ / "records" / (record_id + ".wgl"), ec);
  }
  log_event(actor, "construction.delete", record_id);
  return {};
}

// ---- groups ---------------------------------------------------------------

RepoResult<Group> Repository::create_group(const std::string& actor, std::string_view name,
                                           const std::set<std::string>& members) {
  Group g;
  {
    std::unique_lock lock(mutex_);
    const User* a = user_locked(actor);
    if (!a || a->role != Role::Teacher) return unexpected(forbidden());
    if (name.empty()) return unexpected(error(RepoError::Kind::InvalidArgument, "empty group name"));
    for (const auto& m : members) {
      const User* s = user_locked(m);
      if (!s || s->role != Role::Student || s->created_by != actor) {
        return unexpected(error(RepoError::Kind::InvalidArgument, "group members must be the teacher's students"));
      }
    }
    g = Group{fresh_id('g'), std::string(name), actor, members};
    groups_[g.group_id] = g;
    save_groups();
  }
  log_event(actor, "group.create", g.group_id);
  return g;
}

RepoResult<Group> Repository::update_group(const std::string& actor, const std::string& group_id,
                                           std::optional<std::string> name,
                                           std::optional<std::set<std::string>> members) {
  Group g;
  {
    std::unique_lock lock(mutex_);
    auto it = groups_.find(group_id);
    if (it == groups_.end()) return unexpected(error(RepoError::Kind::UnknownGroup, "unknown group"));
    if (it->second.owner != actor) return unexpected(forbidden());
    if (name && name->empty()) return unexpected(error(RepoError::Kind::InvalidArgument, "empty group name"));
    if (members) {
      for (const auto& m : *members) {
        const User* s = user_locked(m);
        if (!s || s->role != Role::Student || s->created_by != actor) {
          return unexpected(error(RepoError::Kind::InvalidArgument, "group members must be the teacher's students"));
        }
      }
      it->second.members = std::move(*members);
    }
    if (name) it->second.name = std::move(*name);
    save_groups();
    g = it->second;
  }
  log_event(actor, "group.update", group_id);
  return g;
}

std::optional<Group> Repository::find_group(const std::string& group_id) const {
  std::shared_lock lock(mutex_);
  auto it = groups_.find(group_id);
  return it == groups_.end() ? std::nullopt : std::optional<Group>(it->second);
}

// ---- event log ------------------------------------------------------------

void Repository::log_event(const std::string& actor, std::string_view action, const std::string& subject) {
  std::lock_guard lock(log_mutex_);
  last_log_ts_ = std::max(last_log_ts_, now());
  nlohmann::ordered_json line;
  line["ts"] = util::to_rfc3339(last_log_ts_);
  line["actor"] = actor;
  line["action"] = std::string(action);
  line["subject"] = subject;
  std::ofstream out(data_dir_ / "events.log", std::ios::app | std::ios::binary);
  if (out) out << line.dump() << '\n';
  if (!out) {
    const std::string msg = "events.log append failed for action " + std::string(action);
    if (options_.on_log_failure) {
      options_.on_log_failure(msg);
    } else {
      std::cerr << "wgl: " << msg << '\n';
    }
  }
}

// ---- persistence ----------------------------------------------------------

void Repository::load() {
  if (auto text = util::read_file(data_dir_ / "users.json")) {
    const json all = json::parse(*text);
    for (const auto& [id, j] : all.items()) users_[id] = user_from(j);
  }
  if (auto text = util::read_file(data_dir_ / "groups.json")) {
    const json all = json::parse(*text);
    for (const auto& [id, j] : all.items()) groups_[id] = group_from(j);
  }
  const std::string suffix = ".meta.json";
  for (const auto& entry : fs::directory_iterator(data_dir_ / "records")) {
    const std::string name = entry.path().filename().string();
    if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
      continue;
    }
    const std::string id = name.substr(0, name.size() - suffix.size());
    auto meta = util::read_file(entry.path());
    auto body = util::read_file(data_dir_ / "records" / (id + ".wgl"));
    if (!meta || !body) throw std::runtime_error("incomplete record " + id);
    if (!format::parse(*body)) throw std::runtime_error("record " + id + " body does not parse");
    records_[id] = record_from(json::parse(*meta), std::move(*body));
  }
}

void Repository::save_users() const {
  json j = json::object();
  for (const auto& [id, u] : users_) j[id] = user_json(u);
  util::write_file_atomic(data_dir_ / "users.json", dump(j));
}

void Repository::save_groups() const {
  json j = json::object();
  for (const auto& [id, g] : groups_) j[id] = group_json(g);
  util::write_file_atomic(data_dir_ / "groups.json", dump(j));
}

void Repository::save_record(const ConstructionRecord& r) const {
  util::write_file_atomic(data_dir_ / "records" / (r.record_id + ".wgl"), r.body);
  util::write_file_atomic(data_dir_ / "records" / (r.record_id + ".meta.json"), dump(meta_json(r)));
}

}  // namespace wgl
