#include "wgl/http_api.hpp"

#include <cctype>
#include <nlohmann/json.hpp>
#include <vector>

#include "wgl/format.hpp"
#include "wgl/probe.hpp"
#include "wgl/util.hpp"

namespace wgl::http {

using Json = nlohmann::ordered_json;

std::string Request::header(const std::string& name) const {
  auto it = headers.find(name);
  return it == headers.end() ? std::string{} : it->second;
}

std::string url_decode(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '+') {
      out.push_back(' ');
    } else if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
               std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
      out.push_back(static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16)));
      i += 2;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

std::map<std::string, std::string> parse_query(std::string_view q) {
  std::map<std::string, std::string> out;
  while (!q.empty()) {
    const auto amp = q.find('&');
    const std::string_view kv = q.substr(0, amp);
    q = amp == std::string_view::npos ? std::string_view{} : q.substr(amp + 1);
    if (kv.empty()) continue;
    const auto eq = kv.find('=');
    out[url_decode(kv.substr(0, eq))] = eq == std::string_view::npos ? std::string{} : url_decode(kv.substr(eq + 1));
  }
  return out;
}

namespace {

Json user_json(const User& u) {
  return Json{{"user_id", u.user_id},
              {"login", u.login_name},
              {"display_name", u.display_name},
              {"role", to_string(u.role)}};
}

Json summary_json(const RecordSummary& r) {
  Json j{{"record_id", r.record_id}, {"title", r.title},       {"owner", r.owner}, {"perm", r.perm.str()},
         {"is_scrapbook", r.is_scrapbook}, {"legacy_level", nullptr}, {"modified", util::to_rfc3339(r.modified)}};
  if (r.legacy_level) j["legacy_level"] = *r.legacy_level;
  return j;
}

Json record_json(const ConstructionRecord& r) {
  Json j{{"record_id", r.record_id},
         {"title", r.title},
         {"owner", r.owner},
         {"group", nullptr},
         {"perm", r.perm.str()},
         {"is_scrapbook", r.is_scrapbook},
         {"legacy_level", nullptr},
         {"created", util::to_rfc3339(r.created)},
         {"modified", util::to_rfc3339(r.modified)},
         {"body", r.body}};
  if (r.group) j["group"] = *r.group;
  if (r.legacy_level) j["legacy_level"] = *r.legacy_level;
  return j;
}

Json group_json(const Group& g) {
  return Json{{"group_id", g.group_id}, {"name", g.name}, {"owner", g.owner}, {"members", g.members}};
}

Response json_response(int status, const Json& j) { return Response{status, "application/json", j.dump()}; }

Response no_content() { return Response{204, "application/json", ""}; }

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> segs;
  while (!path.empty()) {
    if (path.front() == '/') {
      path.remove_prefix(1);
      continue;
    }
    const auto slash = path.find('/');
    segs.push_back(url_decode(path.substr(0, slash)));
    path = slash == std::string_view::npos ? std::string_view{} : path.substr(slash);
  }
  return segs;
}

struct BadRequest {
  std::string detail;
};

const nlohmann::json* member(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

std::string need_string(const nlohmann::json& j, const char* key) {
  const auto* v = member(j, key);
  if (!v || !v->is_string()) throw BadRequest{std::string("missing string field '") + key + "'"};
  return v->get<std::string>();
}

std::optional<std::string> opt_string(const nlohmann::json& j, const char* key) {
  const auto* v = member(j, key);
  if (!v) return std::nullopt;
  if (!v->is_string()) throw BadRequest{std::string("field '") + key + "' must be a string"};
  return v->get<std::string>();
}

std::optional<Perm> opt_perm(const nlohmann::json& j) {
  auto s = opt_string(j, "perm");
  if (!s) return std::nullopt;
  auto p = Perm::parse(*s);
  if (!p) throw BadRequest{"field 'perm' must look like rwvr-v---"};
  return p;
}

std::set<std::string> string_set(const nlohmann::json& v, const char* key) {
  if (!v.is_array()) throw BadRequest{std::string("field '") + key + "' must be an array of strings"};
  std::set<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw BadRequest{std::string("field '") + key + "' must be an array of strings"};
    out.insert(e.get<std::string>());
  }
  return out;
}

std::string_view message_key(std::string_view code) {
  static const std::map<std::string_view, std::string_view> keys = {
      {"unauthorized", "error.unauthorized"},
      {"auth_failed", "error.auth_failed"},
      {"forbidden", "error.forbidden"},
      {"not_found", "error.not_found"},
      {"conflict", "error.conflict"},
      {"parse_error", "error.parse"},
      {"bad_request", "error.bad_request"},
      {"invalid_argument", "error.invalid_argument"},
      {"method_not_allowed", "error.method_not_allowed"},
      {"unknown_session", "error.unknown_session"},
      {"session_error", "error.session"},
      {"too_large", "error.too_large"},
      {"internal", "error.internal"},
  };
  auto it = keys.find(code);
  return it == keys.end() ? "error.internal" : it->second;
}

}  // namespace

struct Api::Call {
  const Request& req;
  std::string path;
  std::map<std::string, std::string> query;
  std::string locale;
  std::optional<AuthToken> auth;
  std::optional<nlohmann::json> body_json;

  const std::string& actor() const { return auth->user_id; }
  bool is(std::string_view m) const { return req.method == m; }

  const nlohmann::json& body() {
    if (!body_json) {
      auto j = nlohmann::json::parse(req.body, nullptr, false);
      if (j.is_discarded() || !j.is_object()) throw BadRequest{"body must be a JSON object"};
      body_json = std::move(j);
    }
    return *body_json;
  }
};

Api::Api(Repository& repo, classroom::SessionManager& sessions, const i18n::Catalogs& catalogs)
    : repo_(repo), sessions_(sessions), catalogs_(catalogs) {}

std::optional<AuthToken> Api::authorize(const Request& req) const {
  const std::string h = req.header("authorization");
  constexpr std::string_view kBearer = "Bearer ";
  if (h.size() > kBearer.size() && h.compare(0, kBearer.size(), kBearer) == 0) {
    return repo_.introspect(std::string_view(h).substr(kBearer.size()));
  }
  const auto q = req.target.find('?');
  if (q == std::string::npos) return std::nullopt;
  const auto params = parse_query(std::string_view(req.target).substr(q + 1));
  auto it = params.find("token");
  if (it == params.end()) return std::nullopt;
  return repo_.introspect(it->second);
}

Response Api::error(const Call& call, int status, std::string_view code) const {
  Json j{{"error", {{"code", code}, {"message", catalogs_.localize(call.locale, message_key(code))}}}};
  return json_response(status, j);
}

Response Api::repo_error(const Call& call, const RepoError& e, const std::string* record_id) const {
  using K = RepoError::Kind;
  switch (e.kind) {
    case K::Forbidden:
      // Same answer for "does not exist" and "exists but you cannot see it".
      if (record_id && !repo_.is_visible(call.actor(), *record_id)) return error(call, 404, "not_found");
      return error(call, 403, "forbidden");
    case K::AuthFailure:
      return error(call, 401, "auth_failed");
    case K::DuplicateLogin:
      return error(call, 409, "conflict");
    case K::UnknownRecord:
    case K::UnknownGroup:
    case K::UnknownUser:
      return error(call, 404, "not_found");
    case K::ParseRejected: {
      Response r = error(call, 422, "parse_error");
      auto j = Json::parse(r.body);
      if (e.parse) {
        j["error"]["line"] = e.parse->line;
        j["error"]["column"] = e.parse->column;
        j["error"]["kind"] = format::to_string(e.parse->kind);
        j["error"]["detail"] = e.parse->message;
      }
      r.body = j.dump();
      return r;
    }
    case K::InvalidArgument: {
      Response r = error(call, 400, "invalid_argument");
      auto j = Json::parse(r.body);
      j["error"]["detail"] = e.message;
      r.body = j.dump();
      return r;
    }
  }
  return error(call, 500, "internal");
}

Response Api::session_error(const Call& call, const classroom::SessionError& e) const {
  using K = classroom::SessionError::Kind;
  if (e.repo) return repo_error(call, *e.repo);
  switch (e.kind) {
    case K::Forbidden:
      return error(call, 403, "forbidden");
    case K::UnknownSession:
      return error(call, 404, "unknown_session");
    default: {
      Response r = error(call, 400, "session_error");
      auto j = Json::parse(r.body);
      j["error"]["detail"] = e.message;
      r.body = j.dump();
      return r;
    }
  }
}

Response Api::handle(const Request& req) const {
  Call call{req, {}, {}, {}, {}, {}};
  const auto q = req.target.find('?');
  call.path = req.target.substr(0, q);
  if (q != std::string::npos) call.query = parse_query(std::string_view(req.target).substr(q + 1));
  auto lang = call.query.find("lang");
  call.locale = lang != call.query.end() ? i18n::normalize_tag(lang->second)
                                         : catalogs_.negotiate(req.header("accept-language"));
  if (call.path != "/api" && call.path.rfind("/api/", 0) != 0) return error(call, 404, "not_found");

  try {
    const auto segs = split_path(call.path);
    if (segs.size() == 2 && segs[1] == "login") {
      if (!call.is("POST")) return error(call, 405, "method_not_allowed");
      return login(call);
    }
    call.auth = authorize(req);
    if (!call.auth) return error(call, 401, "unauthorized");
    return route(call);
  } catch (const BadRequest& b) {
    Response r = error(call, 400, "bad_request");
    auto j = Json::parse(r.body);
    j["error"]["detail"] = b.detail;
    r.body = j.dump();
    return r;
  } catch (const nlohmann::json::exception&) {
    return error(call, 400, "bad_request");
  }
}

Response Api::route(Call& call) const {
  const auto segs = split_path(call.path);
  const auto n = segs.size();
  const std::string& top = n > 1 ? segs[1] : std::string{};
  const auto method_not_allowed = [&] { return error(call, 405, "method_not_allowed"); };

  if (n == 2 && top == "logout") {
    if (!call.is("POST")) return method_not_allowed();
    repo_.revoke_token(call.auth->token);
    return no_content();
  }
  if (n == 2 && top == "me") {
    if (!call.is("GET")) return method_not_allowed();
    auto u = repo_.find_user(call.actor());
    if (!u) return error(call, 401, "unauthorized");
    return json_response(200, user_json(*u));
  }
  if (top == "constructions") {
    if (n == 2) return constructions(call);
    if (n == 3) return construction(call, segs[2]);
    if (n == 4 && segs[3] == "perm") return construction_perm(call, segs[2]);
  }
  if (n == 2 && top == "validate") {
    if (!call.is("POST")) return method_not_allowed();
    return validate(call);
  }
  if (top == "scrapbook" && (n == 2 || n == 3)) {
    if (!call.is("GET")) return method_not_allowed();
    return scrapbook(call, n == 3 ? segs[2] : call.actor());
  }
  if (n == 2 && top == "users") return users(call);
  if (top == "groups" && (n == 2 || n == 3)) return groups(call, n == 3 ? std::optional(segs[2]) : std::nullopt);
  if (top == "sessions" && (n == 2 || n == 3)) {
    return sessions(call, n == 3 ? std::optional(segs[2]) : std::nullopt);
  }
  return error(call, 404, "not_found");
}

Response Api::login(Call& call) const {
  const auto& b = call.body();
  const std::string login = need_string(b, "login");
  const std::string password = need_string(b, "password");
  auto tok = repo_.authenticate(login, password);
  if (!tok) return repo_error(call, tok.error());
  auto user = repo_.find_user(tok->user_id);
  return json_response(200, Json{{"token", tok->token},
                                 {"expires", util::to_rfc3339(tok->expires)},
                                 {"user", user ? user_json(*user) : Json(nullptr)}});
}

Response Api::constructions(Call& call) const {
  if (call.is("GET")) {
    Json list = Json::array();
    for (const auto& s : repo_.list_visible(call.actor())) list.push_back(summary_json(s));
    return json_response(200, Json{{"constructions", list}});
  }
  if (!call.is("POST")) return error(call, 405, "method_not_allowed");
  const auto& b = call.body();
  PutRequest req;
  req.title = need_string(b, "title");
  req.body = need_string(b, "body");
  req.perm = opt_perm(b);
  req.group = opt_string(b, "group");
  auto r = repo_.put_construction(call.actor(), req);
  if (!r) return repo_error(call, r.error());
  return json_response(201, record_json(*r));
}

Response Api::construction(Call& call, const std::string& id) const {
  if (call.is("GET")) {
    auto r = repo_.get_construction(call.actor(), id);
    if (!r) return repo_error(call, r.error(), &id);
    return json_response(200, record_json(*r));
  }
  if (call.is("PUT")) {
    const auto& b = call.body();
    PutRequest req;
    req.record_id = id;
    req.body = need_string(b, "body");
    req.perm = opt_perm(b);
    req.group = opt_string(b, "group");
    if (auto title = opt_string(b, "title")) {
      req.title = *title;
    } else {
      auto current = repo_.get_construction(call.actor(), id);
      if (!current) return repo_error(call, current.error(), &id);
      req.title = current->title;
    }
    auto r = repo_.put_construction(call.actor(), req);
    if (!r) return repo_error(call, r.error(), &id);
    return json_response(200, record_json(*r));
  }
  if (call.is("DELETE")) {
    auto r = repo_.delete_construction(call.actor(), id);
    if (!r) return repo_error(call, r.error(), &id);
    return no_content();
  }
  return error(call, 405, "method_not_allowed");
}

Response Api::construction_perm(Call& call, const std::string& id) const {
  if (!call.is("PUT")) return error(call, 405, "method_not_allowed");
  const auto& b = call.body();
  auto perm = opt_perm(b);
  if (!perm) throw BadRequest{"missing string field 'perm'"};
  auto r = repo_.set_perm(call.actor(), id, *perm, opt_string(b, "group"));
  if (!r) return repo_error(call, r.error(), &id);
  return json_response(200, record_json(*r));
}

Response Api::validate(Call& call) const {
  const auto& b = call.body();
  const std::string source = need_string(b, "body");
  probe::ProbeConfig cfg;
  if (const auto* s = member(b, "samples")) {
    if (!s->is_number_unsigned() || s->get<std::uint64_t>() == 0 || s->get<std::uint64_t>() > 100000) {
      throw BadRequest{"'samples' must be an integer in 1-100000"};
    }
    cfg.samples = s->get<std::uint64_t>();
  }
  if (const auto* s = member(b, "seed")) {
    if (!s->is_number_unsigned()) throw BadRequest{"'seed' must be a non-negative integer"};
    cfg.seed = s->get<std::uint64_t>();
  }
  auto parsed = format::parse(source);
  if (!parsed) {
    RepoError e{RepoError::Kind::ParseRejected, parsed.error().message, parsed.error()};
    return repo_error(call, e);
  }
  Json notes = Json::array();
  for (const auto& note : format::validate(*parsed)) {
    notes.push_back(Json{{"kind", format::to_string(note.kind)}, {"id", note.id.str()}, {"message", note.message}});
  }
  const auto report = probe::probe(*parsed, cfg);
  return json_response(200, Json{{"report", Json::parse(probe::to_json(report, cfg, *parsed))}, {"notes", notes}});
}

Response Api::scrapbook(Call& call, const std::string& student) const {
  auto r = repo_.scrapbook(call.actor(), student);
  if (!r) return repo_error(call, r.error());
  Json list = Json::array();
  for (const auto& s : *r) list.push_back(summary_json(s));
  return json_response(200, Json{{"student", student}, {"entries", list}});
}

Response Api::users(Call& call) const {
  if (call.is("GET")) {
    // Admins see everybody, teachers see their own students.
    const auto me = repo_.find_user(call.actor());
    Json list = Json::array();
    for (const auto& u : repo_.users()) {
      if ((me && me->role == Role::Admin) || u.created_by == call.actor()) list.push_back(user_json(u));
    }
    return json_response(200, Json{{"users", list}});
  }
  if (!call.is("POST")) return error(call, 405, "method_not_allowed");
  const auto& b = call.body();
  const std::string login = need_string(b, "login");
  const std::string password = need_string(b, "password");
  const auto role = parse_role(need_string(b, "role"));
  if (!role) throw BadRequest{"'role' must be admin, teacher or student"};
  const std::string display = opt_string(b, "display_name").value_or(login);
  auto u = repo_.create_user(call.actor(), login, display, *role, password);
  if (!u) return repo_error(call, u.error());
  return json_response(201, user_json(*u));
}

Response Api::groups(Call& call, const std::optional<std::string>& id) const {
  if (!id) {
    if (!call.is("POST")) return error(call, 405, "method_not_allowed");
    const auto& b = call.body();
    std::set<std::string> members;
    if (const auto* m = member(b, "members")) members = string_set(*m, "members");
    auto g = repo_.create_group(call.actor(), need_string(b, "name"), members);
    if (!g) return repo_error(call, g.error());
    return json_response(201, group_json(*g));
  }
  if (!call.is("PUT")) return error(call, 405, "method_not_allowed");
  const auto& b = call.body();
  std::optional<std::set<std::string>> members;
  if (const auto* m = member(b, "members")) members = string_set(*m, "members");
  auto g = repo_.update_group(call.actor(), *id, opt_string(b, "name"), members);
  if (!g) return repo_error(call, g.error());
  return json_response(200, group_json(*g));
}

Response Api::sessions(Call& call, const std::optional<std::string>& id) const {
  if (!id) {
    if (!call.is("POST")) return error(call, 405, "method_not_allowed");
    auto sid = sessions_.create_session(call.actor());
    if (!sid) return session_error(call, sid.error());
    auto info = sessions_.info(*sid, call.actor());
    return json_response(201, Json{{"session_id", *sid},
                                   {"teacher", call.actor()},
                                   {"created", util::to_rfc3339(info ? info->created : repo_.now())}});
  }
  if (call.is("GET")) {
    auto info = sessions_.info(*id, call.actor());
    if (!info) return session_error(call, info.error());
    Json members = Json::object();
    for (const auto& [m, seq] : info->seqs) members[m] = seq;
    return json_response(200, Json{{"session_id", info->session_id},
                                   {"teacher", info->teacher},
                                   {"created", util::to_rfc3339(info->created)},
                                   {"members", members}});
  }
  if (call.is("DELETE")) {
    auto r = sessions_.end_session(*id, call.actor());
    if (!r) return session_error(call, r.error());
    return no_content();
  }
  return error(call, 405, "method_not_allowed");
}

}  // namespace wgl::http
