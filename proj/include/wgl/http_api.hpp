#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "wgl/classroom.hpp"
#include "wgl/i18n.hpp"
#include "wgl/repository.hpp"

namespace wgl::http {

struct Request {
  std::string method;
  /// Path plus optional query string.
  std::string target;
  /// Lowercase names.
  std::map<std::string, std::string> headers;
  std::string body;

  std::string header(const std::string& name) const;
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// JSON API under /api. Every route except POST /api/login needs
/// `Authorization: Bearer <token>`; without one the answer is 401.
///
/// Errors are {"error":{"code","message"}} with a localized message:
///   401 unauthorized, auth_failed   403 forbidden   404 not_found, unknown_session
///   409 conflict   422 parse_error (+line, column, kind)   400 everything else
/// A record the caller cannot see answers 404 exactly as an unknown id does.
class Api {
 public:
  Api(Repository& repo, classroom::SessionManager& sessions, const i18n::Catalogs& catalogs);

  Response handle(const Request& req) const;

  /// Bearer header first, then a `token` query parameter.
  std::optional<AuthToken> authorize(const Request& req) const;

 private:
  struct Call;

  Response route(Call& call) const;
  Response login(Call& call) const;
  Response constructions(Call& call) const;
  Response construction(Call& call, const std::string& id) const;
  Response construction_perm(Call& call, const std::string& id) const;
  Response validate(Call& call) const;
  Response scrapbook(Call& call, const std::string& student) const;
  Response users(Call& call) const;
  Response groups(Call& call, const std::optional<std::string>& id) const;
  Response sessions(Call& call, const std::optional<std::string>& id) const;

  Response error(const Call& call, int status, std::string_view code) const;
  Response repo_error(const Call& call, const RepoError& e, const std::string* record_id = nullptr) const;
  Response session_error(const Call& call, const classroom::SessionError& e) const;

  Repository& repo_;
  classroom::SessionManager& sessions_;
  const i18n::Catalogs& catalogs_;
};

std::string url_decode(std::string_view s);
std::map<std::string, std::string> parse_query(std::string_view query);

}  // namespace wgl::http
