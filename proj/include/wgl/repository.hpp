#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "wgl/expected.hpp"
#include "wgl/format.hpp"
#include "wgl/password.hpp"
#include "wgl/perm.hpp"

namespace wgl {

struct User {
  std::string user_id;
  std::string login_name;
  std::string display_name;
  Role role = Role::Student;
  std::string pass_hash;
  /// Empty for seeded admins.
  std::string created_by;
  friend bool operator==(const User&, const User&) = default;
};

struct Group {
  std::string group_id;
  std::string name;
  std::string owner;
  std::set<std::string> members;
  friend bool operator==(const Group&, const Group&) = default;
};

struct ConstructionRecord {
  std::string record_id;
  std::string owner;
  std::optional<std::string> group;
  Perm perm;
  std::optional<std::int64_t> legacy_level;
  std::string title;
  std::string body;
  bool is_scrapbook = false;
  std::int64_t created = 0;
  std::int64_t modified = 0;
  friend bool operator==(const ConstructionRecord&, const ConstructionRecord&) = default;
};

/// Listing entry; never carries the body.
struct RecordSummary {
  std::string record_id;
  std::string title;
  std::string owner;
  Perm perm;
  bool is_scrapbook = false;
  std::optional<std::int64_t> legacy_level;
  std::int64_t modified = 0;
};

struct AuthToken {
  std::string token;
  std::string user_id;
  Role role = Role::Student;
  std::int64_t expires = 0;
};

struct RepoError {
  enum class Kind {
    Forbidden,
    DuplicateLogin,
    AuthFailure,
    ParseRejected,
    UnknownRecord,
    UnknownGroup,
    UnknownUser,
    InvalidArgument,
  };
  Kind kind = Kind::Forbidden;
  std::string message;
  std::optional<format::ParseError> parse;
};

std::string_view to_string(RepoError::Kind kind);

template <typename T>
using RepoResult = Expected<T, RepoError>;

struct RepositoryOptions {
  PasswordParams password = PasswordParams::interactive();
  std::int64_t token_ttl = 8 * 3600;
  /// Unix seconds; defaults to the system clock.
  std::function<std::int64_t()> clock;
  /// Called with a diagnostic when an events.log append fails.
  std::function<void(const std::string&)> on_log_failure;
};

struct PutRequest {
  std::optional<std::string> record_id;
  std::string title;
  std::string body;
  /// Defaults to owner-only on create; kept on update when absent.
  std::optional<Perm> perm;
  std::optional<std::string> group;
};

/// File-backed store rooted at one data directory:
///   users.json, groups.json, records/<id>.wgl, records/<id>.meta.json, events.log
class Repository {
 public:
  explicit Repository(std::filesystem::path data_dir, RepositoryOptions options = {});

  const std::filesystem::path& data_dir() const { return data_dir_; }
  std::int64_t now() const;

  /// Install-time admin creation; the only way to create an Admin.
  RepoResult<User> seed_admin(std::string_view login, std::string_view display_name,
                              std::string_view password);
  RepoResult<User> create_user(const std::string& actor, std::string_view login,
                               std::string_view display_name, Role role, std::string_view password);

  RepoResult<AuthToken> authenticate(std::string_view login, std::string_view password);
  std::optional<AuthToken> introspect(std::string_view token) const;
  void revoke_token(std::string_view token);

  std::optional<User> find_user(const std::string& user_id) const;
  std::optional<User> find_user_by_login(std::string_view login) const;
  std::vector<User> users() const;
  /// Students created by `teacher_id`.
  bool is_student_of(const std::string& student_id, const std::string& teacher_id) const;

  RepoResult<ConstructionRecord> put_construction(const std::string& actor, const PutRequest& req);
  RepoResult<ConstructionRecord> get_construction(const std::string& actor,
                                                  const std::string& record_id) const;
  std::vector<RecordSummary> list_visible(const std::string& actor) const;
  /// Own scrapbook, or a student's scrapbook for their teacher.
  RepoResult<std::vector<RecordSummary>> scrapbook(const std::string& actor,
                                                   const std::string& student_id) const;
  RepoResult<ConstructionRecord> set_perm(const std::string& actor, const std::string& record_id,
                                          const Perm& perm, std::optional<std::string> group);
  RepoResult<Perm> import_legacy_level(const std::string& record_id, std::int64_t level);
  RepoResult<void> delete_construction(const std::string& actor, const std::string& record_id);

  RepoResult<Group> create_group(const std::string& actor, std::string_view name,
                                 const std::set<std::string>& members);
  RepoResult<Group> update_group(const std::string& actor, const std::string& group_id,
                                 std::optional<std::string> name,
                                 std::optional<std::set<std::string>> members);
  std::optional<Group> find_group(const std::string& group_id) const;

  /// Relationship of `actor` to a stored record; nullopt when either is unknown.
  std::optional<AccessContext> access_context(const std::string& actor,
                                              const std::string& record_id) const;

  /// False for unknown records too, so listings and lookups leak nothing extra.
  bool is_visible(const std::string& actor, const std::string& record_id) const;

  void log_event(const std::string& actor, std::string_view action, const std::string& subject);

  static bool valid_login(std::string_view login);
  static constexpr std::size_t kMaxTitleChars = 128;

 private:
  AccessContext context_locked(const User& actor, const ConstructionRecord& r) const;
  const User* user_locked(const std::string& id) const;
  std::vector<RecordSummary> sorted(std::vector<RecordSummary> v) const;
  RepoResult<User> insert_user(User u, std::string_view password);
  std::string fresh_id(char prefix) const;

  void load();
  void save_users() const;
  void save_groups() const;
  void save_record(const ConstructionRecord& r) const;

  std::filesystem::path data_dir_;
  RepositoryOptions options_;

  mutable std::shared_mutex mutex_;
  std::map<std::string, User> users_;
  std::map<std::string, Group> groups_;
  std::map<std::string, ConstructionRecord> records_;

  mutable std::mutex token_mutex_;
  std::map<std::string, AuthToken, std::less<>> tokens_;
  std::string dummy_hash_;

  std::mutex log_mutex_;
  std::int64_t last_log_ts_ = 0;
};

}  // namespace wgl
