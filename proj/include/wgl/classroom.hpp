#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <variant>
#include <vector>

#include "wgl/construction.hpp"
#include "wgl/expected.hpp"
#include "wgl/repository.hpp"

namespace wgl::classroom {

namespace op {
struct AddStep {
  Step step;
};
struct RemoveStep {
  ObjectId id;
};
struct MoveFree {
  ObjectId id;
  double x = 0.0;
  double y = 0.0;
};
struct ReplaceAll {
  Construction construction;
};
}  // namespace op

using OpKind = std::variant<op::AddStep, op::RemoveStep, op::MoveFree, op::ReplaceAll>;

struct WorkbenchOp {
  OpKind kind;
  std::uint64_t op_seq = 0;
  std::string author;
};

std::string_view op_keyword(const OpKind& kind);  // add, remove, move, replace

/// Applies one op to a construction; the error is a human-readable reason.
Expected<Construction, std::string> apply_to(const Construction& c, const OpKind& kind);
/// Folds an accepted op log over an empty construction.
Construction replay(const std::vector<WorkbenchOp>& log);

enum class GrantMode { Watch, Edit };
std::string_view to_string(GrantMode m);
std::optional<GrantMode> parse_grant_mode(std::string_view s);

struct SessionError {
  enum class Kind {
    ExpectedSeq,
    Forbidden,
    InvalidOp,
    UnknownSession,
    UnknownTarget,
    UnknownMember,
    Repository,
  };
  Kind kind = Kind::Forbidden;
  std::string message;
  /// Next acceptable op_seq, for ExpectedSeq.
  std::uint64_t expected = 0;
  std::optional<RepoError> repo;
};

std::string_view to_string(SessionError::Kind kind);

template <typename T>
using SessionResult = Expected<T, SessionError>;

struct Snapshot {
  std::string owner;
  std::uint64_t seq = 0;
  Construction construction;
};

struct OpApplied {
  std::string target;
  std::uint64_t seq = 0;
  WorkbenchOp op;
};

/// Grant created or changed; `mode` is empty after a revoke.
struct GrantChanged {
  std::string grantor;
  std::string grantee;
  std::optional<GrantMode> mode;
};

using Notification = std::variant<OpApplied, GrantChanged>;
using Sink = std::function<void(const Notification&)>;

struct SessionInfo {
  std::string session_id;
  std::string teacher;
  std::int64_t created = 0;
  std::map<std::string, std::uint64_t> seqs;  // member -> workbench seq
};

/// In-memory classroom sessions over a repository. Thread-safe: each
/// workbench is processed sequentially, distinct workbenches in parallel.
class SessionManager {
 public:
  explicit SessionManager(Repository& repo);
  ~SessionManager();

  SessionResult<std::string> create_session(const std::string& teacher);
  SessionResult<Snapshot> join(const std::string& session_id, const std::string& user);
  SessionResult<SessionInfo> info(const std::string& session_id, const std::string& actor) const;

  /// Sequenced op from `op.author`; returns the new seq.
  SessionResult<std::uint64_t> apply_op(const std::string& session_id, const std::string& target,
                                        const WorkbenchOp& op);
  /// Snapshot plus subscription to `target`'s subsequent ops.
  SessionResult<Snapshot> watch(const std::string& session_id, const std::string& watcher,
                                const std::string& target);
  /// Current state of a workbench the actor may watch, without subscribing.
  SessionResult<Snapshot> snapshot(const std::string& session_id, const std::string& actor,
                                   const std::string& target) const;
  SessionResult<std::size_t> broadcast(const std::string& session_id, const std::string& teacher,
                                       const Construction& construction);
  SessionResult<void> grant(const std::string& session_id, const std::string& grantor, const std::string& grantee,
                            GrantMode mode);
  SessionResult<void> revoke(const std::string& session_id, const std::string& grantor, const std::string& grantee);
  /// Caller is the owner or the teacher. Students save to their scrapbook.
  SessionResult<std::string> save_workbench(const std::string& session_id, const std::string& actor,
                                            const std::string& owner);
  /// ReplaceAll from a stored record, at the next seq; caller needs read access.
  SessionResult<std::uint64_t> load_into_workbench(const std::string& session_id, const std::string& actor,
                                                   const std::string& owner, const std::string& record_id);
  /// Teacher only: writes a final snapshot and discards the session.
  SessionResult<void> end_session(const std::string& session_id, const std::string& teacher);

  SessionResult<std::vector<WorkbenchOp>> op_log(const std::string& session_id, const std::string& owner) const;
  SessionResult<bool> is_dirty(const std::string& session_id, const std::string& owner) const;

  /// Delivery endpoint for one connection of `user`; returns an id for detach().
  SessionResult<std::uint64_t> attach(const std::string& session_id, const std::string& user, Sink sink);
  void detach(const std::string& session_id, std::uint64_t connection);

  /// Writes <data_dir>/sessions/<id>.json for every live session.
  void snapshot_all() const;

 private:
  struct Session;
  struct Bench;

  std::shared_ptr<Session> find(const std::string& session_id) const;
  SessionResult<std::uint64_t> apply_locked(Session& s, Bench& b, const WorkbenchOp& op, bool clean);
  void notify_locked(const Session& s, const Bench& b, const Notification& n,
                     const std::string& extra_recipient) const;
  RepoResult<std::string> persist(const Session& s, const Bench& b, const std::string& body);
  void write_snapshot(const Session& s) const;
  bool may_watch(const Session& s, const std::string& watcher, const std::string& target) const;
  bool may_edit(const Session& s, const std::string& author, const std::string& target) const;

  Repository& repo_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::atomic<std::uint64_t> next_connection_{1};
};

}  // namespace wgl::classroom
