#pragma once

#include <cstdint>
#include <functional>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>

#include "wgl/classroom.hpp"

namespace wgl::protocol {

using Json = nlohmann::ordered_json;

inline constexpr int kVersion = 1;

/// "kind" plus payload: add{step}, remove{id}, move{id,x,y}, replace{construction}.
void write_op(Json& frame, const classroom::OpKind& kind);
Expected<classroom::OpKind, std::string> read_op(const nlohmann::json& frame);

Json snapshot_frame(const classroom::Snapshot& s);
Json notification_frame(const classroom::Notification& n);
Json error_frame(std::string_view code, std::string_view message);

/// One live-channel connection: decodes client frames, drives the session
/// manager and encodes replies and notifications. Transport independent.
class LiveConnection {
 public:
  /// Must be thread-safe and must not block: notifications arrive from other
  /// connections' threads.
  using Send = std::function<void(std::string frame)>;

  LiveConnection(classroom::SessionManager& sessions, std::string session_id, std::string user, Role role,
                 Send send);
  ~LiveConnection();
  LiveConnection(const LiveConnection&) = delete;
  LiveConnection& operator=(const LiveConnection&) = delete;

  /// Registers for notifications and sends `hello`.
  classroom::SessionResult<void> open();
  /// Handles one text frame; false once the client said `bye`.
  bool handle(std::string_view text);

  const std::string& user() const { return user_; }

 private:
  void send(const Json& frame) { send_(frame.dump()); }
  void reply_error(const classroom::SessionError& e, std::string_view request);
  void on_op(const nlohmann::json& frame);

  classroom::SessionManager& sessions_;
  std::string session_id_;
  std::string user_;
  Role role_;
  Send send_;
  std::optional<std::uint64_t> connection_;
};

}  // namespace wgl::protocol
