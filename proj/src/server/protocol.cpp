#include "wgl/protocol.hpp"

#include <cmath>

#include "wgl/format.hpp"

namespace wgl::protocol {

using classroom::SessionError;
namespace op = classroom::op;

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

const nlohmann::json* field(const nlohmann::json& frame, const char* key) {
  auto it = frame.find(key);
  return it == frame.end() ? nullptr : &*it;
}

std::optional<std::string> string_field(const nlohmann::json& frame, const char* key) {
  const auto* f = field(frame, key);
  if (!f || !f->is_string()) return std::nullopt;
  return f->get<std::string>();
}

}  // namespace

void write_op(Json& frame, const classroom::OpKind& kind) {
  frame["kind"] = std::string(classroom::op_keyword(kind));
  std::visit(Overloaded{
                 [&](const op::AddStep& a) { frame["step"] = format::serialize_step(a.step); },
                 [&](const op::RemoveStep& r) { frame["id"] = r.id.str(); },
                 [&](const op::MoveFree& m) {
                   frame["id"] = m.id.str();
                   frame["x"] = m.x;
                   frame["y"] = m.y;
                 },
                 [&](const op::ReplaceAll& r) { frame["construction"] = format::serialize(r.construction); },
             },
             kind);
}

Expected<classroom::OpKind, std::string> read_op(const nlohmann::json& frame) {
  const auto kind = string_field(frame, "kind");
  if (!kind) return unexpected(std::string("missing op kind"));
  if (*kind == "add") {
    const auto text = string_field(frame, "step");
    if (!text) return unexpected(std::string("add needs a step"));
    auto s = format::parse_step(*text);
    if (!s) return unexpected(s.error().message);
    return classroom::OpKind{op::AddStep{std::move(*s)}};
  }
  if (*kind == "remove" || *kind == "move") {
    const auto id_text = string_field(frame, "id");
    const auto id = id_text ? ObjectId::make(*id_text) : std::nullopt;
    if (!id) return unexpected(std::string("bad object id"));
    if (*kind == "remove") return classroom::OpKind{op::RemoveStep{*id}};
    const auto* x = field(frame, "x");
    const auto* y = field(frame, "y");
    if (!x || !y || !x->is_number() || !y->is_number()) return unexpected(std::string("move needs numeric x and y"));
    const double xv = x->get<double>(), yv = y->get<double>();
    if (!std::isfinite(xv) || !std::isfinite(yv)) return unexpected(std::string("coordinates must be finite"));
    return classroom::OpKind{op::MoveFree{*id, xv, yv}};
  }
  if (*kind == "replace") {
    const auto text = string_field(frame, "construction");
    if (!text) return unexpected(std::string("replace needs a construction"));
    auto c = format::parse(*text);
    if (!c) return unexpected(c.error().message);
    return classroom::OpKind{op::ReplaceAll{std::move(*c)}};
  }
  return unexpected("unknown op kind '" + *kind + "'");
}

Json snapshot_frame(const classroom::Snapshot& s) {
  Json j;
  j["t"] = "snapshot";
  j["owner"] = s.owner;
  j["seq"] = s.seq;
  j["construction"] = format::serialize(s.construction);
  return j;
}

Json notification_frame(const classroom::Notification& n) {
  return std::visit(Overloaded{
                        [](const classroom::OpApplied& a) {
                          Json j;
                          j["t"] = "op_applied";
                          j["target"] = a.target;
                          j["seq"] = a.seq;
                          j["author"] = a.op.author;
                          write_op(j, a.op.kind);
                          return j;
                        },
                        [](const classroom::GrantChanged& g) {
                          Json j;
                          j["t"] = g.mode ? "grant" : "revoke";
                          j["grantor"] = g.grantor;
                          j["grantee"] = g.grantee;
                          if (g.mode) j["mode"] = std::string(classroom::to_string(*g.mode));
                          return j;
                        },
                    },
                    n);
}

Json error_frame(std::string_view code, std::string_view message) {
  Json j;
  j["t"] = "error";
  j["code"] = std::string(code);
  j["message"] = std::string(message);
  return j;
}

LiveConnection::LiveConnection(classroom::SessionManager& sessions, std::string session_id, std::string user,
                               Role role, Send send)
    : sessions_(sessions),
      session_id_(std::move(session_id)),
      user_(std::move(user)),
      role_(role),
      send_(std::move(send)) {}

LiveConnection::~LiveConnection() {
  if (connection_) sessions_.detach(session_id_, *connection_);
}

classroom::SessionResult<void> LiveConnection::open() {
  auto info = sessions_.info(session_id_, user_);
  if (!info) return unexpected(info.error());
  auto id = sessions_.attach(session_id_, user_, [send = send_](const classroom::Notification& n) {
    send(notification_frame(n).dump());
  });
  if (!id) return unexpected(id.error());
  connection_ = *id;
  Json hello;
  hello["t"] = "hello";
  hello["protocol"] = kVersion;
  hello["session"] = session_id_;
  hello["user"] = user_;
  hello["role"] = std::string(to_string(role_));
  hello["teacher"] = info->teacher;
  send(hello);
  return {};
}

void LiveConnection::reply_error(const SessionError& e, std::string_view request) {
  Json j = error_frame(classroom::to_string(e.kind), e.message);
  j["request"] = std::string(request);
  send(j);
}

void LiveConnection::on_op(const nlohmann::json& frame) {
  const std::string target = string_field(frame, "target").value_or(user_);
  const auto* seq = field(frame, "op_seq");
  Json reject;
  reject["t"] = "reject";
  reject["target"] = target;
  if (!seq || !seq->is_number_unsigned()) {
    reject["code"] = "InvalidOp";
    reject["message"] = "op_seq must be a non-negative integer";
    send(reject);
    return;
  }
  reject["op_seq"] = seq->get<std::uint64_t>();
  auto kind = read_op(frame);
  if (!kind) {
    reject["code"] = "InvalidOp";
    reject["message"] = kind.error();
    send(reject);
    return;
  }
  auto r = sessions_.apply_op(session_id_, target,
                              classroom::WorkbenchOp{std::move(*kind), seq->get<std::uint64_t>(), user_});
  if (r) return;  // the op_applied notification doubles as the acknowledgement
  reject["code"] = std::string(classroom::to_string(r.error().kind));
  if (r.error().kind == SessionError::Kind::ExpectedSeq) reject["expected"] = r.error().expected;
  reject["message"] = r.error().message;
  send(reject);
}

bool LiveConnection::handle(std::string_view text) {
  const nlohmann::json frame = nlohmann::json::parse(text, nullptr, false);
  if (frame.is_discarded() || !frame.is_object()) {
    send(error_frame("bad_frame", "frames are JSON objects"));
    return true;
  }
  const auto type = string_field(frame, "t");
  if (!type) {
    send(error_frame("bad_frame", "missing frame type"));
    return true;
  }
  const std::string& t = *type;
  const std::string target = string_field(frame, "target").value_or(user_);

  if (t == "op") {
    on_op(frame);
  } else if (t == "hello") {
    Json j;
    j["t"] = "hello";
    j["protocol"] = kVersion;
    j["session"] = session_id_;
    j["user"] = user_;
    j["role"] = std::string(to_string(role_));
    if (auto info = sessions_.info(session_id_, user_)) j["teacher"] = info->teacher;
    send(j);
  } else if (t == "join") {
    auto s = sessions_.join(session_id_, user_);
    s ? send(snapshot_frame(*s)) : reply_error(s.error(), t);
  } else if (t == "watch") {
    auto s = sessions_.watch(session_id_, user_, target);
    s ? send(snapshot_frame(*s)) : reply_error(s.error(), t);
  } else if (t == "snapshot") {
    auto s = sessions_.snapshot(session_id_, user_, target);
    s ? send(snapshot_frame(*s)) : reply_error(s.error(), t);
  } else if (t == "broadcast") {
    Construction c;
    if (auto text_field = string_field(frame, "construction")) {
      auto parsed = format::parse(*text_field);
      if (!parsed) {
        send(error_frame("ParseRejected", parsed.error().message));
        return true;
      }
      c = std::move(*parsed);
    } else {
      // Without a body the teacher's own workbench is broadcast.
      auto own = sessions_.snapshot(session_id_, user_, user_);
      if (!own) {
        reply_error(own.error(), t);
        return true;
      }
      c = std::move(own->construction);
    }
    auto n = sessions_.broadcast(session_id_, user_, c);
    if (n) {
      Json j;
      j["t"] = "broadcast";
      j["count"] = *n;
      send(j);
    } else {
      reply_error(n.error(), t);
    }
  } else if (t == "grant" || t == "revoke") {
    const auto grantee = string_field(frame, "grantee");
    if (!grantee) {
      send(error_frame("bad_frame", "missing grantee"));
      return true;
    }
    classroom::SessionResult<void> r;
    if (t == "grant") {
      const auto mode = classroom::parse_grant_mode(string_field(frame, "mode").value_or(""));
      if (!mode) {
        send(error_frame("bad_frame", "mode is watch or edit"));
        return true;
      }
      r = sessions_.grant(session_id_, user_, *grantee, *mode);
    } else {
      r = sessions_.revoke(session_id_, user_, *grantee);
    }
    if (!r) reply_error(r.error(), t);
  } else if (t == "save") {
    auto id = sessions_.save_workbench(session_id_, user_, target);
    if (id) {
      Json j;
      j["t"] = "save";
      j["target"] = target;
      j["record_id"] = *id;
      send(j);
    } else {
      reply_error(id.error(), t);
    }
  } else if (t == "load") {
    const auto record = string_field(frame, "record_id");
    if (!record) {
      send(error_frame("bad_frame", "missing record_id"));
      return true;
    }
    auto seq = sessions_.load_into_workbench(session_id_, user_, target, *record);
    if (seq) {
      Json j;
      j["t"] = "load";
      j["target"] = target;
      j["record_id"] = *record;
      j["seq"] = *seq;
      send(j);
    } else {
      reply_error(seq.error(), t);
    }
  } else if (t == "bye") {
    Json j;
    j["t"] = "bye";
    send(j);
    return false;
  } else {
    send(error_frame("unknown_type", "unknown frame type '" + t + "'"));
  }
  return true;
}

}  // namespace wgl::protocol
