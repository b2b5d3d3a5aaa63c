#include "wgl/server.hpp"

#include <boost/asio.hpp>
#include <boost/beast.hpp>
#include <condition_variable>
#include <csignal>
#include <deque>
#include <iostream>
#include <mutex>
#include <thread>

#include "wgl/classroom.hpp"
#include "wgl/http_api.hpp"
#include "wgl/i18n.hpp"
#include "wgl/protocol.hpp"
#include "wgl/util.hpp"

namespace wgl {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace bhttp = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

constexpr std::size_t kBodyLimit = 2u << 20;
constexpr auto kHttpTimeout = std::chrono::seconds(60);

std::string_view sv(beast::string_view s) { return {s.data(), s.size()}; }

std::string_view mime_type(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript; charset=utf-8";
  if (ext == ".css") return "text/css; charset=utf-8";
  if (ext == ".json" || ext == ".map") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  if (ext == ".wasm") return "application/wasm";
  if (ext == ".wgl" || ext == ".txt") return "text/plain; charset=utf-8";
  return "application/octet-stream";
}

/// Resolves a URL path inside `root`; nullopt for anything escaping it.
std::optional<std::filesystem::path> static_path(const std::filesystem::path& root, std::string_view url) {
  std::string path = http::url_decode(url.substr(0, url.find('?')));
  if (path.empty() || path.front() != '/') return std::nullopt;
  if (path.find('\0') != std::string::npos) return std::nullopt;
  std::filesystem::path rel = std::filesystem::path(path.substr(1)).lexically_normal();
  if (!rel.empty() && (*rel.begin() == ".." || rel.is_absolute())) return std::nullopt;
  std::filesystem::path full = root / rel;
  std::error_code ec;
  if (std::filesystem::is_directory(full, ec)) full /= "index.html";
  if (!std::filesystem::is_regular_file(full, ec)) return std::nullopt;
  return full;
}

}  // namespace

struct Server::Impl {
  ServerConfig cfg;
  Log log;
  std::unique_ptr<Repository> repo;
  std::unique_ptr<classroom::SessionManager> sessions;
  i18n::Catalogs catalogs;
  std::unique_ptr<http::Api> api;

  net::io_context ioc;
  std::optional<net::executor_work_guard<net::io_context::executor_type>> work;
  tcp::acceptor acceptor{ioc};
  net::steady_timer snapshot_timer{ioc};
  std::vector<std::thread> threads;
  bool running = false;
  std::mutex stop_mutex;

  /// Open connections, for closing them at shutdown.
  std::mutex conn_mutex;
  std::vector<std::pair<std::weak_ptr<void>, std::function<void()>>> closers;

  template <class Conn>
  void track(const std::shared_ptr<Conn>& c) {
    std::lock_guard lock(conn_mutex);
    std::erase_if(closers, [](const auto& e) { return e.first.expired(); });
    closers.emplace_back(c, [weak = std::weak_ptr<Conn>(c)] {
      if (auto p = weak.lock()) p->close();
    });
  }

  Impl(ServerConfig c, RepositoryOptions ro, Log l) : cfg(std::move(c)), log(std::move(l)), catalogs(cfg.default_locale) {
    if (!log) log = [](const std::string& line) { std::cerr << line << std::endl; };
    if (!ro.on_log_failure) ro.on_log_failure = log;
    ro.token_ttl = cfg.token_ttl;
    repo = std::make_unique<Repository>(cfg.data_dir, std::move(ro));
    sessions = std::make_unique<classroom::SessionManager>(*repo);
    const auto loaded = catalogs.load_dir(cfg.locale_dir);
    for (const auto& tag : loaded) log("loaded locale " + tag);
    api = std::make_unique<http::Api>(*repo, *sessions, catalogs);
  }

  void accept();
  void arm_snapshot_timer() {
    snapshot_timer.expires_after(std::chrono::seconds(cfg.session_snapshot_interval));
    snapshot_timer.async_wait([this](beast::error_code ec) {
      if (ec) return;
      sessions->snapshot_all();
      arm_snapshot_timer();
    });
  }
};

namespace {

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, Server::Impl& server) : ws_(std::move(socket)), server_(server) {}

  void run(bhttp::request<bhttp::string_body> req, std::string session_id, AuthToken who) {
    session_id_ = std::move(session_id);
    who_ = std::move(who);
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.read_message_max(kBodyLimit);
    ws_.text(true);
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

  void close() {
    net::post(ws_.get_executor(), [self = shared_from_this()] {
      beast::error_code ec;
      beast::get_lowest_layer(self->ws_).socket().close(ec);
    });
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    std::weak_ptr<WsSession> weak = shared_from_this();
    conn_ = std::make_unique<protocol::LiveConnection>(*server_.sessions, session_id_, who_.user_id, who_.role,
                                                       [weak](std::string frame) {
                                                         if (auto self = weak.lock()) self->queue(std::move(frame));
                                                       });
    if (auto opened = conn_->open(); !opened) {
      queue(protocol::error_frame(classroom::to_string(opened.error().kind), opened.error().message).dump());
      closing_ = true;
      return;
    }
    read();
  }

  void read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return;
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    if (!conn_->handle(text)) {
      // Runs after the queued reply, so `bye` goes out before the close.
      net::post(ws_.get_executor(), [self = shared_from_this()] {
        self->closing_ = true;
        if (!self->writing_) self->finish();
      });
      return;
    }
    read();
  }

  void queue(std::string frame) {
    net::post(ws_.get_executor(), [self = shared_from_this(), frame = std::move(frame)]() mutable {
      self->outbox_.push_back(std::move(frame));
      if (!self->writing_) self->write();
    });
  }

  void write() {
    writing_ = true;
    ws_.async_write(net::buffer(outbox_.front()), beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) return;
    outbox_.pop_front();
    if (!outbox_.empty()) return write();
    writing_ = false;
    if (closing_) finish();
  }

  void finish() {
    ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
  }

  websocket::stream<beast::tcp_stream> ws_;
  Server::Impl& server_;
  beast::flat_buffer buffer_;
  std::string session_id_;
  AuthToken who_;
  std::unique_ptr<protocol::LiveConnection> conn_;
  std::deque<std::string> outbox_;
  bool writing_ = false;
  bool closing_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, Server::Impl& server) : stream_(std::move(socket)), server_(server) {}

  void run() {
    net::dispatch(stream_.get_executor(), beast::bind_front_handler(&HttpSession::read, shared_from_this()));
  }

  void close() {
    net::post(stream_.get_executor(), [self = shared_from_this()] {
      beast::error_code ec;
      self->stream_.socket().close(ec);
    });
  }

 private:
  void read() {
    parser_.emplace();
    parser_->body_limit(kBodyLimit);
    stream_.expires_after(kHttpTimeout);
    bhttp::async_read(stream_, buffer_, *parser_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec == bhttp::error::end_of_stream) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    if (ec == bhttp::error::body_limit) {
      http::Response r{413, "application/json",
                       R"({"error":{"code":"too_large","message":")" +
                           server_.catalogs.localize(server_.catalogs.default_locale(), "error.too_large") + "\"}}"};
      return send(r, 11, false);
    }
    if (ec) return;
    auto req = parser_->release();

    if (websocket::is_upgrade(req) && sv(req.target()).substr(0, 3) == "/ws") {
      return upgrade(std::move(req));
    }
    send(respond(req), req.version(), req.keep_alive());
  }

  http::Request to_api(const bhttp::request<bhttp::string_body>& req) const {
    http::Request out;
    out.method = std::string(sv(req.method_string()));
    out.target = std::string(sv(req.target()));
    for (const auto& f : req) {
      std::string name(sv(f.name_string()));
      for (auto& ch : name) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      out.headers[name] = std::string(sv(f.value()));
    }
    out.body = req.body();
    return out;
  }

  http::Response respond(const bhttp::request<bhttp::string_body>& req) const {
    const std::string_view target = sv(req.target());
    const bool api = target == "/api" || target.substr(0, 5) == "/api/" || target.substr(0, 5) == "/api?";
    if (!api && !server_.cfg.static_dir.empty() &&
        (req.method() == bhttp::verb::get || req.method() == bhttp::verb::head)) {
      if (auto file = static_path(server_.cfg.static_dir, target)) {
        if (auto body = util::read_file(*file)) return http::Response{200, std::string(mime_type(*file)), *body};
      }
    }
    try {
      return server_.api->handle(to_api(req));
    } catch (const std::exception& e) {
      server_.log(std::string("request failed: ") + e.what());
      return http::Response{500, "application/json", R"({"error":{"code":"internal","message":"internal error"}})"};
    }
  }

  void upgrade(bhttp::request<bhttp::string_body> req) {
    const auto api_req = to_api(req);
    const auto q = api_req.target.find('?');
    const auto params =
        http::parse_query(q == std::string::npos ? std::string_view{} : std::string_view(api_req.target).substr(q + 1));
    auto who = server_.api->authorize(api_req);
    auto sid = params.find("session");
    if (!who || sid == params.end()) {
      http::Response r{401, "application/json",
                       R"({"error":{"code":"unauthorized","message":")" +
                           server_.catalogs.localize(server_.catalogs.default_locale(), "error.unauthorized") + "\"}}"};
      return send(r, req.version(), false);
    }
    stream_.expires_never();
    auto ws = std::make_shared<WsSession>(stream_.release_socket(), server_);
    server_.track(ws);
    ws->run(std::move(req), sid->second, *who);
  }

  void send(const http::Response& r, unsigned version, bool keep_alive) {
    auto res = std::make_shared<bhttp::response<bhttp::string_body>>(static_cast<bhttp::status>(r.status), version);
    res->set(bhttp::field::server, "wgl");
    res->set(bhttp::field::content_type, r.content_type);
    res->keep_alive(keep_alive);
    res->body() = r.body;
    res->prepare_payload();
    bhttp::async_write(stream_, *res,
                       [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
                         if (ec) return;
                         if (!res->keep_alive()) {
                           self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
                           return;
                         }
                         self->read();
                       });
  }

  beast::tcp_stream stream_;
  Server::Impl& server_;
  beast::flat_buffer buffer_;
  std::optional<bhttp::request_parser<bhttp::string_body>> parser_;
};

}  // namespace

void Server::Impl::accept() {
  acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
    if (ec) {
      if (ec == net::error::operation_aborted || !acceptor.is_open()) return;
      log("accept failed: " + ec.message());
    } else {
      auto s = std::make_shared<HttpSession>(std::move(socket), *this);
      track(s);
      s->run();
    }
    accept();
  });
}

Server::Server(ServerConfig cfg, RepositoryOptions repo_options, Log log)
    : impl_(std::make_unique<Impl>(std::move(cfg), std::move(repo_options), std::move(log))) {}

Server::~Server() { stop(); }

Repository& Server::repository() { return *impl_->repo; }
classroom::SessionManager& Server::sessions() { return *impl_->sessions; }

void Server::start(unsigned threads) {
  auto& s = *impl_;
  beast::error_code ec;
  const tcp::endpoint ep(tcp::v4(), static_cast<unsigned short>(s.cfg.port));
  s.acceptor.open(ep.protocol(), ec);
  if (!ec) s.acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) s.acceptor.bind(ep, ec);
  if (!ec) s.acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) {
    beast::error_code ignored;
    s.acceptor.close(ignored);
    throw std::runtime_error("cannot listen on port " + std::to_string(s.cfg.port) + ": " + ec.message());
  }
  s.work.emplace(s.ioc.get_executor());
  s.accept();
  s.arm_snapshot_timer();
  if (threads == 0) threads = std::max(2u, std::thread::hardware_concurrency());
  for (unsigned i = 0; i < threads; ++i) s.threads.emplace_back([&s] { s.ioc.run(); });
  s.running = true;
  s.log("ready on port " + std::to_string(port()) + ", data in " + s.cfg.data_dir.string());
}

unsigned short Server::port() const {
  beast::error_code ec;
  auto ep = impl_->acceptor.local_endpoint(ec);
  return ec ? 0 : ep.port();
}

void Server::stop() {
  auto& s = *impl_;
  std::lock_guard guard(s.stop_mutex);
  if (!s.running) return;
  s.running = false;
  net::post(s.ioc, [&s] {
    beast::error_code ec;
    s.acceptor.close(ec);
    s.snapshot_timer.cancel();
  });
  std::vector<std::pair<std::weak_ptr<void>, std::function<void()>>> closers;
  {
    std::lock_guard lock(s.conn_mutex);
    closers.swap(s.closers);
  }
  for (auto& c : closers) c.second();
  s.work.reset();
  // Give closes a moment to run, then stop whatever is still pending.
  auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(2);
  while (!s.ioc.stopped() && std::chrono::steady_clock::now() < deadline) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  s.ioc.stop();
  for (auto& t : s.threads) t.join();
  s.threads.clear();
  s.sessions->snapshot_all();
  s.log("stopped; session snapshots written");
}

void Server::run_until_signal() {
  net::io_context signal_ctx;
  net::signal_set signals(signal_ctx, SIGINT, SIGTERM);
  signals.async_wait([this](beast::error_code, int sig) {
    impl_->log("signal " + std::to_string(sig) + ", shutting down");
  });
  signal_ctx.run();
  stop();
}

}  // namespace wgl
