#pragma once

#include <functional>
#include <memory>
#include <string>

#include "wgl/config.hpp"
#include "wgl/repository.hpp"

namespace wgl {

namespace classroom {
class SessionManager;
}

/// HTTP API, live channel (`/ws`) and static web client on one port.
class Server {
 public:
  using Log = std::function<void(const std::string&)>;

  /// Opens the repository in cfg.data_dir. Log lines go to stderr by default.
  explicit Server(ServerConfig cfg, RepositoryOptions repo_options = {}, Log log = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts worker threads. Throws std::runtime_error when the
  /// port cannot be bound. Port 0 picks an ephemeral port.
  void start(unsigned threads = 0);
  unsigned short port() const;

  /// Stops accepting, closes connections and writes session snapshots.
  void stop();
  /// Blocks until SIGINT or SIGTERM, then stops.
  void run_until_signal();

  Repository& repository();
  classroom::SessionManager& sessions();

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace wgl
