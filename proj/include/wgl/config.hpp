#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "wgl/expected.hpp"

namespace wgl {

struct ServerConfig {
  /// 0 binds an ephemeral port (tests only; rejected by check_config).
  int port = 8080;
  std::filesystem::path data_dir = "data";
  std::filesystem::path locale_dir = "locale";
  std::string default_locale = "en";
  std::int64_t session_snapshot_interval = 30;
  std::int64_t token_ttl = 8 * 3600;
  /// Web client assets; empty serves none.
  std::filesystem::path static_dir;
};

/// `key = value` lines; `#` starts a comment; values may be double-quoted.
/// Keys mirror the ServerConfig fields. Unknown keys are errors.
Expected<ServerConfig, std::string> parse_config(std::string_view text, ServerConfig base = {});
Expected<ServerConfig, std::string> load_config(const std::filesystem::path& file, ServerConfig base = {});

/// Startup validation; creates data_dir if needed and probes that it is writable.
Expected<void, std::string> check_config(const ServerConfig& cfg, bool allow_ephemeral_port = false);

}  // namespace wgl
