#include "wgl/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>

#include "wgl/util.hpp"

namespace wgl {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

Expected<std::int64_t, std::string> integer(std::string_view key, std::string_view v) {
  std::int64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) return unexpected(std::string(key) + ": not an integer");
  return out;
}

}  // namespace

Expected<ServerConfig, std::string> parse_config(std::string_view text, ServerConfig cfg) {
  std::size_t lineno = 0;
  while (!text.empty()) {
    ++lineno;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    const auto where = [&](const std::string& msg) { return "line " + std::to_string(lineno) + ": " + msg; };
    std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) return unexpected(where("expected key = value"));
    const std::string_view key = trim(body.substr(0, eq));
    std::string_view value = trim(body.substr(eq + 1));
    if (!value.empty() && value.front() == '"') {
      const auto close = value.find('"', 1);
      if (close == std::string_view::npos) return unexpected(where("unterminated string"));
      const std::string_view rest = trim(value.substr(close + 1));
      if (!rest.empty() && rest.front() != '#') return unexpected(where("trailing characters"));
      value = value.substr(1, close - 1);
    } else {
      value = trim(value.substr(0, value.find('#')));
    }

    if (key == "port") {
      auto n = integer(key, value);
      if (!n) return unexpected(where(n.error()));
      cfg.port = static_cast<int>(*n);
    } else if (key == "session_snapshot_interval" || key == "token_ttl") {
      auto n = integer(key, value);
      if (!n) return unexpected(where(n.error()));
      if (*n <= 0) return unexpected(where(std::string(key) + ": must be positive"));
      (key == "token_ttl" ? cfg.token_ttl : cfg.session_snapshot_interval) = *n;
    } else if (key == "data_dir") {
      cfg.data_dir = std::string(value);
    } else if (key == "locale_dir") {
      cfg.locale_dir = std::string(value);
    } else if (key == "static_dir") {
      cfg.static_dir = std::string(value);
    } else if (key == "default_locale") {
      if (value.empty()) return unexpected(where("default_locale: empty"));
      cfg.default_locale = std::string(value);
    } else {
      return unexpected(where("unknown key '" + std::string(key) + "'"));
    }
  }
  return cfg;
}

Expected<ServerConfig, std::string> load_config(const std::filesystem::path& file, ServerConfig base) {
  auto text = util::read_file(file);
  if (!text) return unexpected("cannot read config file " + file.string());
  auto cfg = parse_config(*text, std::move(base));
  if (!cfg) return unexpected(file.string() + ": " + cfg.error());
  return cfg;
}

Expected<void, std::string> check_config(const ServerConfig& cfg, bool allow_ephemeral_port) {
  if (cfg.port < (allow_ephemeral_port ? 0 : 1) || cfg.port > 65535) {
    return unexpected("port " + std::to_string(cfg.port) + " is outside 1-65535");
  }
  if (cfg.data_dir.empty()) return unexpected(std::string("data_dir is empty"));
  std::error_code ec;
  std::filesystem::create_directories(cfg.data_dir, ec);
  if (ec || !std::filesystem::is_directory(cfg.data_dir)) {
    return unexpected("data_dir " + cfg.data_dir.string() + " is not a usable directory");
  }
  const auto probe = cfg.data_dir / (".write-probe-" + util::random_hex(4));
  {
    std::ofstream out(probe);
    if (!(out << "ok")) return unexpected("data_dir " + cfg.data_dir.string() + " is not writable");
  }
  std::filesystem::remove(probe, ec);
  return {};
}

}  // namespace wgl
