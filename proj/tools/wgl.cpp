// wgl: operator command line for the geometry laboratory server.

#include <termios.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "wgl/config.hpp"
#include "wgl/format.hpp"
#include "wgl/probe.hpp"
#include "wgl/repository.hpp"
#include "wgl/server.hpp"
#include "wgl/svg.hpp"
#include "wgl/util.hpp"

namespace {

constexpr int kOperationalError = 1;
constexpr int kUsageError = 2;

std::optional<wgl::Construction> load_construction(const std::string& file) {
  auto text = wgl::util::read_file(file);
  if (!text) {
    std::cerr << "wgl: cannot read " << file << "\n";
    return std::nullopt;
  }
  auto c = wgl::format::parse(*text);
  if (!c) {
    const auto& e = c.error();
    std::cerr << file << ":" << e.line << ":" << e.column << ": " << wgl::format::to_string(e.kind) << ": "
              << e.message << "\n";
    return std::nullopt;
  }
  return std::move(*c);
}

std::string read_secret(const std::string& prompt) {
  const bool tty = ::isatty(STDIN_FILENO);
  termios saved{};
  if (tty) {
    std::cerr << prompt << std::flush;
    ::tcgetattr(STDIN_FILENO, &saved);
    termios quiet = saved;
    quiet.c_lflag &= ~static_cast<tcflag_t>(ECHO);
    ::tcsetattr(STDIN_FILENO, TCSANOW, &quiet);
  }
  std::string line;
  std::getline(std::cin, line);
  if (tty) {
    ::tcsetattr(STDIN_FILENO, TCSANOW, &saved);
    std::cerr << "\n";
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::string default_data_dir() {
  if (const char* env = std::getenv("WGL_DATA_DIR"); env && *env) return env;
  return "data";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Web Geometry Laboratory server and tools"};
  app.require_subcommand(1);

  wgl::ServerConfig cfg;
  cfg.data_dir = default_data_dir();
  std::string config_file;
  std::optional<int> port;
  std::optional<std::string> data_dir, locale_dir, static_dir, default_locale;
  auto* serve = app.add_subcommand("serve", "Run the HTTP and live-channel server");
  serve->add_option("--config", config_file, "key = value configuration file")->check(CLI::ExistingFile);
  serve->add_option("--port", port, "TCP port")->check(CLI::Range(1, 65535));
  serve->add_option("--data-dir", data_dir, "Data directory (default $WGL_DATA_DIR or ./data)");
  serve->add_option("--locale-dir", locale_dir, "Directory of <tag>.json message catalogs");
  serve->add_option("--static-dir", static_dir, "Web client assets");
  serve->add_option("--default-locale", default_locale, "Fallback language tag");

  std::string init_dir = cfg.data_dir.string();
  std::string admin_login, admin_name;
  bool password_stdin = false;
  auto* init = app.add_subcommand("init", "Create a data directory and seed the admin account");
  init->add_option("--data-dir", init_dir, "Data directory (default $WGL_DATA_DIR or ./data)");
  init->add_option("--admin-login", admin_login, "Admin login name")->required();
  init->add_option("--admin-name", admin_name, "Admin display name");
  init->add_flag("--password-stdin", password_stdin, "Read the password from one stdin line without prompting");

  std::string validate_file;
  std::uint64_t samples = 1000, seed = 0;
  auto* validate = app.add_subcommand("validate", "Probe a construction for degeneracy and print a JSON report");
  validate->add_option("file", validate_file, "Construction file")->required();
  validate->add_option("--samples", samples, "Random placements to evaluate")->check(CLI::Range(1, 10'000'000));
  validate->add_option("--seed", seed, "PRNG seed");

  std::string render_file, render_out;
  auto* render = app.add_subcommand("render", "Evaluate a construction and write it as SVG");
  render->add_option("file", render_file, "Construction file")->required();
  render->add_option("-o,--output", render_out, "Output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  if (*validate) {
    auto c = load_construction(validate_file);
    if (!c) return kOperationalError;
    wgl::probe::ProbeConfig pc;
    pc.samples = samples;
    pc.seed = seed;
    std::cout << wgl::probe::to_json(wgl::probe::probe(*c, pc), pc, *c) << "\n";
    return 0;
  }

  if (*render) {
    auto c = load_construction(render_file);
    if (!c) return kOperationalError;
    auto fig = wgl::evaluate(*c);
    if (!fig) {
      std::cerr << render_file << ": step " << fig.error().failing_step.str() << ": " << fig.error().message << "\n";
      return kOperationalError;
    }
    try {
      wgl::util::write_file_atomic(render_out, wgl::svg::render(*c, *fig));
    } catch (const std::exception& e) {
      std::cerr << "wgl: " << e.what() << "\n";
      return kOperationalError;
    }
    return 0;
  }

  if (*init) {
    wgl::ServerConfig ic;
    ic.data_dir = init_dir;
    if (auto ok = wgl::check_config(ic); !ok) {
      std::cerr << "wgl: " << ok.error() << "\n";
      return kOperationalError;
    }
    std::string password;
    if (password_stdin) {
      std::getline(std::cin, password);
      if (!password.empty() && password.back() == '\r') password.pop_back();
    } else {
      password = read_secret("Password for " + admin_login + ": ");
      if (::isatty(STDIN_FILENO) && read_secret("Repeat password: ") != password) {
        std::cerr << "wgl: passwords do not match\n";
        return kOperationalError;
      }
    }
    wgl::Repository repo(ic.data_dir);
    auto admin = repo.seed_admin(admin_login, admin_name.empty() ? admin_login : admin_name, password);
    if (!admin) {
      std::cerr << "wgl: " << admin.error().message << "\n";
      return kOperationalError;
    }
    std::cout << "created admin " << admin->login_name << " (" << admin->user_id << ") in " << init_dir << "\n";
    return 0;
  }

  // serve: defaults, then $WGL_DATA_DIR, then the config file, then flags.
  if (!config_file.empty()) {
    auto loaded = wgl::load_config(config_file, cfg);
    if (!loaded) {
      std::cerr << "wgl: " << loaded.error() << "\n";
      return kUsageError;
    }
    cfg = *loaded;
  }
  if (port) cfg.port = *port;
  if (data_dir) cfg.data_dir = *data_dir;
  if (locale_dir) cfg.locale_dir = *locale_dir;
  if (static_dir) cfg.static_dir = *static_dir;
  if (default_locale) cfg.default_locale = *default_locale;
  if (auto ok = wgl::check_config(cfg); !ok) {
    std::cerr << "wgl: " << ok.error() << "\n";
    return kOperationalError;
  }
  try {
    wgl::Server server(cfg);
    server.start();
    server.run_until_signal();
  } catch (const std::exception& e) {
    std::cerr << "wgl: " << e.what() << "\n";
    return kOperationalError;
  }
  return 0;
}
