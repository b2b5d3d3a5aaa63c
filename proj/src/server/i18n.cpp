#include "wgl/i18n.hpp"

#include <algorithm>
#include <cctype>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "wgl/util.hpp"

namespace wgl::i18n {

const Entries& builtin_english() {
  static const Entries entries = {
      {"app.title", "Web Geometry Laboratory"},
      {"login.title", "Sign in"},
      {"login.name", "Login name"},
      {"login.password", "Password"},
      {"login.submit", "Sign in"},
      {"logout", "Sign out"},
      {"home.admin", "Teacher management"},
      {"home.teacher", "Constructions"},
      {"home.student", "My work"},
      {"constructions.title", "Constructions"},
      {"constructions.new", "New construction"},
      {"constructions.visibility", "Visibility"},
      {"scrapbook.title", "Scrapbook"},
      {"session.start", "Start class session"},
      {"session.end", "End session"},
      {"session.broadcast", "Send to all students"},
      {"session.students", "Students"},
      {"session.grant", "Share my workbench"},
      {"session.watch", "Watch"},
      {"session.edit", "Edit"},
      {"workbench.save", "Save to scrapbook"},
      {"workbench.rejected", "Your change was out of date; the figure has been refreshed."},
      {"error.unauthorized", "Sign in to continue."},
      {"error.auth_failed", "Invalid login or password."},
      {"error.forbidden", "You do not have permission to do that."},
      {"error.not_found", "Not found."},
      {"error.conflict", "That login name is already taken."},
      {"error.parse", "The construction could not be read."},
      {"error.bad_request", "The request could not be understood."},
      {"error.invalid_argument", "A value in the request is not acceptable."},
      {"error.method_not_allowed", "That method is not supported here."},
      {"error.unknown_session", "That class session does not exist."},
      {"error.session", "The session could not carry out the request."},
      {"error.too_large", "The request is too large."},
      {"error.internal", "Something went wrong on the server."},
  };
  return entries;
}

std::string normalize_tag(std::string_view tag) {
  std::string out;
  out.reserve(tag.size());
  for (char ch : tag) out.push_back(ch == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  return out;
}

namespace {

std::string_view primary(std::string_view tag) { return tag.substr(0, tag.find('-')); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Catalogs::Catalogs(std::string default_locale) : default_locale_(normalize_tag(default_locale)) {
  if (default_locale_.empty()) default_locale_ = "en";
}

std::vector<std::string> Catalogs::load_dir(const std::filesystem::path& dir) {
  std::vector<std::string> loaded;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) return loaded;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    auto text = util::read_file(path);
    if (!text) throw std::runtime_error("cannot read catalog " + path.string());
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(*text);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::runtime_error("malformed catalog " + path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw std::runtime_error("catalog " + path.string() + " is not an object");
    Entries entries;
    for (const auto& [k, v] : j.items()) {
      if (!v.is_string()) throw std::runtime_error("catalog " + path.string() + ": value of " + k + " is not a string");
      entries.emplace(k, v.get<std::string>());
    }
    const std::string tag = normalize_tag(path.stem().string());
    add(tag, std::move(entries));
    loaded.push_back(tag);
  }
  return loaded;
}

void Catalogs::add(std::string locale, Entries entries) {
  auto& slot = catalogs_[normalize_tag(locale)];
  for (auto& [k, v] : entries) slot[k] = std::move(v);
}

bool Catalogs::has_locale(std::string_view locale) const {
  const std::string tag = normalize_tag(locale);
  return tag == "en" || catalogs_.count(tag) > 0;
}

const std::string* Catalogs::lookup(std::string_view locale, std::string_view key) const {
  auto cat = catalogs_.find(locale);
  if (cat == catalogs_.end()) return nullptr;
  auto it = cat->second.find(key);
  if (it == cat->second.end() || it->second.empty()) return nullptr;
  return &it->second;
}

std::string Catalogs::localize(std::string_view locale, std::string_view key) const {
  const std::string tag = normalize_tag(locale);
  for (std::string_view candidate : {std::string_view(tag), primary(tag), std::string_view(default_locale_),
                                     primary(default_locale_)}) {
    if (candidate.empty()) continue;
    if (const std::string* hit = lookup(candidate, key)) return *hit;
  }
  const auto& en = builtin_english();
  if (auto it = en.find(key); it != en.end()) return it->second;
  if (!key.empty()) return std::string(key);
  return "?";
}

std::string Catalogs::negotiate(std::string_view header) const {
  // Entries keep header order; q-values only drop q=0 entries.
  while (!header.empty()) {
    const auto comma = header.find(',');
    std::string_view item = header.substr(0, comma);
    header = comma == std::string_view::npos ? std::string_view{} : header.substr(comma + 1);
    std::string_view tag = trim(item.substr(0, item.find(';')));
    if (auto q = item.find(";q="); q != std::string_view::npos) {
      const std::string_view qv = trim(item.substr(q + 3));
      if (!qv.empty() && std::all_of(qv.begin(), qv.end(), [](char c) { return c == '0' || c == '.'; })) continue;
    }
    if (tag.empty() || tag == "*") continue;
    const std::string norm = normalize_tag(tag);
    if (has_locale(norm)) return norm;
    const std::string_view p = primary(norm);
    if (has_locale(p)) return std::string(p);
  }
  return default_locale_;
}

}  // namespace wgl::i18n
