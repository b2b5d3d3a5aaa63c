#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace wgl::i18n {

using Entries = std::map<std::string, std::string, std::less<>>;

/// English strings compiled into the binary.
const Entries& builtin_english();

/// Message catalogs, one flat JSON object per `<tag>.json` file.
///
/// Lookup order for (locale, key): the exact tag, its primary subtag
/// ("pt" for "pt-BR"), the default locale, built-in English, the key.
class Catalogs {
 public:
  explicit Catalogs(std::string default_locale = "en");

  /// Loads every `*.json` in `dir`; returns the tags loaded. A missing
  /// directory loads nothing. Throws std::runtime_error on a malformed file.
  std::vector<std::string> load_dir(const std::filesystem::path& dir);
  void add(std::string locale, Entries entries);

  bool has_locale(std::string_view locale) const;
  const std::string& default_locale() const { return default_locale_; }

  /// Never empty.
  std::string localize(std::string_view locale, std::string_view key) const;

  /// First tag of an Accept-Language header with a catalog, else the default.
  std::string negotiate(std::string_view accept_language) const;

 private:
  const std::string* lookup(std::string_view locale, std::string_view key) const;

  std::string default_locale_;
  std::map<std::string, Entries, std::less<>> catalogs_;
};

/// Lowercase with '_' turned into '-'.
std::string normalize_tag(std::string_view tag);

}  // namespace wgl::i18n
