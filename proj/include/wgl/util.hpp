#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace wgl::util {

std::int64_t now_seconds();

/// "2026-10-14T08:30:00Z"; UTC, seconds precision.
std::string to_rfc3339(std::int64_t unix_seconds);
std::optional<std::int64_t> parse_rfc3339(std::string_view s);

/// Hex encoding of `bytes` bytes from the libsodium CSPRNG.
std::string random_hex(std::size_t bytes);

/// Writes to "<path>.tmp" then renames over `path`. Throws std::runtime_error.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::optional<std::string> read_file(const std::filesystem::path& path);

}  // namespace wgl::util
