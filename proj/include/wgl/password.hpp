#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace wgl {

/// Argon2id cost parameters (libsodium crypto_pwhash). The resulting hash
/// string is self-describing: "$argon2id$v=19$m=<KiB>,t=<ops>,p=1$<salt>$<hash>".
struct PasswordParams {
  unsigned long long opslimit;
  std::size_t memlimit;

  /// libsodium's interactive profile: t=2, m=64 MiB.
  static PasswordParams interactive();
  /// Cheapest accepted parameters; for tests only.
  static PasswordParams minimal();
};

std::string hash_password(std::string_view password, const PasswordParams& params);
/// Constant-time verification against a stored hash string.
bool verify_password(std::string_view stored_hash, std::string_view password);

}  // namespace wgl
