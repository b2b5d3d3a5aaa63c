#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace wgl {

enum class Role { Admin, Teacher, Student };

std::string_view to_string(Role r);
std::optional<Role> parse_role(std::string_view s);

struct PermBits {
  bool read = false;
  bool write = false;
  bool visible = false;
  friend bool operator==(const PermBits&, const PermBits&) = default;
};

/// Owner/group/other × read/write/visible, rendered like `ls -l` as "rwvr-v---".
struct Perm {
  PermBits owner{true, true, true};
  PermBits group;
  PermBits other;

  friend bool operator==(const Perm&, const Perm&) = default;

  /// Owner bits forced on; within each class write implies read.
  Perm normalized() const;

  std::string str() const;
  static std::optional<Perm> parse(std::string_view s);

  /// Nine-bit encoding, owner read as the most significant bit.
  std::uint16_t bits() const;
  static Perm from_bits(std::uint16_t bits);

  static Perm owner_only() { return Perm{}; }
};

/// Legacy "level attribute": negative means teacher-only (owner-only here),
/// zero or positive means readable and visible to everyone.
Perm perm_from_legacy_level(std::int64_t level);

/// Relationship between an actor and a record, resolved by the repository.
struct AccessContext {
  bool is_owner = false;
  bool in_group = false;
  /// Actor is a teacher and the record is a scrapbook entry of one of their students.
  bool teacher_of_scrapbook = false;
};

bool can_see(const Perm& p, const AccessContext& ctx);
/// Loading requires visibility as well as a read grant.
bool can_read(const Perm& p, const AccessContext& ctx);
bool can_write(const Perm& p, const AccessContext& ctx);

}  // namespace wgl
