#include "wgl/perm.hpp"

namespace wgl {

std::string_view to_string(Role r) {
  switch (r) {
    case Role::Admin:
      return "admin";
    case Role::Teacher:
      return "teacher";
    case Role::Student:
      return "student";
  }
  return "unknown";
}

std::optional<Role> parse_role(std::string_view s) {
  if (s == "admin") return Role::Admin;
  if (s == "teacher") return Role::Teacher;
  if (s == "student") return Role::Student;
  return std::nullopt;
}

namespace {

PermBits normalize(PermBits b) {
  if (b.write) b.read = true;
  return b;
}

void append(std::string& out, const PermBits& b) {
  out += b.read ? 'r' : '-';
  out += b.write ? 'w' : '-';
  out += b.visible ? 'v' : '-';
}

std::optional<PermBits> parse_triple(std::string_view s) {
  PermBits b;
  if (s[0] == 'r') b.read = true; else if (s[0] != '-') return std::nullopt;
  if (s[1] == 'w') b.write = true; else if (s[1] != '-') return std::nullopt;
  if (s[2] == 'v') b.visible = true; else if (s[2] != '-') return std::nullopt;
  return b;
}

}  // namespace

Perm Perm::normalized() const {
  return Perm{PermBits{true, true, true}, normalize(group), normalize(other)};
}

std::string Perm::str() const {
  std::string out;
  append(out, owner);
  append(out, group);
  append(out, other);
  return out;
}

std::optional<Perm> Perm::parse(std::string_view s) {
  if (s.size() != 9) return std::nullopt;
  auto o = parse_triple(s.substr(0, 3));
  auto g = parse_triple(s.substr(3, 3));
  auto t = parse_triple(s.substr(6, 3));
  if (!o || !g || !t) return std::nullopt;
  return Perm{*o, *g, *t};
}

std::uint16_t Perm::bits() const {
  std::uint16_t v = 0;
  for (const PermBits* b : {&owner, &group, &other}) {
    v = static_cast<std::uint16_t>((v << 3) | (b->read << 2) | (b->write << 1) | b->visible);
  }
  return v;
}

Perm Perm::from_bits(std::uint16_t v) {
  auto triple = [](unsigned t) { return PermBits{(t & 4) != 0, (t & 2) != 0, (t & 1) != 0}; };
  return Perm{triple((v >> 6) & 7u), triple((v >> 3) & 7u), triple(v & 7u)};
}

Perm perm_from_legacy_level(std::int64_t level) {
  Perm p;
  if (level >= 0) p.other = PermBits{true, false, true};
  return p;
}

bool can_see(const Perm& p, const AccessContext& ctx) {
  return ctx.is_owner || ctx.teacher_of_scrapbook || (ctx.in_group && p.group.visible) ||
         p.other.visible;
}

bool can_read(const Perm& p, const AccessContext& ctx) {
  if (!can_see(p, ctx)) return false;
  return ctx.is_owner || ctx.teacher_of_scrapbook || (ctx.in_group && p.group.read) || p.other.read;
}

bool can_write(const Perm& p, const AccessContext& ctx) {
  if (!can_see(p, ctx)) return false;
  return ctx.is_owner || (ctx.in_group && p.group.write) || p.other.write;
}

}  // namespace wgl
