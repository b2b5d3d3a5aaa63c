#include "wgl/format.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>

namespace wgl::format {

std::string_view to_string(ParseError::Kind kind) {
  using K = ParseError::Kind;
  switch (kind) {
    case K::BadHeader:
      return "BadHeader";
    case K::BadToken:
      return "BadToken";
    case K::UnknownKeyword:
      return "UnknownKeyword";
    case K::DuplicateId:
      return "DuplicateId";
    case K::ForwardReference:
      return "ForwardReference";
    case K::KindMismatch:
      return "KindMismatch";
    case K::ArityError:
      return "ArityError";
    case K::BadNumber:
      return "BadNumber";
  }
  return "Unknown";
}

std::string_view to_string(ValidationNote::Kind kind) {
  switch (kind) {
    case ValidationNote::Kind::UnusedObject:
      return "UnusedObject";
    case ValidationNote::Kind::CaseCollision:
      return "CaseCollision";
    case ValidationNote::Kind::RepeatedOperand:
      return "RepeatedOperand";
  }
  return "Unknown";
}

namespace {

using K = ParseError::Kind;

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

// Splits one physical line (without its LF) into tokens, dropping the comment.
std::vector<Token> tokenize(std::string_view line) {
  if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

// Shape of each keyword's argument list after the step id.
enum class Arg { Ref, Number, Branch };

struct Signature {
  std::string_view keyword;
  std::vector<Arg> args;
};

const std::vector<Signature>& signatures() {
  static const std::vector<Signature> table = {
      {"free", {Arg::Number, Arg::Number}},
      {"line", {Arg::Ref, Arg::Ref}},
      {"mid", {Arg::Ref, Arg::Ref}},
      {"perpbis", {Arg::Ref, Arg::Ref}},
      {"bisector", {Arg::Ref, Arg::Ref, Arg::Ref}},
      {"perp", {Arg::Ref, Arg::Ref}},
      {"parallel", {Arg::Ref, Arg::Ref}},
      {"xll", {Arg::Ref, Arg::Ref}},
      {"circle", {Arg::Ref, Arg::Ref}},
      {"xlc", {Arg::Ref, Arg::Ref, Arg::Branch}},
      {"xcc", {Arg::Ref, Arg::Ref, Arg::Branch}},
      {"foot", {Arg::Ref, Arg::Ref}},
  };
  return table;
}

// Decimal with optional sign, fraction and exponent. No inf/nan, no hex.
bool looks_numeric(std::string_view s) {
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  std::size_t digits = 0;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i, ++digits;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i, ++digits;
  }
  if (digits == 0) return false;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t exp_digits = 0;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i, ++exp_digits;
    if (exp_digits == 0) return false;
  }
  return i == s.size();
}

// Position of the leading significant digit relative to the decimal point,
// including the exponent: 1 for "1.5", -2 for "0.001", 1000 for "1e999".
long decimal_exponent(std::string_view s) {
  long exp = 0;
  if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view digits = s.substr(e + 1);
    const bool neg = !digits.empty() && digits.front() == '-';
    if (!digits.empty() && (digits.front() == '-' || digits.front() == '+')) digits.remove_prefix(1);
    for (char ch : digits) exp = std::min(exp * 10 + (ch - '0'), 100000L);
    if (neg) exp = -exp;
    s = s.substr(0, e);
  }
  const std::size_t dot = std::min(s.find('.'), s.size());
  const std::size_t first = s.find_first_of("123456789");
  if (first == std::string_view::npos) return -100000L;
  const long pos = first < dot ? static_cast<long>(dot - first) : -static_cast<long>(first - dot - 1);
  return exp + pos;
}

std::optional<double> parse_number(std::string_view s) {
  if (!looks_numeric(s)) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ptr != s.data() + s.size()) return std::nullopt;
  if (ec == std::errc::result_out_of_range) {
    // Underflow rounds to a signed zero; overflow is rejected.
    if (decimal_exponent(s) > 0) return std::nullopt;
    v = s.front() == '-' ? -0.0 : 0.0;
  } else if (ec != std::errc()) {
    return std::nullopt;
  }
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

ParseError error_at(std::size_t line, std::size_t column, K kind, std::string message) {
  return ParseError{line, column, kind, std::move(message)};
}

struct ParsedStep {
  Step step;
  // Columns of the id token and of each reference operand, for later diagnostics.
  std::size_t id_column;
  std::vector<std::size_t> operand_columns;
};

Expected<ParsedStep, ParseError> parse_tokens(const std::vector<Token>& toks, std::size_t line_no) {
  const Token& kw = toks.front();
  const auto& table = signatures();
  auto sig = std::find_if(table.begin(), table.end(),
                          [&](const Signature& s) { return s.keyword == kw.text; });
  if (sig == table.end()) {
    return unexpected(error_at(line_no, kw.column, K::UnknownKeyword,
                               "unknown keyword '" + std::string(kw.text) + "'"));
  }
  const std::size_t expected = 2 + sig->args.size();
  if (toks.size() != expected) {
    const Token& at = toks.size() > expected ? toks[expected] : toks.back();
    return unexpected(error_at(line_no, at.column, K::ArityError,
                               "'" + std::string(kw.text) + "' takes " +
                                   std::to_string(expected - 1) + " arguments, got " +
                                   std::to_string(toks.size() - 1)));
  }
  auto id = ObjectId::make(toks[1].text);
  if (!id) {
    return unexpected(error_at(line_no, toks[1].column, K::BadToken,
                               "invalid id '" + std::string(toks[1].text) + "'"));
  }

  std::vector<ObjectId> refs;
  std::vector<std::size_t> ref_cols;
  std::array<double, 2> nums{};
  std::size_t num_count = 0;
  geom::Branch branch = geom::Branch::First;
  for (std::size_t i = 0; i < sig->args.size(); ++i) {
    const Token& t = toks[2 + i];
    switch (sig->args[i]) {
      case Arg::Ref: {
        auto ref = ObjectId::make(t.text);
        if (!ref) {
          return unexpected(error_at(line_no, t.column, K::BadToken,
                                     "invalid reference '" + std::string(t.text) + "'"));
        }
        refs.push_back(*ref);
        ref_cols.push_back(t.column);
        break;
      }
      case Arg::Number: {
        auto v = parse_number(t.text);
        if (!v) {
          return unexpected(error_at(line_no, t.column, K::BadNumber,
                                     "invalid number '" + std::string(t.text) + "'"));
        }
        nums[num_count++] = *v;
        break;
      }
      case Arg::Branch:
        if (t.text == "1") {
          branch = geom::Branch::First;
        } else if (t.text == "2") {
          branch = geom::Branch::Second;
        } else {
          return unexpected(error_at(line_no, t.column, K::BadToken,
                                     "branch must be 1 or 2, got '" + std::string(t.text) + "'"));
        }
        break;
    }
  }

  const std::size_t which = static_cast<std::size_t>(sig - table.begin());
  StepKind kind;
  switch (which) {
    case 0: kind = step::Free{nums[0], nums[1]}; break;
    case 1: kind = step::LineThrough{refs[0], refs[1]}; break;
    case 2: kind = step::Midpoint{refs[0], refs[1]}; break;
    case 3: kind = step::PerpBisector{refs[0], refs[1]}; break;
    case 4: kind = step::AngleBisector{refs[0], refs[1], refs[2]}; break;
    case 5: kind = step::PerpThrough{refs[0], refs[1]}; break;
    case 6: kind = step::ParallelThrough{refs[0], refs[1]}; break;
    case 7: kind = step::IntersectLL{refs[0], refs[1]}; break;
    case 8: kind = step::CircleCenterThrough{refs[0], refs[1]}; break;
    case 9: kind = step::IntersectLC{refs[0], refs[1], branch}; break;
    case 10: kind = step::IntersectCC{refs[0], refs[1], branch}; break;
    default: kind = step::FootOnLine{refs[0], refs[1]}; break;
  }
  return ParsedStep{Step{*id, std::move(kind)}, toks[1].column, std::move(ref_cols)};
}

// Line/column of byte offset `pos` in `src`.
std::pair<std::size_t, std::size_t> position_of(std::string_view src, std::size_t pos) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < pos && i < src.size(); ++i) {
    if (src[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

Expected<Construction, ParseError> parse(std::string_view src) {
  if (src.size() > kMaxSourceBytes) {
    auto [l, c] = position_of(src, kMaxSourceBytes);
    return unexpected(error_at(l, c, K::BadToken, "source exceeds 1 MiB"));
  }

  Construction out;
  bool have_header = false;
  std::size_t line_no = 0;
  std::size_t offset = 0;
  while (offset < src.size()) {
    ++line_no;
    std::size_t end = src.find('\n', offset);
    if (end == std::string_view::npos) end = src.size();
    const std::string_view line = src.substr(offset, end - offset);
    offset = end + 1;

    const auto toks = tokenize(line);
    if (toks.empty()) continue;

    if (!have_header) {
      if (toks.size() != 2 || toks[0].text != "wgl" || toks[1].text != "1") {
        return unexpected(error_at(line_no, toks[0].column, K::BadHeader,
                                   "expected header 'wgl 1'"));
      }
      have_header = true;
      continue;
    }

    auto parsed = parse_tokens(toks, line_no);
    if (!parsed) return unexpected(parsed.error());
    auto added = out.add(parsed->step);
    if (!added) {
      const auto& e = added.error();
      using CK = ConstructionError::Kind;
      const std::size_t col =
          e.operand >= 0 ? parsed->operand_columns[static_cast<std::size_t>(e.operand)]
                         : parsed->id_column;
      const K kind = e.kind == CK::DuplicateId      ? K::DuplicateId
                     : e.kind == CK::KindMismatch ? K::KindMismatch
                                                  : K::ForwardReference;
      return unexpected(error_at(line_no, col, kind, e.message));
    }
  }

  if (!have_header) {
    // Point at the last character so the position stays inside the source.
    auto [l, c] = src.empty() ? std::pair<std::size_t, std::size_t>{1, 1}
                              : position_of(src, src.size() - 1);
    return unexpected(error_at(l, c, K::BadHeader, "missing header 'wgl 1'"));
  }
  return out;
}

Expected<Step, ParseError> parse_step(std::string_view line) {
  if (line.find('\n') != std::string_view::npos) {
    auto [l, c] = position_of(line, line.find('\n'));
    return unexpected(error_at(l, c, K::BadToken, "a step must be a single line"));
  }
  const auto toks = tokenize(line);
  if (toks.empty()) return unexpected(error_at(1, 1, K::ArityError, "empty step"));
  auto parsed = parse_tokens(toks, 1);
  if (!parsed) return unexpected(parsed.error());
  return std::move(parsed->step);
}

std::string format_number(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string serialize_step(const Step& s) {
  std::string out(keyword(s.kind));
  out += ' ';
  out += s.id.str();
  if (const auto* f = std::get_if<step::Free>(&s.kind)) {
    out += ' ' + format_number(f->x) + ' ' + format_number(f->y);
    return out;
  }
  for (const auto& op : operands(s.kind)) {
    out += ' ';
    out += op.id->str();
  }
  if (const auto* k = std::get_if<step::IntersectLC>(&s.kind)) {
    out += k->branch == geom::Branch::First ? " 1" : " 2";
  } else if (const auto* k2 = std::get_if<step::IntersectCC>(&s.kind)) {
    out += k2->branch == geom::Branch::First ? " 1" : " 2";
  }
  return out;
}

std::string serialize(const Construction& c) {
  std::string out = "wgl 1\n";
  for (const auto& s : c.steps()) {
    out += serialize_step(s);
    out += '\n';
  }
  return out;
}

std::vector<ValidationNote> validate(const Construction& c) {
  using NK = ValidationNote::Kind;
  std::vector<ValidationNote> notes;

  // Case-insensitive collisions, reported on the later id.
  std::map<std::string, const ObjectId*> folded;
  for (const auto& s : c.steps()) {
    std::string key = s.id.str();
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    auto [it, inserted] = folded.emplace(key, &s.id);
    if (!inserted) {
      notes.push_back({NK::CaseCollision, s.id,
                       "'" + s.id.str() + "' differs from '" + it->second->str() +
                           "' only by letter case"});
    }
  }

  for (const auto& s : c.steps()) {
    const auto ops = operands(s.kind);
    auto same = [&](std::size_t i, std::size_t j) { return *ops[i].id == *ops[j].id; };
    bool repeated = std::visit(
        [&](const auto& k) {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, step::LineThrough> ||
                        std::is_same_v<T, step::PerpBisector> ||
                        std::is_same_v<T, step::IntersectLL> ||
                        std::is_same_v<T, step::CircleCenterThrough> ||
                        std::is_same_v<T, step::IntersectCC>) {
            return same(0, 1);
          } else if constexpr (std::is_same_v<T, step::AngleBisector>) {
            return same(0, 1) || same(1, 2);
          } else {
            return false;
          }
        },
        s.kind);
    if (repeated) {
      notes.push_back({NK::RepeatedOperand, s.id,
                       "step '" + s.id.str() + "' (" + std::string(describe(s.kind)) +
                           ") repeats an operand and is degenerate for every placement"});
    }
  }

  const bool has_constructed = std::any_of(c.steps().begin(), c.steps().end(), [](const Step& s) {
    return !std::holds_alternative<step::Free>(s.kind);
  });
  if (has_constructed) {
    std::map<ObjectId, bool> used;
    for (const auto& s : c.steps()) {
      for (const auto& op : operands(s.kind)) used[*op.id] = true;
    }
    for (const auto& s : c.steps()) {
      if (std::holds_alternative<step::Free>(s.kind) && !used.contains(s.id)) {
        notes.push_back({NK::UnusedObject, s.id,
                         "free point '" + s.id.str() + "' is not used by any step"});
      }
    }
  }
  return notes;
}

}  // namespace wgl::format
