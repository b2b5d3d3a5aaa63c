#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "wgl/construction.hpp"
#include "wgl/expected.hpp"

// Line-based `.wgl` construction format, version 1:
//
//   wgl 1
//   # comment
//   free A 0 0
//   line ab A B
//
// One step per line, whitespace-separated tokens, `#` comments to end of line.
namespace wgl::format {

inline constexpr std::size_t kMaxSourceBytes = 1u << 20;

struct ParseError {
  enum class Kind {
    BadHeader,
    BadToken,
    UnknownKeyword,
    DuplicateId,
    ForwardReference,
    KindMismatch,
    ArityError,
    BadNumber,
  };
  /// 1-based line and byte column of the offending character.
  std::size_t line = 1;
  std::size_t column = 1;
  Kind kind = Kind::BadToken;
  std::string message;
};

std::string_view to_string(ParseError::Kind kind);

Expected<Construction, ParseError> parse(std::string_view src);

/// Parses a single step line without header, e.g. "line ab A B". Only lexical
/// checks apply; references are resolved when the step is added to a construction.
Expected<Step, ParseError> parse_step(std::string_view line);

std::string serialize(const Construction& c);
std::string serialize_step(const Step& s);

/// Shortest decimal text that reads back as the same double.
std::string format_number(double v);

struct ValidationNote {
  enum class Kind {
    /// A free point no step depends on, in a construction that has constructed steps.
    UnusedObject,
    /// Two ids that differ only by letter case.
    CaseCollision,
    /// The same operand repeated where that is degenerate for every placement.
    RepeatedOperand,
  };
  Kind kind;
  ObjectId id;
  std::string message;

  friend bool operator==(const ValidationNote&, const ValidationNote&) = default;
};

std::string_view to_string(ValidationNote::Kind kind);

/// Static diagnostics; never evaluates coordinates.
std::vector<ValidationNote> validate(const Construction& c);

}  // namespace wgl::format
