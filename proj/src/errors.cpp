#include "coherentia/errors.hpp"

namespace coherentia {

ParseError::ParseError(Kind kind, std::size_t position, const std::string& detail)
    : DataError(std::string(to_string(kind)) + " at position " + std::to_string(position) +
                (detail.empty() ? "" : ": " + detail)),
      kind_(kind),
      position_(position) {}

const char* to_string(ParseError::Kind kind) {
  switch (kind) {
    case ParseError::Kind::UnbalancedParens:
      return "unbalanced parentheses";
    case ParseError::Kind::EmptyNode:
      return "empty node";
    case ParseError::Kind::MissingWord:
      return "leaf with missing word";
    case ParseError::Kind::UnexpectedToken:
      return "unexpected token";
  }
  return "parse error";
}

}  // namespace coherentia
