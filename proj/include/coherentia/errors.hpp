#ifndef COHERENTIA_ERRORS_HPP
#define COHERENTIA_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coherentia {

// Malformed input data: parse trees, corpus files, embeddings, model files,
// manifests. The CLI maps these to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent configuration or tensor shapes. The CLI maps these to exit
// code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
 public:
  enum class Kind { UnbalancedParens, EmptyNode, MissingWord, UnexpectedToken };

  ParseError(Kind kind, std::size_t position, const std::string& detail);

  Kind kind() const { return kind_; }
  std::size_t position() const { return position_; }

 private:
  Kind kind_;
  std::size_t position_;
};

const char* to_string(ParseError::Kind kind);

class ShapeError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace coherentia

#endif  // COHERENTIA_ERRORS_HPP
