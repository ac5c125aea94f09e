#pragma once

#include <stdexcept>
#include <string>

namespace stylelm {

/// Failure classes; the CLI maps each one onto a fixed exit code.
enum class ErrorKind {
  config = 1,
  data = 2,
  numeric = 3,
  provider = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

/// Bad or unreadable input data: missing files, empty corpora, OOV characters, short chunks.
struct DataError : Error {
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

/// Checkpoint failed its CRC or structural checks.
struct IntegrityError : DataError {
  explicit IntegrityError(const std::string& what) : DataError("integrity error: " + what) {}
};

/// Shape disagreement between tensors or inputs.
struct ShapeError : Error {
  explicit ShapeError(const std::string& what) : Error(ErrorKind::data, "shape mismatch: " + what) {}
};

/// Non-finite loss or gradient.
struct DivergenceError : Error {
  explicit DivergenceError(const std::string& what)
      : Error(ErrorKind::numeric, "divergence detected: " + what) {}
};

/// NLI provider failure. Retriable by the filter.
struct ProviderError : Error {
  explicit ProviderError(const std::string& what) : Error(ErrorKind::provider, what) {}
};

/// The provider answered, but not in the agreed wire format.
struct ProtocolError : ProviderError {
  explicit ProtocolError(const std::string& what) : ProviderError("protocol error: " + what) {}
};

}  // namespace stylelm
