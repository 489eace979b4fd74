#pragma once

#include <stdexcept>
#include <string>

namespace ncache {

// Malformed or out-of-range configuration values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable inputs, unwritable outputs, corrupt files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A stream is too short for the requested batching.
class SizingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Loss became NaN or infinite during training.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Token stream and model were built against different vocabularies.
class VocabularyMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ncache
