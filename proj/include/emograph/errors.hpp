#pragma once

#include <stdexcept>
#include <string>

namespace emograph {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files (carries file/line context in the message).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Artifact files that are truncated, versioned wrong, or internally inconsistent.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Values outside the documented contracts (bad label index, window < 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A key that the caller promised would be present is missing.
class LookupError : public Error {
 public:
  using Error::Error;
};

}  // namespace emograph
