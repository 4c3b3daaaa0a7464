#pragma once

#include <stdexcept>
#include <string>

namespace claraprint {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// A well-formed document is missing a required field or has a field of the wrong kind.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

class DuplicateDocId : public Error {
 public:
  using Error::Error;
};

class UnknownDocId : public Error {
 public:
  using Error::Error;
};

/// A corpus does not satisfy the preconditions of an evaluation protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class MissingSource : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace claraprint
