#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace graphplay {

// Base for every error raised by the library. The CLI maps subclasses onto
// process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (JSON syntax, unreadable file).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a schema or invariant. `where` is a JSON
// pointer or an entity id.
class SchemaError : public Error {
 public:
  SchemaError(std::string where, const std::string& what)
      : Error(where.empty() ? what : where + ": " + what),
        where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

// A mutation would break a graph or config invariant.
class InvariantError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Remote endpoint unreachable or returned a non-200 status.
class EndpointError : public Error {
 public:
  using Error::Error;
};

// Endpoint answered, but the payload breaks the wire contract.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class NoPathAvailable : public Error {
 public:
  using Error::Error;
};

class StaleBatchError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace graphplay
