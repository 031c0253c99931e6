#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace anonsim {

// AS numbers are positive; 0 is reserved as "invalid" internally.
using AsId = std::uint32_t;

// An AS path from source to destination, both endpoints included.
using AsPath = std::vector<AsId>;

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input text (bad integer, bad field count, ...). Message carries
// the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& msg)
      : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Structurally invalid data (provider cycles, conflicting relationships, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// An AS id that does not exist in the graph under consideration. Kept
// distinct from "invalid path": a path over unknown ASes is a usage error,
// not a routing fact.
class UnknownAsError : public Error {
 public:
  explicit UnknownAsError(AsId as)
      : Error("unknown AS " + std::to_string(as)), as_(as) {}
  AsId as() const { return as_; }

 private:
  AsId as_;
};

// A selection operation left no eligible element (e.g. no suspect-free guard).
class SelectionError : public Error {
 public:
  using Error::Error;
};

// Observations assign zero total mass to every candidate.
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

inline std::string path_to_string(const AsPath& p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(p[i]);
  }
  return s;
}

}  // namespace anonsim
