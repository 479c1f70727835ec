#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dffn {

// Base class for every error the library reports deliberately.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input bytes (XML, TSV, checkpoint payload framing).
struct ParseError : Error {
  ParseError(const std::string& what, std::size_t byte_offset)
      : Error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
        offset(byte_offset) {}
  std::size_t offset;
};

// Structurally valid input missing a required element or attribute.
struct SchemaError : Error {
  using Error::Error;
};

// Unmapped gold-label string.
struct LabelError : Error {
  using Error::Error;
};

// Text-format line that does not parse (embedding files, TSV snapshots).
struct FormatError : Error {
  FormatError(const std::string& what, std::size_t line_number)
      : Error(what + " (line " + std::to_string(line_number) + ")"),
        line(line_number) {}
  std::size_t line;
};

// Tensor/vector dimension mismatch.
struct ShapeError : Error {
  using Error::Error;
};

// API misuse, e.g. backward before forward.
struct StateError : Error {
  using Error::Error;
};

// Non-finite value where a finite one is required.
struct NumericError : Error {
  using Error::Error;
};

// Unknown key (concept id, thread id, ...).
struct LookupError : Error {
  using Error::Error;
};

// Input outside the operation's domain (empty batch, no rankable threads).
struct DomainError : Error {
  using Error::Error;
};

// Answer position or similar index out of range.
struct IndexError : Error {
  using Error::Error;
};

// Inconsistent or incomplete configuration / missing provider.
struct ConfigError : Error {
  using Error::Error;
};

// Checkpoint or snapshot format version mismatch.
struct VersionError : Error {
  using Error::Error;
};

// Truncated or corrupt payload.
struct IntegrityError : Error {
  using Error::Error;
};

}  // namespace dffn
