#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace incoc {

using Tick = std::uint64_t;
using Addr = std::uint64_t;
using LineAddr = std::uint64_t;
using CoreId = std::uint32_t;
using ReqId = std::uint64_t;

inline constexpr ReqId kNoRequest = ~ReqId{0};

// Error categories. The C API maps these onto stable status codes.
enum class ErrorKind {
  InvalidArgument,
  OutOfMemory,
  AddressOutOfRange,
  ResidentLinesExist,
  Config,
  Syntax,
  Range,
  Order,
  ProtocolViolation,
  TypeMismatch,
  Deadlock,
  Livelock,
  Verification,
  Io,
};

const char* to_string(ErrorKind kind);

class SimError : public std::runtime_error {
 public:
  SimError(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised by the trace parser; carries a 1-based source position.
class ParseError : public SimError {
 public:
  ParseError(ErrorKind kind, std::size_t line, std::size_t column,
             const std::string& msg)
      : SimError(kind, "line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Line payload. `version` counts committed stores to the line over the whole
/// run and is what load/store-exclusive pairs on Normal memory compare.
struct LineData {
  std::vector<std::uint64_t> words;
  std::uint64_t version = 0;

  bool operator==(const LineData&) const = default;
};

std::string hex(std::uint64_t v);

}  // namespace incoc
