#pragma once

#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>

namespace slpe {

using NodeId = std::int64_t;

/// Base exception for every recoverable failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input files (carries the 1-based line number when known).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

using Rng = std::mt19937_64;

// splitmix64 finalizer; derives independent child seeds from a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Shortest round-trip text form used by every file format in the project.
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

enum class LogLevel { quiet, info, debug };

inline LogLevel& log_level() {
  static LogLevel level = LogLevel::quiet;
  return level;
}

inline void log_warning(const std::string& msg) {
  if (log_level() != LogLevel::quiet) std::fprintf(stderr, "warning: %s\n", msg.c_str());
}

inline void log_info(const std::string& msg) {
  if (log_level() != LogLevel::quiet) std::fprintf(stderr, "%s\n", msg.c_str());
}

inline void log_debug(const std::string& msg) {
  if (log_level() == LogLevel::debug) std::fprintf(stderr, "debug: %s\n", msg.c_str());
}

}  // namespace slpe
