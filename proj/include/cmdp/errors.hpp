#ifndef CMDP_ERRORS_HPP
#define CMDP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cmdp {

/// Bad user input: malformed instance/config/flags, inconsistent dimensions. CLI exit 1.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& m) : std::runtime_error(m) {}
};

/// A run or sweep cell failed while executing. CLI exit 2.
struct RunError : std::runtime_error {
  explicit RunError(const std::string& m) : std::runtime_error(m) {}
};

/// Filesystem trouble: unreadable/unwritable paths, truncated files. CLI exit 3.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace cmdp

#endif  // CMDP_ERRORS_HPP
