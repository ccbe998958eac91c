// powercast: power-mean pooling of ensemble forecasts on a cube-sphere grid.
// Copyright (c) 2026 powercast contributors. MIT license; see LICENSE.

#pragma once

#include <stdexcept>
#include <string>

namespace powercast {

// Validation failures map to CLI exit code 1, I/O failures to exit code 2.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DegenerateLabelsError : ValidationError {
  explicit DegenerateLabelsError(const std::string& msg) : ValidationError(msg) {}
};

struct InsufficientDataError : ValidationError {
  explicit InsufficientDataError(const std::string& msg) : ValidationError(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed file contents, as opposed to filesystem-level failures.
struct FormatError : IoError {
  explicit FormatError(const std::string& msg) : IoError(msg) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

}  // namespace powercast
