// Copyright Contributors to the topotrack project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace topotrack {

/// File/stream level failures: missing files, malformed or unsupported
/// formats, images that are not 8-bit grayscale. Maps to CLI exit code 2.
class IoError : public std::runtime_error {
public:
  enum class Kind {
    MissingFile,
    UnsupportedFormat,
    NotGrayscale,
    Truncated,
    WriteFailure,
  };

  IoError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

/// Data-dependent degeneracies: constant-image histograms, line-thin
/// segments, dimension mismatches, empty sequences. Maps to CLI exit code 2.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters, config files, or scene specs. Maps to CLI exit code 3.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace topotrack
