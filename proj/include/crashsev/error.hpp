#pragma once

#include <stdexcept>
#include <string>

namespace crashsev {

// Bad or inconsistent input: malformed files, schema mismatches, contract
// violations on caller-supplied data. Maps to CLI exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem-level failure (unreadable/unwritable path). Also exit code 2.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace crashsev
