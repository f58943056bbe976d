#pragma once

#include <stdexcept>

namespace focalflow {

// User-facing configuration or usage problem. Maps to exit code 2 at the CLI
// boundary; every other exception maps to 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace focalflow
