#pragma once

#include <stdexcept>
#include <string>

namespace edm {

/// Base of every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Missing file, missing column, unknown label or level.
struct SchemaError : Error {
  using Error::Error;
};

/// Structurally valid input whose content breaks an invariant (dangling keys, empty classes).
struct DataError : Error {
  using Error::Error;
};

/// Bad run configuration; the CLI maps it to exit code 2.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace edm
