#pragma once

#include <stdexcept>
#include <string>

namespace dhauds {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File system and encoding failures.
struct IoError : Error {
    using Error::Error;
};

/// Invalid severity grids, pools, manifests or run configuration.
struct ConfigError : Error {
    using Error::Error;
};

/// A noise pool references a type the library cannot resolve.
struct PoolError : Error {
    using Error::Error;
};

}  // namespace dhauds
