#pragma once

#include <stdexcept>

namespace heunqes {

/// A numerical procedure failed to produce a trustworthy result.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace heunqes
