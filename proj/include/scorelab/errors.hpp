// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>

namespace scorelab {

// Precondition on a real-valued argument violated (non-positive sigma,
// inadmissible step fraction, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct IndexError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

// Operation not defined for this kind of object, e.g. the log-density of an
// approximate score.
struct UnsupportedOperation : std::logic_error {
    using std::logic_error::logic_error;
};

struct LengthMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InsufficientSamples : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace scorelab
