#pragma once

#include <stdexcept>
#include <string>

namespace sepclust {

/// Invalid caller input (bad dimensions, non-finite data, empty cluster, ...).
struct input_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Line through two coincident points requested.
struct degenerate_line_error : input_error {
    using input_error::input_error;
};

/// An iterative routine failed to reach its tolerance.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A synthetic-instance generator could not satisfy its certificate.
struct generation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace sepclust
