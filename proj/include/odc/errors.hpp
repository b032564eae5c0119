#pragma once

#include <stdexcept>

namespace odc {

// Rejected model/config input. The CLI maps this to exit code 2.
struct parameter_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Query outside the domain of a formula: negative horizon, level off a
// monotone branch, state outside the region a construction covers.
struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Iteration that failed to converge, broken admissibility, failed
// cross-checks. The CLI maps this to exit code 1.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace odc
