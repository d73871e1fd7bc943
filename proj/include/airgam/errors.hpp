#pragma once

#include <stdexcept>

namespace airgam {

/// The requested model demands more information than the data supports
/// (too few usable rows, too few distinct values for the basis). The CLI
/// maps this to the numerical-failure exit code.
struct InsufficientSupportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace airgam
