#ifndef BENCHFOLD_ERRORS_HPP
#define BENCHFOLD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace benchfold {

/// Input violates a structural precondition (empty cell, shape mismatch, ...).
class StructuralError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerically degenerate input, e.g. constant disparities or all-zero weights.
class DegenerateInput : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Bad user data or configuration. The CLI maps this to exit status 1.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace benchfold

#endif
