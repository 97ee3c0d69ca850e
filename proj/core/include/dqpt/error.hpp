#pragma once

#include <stdexcept>
#include <string>

namespace dqpt {

/// Invalid arguments or configuration: the caller asked for something outside
/// the domain of an operation.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation produced a result that fails its own consistency checks
/// (eigensolver failure, clamp beyond tolerance, lost orthogonality).
class NumericalFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace dqpt
