#pragma once

#include <stdexcept>
#include <string>

namespace refdiff {

/// Argument lies outside the domain of the coefficient field.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Distribution-level query on a profile that has no stationary
/// distribution (transient, or infinite normalizing constant).
class NoStationaryLaw : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Field failed validation; the message lists every violation.
class InvalidField : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Operation applied to a path it does not support (exploded path,
/// wrong construction mode).
class PathError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace refdiff
