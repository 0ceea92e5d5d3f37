#pragma once

#include <stdexcept>
#include <string>

namespace shelab {

/// Argument outside the mathematical domain of an operation (t <= 0, s not in (0,t), ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Experiment or grid configuration that violates a stated invariant.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Caller broke an interface contract (mismatched lengths, wrong representation).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// An estimator had no usable data.
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reading or writing a file failed.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace shelab
