#pragma once

#include <stdexcept>
#include <string>

namespace strato {

// Argument outside the mathematical domain (e.g. a time point outside [t,T]).
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Unsupported or inconsistent configuration (unknown basis, bad flag values).
class configuration_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Caller broke a documented precondition (dimension mismatch, out-of-range order).
class contract_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Requested table or simulation exceeds the configured budget.
class resource_error : public std::length_error {
public:
    resource_error(const std::string& what, std::size_t required)
        : std::length_error(what), required_(required) {}

    std::size_t required() const noexcept { return required_; }

private:
    std::size_t required_;
};

// The request is well-formed but no exact formula is implemented for it.
class unsupported_case_error : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace strato
