#pragma once

#include <stdexcept>
#include <string>

namespace klb {

/// Input outside the domain an operation is defined on.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NotInvertible : public DomainError {
public:
    using DomainError::DomainError;
};

class NoSquareRoot : public DomainError {
public:
    using DomainError::DomainError;
};

}  // namespace klb
