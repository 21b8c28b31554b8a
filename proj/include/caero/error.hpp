#pragma once

#include <stdexcept>
#include <string>

namespace caero {

// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Requested quantity does not exist for the given inputs.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InsufficientWealthError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Prior probability of exactly 0 or 1.
class DegeneratePriorError : public DomainError {
public:
    using DomainError::DomainError;
};

class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NotFoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConflictError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StorageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IngestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace caero
