#pragma once

#include <stdexcept>
#include <string>

namespace bloch {

/// Malformed arguments (dimension mismatch, zero denominators, ...).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A lattice model that cannot describe a self-adjoint periodic operator.
class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A finite patch that is too small for the requested operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A mathematical precondition that does not hold for the given data,
/// e.g. a magnetic field that is not periodic.
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Violated contract on an intermediate object (non-Hermitian fiber,
/// missing eigenvectors).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string& what)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace bloch
