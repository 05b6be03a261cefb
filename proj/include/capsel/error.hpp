#pragma once

#include <stdexcept>
#include <string>

namespace capsel {

/// Broad failure classes. The CLI and the HTTP service map these onto exit
/// codes and status codes respectively.
enum class ErrorKind {
    parse,            // malformed input text
    validation,       // well-formed input that breaks a domain invariant
    infeasible,       // no selection can satisfy the constraints
    resource_limit,   // node or search budget exhausted
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& message) : Error(ErrorKind::parse, message) {}
};

/// Invariant violation. `field()` names the offending field or id.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& message)
        : Error(ErrorKind::validation, message), field_(std::move(field)) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class InfeasibleError : public Error {
public:
    explicit InfeasibleError(const std::string& message) : Error(ErrorKind::infeasible, message) {}
};

/// Raised when a load impedance leaves no room under the impedance target.
class InfeasibleMaskError : public InfeasibleError {
public:
    using InfeasibleError::InfeasibleError;
};

/// Filtered library is empty while the model still has constraints.
class NoPartsError : public InfeasibleError {
public:
    using InfeasibleError::InfeasibleError;
};

class ResourceLimitError : public Error {
public:
    explicit ResourceLimitError(const std::string& message) : Error(ErrorKind::resource_limit, message) {}
};

}  // namespace capsel
