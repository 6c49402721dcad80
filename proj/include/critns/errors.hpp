#pragma once

#include <stdexcept>
#include <string>

namespace critns {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what, std::string kind = "error")
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

struct InvalidFieldError : Error {
    explicit InvalidFieldError(const std::string& w) : Error(w, "invalid_field") {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& w) : Error(w, "domain") {}
};

struct GridMismatchError : Error {
    explicit GridMismatchError(const std::string& w) : Error(w, "grid_mismatch") {}
};

struct SupportOverflowError : Error {
    explicit SupportOverflowError(const std::string& w) : Error(w, "support_overflow") {}
};

struct UndersamplingError : Error {
    explicit UndersamplingError(const std::string& w) : Error(w, "undersampling") {}
};

struct FormatError : Error {
    explicit FormatError(const std::string& w) : Error(w, "format") {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& w) : Error(w, "config") {}
};

struct CoverageError : Error {
    explicit CoverageError(const std::string& w) : Error(w, "coverage") {}
};

struct PreconditionError : Error {
    explicit PreconditionError(const std::string& w) : Error(w, "precondition") {}
};

struct NonMonotoneError : Error {
    explicit NonMonotoneError(const std::string& w) : Error(w, "non_monotone") {}
};

// Raised when a numerical evaluation produces NaN/Inf.
struct NonFiniteError : Error {
    explicit NonFiniteError(const std::string& w) : Error(w, "non_finite") {}
};

}  // namespace critns
