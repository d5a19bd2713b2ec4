#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace wdrm {

// Numeric codes mirror the C API status values.
enum class ErrorCode : int {
    invalid_argument = 1,
    domain = 2,
    infeasible = 3,
    no_convergence = 4,
    unbounded = 5,
    io = 6,
    internal = 7,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

struct InvalidArgument : Error {
    explicit InvalidArgument(const std::string& what) : Error(ErrorCode::invalid_argument, what) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error(ErrorCode::domain, what) {}
};

struct InfeasibleError : Error {
    explicit InfeasibleError(const std::string& what) : Error(ErrorCode::infeasible, what) {}
};

struct UnboundedError : Error {
    explicit UnboundedError(const std::string& what) : Error(ErrorCode::unbounded, what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error(ErrorCode::io, what) {}
};

// Carries the residual history of the failing iteration so callers can log it.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::vector<double> trace = {})
        : Error(ErrorCode::no_convergence, what), trace_(std::move(trace)) {}
    const std::vector<double>& trace() const noexcept { return trace_; }

private:
    std::vector<double> trace_;
};

}  // namespace wdrm
