#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace smlab {

enum class ErrorKind {
    DivisionByDegenerate,
    NegativeRadicand,
    BasePointMismatch,
    OrderMismatch,
    NonFinite,
    ParseError,
    RejectedConstruct,
    DomainError,
    DegeneratePoint,
    RankMismatch,
    ChartRangeError,
    DegenerateStart,
    RankZeroEncountered,
    NoConvergence,
    NotA2,
    ExtrapolationDiverged,
    NotNormalized,
    NotCrossCap,
    SolveFailed,
    DegenerateGHessian,
    SingularSetUnresolved,
    NonConvergentNearA3,
    ConfigError,
};

std::string_view to_string(ErrorKind kind);

/// Typed error carrying the module that raised it.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string module, const std::string& message)
        : std::runtime_error(message), kind_(kind), module_(std::move(module)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& module() const noexcept { return module_; }

private:
    ErrorKind kind_;
    std::string module_;
};

/// Malformed expression text. `offset` is a byte offset into the input.
class ParseError : public Error {
public:
    ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& message)
        : Error(ErrorKind::ParseError, "expr", message), offset_(offset), expected_(std::move(expected)) {}

    std::size_t offset() const noexcept { return offset_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

}  // namespace smlab
