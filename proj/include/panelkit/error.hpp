#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace panelkit {

/// Failure categories raised by the library. The CLI maps these onto exit codes.
enum class ErrorKind {
    InvalidArgument,
    DimensionMismatch,
    RankDeficient,
    NonFinite,
    // dataset
    MissingCell,
    DuplicateCell,
    UnparsableNumber,
    MalformedCsv,
    DoubleTransform,
    EmptyRegion,
    UnknownRegion,
    // estimation and tests
    InsufficientDF,
    DegenerateWeight,
    MismatchedFits,
    SpecMismatch,
    ZeroResidualSS,
    // unit root
    TooShort,
    ConstantSeries,
    // simulation
    InvalidSpec,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace panelkit
