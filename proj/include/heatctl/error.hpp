#pragma once

#include <stdexcept>
#include <string>

namespace heatctl {

enum class ErrorKind {
    InvalidArgument,
    InsufficientBasis,
    QuadratureFailure,
    InconsistentQuadrature,
    PivotSingular,
    DesignInfeasible,
    UndefinedFit,
    ConfigError,
    InternalError,
};

[[nodiscard]] const char* to_string(ErrorKind kind) noexcept;

/// Exception carrying a machine-readable kind; `what()` is "<kind>: <message>".
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace heatctl
