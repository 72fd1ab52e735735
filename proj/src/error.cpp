#include "heatctl/error.hpp"

namespace heatctl {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid-argument";
        case ErrorKind::InsufficientBasis: return "insufficient-basis";
        case ErrorKind::QuadratureFailure: return "quadrature-failure";
        case ErrorKind::InconsistentQuadrature: return "inconsistent-quadrature";
        case ErrorKind::PivotSingular: return "pivot-singular";
        case ErrorKind::DesignInfeasible: return "design-infeasible";
        case ErrorKind::UndefinedFit: return "undefined-fit";
        case ErrorKind::ConfigError: return "config-error";
        case ErrorKind::InternalError: return "internal-error";
    }
    return "unknown";
}

}  // namespace heatctl
