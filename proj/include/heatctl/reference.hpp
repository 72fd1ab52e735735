#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "heatctl/certificates.hpp"
#include "heatctl/modal.hpp"

namespace heatctl {

/// Reference configurations on the 4/sqrt(3) square: q = 3 (N0 = 1, d = 1)
/// and q = 8.1 (N0 = 3, d = 2).

struct ReferenceShapes {
    std::vector<std::string> b;
    std::vector<std::string> c;
};

[[nodiscard]] ReferenceShapes reference_shapes(Wiring wiring, double q);

struct ReferenceGains {
    Eigen::MatrixXd L0;
    Eigen::MatrixXd K0;
    double design_delta{};    // delta used for K0
    std::size_t design_N{};   // N used for K0 (0 when N does not enter)
    double observer_delta{};  // delta = delta1 used for L0
    std::size_t observer_N{};
};

[[nodiscard]] ReferenceGains reference_gains(Wiring wiring, double q);

/// Modal system with the reference shapes. The basis carries max(N + 2, 40,
/// basis_modes) modes.
[[nodiscard]] ModalSystem reference_system(Wiring wiring, double q, std::size_t N, double delta,
                                           std::size_t basis_modes = 0);

struct ReferenceCell {
    std::size_t N{};
    std::optional<double> delta;  // absent where no delay is feasible
    std::optional<double> tau_M;
};

/// Rows of the maximal-delay tables (q = 3 for N = 2..8; q = 8.1 on the
/// variant's own N range).
[[nodiscard]] std::vector<ReferenceCell> reference_max_delay(CertificateVariant variant, double q);

/// max(0.03, 10% of the reference value).
[[nodiscard]] double reference_tolerance(double reference_tau);

}  // namespace heatctl
