#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "heatctl/delaysearch.hpp"
#include "heatctl/gains.hpp"
#include "heatctl/reference.hpp"
#include "heatctl/simulate.hpp"

namespace heatctl {

/// Controller-step data of a modal system with delta1 = delta unless given.
[[nodiscard]] ControllerStep2Data controller_step2_data(const ModalSystem& system, const Eigen::MatrixXd& L0,
                                                        double delta, std::optional<double> delta1 = std::nullopt);

struct GainCheck {
    Wiring wiring{Wiring::InteriorInterior};
    double q{};
    GainRoute route{GainRoute::Basic};
    std::vector<ConstraintMargin> margins;  // prefixed "observer:"/"controller:" or "step1:"/"step2:"
    double observer_abscissa{};    // max Re eig(A0 - L0 C0)
    double controller_abscissa{};  // max Re eig(A0 - B0 K0)
    bool verified{};
};

/// Stored gains in their defining inequalities: the basic pair for q = 3,
/// the bordered observer step and the controller set for q = 8.1.
[[nodiscard]] GainCheck check_reference_gains(Wiring wiring, double q, const LmiOptions& options = {});

/// Certificate data for the stored gains at observer dimension N.
[[nodiscard]] CertificateData reference_certificate_data(Wiring wiring, double q, std::size_t N);

struct TableCell {
    CertificateVariant variant{CertificateVariant::Thm1};
    std::size_t N{};
    std::optional<double> delta, tau_M;          // computed
    std::optional<double> ref_delta, ref_tau_M;  // stored reference row
    double tolerance{};
    bool within{};  // both none, or |tau_M - ref_tau_M| <= tolerance
};

struct DelayTableReport {
    double q{};
    std::vector<DelayResult> results;
    std::vector<TableCell> cells;
    std::vector<OrderingReport> ordering;

    [[nodiscard]] std::size_t cells_within() const;
};

using ProgressFn = std::function<void(const DelayResult&)>;

/// Max-delay search for each variant over its reference N values, with the stored gains.
[[nodiscard]] DelayTableReport reproduce_delay_table(double q, const std::vector<CertificateVariant>& variants,
                                                     const SearchSpec& search, const ProgressFn& progress = {});

/// variant,N,delta,tau_M,ref_delta,ref_tau_M,tolerance,within
void write_table_csv(std::ostream& out, const DelayTableReport& report);
/// wiring,N,vector_tau_M,classical_tau_M,difference,winner
void write_ordering_csv(std::ostream& out, const std::vector<OrderingReport>& ordering);

struct DecayRun {
    Wiring wiring{Wiring::InteriorInterior};
    double tau_M{};
    SimTrace trace;
    std::vector<ChannelNorms> channels;
    std::vector<DecayFit> fits;  // one per channel
    double l2_ratio{};           // final / initial sum z_n^2
};

/// q = 3, N = 5 closed loop with the stored gains, sin^2 / cos^2 delays and the default initial shape.
[[nodiscard]] DecayRun decay_run(Wiring wiring, double tau_M, double T = 10.0, std::size_t M_sim = 150);

/// Reference tau_M of the vector variant at q = 3, N = 5.
[[nodiscard]] double reference_simulation_delay(Wiring wiring);

/// Simple-versus-double eigenvalue note for the second configuration on the
/// reference square; empty when the computed multiplicities match.
[[nodiscard]] std::optional<std::string> multiplicity_note(const SpectralBasis& basis, double q, double delta);

}  // namespace heatctl
