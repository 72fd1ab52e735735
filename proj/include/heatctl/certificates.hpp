#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "heatctl/lmi.hpp"
#include "heatctl/modal.hpp"

namespace heatctl {

/// Stability certificates. Vector variants analyse the tail with the vector
/// Halanay inequality, classical variants with the scalar one.
enum class CertificateVariant {
    Thm1,  // interior actuation, interior sensing (vector)
    Thm2,  // interior actuation, boundary sensing (vector)
    Thm3,  // boundary actuation, interior sensing (vector)
    Rmk3,  // classical counterpart of Thm1
    Rmk4,  // classical counterpart of Thm2
    Rmk5,  // classical counterpart of Thm3
};

[[nodiscard]] std::string to_string(CertificateVariant v);
[[nodiscard]] CertificateVariant variant_from_string(const std::string& text);
[[nodiscard]] bool is_vector(CertificateVariant v) noexcept;
[[nodiscard]] Wiring wiring_of(CertificateVariant v) noexcept;
/// Thm1 <-> Rmk3, Thm2 <-> Rmk4, Thm3 <-> Rmk5.
[[nodiscard]] CertificateVariant counterpart(CertificateVariant v) noexcept;
[[nodiscard]] const std::vector<CertificateVariant>& all_variants();

struct ClosedLoopMatrices {
    Eigen::MatrixXd F0;        // [[A0 - B0 K0, L0 C0], [0, A0 - L0 C0]]
    Eigen::MatrixXd script_L0; // col(L0, -L0)
    Eigen::MatrixXd script_B0; // col(B0, 0)
    Eigen::MatrixXd script_C0; // [C0, 0]
    Eigen::MatrixXd script_K0; // [K0, 0]
    Eigen::MatrixXd A1, B1, C1;
};

[[nodiscard]] ClosedLoopMatrices closed_loop(const ModalSystem& system, const Eigen::MatrixXd& L0,
                                             const Eigen::MatrixXd& K0);

/// Everything a certificate needs besides its tuning parameters.
struct CertificateData {
    ClosedLoopMatrices loop;
    CouplingWeights weights;  // (actuation, sensing) for the wiring
    double lambda_Nplus1{};
    double q{};
    Eigen::Index n0{};
    Eigen::Index d{};
};

[[nodiscard]] CertificateData certificate_data(const ModalSystem& system, const Eigen::MatrixXd& L0,
                                               const Eigen::MatrixXd& K0);

struct CertificateParams {
    double delta{};
    double delta1{};
    double tau_y{};
    double tau_u{};
    /// Keep the residual observer-error block with a scalar p_e instead of the
    /// reduced form. The delay factor exp(-A1 tau_y) is imposed at tau_y = 0
    /// and tau_y = tau_My.
    bool full_form{false};
};

struct CertificateProblem {
    CertificateVariant variant{CertificateVariant::Thm1};
    CertificateData data;
    CertificateParams params;
    DecisionLayout layout;
    std::vector<AffineConstraint> constraints;

    [[nodiscard]] double eps_y() const { return std::exp(-2.0 * params.delta * params.tau_y); }
    [[nodiscard]] double eps_u() const { return std::exp(-2.0 * params.delta * params.tau_u); }
};

[[nodiscard]] CertificateProblem build(CertificateVariant variant, const CertificateData& data,
                                       const CertificateParams& params);

/// 2x2 comparison system of the vector Halanay argument:
/// dV <= M V + P_delay sup V, with M = diag(-2 delta, -2 lambda_{N+1} + 2q + alpha)
/// and P_delay = [[0, 2 delta1], [beta, 0]], beta = beta0 / alpha.
struct VectorHalanayCheck {
    Eigen::Matrix2d M;
    Eigen::Matrix2d P_delay;
    bool hurwitz{};             // verdict on M + P_delay
    bool inequality_pair{};     // verdict of the equivalent scalar pair
    double dominant_eigenvalue{};
};

[[nodiscard]] VectorHalanayCheck vector_halanay_matrix(double delta, double delta1, double alpha, double beta0,
                                                       double lambda_Nplus1, double q);

/// Largest r with lambda_max(M + r I + exp(r tau) P_delay) <= 0; the bound
/// |V(t)| <= D exp(-r t). Zero when M + P_delay is not Hurwitz.
[[nodiscard]] double vector_halanay_rate(const VectorHalanayCheck& check, double tau);

/// Unique delta0 in [0, delta) with delta0 = delta - delta1 exp(2 delta0 tau).
[[nodiscard]] double classical_halanay_rate(double delta, double delta1, double tau);

struct DecayReport {
    double v_rate{};   // exponent of the Lyapunov vector bound
    double delta0{};   // norm-squared decay exponent
    std::optional<VectorHalanayCheck> halanay;
};

struct CertificateResult {
    FeasibilityResult feasibility;
    std::optional<DecayReport> decay;

    [[nodiscard]] bool feasible() const noexcept { return feasibility.feasible(); }
};

[[nodiscard]] CertificateResult evaluate(const CertificateProblem& problem, const LmiOptions& options = {});

/// Decay information implied by a witness of `problem`.
[[nodiscard]] DecayReport decay_report(const CertificateProblem& problem, const Witness& witness);

/// The problem with delta1 -> gamma delta1 (vector variants only).
[[nodiscard]] CertificateProblem delta1_scaling_map(const CertificateProblem& problem, double gamma);

/// Image of a witness under the same map: P, S, R, G, p_e times gamma and beta0 over gamma.
[[nodiscard]] Witness delta1_scaling_witness(const Witness& witness, double gamma);

/// lmi text export preceded by a comment header naming the variant and parameters.
void export_certificate(std::ostream& out, const CertificateProblem& problem);

}  // namespace heatctl
