#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace heatctl {

/// One semidefinite block of the dual slack Z = C - sum_i y_i A_i; only the
/// variables that actually appear in the block are stored.
struct SdpBlock {
    Eigen::MatrixXd C;
    std::vector<std::pair<Eigen::Index, Eigen::MatrixXd>> A;

    [[nodiscard]] Eigen::Index size() const noexcept { return C.rows(); }
};

/// max b^T y  s.t.  Z_j = C_j - sum_i y_i A_ij >= 0 for every block j.
struct SdpProblem {
    Eigen::VectorXd b;
    std::vector<SdpBlock> blocks;

    [[nodiscard]] Eigen::Index variables() const noexcept { return b.size(); }
};

struct SdpOptions {
    int max_iterations{120};
    double gap_tol{1e-9};
    double feasibility_tol{1e-9};
    double step_fraction{0.95};
    /// Stop as soon as y[index] drops below `threshold` (phase-I certificates).
    std::optional<std::pair<Eigen::Index, double>> stop_below;
};

enum class SdpStatus { Optimal, StoppedEarly, MaxIterations, NumericalFailure };

struct SdpSolution {
    SdpStatus status{SdpStatus::NumericalFailure};
    Eigen::VectorXd y;
    std::vector<Eigen::MatrixXd> X;
    std::vector<Eigen::MatrixXd> Z;
    double primal_objective{};  // <C, X>
    double dual_objective{};    // b^T y
    double primal_residual{};   // ||b - A(X)|| / (1 + ||b||)
    int iterations{};
    std::string message;
};

/// Slack Z_j(y) for every block.
[[nodiscard]] std::vector<Eigen::MatrixXd> sdp_slack(const SdpProblem& problem, const Eigen::VectorXd& y);

/// Primal-dual path following (HKM direction, Mehrotra predictor-corrector)
/// from a strictly dual-feasible y0; dual feasibility is kept along the path.
[[nodiscard]] SdpSolution sdp_solve(const SdpProblem& problem, const Eigen::VectorXd& y0, const SdpOptions& options = {});

/// Largest step a in (0, inf] with S + a dS >= 0 (S positive definite).
[[nodiscard]] double max_psd_step(const Eigen::MatrixXd& S, const Eigen::MatrixXd& dS);

}  // namespace heatctl
