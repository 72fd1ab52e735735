#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "heatctl/lmi.hpp"

namespace heatctl {

enum class GainRoute {
    Basic,     // the two Lyapunov inequalities on (A0, C0) and (A0, B0)
    TwoStep,   // bordered observer LMI, then the joint controller LMI set
    Imported,  // externally supplied, verification only
};

[[nodiscard]] std::string to_string(GainRoute r);
[[nodiscard]] GainRoute gain_route_from_string(const std::string& text);

struct GainSet {
    Eigen::MatrixXd L0;  // N0 x d
    Eigen::MatrixXd K0;  // d x N0
    double delta{};
    GainRoute route{GainRoute::Basic};
    /// Route Basic: Po, Pc. Route TwoStep: Po, Qz, Pe, Yz, alpha, beta0.
    Witness certificates;
    std::vector<ConstraintMargin> margins;

    [[nodiscard]] Eigen::Index n0() const noexcept { return L0.rows(); }
    [[nodiscard]] Eigen::Index d() const noexcept { return L0.cols(); }
};

enum class AlphaSearch {
    Grid,   // log grid over alpha, every grid point convex
    Joint,  // alpha as a decision variable (the set is affine in it)
};

struct GainDesignOptions {
    LmiOptions lmi{};
    int refinement_sweeps{40};     // alternating P / gain passes of the minimum-norm selection
    double refinement_tol{1e-10};  // stop when the gain norm moves less than this (relative)
    AlphaSearch alpha_search{AlphaSearch::Grid};
    double alpha_lo{1e-3};
    double alpha_hi{1e3};
    int alpha_per_decade{24};
    unsigned threads{0};  // 0: hardware concurrency
};

/// Observer inequality P(A - L C) + (A - L C)^T P + 2 delta P < 0, optionally
/// bordered by -P L and -(2 delta_b / border_weight) I. Minimum-Frobenius-norm L
/// by an alternating refinement started from the variable change Y = P L.
struct ObserverDesign {
    Eigen::MatrixXd L;
    Eigen::MatrixXd P;
    std::vector<ConstraintMargin> margins;
};

[[nodiscard]] ObserverDesign design_observer_lmi(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C, double delta,
                                                 std::optional<double> border_weight = std::nullopt,
                                                 const GainDesignOptions& options = {});

/// L0 from (A0, C0) and K0 from the dual pair (A0^T, B0^T).
[[nodiscard]] GainSet design_basic(const Eigen::MatrixXd& A0, const Eigen::MatrixXd& B0, const Eigen::MatrixXd& C0,
                                   double delta, const GainDesignOptions& options = {});

/// Bordered observer step with -(2 delta / c_weight) I; keeps the variable-change
/// solution without the minimum-norm refinement.
[[nodiscard]] ObserverDesign design_observer_step1(const Eigen::MatrixXd& A0, const Eigen::MatrixXd& C0, double delta,
                                                   double c_weight, const GainDesignOptions& options = {});

struct ControllerStep2Data {
    Eigen::MatrixXd A0, B0, C0, L0;
    double delta{};
    double delta1{};
    double b_weight{};  // ||b||_N^2 or its wiring substitute
    double c_weight{};  // ||c||_N^2 or its wiring substitute
    double lambda_Nplus1{};
    double q{};
};

struct ControllerDesign {
    Eigen::MatrixXd K;
    Witness witness;  // Qz, Pe, Yz, alpha, beta0
    FeasibilityResult result;
};

/// Variables and constraints of the controller step. With `fixed_K` the
/// variable Yz is replaced by fixed_K * Qz (verification of a given gain);
/// with `fixed_alpha` the scalar alpha becomes a constant.
struct ControllerStep2Problem {
    DecisionLayout layout;
    std::vector<AffineConstraint> constraints;
};

[[nodiscard]] ControllerStep2Problem controller_step2_problem(const ControllerStep2Data& data,
                                                              const std::optional<Eigen::MatrixXd>& fixed_K = std::nullopt,
                                                              std::optional<double> fixed_alpha = std::nullopt);

/// Solves the set in (Qz, Pe, Yz, alpha, beta0); K0 = Yz Qz^{-1}. With the grid
/// search the smallest-norm K0 over the feasible grid points is returned.
/// Throws design-infeasible naming the binding condition.
[[nodiscard]] ControllerDesign design_controller_step2(const ControllerStep2Data& data,
                                                       const GainDesignOptions& options = {});

/// Feasibility verdict of the set at every alpha of the grid (true where feasible).
[[nodiscard]] std::vector<std::pair<double, bool>> step2_alpha_scan(const ControllerStep2Data& data,
                                                                   const GainDesignOptions& options = {});

/// Log grid with per_decade points per decade on [lo, hi], endpoints included.
[[nodiscard]] std::vector<double> alpha_grid(double lo, double hi, int per_decade);

/// Step 1 on (A0, C0, observer_delta, observer_c_weight), then Step 2 with the resulting L0.
[[nodiscard]] GainSet design_two_step(ControllerStep2Data data, double observer_delta, double observer_c_weight,
                                      const GainDesignOptions& options = {});

/// Margins of the two basic inequalities for given gains: P_o, P_c found by feasibility solves.
[[nodiscard]] GainSet verify_basic(const Eigen::MatrixXd& A0, const Eigen::MatrixXd& B0, const Eigen::MatrixXd& C0,
                                   const Eigen::MatrixXd& L0, const Eigen::MatrixXd& K0, double delta,
                                   const LmiOptions& options = {});

/// Bordered observer inequality for a given L0 (P_o by feasibility solve).
[[nodiscard]] FeasibilityResult verify_observer_step1(const Eigen::MatrixXd& A0, const Eigen::MatrixXd& C0,
                                                      const Eigen::MatrixXd& L0, double delta, double c_weight,
                                                      const LmiOptions& options = {});

/// Controller set for a given K0 (data.L0 as the observer gain).
[[nodiscard]] FeasibilityResult verify_controller_step2(const ControllerStep2Data& data, const Eigen::MatrixXd& K0,
                                                        const LmiOptions& options = {});

/// CSV: header comment "# delta=<d> N0=<n> d=<d> route=<r>", then "L0" rows and "K0" rows.
void write_gains_csv(std::ostream& out, const GainSet& gains);
[[nodiscard]] GainSet read_gains_csv(std::istream& in);

}  // namespace heatctl
