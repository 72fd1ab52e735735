#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "heatctl/sdp.hpp"

namespace heatctl {

enum class VarStructure { SymmetricPD, Symmetric, Full, ScalarPositive, Scalar };

[[nodiscard]] const char* to_string(VarStructure s) noexcept;

struct Variable {
    std::size_t id{};
};

struct VariableSpec {
    std::string name;
    Eigen::Index rows{};
    Eigen::Index cols{};
    VarStructure structure{VarStructure::Full};
    Eigen::Index offset{};  // first free scalar in the stacked vector
    Eigen::Index free{};    // number of free scalars
};

using Witness = std::map<std::string, Eigen::MatrixXd>;

class DecisionLayout {
public:
    Variable add(const std::string& name, Eigen::Index rows, Eigen::Index cols, VarStructure structure);
    Variable symmetric(const std::string& name, Eigen::Index n, bool positive_definite = true);
    Variable full(const std::string& name, Eigen::Index rows, Eigen::Index cols);
    Variable scalar(const std::string& name, bool positive = true);

    [[nodiscard]] const VariableSpec& spec(Variable v) const;
    [[nodiscard]] Variable find(const std::string& name) const;
    [[nodiscard]] std::size_t size() const noexcept { return vars_.size(); }
    [[nodiscard]] const std::vector<VariableSpec>& variables() const noexcept { return vars_; }
    [[nodiscard]] Eigen::Index dimension() const noexcept { return dimension_; }

    /// Unit matrix of the e-th free scalar of v (symmetric pairs for symmetric structures).
    [[nodiscard]] Eigen::MatrixXd basis_matrix(Variable v, Eigen::Index e) const;
    [[nodiscard]] Eigen::MatrixXd unpack(Variable v, const Eigen::VectorXd& x) const;
    [[nodiscard]] Witness unpack(const Eigen::VectorXd& x) const;
    [[nodiscard]] Eigen::VectorXd pack(const Witness& witness) const;

private:
    std::vector<VariableSpec> vars_;
    Eigen::Index dimension_{};
};

/// Matrix-valued affine expression in the layout variables:
/// constant + sum L X R (or L X^T R) + sum x M for scalar variables.
class AffineExpr {
public:
    AffineExpr() = default;
    AffineExpr(Eigen::Index rows, Eigen::Index cols);
    explicit AffineExpr(const Eigen::MatrixXd& constant);

    static AffineExpr var(const DecisionLayout& layout, Variable v);

    [[nodiscard]] Eigen::Index rows() const noexcept { return constant_.rows(); }
    [[nodiscard]] Eigen::Index cols() const noexcept { return constant_.cols(); }
    [[nodiscard]] const Eigen::MatrixXd& constant() const noexcept { return constant_; }
    [[nodiscard]] bool is_constant() const noexcept { return terms_.empty() && scalars_.empty(); }

    [[nodiscard]] AffineExpr transpose() const;
    [[nodiscard]] Eigen::MatrixXd evaluate(const DecisionLayout& layout, const Witness& witness) const;
    /// Coefficient matrix of every free scalar that appears (index into the stacked vector).
    [[nodiscard]] std::map<Eigen::Index, Eigen::MatrixXd> coefficients(const DecisionLayout& layout) const;

    AffineExpr& operator+=(const AffineExpr& other);
    AffineExpr& operator-=(const AffineExpr& other);
    AffineExpr& operator*=(double s);

    friend AffineExpr operator*(const Eigen::MatrixXd& left, const AffineExpr& e);
    friend AffineExpr operator*(const AffineExpr& e, const Eigen::MatrixXd& right);
    /// Scalar variable times a constant matrix.
    friend AffineExpr scaled(const AffineExpr& scalar_expr, const Eigen::MatrixXd& m);

private:
    struct Term {
        std::size_t var{};
        Eigen::MatrixXd left;
        Eigen::MatrixXd right;
        bool transposed{};
    };
    struct ScalarTerm {
        std::size_t var{};
        Eigen::MatrixXd coeff;
    };

    Eigen::MatrixXd constant_;
    std::vector<Term> terms_;
    std::vector<ScalarTerm> scalars_;
};

AffineExpr operator+(AffineExpr a, const AffineExpr& b);
AffineExpr operator-(AffineExpr a, const AffineExpr& b);
AffineExpr operator-(AffineExpr a);
AffineExpr operator*(double s, AffineExpr e);
AffineExpr operator*(const Eigen::MatrixXd& left, const AffineExpr& e);
AffineExpr operator*(const AffineExpr& e, const Eigen::MatrixXd& right);
AffineExpr scaled(const AffineExpr& scalar_expr, const Eigen::MatrixXd& m);

/// Symmetric block template; blocks (i,j) with i <= j are set and the lower
/// triangle mirrors them.
class BlockMatrix {
public:
    explicit BlockMatrix(std::vector<Eigen::Index> sizes);

    void set(std::size_t i, std::size_t j, const AffineExpr& e);
    [[nodiscard]] const std::vector<Eigen::Index>& sizes() const noexcept { return sizes_; }
    [[nodiscard]] Eigen::Index dimension() const;
    [[nodiscard]] AffineExpr block(std::size_t i, std::size_t j) const;
    [[nodiscard]] AffineExpr assemble() const;

private:
    std::vector<Eigen::Index> sizes_;
    std::map<std::pair<std::size_t, std::size_t>, AffineExpr> blocks_;
};

enum class Sense { NegativeDefinite, NegativeSemidefinite, PositiveSemidefinite, PositiveDefinite };

[[nodiscard]] const char* to_string(Sense s) noexcept;

struct AffineConstraint {
    std::string name;
    Sense sense{Sense::NegativeDefinite};
    AffineExpr expr;
};

[[nodiscard]] AffineConstraint make_constraint(std::string name, Sense sense, const AffineExpr& expr);
[[nodiscard]] AffineConstraint make_constraint(std::string name, Sense sense, const BlockMatrix& blocks);

enum class FeasibilityStatus { Feasible, Infeasible, Inconclusive };

[[nodiscard]] const char* to_string(FeasibilityStatus s) noexcept;

struct ConstraintMargin {
    std::string name;
    double min_eigenvalue{};
    double max_eigenvalue{};
    double margin{};    // distance inside the cone in the constraint's sense
    double required{};  // strictness demanded for strict senses
    bool satisfied{};
};

struct SolverDiagnostics {
    int iterations{};
    double phase1_t{};      // final max-eigenvalue shift (scaled units)
    double lower_bound{};   // duality lower bound on t
    double primal_residual{};
    double gap{};
    std::string message;
};

struct FeasibilityResult {
    FeasibilityStatus status{FeasibilityStatus::Inconclusive};
    Witness witness;
    Eigen::VectorXd x;
    std::vector<ConstraintMargin> margins;
    SolverDiagnostics diagnostics;

    [[nodiscard]] bool feasible() const noexcept { return status == FeasibilityStatus::Feasible; }
};

struct LmiOptions {
    double eps_strict{1e-7};   // relative to each constraint's scale
    double infeasible_tol{1e-8};  // phase-I lower bound above this means no point with margin eps_strict
    double verify_tol{1e-9};
    SdpOptions sdp{};
    /// Implicit P > 0 and x > 0 constraints for SymmetricPD / ScalarPositive variables.
    bool structural_constraints{true};
};

/// Scale of a constraint: Frobenius norm of its constant term, or of its
/// largest coefficient when the constant vanishes.
[[nodiscard]] double constraint_scale(const DecisionLayout& layout, const AffineConstraint& c);

/// Explicit constraint list including the implicit positivity of structured variables.
[[nodiscard]] std::vector<AffineConstraint> with_structural_constraints(const DecisionLayout& layout,
                                                                        const std::vector<AffineConstraint>& constraints);

[[nodiscard]] FeasibilityResult solve_feasibility(const DecisionLayout& layout,
                                                  const std::vector<AffineConstraint>& constraints,
                                                  const LmiOptions& options = {});

/// Minimizes objective^T x over the strict feasible set (phase I, then phase II).
[[nodiscard]] FeasibilityResult solve_minimize(const DecisionLayout& layout, const std::vector<AffineConstraint>& constraints,
                                               const Eigen::VectorXd& objective, const LmiOptions& options = {});

/// Solver-independent check: instantiates each block and takes its eigenvalues.
[[nodiscard]] std::vector<ConstraintMargin> verify_witness(const DecisionLayout& layout,
                                                           const std::vector<AffineConstraint>& constraints,
                                                           const Witness& witness, double tol = 1e-9,
                                                           double eps_strict = 0.0);

[[nodiscard]] bool all_satisfied(const std::vector<ConstraintMargin>& margins);

/// m_rest - m_rp m_pp^{-1} m_pr for a sign-definite pivot block.
[[nodiscard]] Eigen::MatrixXd schur_reduce(const Eigen::MatrixXd& m, Eigen::Index pivot_start, Eigen::Index pivot_size);

/// Eliminates block `pivot`; its row must be variable-free so the result stays affine.
[[nodiscard]] AffineConstraint schur_reduce(const std::string& name, Sense sense, const BlockMatrix& blocks,
                                            std::size_t pivot);

/// Plain-text sparse symmetric-block export.
void export_problem(std::ostream& out, const DecisionLayout& layout, const std::vector<AffineConstraint>& constraints);

}  // namespace heatctl
