#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace heatctl {

/// Rectangle (0,a1) x (0,a2). Dirichlet on the left, right and top edges,
/// Neumann on the bottom edge x2 = 0.
struct RectangleDomain {
    double a1{};
    double a2{};

    RectangleDomain() = default;
    RectangleDomain(double a1_, double a2_);

    [[nodiscard]] double area() const noexcept { return a1 * a2; }
};

/// One eigenpair of the negative Laplacian, lambda = pi^2 (m^2/a1^2 + (k-1/2)^2/a2^2).
struct Mode {
    std::size_t index{};  // 1-based position in the ordered sequence
    int m{};
    int k{};
    double lambda{};
    double normalization{};  // 2/sqrt(a1 a2); zero for tabulated modes
};

/// Ordered eigenvalue sequence. Either built from the rectangle closed form or
/// supplied as a table (for domains without a built-in spectrum).
class SpectralBasis {
public:
    SpectralBasis(RectangleDomain domain, std::vector<Mode> modes);

    /// User-supplied spectrum. Eigenfunctions are unknown, so shape projection
    /// is unavailable and modal coefficients must be supplied as tables too.
    static SpectralBasis from_table(const std::vector<double>& lambdas);

    [[nodiscard]] std::size_t count() const noexcept { return modes_.size(); }
    [[nodiscard]] const Mode& mode(std::size_t n) const;  // 1-based
    [[nodiscard]] double lambda(std::size_t n) const { return mode(n).lambda; }
    [[nodiscard]] const std::vector<Mode>& modes() const noexcept { return modes_; }
    [[nodiscard]] Eigen::VectorXd lambdas() const;
    [[nodiscard]] bool has_eigenfunctions() const noexcept { return domain_.has_value(); }
    [[nodiscard]] const RectangleDomain& domain() const;

    /// phi_n(x1, x2) in closed form.
    [[nodiscard]] double eigenfunction(std::size_t n, double x1, double x2) const;

private:
    SpectralBasis() = default;

    std::optional<RectangleDomain> domain_;
    std::vector<Mode> modes_;
};

/// Closed-form eigenvalue of the (m,k) pair.
[[nodiscard]] double rectangle_eigenvalue(const RectangleDomain& domain, int m, int k);

/// The `count` smallest eigenvalues, sorted ascending, ties broken by (m,k).
/// The search box grows until every pair outside it exceeds the retained maximum.
[[nodiscard]] SpectralBasis rectangle_spectrum(const RectangleDomain& domain, std::size_t count);

/// Smallest N0 with -lambda_n + q + delta < 0 for all n > N0.
[[nodiscard]] std::size_t count_unstable_modes(const SpectralBasis& basis, double q, double delta);

struct MultiplicityPartition {
    std::vector<std::size_t> sizes;  // n_1..n_p, summing to N0
    std::size_t max_multiplicity{};  // d
};

inline constexpr double kTieTolerance = 1e-9;

/// Groups the first N0 eigenvalues into maximal runs equal up to relative `tol`.
[[nodiscard]] MultiplicityPartition multiplicity_partition(const SpectralBasis& basis, std::size_t n0,
                                                           double tol = kTieTolerance);

/// lambda_N |Omega| / (4 pi N) for N = 1..count; tends to 1.
[[nodiscard]] Eigen::VectorXd asymptotic_slope(const SpectralBasis& basis);

}  // namespace heatctl
