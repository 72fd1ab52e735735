#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "heatctl/shapes.hpp"
#include "heatctl/spectral.hpp"

namespace heatctl {

/// Actuation/sensing placement: in-domain (interior) or on the Neumann edge (boundary).
enum class Wiring {
    InteriorInterior,  // non-local actuation and measurement
    InteriorBoundary,  // non-local actuation, boundary measurement
    BoundaryInterior,  // Neumann actuation, non-local measurement
};

[[nodiscard]] std::string to_string(Wiring wiring);
[[nodiscard]] Wiring wiring_from_string(const std::string& text);

/// <shape, phi_n> over the rectangle, exact closed form.
[[nodiscard]] double project_interior(const ShapeFunction& shape, const SpectralBasis& basis, std::size_t n);
/// <shape, phi_n(., 0)> over the Neumann edge, exact closed form.
[[nodiscard]] double project_boundary(const ShapeFunction& shape, const SpectralBasis& basis, std::size_t n);
/// Either of the above, dispatched on the shape kind.
[[nodiscard]] double project(const ShapeFunction& shape, const SpectralBasis& basis, std::size_t n);
/// Same coefficient by adaptive quadrature of each separable factor (abs tol 1e-10 per factor).
[[nodiscard]] double project_quadrature(const ShapeFunction& shape, const SpectralBasis& basis, std::size_t n);

/// count x d matrix of coefficients against every mode of the basis.
[[nodiscard]] Eigen::MatrixXd projection_table(const std::vector<ShapeFunction>& shapes, const SpectralBasis& basis);

/// sum_j ||f_j||^2 - sum_{n<=N} |f_n|^2  (or the lambda-weighted gradient version).
[[nodiscard]] double tail_interior(const std::vector<ShapeFunction>& shapes, const SpectralBasis& basis, std::size_t N,
                                   bool gradient = false);

struct BoundaryTail {
    double tail{};  // cap - sum_{n<=N} |f_n|^2 / lambda_n
    double cap{};   // a2 * sum_j ||f_j||^2_{L2(0,a1)}
};

[[nodiscard]] BoundaryTail tail_boundary(const std::vector<ShapeFunction>& shapes, const SpectralBasis& basis, std::size_t N);

struct TailQuantities {
    std::optional<double> b_tail;       // ||b||_N^2
    std::optional<double> c_tail;       // ||c||_N^2
    std::optional<double> grad_b_tail;  // ||grad b||_N^2
    std::optional<double> varrho_N;     // boundary sensing bound
    std::optional<double> varrho_cap;
    std::optional<double> rho_N;        // boundary actuation bound
    std::optional<double> rho_cap;
    double lambda_N{};
    double lambda_Nplus1{};
};

struct ModalSystem {
    explicit ModalSystem(SpectralBasis basis_) : basis(std::move(basis_)) {}

    SpectralBasis basis;
    Wiring wiring{Wiring::InteriorInterior};
    double q{};
    double delta{};
    std::size_t n0{};
    std::size_t n{};
    std::size_t d{};
    MultiplicityPartition partition;
    Eigen::MatrixXd A0, A1;  // diagonal blocks of -lambda_n + q
    Eigen::MatrixXd B0, B1;  // rows b_n^T
    Eigen::MatrixXd C0, C1;  // columns c_n
    Eigen::MatrixXd b_coeffs, c_coeffs;  // all modes of the basis (count x d)
    TailQuantities tail;
};

/// The two scalars entering the certificates for this wiring: the actuation
/// weight (||b||_N^2, ||grad b||_N^2 or rho_N) and the sensing weight
/// (||c||_N^2, varrho_N or ||c||_N^2 / lambda_N).
struct CouplingWeights {
    double actuation{};
    double sensing{};
};

[[nodiscard]] CouplingWeights coupling_weights(const ModalSystem& system);

struct AssemblyOptions {
    std::optional<std::size_t> n0;  // computed from the basis when absent
    double partition_tol{kTieTolerance};
};

[[nodiscard]] ModalSystem assemble_modal_system(const SpectralBasis& basis, double q, double delta, std::size_t N,
                                                const std::vector<ShapeFunction>& b_shapes,
                                                const std::vector<ShapeFunction>& c_shapes, Wiring wiring,
                                                const AssemblyOptions& options = {});

/// Assembly from user-supplied coefficient tables (count x d each) and tails,
/// for spectra without a built-in eigenfunction family.
[[nodiscard]] ModalSystem assemble_modal_system(const SpectralBasis& basis, double q, double delta, std::size_t N,
                                                const Eigen::MatrixXd& b_coeffs, const Eigen::MatrixXd& c_coeffs,
                                                Wiring wiring, const TailQuantities& tails,
                                                const AssemblyOptions& options = {});

struct RankReport {
    std::vector<std::size_t> cluster_sizes;
    std::vector<int> b_ranks;
    std::vector<int> c_ranks;
    bool assumption_holds{};
    bool controllable{};  // PBH test on (A0, B0)
    bool observable{};    // PBH test on (A0, C0)
};

/// Singular values above rel_tol * max(sigma_max, scale).
[[nodiscard]] int numeric_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-9, double scale = 0.0);
[[nodiscard]] RankReport check_rank(const ModalSystem& system);

}  // namespace heatctl
