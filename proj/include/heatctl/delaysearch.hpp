#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "heatctl/certificates.hpp"

namespace heatctl {

struct SearchSpec {
    CertificateVariant variant{CertificateVariant::Thm1};
    std::vector<double> delta_grid;  // empty: 40 log points on [0.01, 10]
    bool refine{true};               // one extra pass around the best delta
    int refine_points{8};
    /// delta1 = fraction * delta for classical variants. Vector variants use delta1 = delta.
    std::vector<double> delta1_fractions{0.3, 0.5, 0.7, 0.8, 0.9, 0.95, 0.99, 0.999};
    double tau_tol{1e-3};
    double tau_start{0.1};
    double tau_cap{10.0};
    double tau_u_ratio{1.0};  // tau_u = ratio * tau_y; 1 gives equal delays
    bool full_form{false};
    LmiOptions lmi{};
    unsigned threads{0};
};

[[nodiscard]] std::vector<double> default_delta_grid();

struct GridEntry {
    double delta{};
    double delta1{};
    std::optional<double> tau_M;       // absent when infeasible at tau = 0
    std::optional<double> tau_fail;    // smallest tested infeasible tau
    Witness witness;                   // at tau_M
    /// Skipped without a solve: the leading block needs F0 + (delta - delta1') I
    /// Hurwitz, with delta1' = 0 for vector variants and delta1 for classical ones.
    bool screened{};
};

struct DelayResult {
    CertificateVariant variant{CertificateVariant::Thm1};
    std::size_t N{};
    std::optional<double> delta;
    std::optional<double> delta1;
    std::optional<double> tau_M;
    std::optional<double> tau_fail;
    Witness witness;
    std::vector<GridEntry> log;

    [[nodiscard]] bool none() const noexcept { return !tau_M.has_value(); }
};

/// Largest tau (to spec.tau_tol) with a feasible certificate at fixed delta, delta1.
/// Entries failing the spectral-abscissa screen are returned infeasible without a solve.
[[nodiscard]] GridEntry max_delay_at(const SearchSpec& spec, const CertificateData& data, double delta, double delta1);

/// Best (delta, tau_M) over the grid; ties go to the smaller delta.
[[nodiscard]] DelayResult max_delay(const SearchSpec& spec, const CertificateData& data, std::size_t N);

struct OrderingRow {
    std::size_t N{};
    std::optional<double> vector_tau;
    std::optional<double> classical_tau;
    double difference{};  // vector - classical with none counted as 0
    std::string winner;   // "vector", "classical", "tie"
};

struct OrderingReport {
    Wiring wiring{Wiring::InteriorInterior};
    std::vector<OrderingRow> rows;
    bool vector_dominates{};          // vector >= classical on every row
    std::optional<std::size_t> crossover_N;  // first N from which vector >= classical holds to the end
};

/// Pairs each vector result with the classical result of the same wiring and N.
[[nodiscard]] std::vector<OrderingReport> compare_vector_vs_classical(const std::vector<DelayResult>& results);

/// variant,N,delta,tau_M with "none" for missing values.
void write_delay_csv(std::ostream& out, const std::vector<DelayResult>& results);

}  // namespace heatctl
