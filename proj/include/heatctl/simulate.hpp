#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "heatctl/modal.hpp"

namespace heatctl {

enum class DelayKind {
    Zero,
    Constant,    // tau_M
    SinSquared,  // tau_M / 2 (1 + sin^2 t)
    CosSquared,  // tau_M / 2 (1 + cos^2 t)
    Sawtooth,    // t - t_k with t_k = k tau_M
};

[[nodiscard]] std::string to_string(DelayKind k);
[[nodiscard]] DelayKind delay_kind_from_string(const std::string& text);

struct DelaySpec {
    DelayKind kind{DelayKind::Zero};
    double tau_M{};
    double tau_m{};  // informational lower bound

    [[nodiscard]] double operator()(double t) const;
};

struct SimConfig {
    std::size_t M_sim{150};
    Eigen::MatrixXd L0;  // N0 x d
    Eigen::MatrixXd K0;  // d x N0
    Eigen::VectorXd z0;  // plant coefficients, M_sim entries
    std::optional<Eigen::VectorXd> zhat0;  // observer start, zero by default
    double T{10.0};
    std::optional<double> dt;  // default min(1e-3, tau_M / 50)
    DelaySpec tau_y;
    DelaySpec tau_u;
    double record_interval{0.01};
    bool open_loop{false};  // u = 0
    double blowup{1e12};
};

struct SimTrace {
    std::vector<double> t;
    std::vector<Eigen::VectorXd> z;     // M_sim coefficients per sample
    std::vector<Eigen::VectorXd> zhat;  // N coefficients per sample
    std::vector<Eigen::VectorXd> y;     // delayed measurement entering the observer
    std::vector<Eigen::VectorXd> u;     // control applied to the plant
    std::vector<double> tau_y, tau_u;
    std::vector<double> z_l2, z_h1;     // sum z_n^2, sum lambda_n z_n^2
    std::vector<double> e_l2, e_h1;     // same for z - zhat
    double dt{};
    bool diverged{};
};

/// x1 (a1 - x1) cos(pi x2 / (2 a2)).
[[nodiscard]] ShapeFunction default_initial_shape(const RectangleDomain& domain);
[[nodiscard]] Eigen::VectorXd initial_coefficients(const ShapeFunction& shape, const SpectralBasis& basis,
                                                   std::size_t M);

/// Fixed-step RK4 on plant modes 1..M_sim and observer modes 1..N with
/// Hermite history for the delayed signals. The system basis must carry at
/// least M_sim modes.
[[nodiscard]] SimTrace simulate_closed_loop(const ModalSystem& system, const SimConfig& config);

enum class NormChannel { L2, H1, ErrorL2, ErrorH1 };

struct DecayFit {
    double rate{};      // -slope of log(norm)
    double residual{};  // RMS of the log-linear fit
    std::size_t samples{};
};

/// Least squares on log(values) over the trailing `window` fraction of the samples.
[[nodiscard]] DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& values, double window = 0.5);
[[nodiscard]] DecayFit fit_decay(const SimTrace& trace, NormChannel channel = NormChannel::L2, double window = 0.5);

struct ChannelNorms {
    std::string name;
    std::vector<double> values;
};

/// L2 channels for interior/interior wiring, gradient channels for the boundary wirings:
/// state norm, error norm and their sum.
[[nodiscard]] std::vector<ChannelNorms> norm_channels(const SimTrace& trace, Wiring wiring);

/// t, z_l2, z_h1, e_l2, e_h1, u_norm, tau_y, tau_u
void write_trace_csv(std::ostream& out, const SimTrace& trace);

}  // namespace heatctl
