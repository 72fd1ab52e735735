#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <queue>
#include <vector>

namespace heatctl {

template <typename Scalar>
struct QuadratureResult {
    Scalar value{};
    Scalar error_estimate{};
    bool converged{};
    int evaluations{};
};

namespace detail {

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename Scalar, typename F>
std::array<Scalar, 2> gk15(const F& f, Scalar lo, Scalar hi) {
    const Scalar center = (lo + hi) / 2;
    const Scalar half = (hi - lo) / 2;
    const Scalar fc = f(center);
    Scalar kronrod = fc * Scalar(kKronrodWeights[7]);
    Scalar gauss = fc * Scalar(kGaussWeights[3]);
    for (int i = 0; i < 7; ++i) {
        const Scalar dx = half * Scalar(kKronrodNodes[static_cast<std::size_t>(i)]);
        const Scalar sum = f(center - dx) + f(center + dx);
        kronrod += Scalar(kKronrodWeights[static_cast<std::size_t>(i)]) * sum;
        if (i % 2 == 1) gauss += Scalar(kGaussWeights[static_cast<std::size_t>(i / 2)]) * sum;
    }
    return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature: bisects the interval with
/// the largest error estimate until the summed estimate drops below `abs_tol`.
template <typename Scalar, typename F>
QuadratureResult<Scalar> integrate_adaptive(const F& f, Scalar lo, Scalar hi, Scalar abs_tol, int max_intervals = 4000) {
    struct Piece {
        Scalar lo, hi, value, error;
        bool operator<(const Piece& other) const { return error < other.error; }
    };
    QuadratureResult<Scalar> out;
    if (hi == lo) {
        out.converged = true;
        return out;
    }
    std::priority_queue<Piece> pieces;
    auto push = [&](Scalar a, Scalar b) {
        auto [v, e] = detail::gk15<Scalar>(f, a, b);
        out.evaluations += 15;
        pieces.push(Piece{a, b, v, e});
        out.value += v;
        out.error_estimate += e;
    };
    push(lo, hi);
    while (out.error_estimate > abs_tol && static_cast<int>(pieces.size()) < max_intervals) {
        Piece worst = pieces.top();
        pieces.pop();
        out.value -= worst.value;
        out.error_estimate -= worst.error;
        const Scalar mid = (worst.lo + worst.hi) / 2;
        push(worst.lo, mid);
        push(mid, worst.hi);
    }
    // re-sum to shed accumulated cancellation
    out.value = Scalar(0);
    out.error_estimate = Scalar(0);
    while (!pieces.empty()) {
        out.value += pieces.top().value;
        out.error_estimate += pieces.top().error;
        pieces.pop();
    }
    out.converged = out.error_estimate <= abs_tol;
    return out;
}

}  // namespace heatctl
