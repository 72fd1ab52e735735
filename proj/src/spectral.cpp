#include "heatctl/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "heatctl/error.hpp"

namespace heatctl {

namespace {

bool near_equal(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

}  // namespace

RectangleDomain::RectangleDomain(double a1_, double a2_) : a1(a1_), a2(a2_) {
    if (!(a1 > 0.0) || !(a2 > 0.0) || !std::isfinite(a1) || !std::isfinite(a2)) {
        throw Error(ErrorKind::InvalidArgument, "rectangle side lengths must be positive and finite");
    }
}

SpectralBasis::SpectralBasis(RectangleDomain domain, std::vector<Mode> modes)
    : domain_(domain), modes_(std::move(modes)) {}

SpectralBasis SpectralBasis::from_table(const std::vector<double>& lambdas) {
    if (lambdas.empty()) throw Error(ErrorKind::InvalidArgument, "empty eigenvalue table");
    SpectralBasis basis;
    basis.modes_.reserve(lambdas.size());
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (i > 0 && lambdas[i] < lambdas[i - 1]) {
            throw Error(ErrorKind::InvalidArgument, "eigenvalue table must be non-decreasing");
        }
        basis.modes_.push_back(Mode{i + 1, 0, 0, lambdas[i], 0.0});
    }
    return basis;
}

const Mode& SpectralBasis::mode(std::size_t n) const {
    if (n == 0 || n > modes_.size()) {
        throw Error(ErrorKind::InvalidArgument, "mode index " + std::to_string(n) + " outside basis");
    }
    return modes_[n - 1];
}

Eigen::VectorXd SpectralBasis::lambdas() const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(modes_.size()));
    for (std::size_t i = 0; i < modes_.size(); ++i) out(static_cast<Eigen::Index>(i)) = modes_[i].lambda;
    return out;
}

const RectangleDomain& SpectralBasis::domain() const {
    if (!domain_) throw Error(ErrorKind::InvalidArgument, "tabulated basis has no rectangle domain");
    return *domain_;
}

double SpectralBasis::eigenfunction(std::size_t n, double x1, double x2) const {
    const Mode& md = mode(n);
    const RectangleDomain& dom = domain();
    using std::numbers::pi;
    return md.normalization * std::sin(md.m * pi * x1 / dom.a1) * std::cos((md.k - 0.5) * pi * x2 / dom.a2);
}

double rectangle_eigenvalue(const RectangleDomain& domain, int m, int k) {
    using std::numbers::pi;
    const double km = k - 0.5;
    return pi * pi * (static_cast<double>(m) * m / (domain.a1 * domain.a1) + km * km / (domain.a2 * domain.a2));
}

SpectralBasis rectangle_spectrum(const RectangleDomain& domain, std::size_t count) {
    if (count == 0) throw Error(ErrorKind::InvalidArgument, "spectrum count must be positive");
    const double norm = 2.0 / std::sqrt(domain.area());

    auto box = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count)) * std::max(domain.a1, domain.a2) * 2.0)) + 8;
    std::vector<Mode> candidates;
    for (;;) {
        candidates.clear();
        candidates.reserve(static_cast<std::size_t>(box) * static_cast<std::size_t>(box));
        for (int m = 1; m <= box; ++m) {
            for (int k = 1; k <= box; ++k) {
                candidates.push_back(Mode{0, m, k, rectangle_eigenvalue(domain, m, k), norm});
            }
        }
        if (candidates.size() >= count) {
            std::nth_element(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(count - 1),
                             candidates.end(), [](const Mode& a, const Mode& b) { return a.lambda < b.lambda; });
            const double retained_max = candidates[count - 1].lambda;
            // smallest eigenvalue of any pair outside the box
            const double outside = std::min(rectangle_eigenvalue(domain, box + 1, 1), rectangle_eigenvalue(domain, 1, box + 1));
            if (outside > retained_max * (1.0 + kTieTolerance)) break;
        }
        box *= 2;
    }

    std::sort(candidates.begin(), candidates.end(), [](const Mode& a, const Mode& b) { return a.lambda < b.lambda; });
    // (m,k) order inside runs of symbolically tied eigenvalues
    for (std::size_t start = 0; start < candidates.size();) {
        std::size_t end = start + 1;
        while (end < candidates.size() && near_equal(candidates[end].lambda, candidates[start].lambda, kTieTolerance)) ++end;
        std::sort(candidates.begin() + static_cast<std::ptrdiff_t>(start), candidates.begin() + static_cast<std::ptrdiff_t>(end),
                  [](const Mode& a, const Mode& b) { return a.m != b.m ? a.m < b.m : a.k < b.k; });
        if (start >= count) break;
        start = end;
    }
    candidates.resize(count);
    for (std::size_t i = 0; i < count; ++i) candidates[i].index = i + 1;
    return SpectralBasis(domain, std::move(candidates));
}

std::size_t count_unstable_modes(const SpectralBasis& basis, double q, double delta) {
    const double threshold = q + delta;
    if (!(basis.modes().back().lambda > threshold)) {
        throw Error(ErrorKind::InsufficientBasis,
                    "basis of " + std::to_string(basis.count()) + " modes does not reach lambda > q + delta");
    }
    std::size_t n0 = 0;
    for (const Mode& md : basis.modes()) {
        if (md.lambda <= threshold) n0 = md.index;
    }
    return n0;
}

MultiplicityPartition multiplicity_partition(const SpectralBasis& basis, std::size_t n0, double tol) {
    if (n0 > basis.count()) throw Error(ErrorKind::InvalidArgument, "N0 exceeds basis size");
    MultiplicityPartition out;
    for (std::size_t n = 1; n <= n0;) {
        std::size_t run = 1;
        while (n + run <= n0 && near_equal(basis.lambda(n + run), basis.lambda(n), tol)) ++run;
        out.sizes.push_back(run);
        out.max_multiplicity = std::max(out.max_multiplicity, run);
        n += run;
    }
    return out;
}

Eigen::VectorXd asymptotic_slope(const SpectralBasis& basis) {
    if (basis.count() < 10) throw Error(ErrorKind::InvalidArgument, "asymptotic slope needs at least 10 modes");
    const double area = basis.domain().area();
    Eigen::VectorXd ratio(static_cast<Eigen::Index>(basis.count()));
    for (std::size_t n = 1; n <= basis.count(); ++n) {
        ratio(static_cast<Eigen::Index>(n - 1)) = basis.lambda(n) * area / (4.0 * std::numbers::pi * static_cast<double>(n));
    }
    return ratio;
}

}  // namespace heatctl
