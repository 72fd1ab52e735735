#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "heatctl/error.hpp"
#include "heatctl/shapes.hpp"
#include "heatctl/spectral.hpp"

using namespace heatctl;

namespace {

// brute-force enumeration over a generous box, sorted
std::vector<double> brute_spectrum(const RectangleDomain& dom, int box) {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    std::vector<double> out;
    for (int m = 1; m <= box; ++m) {
        for (int k = 1; k <= box; ++k) {
            out.push_back(pi2 * (m * m / (dom.a1 * dom.a1) + (k - 0.5) * (k - 0.5) / (dom.a2 * dom.a2)));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_CASE("reference square: leading eigenvalues") {
    const SpectralBasis basis = rectangle_spectrum(reference_domain(), 6);
    const double expected[] = {2.3132, 6.0143, 7.8648, 11.5659, 13.4165, 17.1176};
    for (std::size_t n = 1; n <= 6; ++n) CHECK(basis.lambda(n) == doctest::Approx(expected[n - 1]).epsilon(1e-4));
    CHECK(basis.mode(1).m == 1);
    CHECK(basis.mode(1).k == 1);
    CHECK(basis.lambda(1) == doctest::Approx(std::numbers::pi * std::numbers::pi * 15.0 / 64.0).epsilon(1e-14));
}

TEST_CASE("exhaustive enumeration audit") {
    for (const RectangleDomain dom : {reference_domain(), RectangleDomain(1.0, 3.0), RectangleDomain(2.5, 0.7)}) {
        const std::size_t count = 400;
        const SpectralBasis basis = rectangle_spectrum(dom, count);
        const std::vector<double> brute = brute_spectrum(dom, 200);
        REQUIRE(basis.count() == count);
        for (std::size_t n = 1; n <= count; ++n) {
            CHECK(basis.lambda(n) == doctest::Approx(brute[n - 1]).epsilon(1e-13));
            const Mode& md = basis.mode(n);
            CHECK(rectangle_eigenvalue(dom, md.m, md.k) == md.lambda);
            CHECK(md.index == n);
        }
    }
}

TEST_CASE("ordering is ascending with (m,k) tie-break") {
    const SpectralBasis basis = rectangle_spectrum(RectangleDomain(1.0, 1.0), 300);
    for (std::size_t n = 2; n <= basis.count(); ++n) {
        const Mode& a = basis.mode(n - 1);
        const Mode& b = basis.mode(n);
        CHECK(a.lambda <= b.lambda * (1 + 1e-12));
        if (std::abs(a.lambda - b.lambda) <= 1e-9 * b.lambda) CHECK(std::pair(a.m, a.k) < std::pair(b.m, b.k));
    }
}

TEST_CASE("Weyl ratio at 2000+ modes") {
    const SpectralBasis basis = rectangle_spectrum(reference_domain(), 2500);
    const Eigen::VectorXd slope = asymptotic_slope(basis);
    CHECK(std::abs(slope(2499) - 1.0) < 0.1);
    CHECK(std::abs(slope(1999) - 1.0) < 0.1);
}

TEST_CASE("unstable mode count") {
    const SpectralBasis basis = rectangle_spectrum(reference_domain(), 50);
    CHECK(count_unstable_modes(basis, 3.0, 1.0) == 1);
    CHECK(count_unstable_modes(basis, 8.1, 0.04) == 3);
    CHECK(count_unstable_modes(basis, 0.0, 0.1) == 0);
    const SpectralBasis tiny = rectangle_spectrum(reference_domain(), 2);
    CHECK_THROWS_AS((void)count_unstable_modes(tiny, 8.1, 0.01), Error);
}

TEST_CASE("q=8.1 unstable modes are simple on the reference square") {
    const SpectralBasis basis = rectangle_spectrum(reference_domain(), 10);
    const MultiplicityPartition part = multiplicity_partition(basis, 3);
    CHECK(part.sizes == std::vector<std::size_t>{1, 1, 1});
    CHECK(part.max_multiplicity == 1);
    const SpectralBasis table = SpectralBasis::from_table({1.0, 2.0, 2.0, 3.0, 5.0});
    const MultiplicityPartition p2 = multiplicity_partition(table, 4);
    CHECK(p2.sizes == std::vector<std::size_t>{1, 2, 1});
    CHECK(p2.max_multiplicity == 2);
}

TEST_CASE("eigenfunctions are normalized") {
    const RectangleDomain dom = reference_domain();
    const SpectralBasis basis = rectangle_spectrum(dom, 20);
    for (std::size_t n = 1; n <= 20; ++n) {
        const Mode& md = basis.mode(n);
        const double i1 = integrate_product(sine_mode(md.m, dom.a1), sine_mode(md.m, dom.a1));
        const double i2 = integrate_product(cosine_half_mode(md.k, dom.a2), cosine_half_mode(md.k, dom.a2));
        CHECK(md.normalization * md.normalization * i1 * i2 == doctest::Approx(1.0).epsilon(1e-12));
        // Dirichlet on x1 = 0 and top edge, Neumann at x2 = 0
        CHECK(std::abs(basis.eigenfunction(n, 0.0, 0.3)) < 1e-14);
        CHECK(std::abs(basis.eigenfunction(n, 0.4, dom.a2)) < 1e-12);
    }
}

TEST_CASE("invalid inputs") {
    CHECK_THROWS_AS(RectangleDomain(0.0, 1.0), Error);
    CHECK_THROWS_AS(RectangleDomain(1.0, std::nan("")), Error);
    const SpectralBasis basis = rectangle_spectrum(reference_domain(), 3);
    CHECK_THROWS_AS((void)basis.mode(0), Error);
    CHECK_THROWS_AS((void)basis.mode(4), Error);
    CHECK_THROWS_AS((void)SpectralBasis::from_table({2.0, 1.0}), Error);
    CHECK_FALSE(SpectralBasis::from_table({1.0}).has_eigenfunctions());
}
