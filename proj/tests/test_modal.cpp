#include <doctest.h>

#include <cmath>
#include <numbers>

#include "heatctl/error.hpp"
#include "heatctl/modal.hpp"

using namespace heatctl;

namespace {

const RectangleDomain kDom = reference_domain();
const double kPi = std::numbers::pi;

SpectralBasis basis(std::size_t count = 200) { return rectangle_spectrum(kDom, count); }

std::size_t index_of(const SpectralBasis& b, int m, int k) {
    for (const Mode& md : b.modes()) {
        if (md.m == m && md.k == k) return md.index;
    }
    FAIL("mode not in basis");
    return 0;
}

}  // namespace

TEST_CASE("interior projections") {
    const SpectralBasis b = basis();
    const ShapeFunction g1 = catalog_shape("g1", kDom);
    for (int k = 1; k <= 4; ++k) CHECK(std::abs(project_interior(g1, b, index_of(b, 2, k))) < 1e-15);
    const double expected = 4 * std::sqrt(2.0) * std::sqrt(kDom.a1 * kDom.a2) / (kPi * kPi);
    CHECK(project_interior(g1, b, 1) == doctest::Approx(expected).epsilon(1e-13));
    CHECK(project_interior(g1, b, 1) == doctest::Approx(1.3237).epsilon(1e-4));
    CHECK(project_interior(catalog_shape("f1", kDom), b, 1) == doctest::Approx(1.36338).epsilon(1e-5));
    CHECK_THROWS_AS((void)project_interior(catalog_shape("g3", kDom), b, 1), Error);
}

TEST_CASE("boundary projections") {
    const SpectralBasis b = basis();
    const double norm = 2 / std::sqrt(kDom.a1 * kDom.a2);
    const ShapeFunction g3 = catalog_shape("g3", kDom);
    for (int m = 1; m <= 6; ++m) {
        for (int k = 1; k <= 3; ++k) {
            const double expected = norm * 0.2 * kDom.a1 / (m * kPi) * (1 - std::cos(m * kPi / 4));
            CHECK(project_boundary(g3, b, index_of(b, m, k)) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
    const ShapeFunction f5 = catalog_shape("f5", kDom);
    CHECK(project_boundary(f5, b, index_of(b, 2, 3)) == doctest::Approx(norm * kDom.a1 / 4).epsilon(1e-13));
    const ShapeFunction f6 = catalog_shape("f6", kDom);
    CHECK_THROWS_AS((void)project_boundary(catalog_shape("g1", kDom), b, 1), Error);
    CHECK(std::isfinite(project_boundary(f6, b, 1)));
}

TEST_CASE("closed form and quadrature coefficients agree") {
    const SpectralBasis b = basis(60);
    for (const std::string& name : catalog_names()) {
        const ShapeFunction s = catalog_shape(name, kDom);
        for (std::size_t n = 1; n <= 60; ++n) {
            CHECK(std::abs(project(s, b, n) - project_quadrature(s, b, n)) < 1e-9);
        }
    }
}

TEST_CASE("Parseval tails") {
    const SpectralBasis b = basis(3000);
    for (const std::string& name : {"f1", "f2", "f3", "f4", "g1", "g2"}) {
        const ShapeFunction s = catalog_shape(name, kDom);
        const double full = s.l2_norm_squared();
        const double full_q = s.scale * s.scale * integrate_product_quadrature(s.x1, s.x1) *
                              integrate_product_quadrature(s.x2, s.x2);
        double captured = 0.0, captured_q = 0.0;
        double prev = full;
        for (std::size_t N = 1; N <= 40; ++N) {
            const double c = project(s, b, N);
            captured += c * c;
            const double tail = tail_interior({s}, b, N);
            CHECK(tail >= 0.0);
            CHECK(tail <= prev + 1e-12);
            CHECK(std::abs(tail - (full - captured)) <= 1e-8);
            const double qc = project_quadrature(s, b, N);
            captured_q += qc * qc;
            CHECK(std::abs(tail - (full_q - captured_q)) <= 1e-8);
            prev = tail;
        }
        // the expansion converges to the norm
        CHECK(tail_interior({s}, b, 3000) < 0.05 * full);
    }
    const ShapeFunction g1 = catalog_shape("g1", kDom);
    double sum = 0.0;
    for (std::size_t n = 1; n <= 5; ++n) sum += std::pow(project(g1, b, n), 2);
    CHECK(tail_interior({g1}, b, 5) == doctest::Approx(kDom.a1 * kDom.a2 / 2 - sum).epsilon(1e-12));
}

TEST_CASE("finite expansion has zero tail") {
    const SpectralBasis b = basis(20);
    ShapeFunction s;
    s.name = "mode";
    s.x1 = sine_mode(1, kDom.a1);
    s.x2 = cosine_half_mode(1, kDom.a2);
    CHECK(tail_interior({s}, b, 1) < 1e-12);
    CHECK(tail_interior({s}, b, 1, true) < 1e-11);
    CHECK(tail_interior({s}, b, 0) == doctest::Approx(kDom.a1 * kDom.a2 / 4).epsilon(1e-12));
}

TEST_CASE("gradient tail of f3 is nonnegative and decreasing") {
    const SpectralBasis b = basis(100);
    const ShapeFunction f3 = catalog_shape("f3", kDom);
    double prev = f3.gradient_norm_squared(kDom);
    for (std::size_t N = 5; N <= 30; ++N) {
        const double t = tail_interior({f3}, b, N, true);
        CHECK(t >= 0.0);
        CHECK(t <= prev + 1e-12);
        prev = t;
    }
    CHECK_THROWS_AS((void)tail_interior({catalog_shape("f1", kDom)}, b, 5, true), Error);
}

TEST_CASE("boundary tails") {
    const SpectralBasis b = basis(400);
    const ShapeFunction g3 = catalog_shape("g3", kDom);
    const BoundaryTail t0 = tail_boundary({g3}, b, 0);
    CHECK(t0.cap == doctest::Approx(kDom.a2 * 0.04 * kDom.a1 / 4).epsilon(1e-14));
    double prev = t0.tail;
    for (std::size_t N = 1; N <= 60; ++N) {
        const BoundaryTail t = tail_boundary({g3}, b, N);
        CHECK(t.tail >= 0.0);
        CHECK(t.tail <= prev + 1e-15);
        prev = t.tail;
    }
    ShapeFunction zero = g3;
    zero.scale = 0.0;
    const BoundaryTail tz = tail_boundary({zero}, b, 10);
    CHECK(tz.cap == 0.0);
    CHECK(tz.tail == 0.0);
}

TEST_CASE("odd reciprocal squares sum to pi^2/8") {
    // partial sum plus the midpoint-rule remainder 1/(4K) - 1/(48 K^3)
    const long K = 20000;
    double sum = 0.0;
    for (long k = K; k >= 1; --k) sum += 1.0 / ((2.0 * k - 1) * (2.0 * k - 1));
    const double kd = static_cast<double>(K);
    sum += 1.0 / (4 * kd) - 1.0 / (48 * kd * kd * kd);
    CHECK(std::abs(sum - kPi * kPi / 8) < 1e-10);
    // boundary tail of a single sine in x1
    ShapeFunction s;
    s.name = "sine";
    s.kind = ShapeKind::Boundary;
    s.x1 = sine_mode(1, kDom.a1);
    const SpectralBasis b = basis(4000);
    double captured = 0.0;
    for (const Mode& md : b.modes()) {
        if (md.m == 1) captured += std::pow(project(s, b, md.index), 2) / md.lambda;
    }
    const BoundaryTail t = tail_boundary({s}, b, 0);
    CHECK(captured < t.cap);
    // on the square: sum_k 1/((k-1/2)^2 + 1) = pi tanh(pi) / 2
    const double exact = kDom.a1 * kDom.a1 * std::tanh(kPi) / (2 * kPi);
    CHECK(captured == doctest::Approx(exact).epsilon(2e-2));
    CHECK(captured < exact);
}

TEST_CASE("assembly, q=3") {
    const SpectralBasis b = basis(50);
    const ModalSystem sys = assemble_modal_system(b, 3.0, 1.0, 5, {catalog_shape("f1", kDom)}, {catalog_shape("g1", kDom)},
                                                  Wiring::InteriorInterior);
    CHECK(sys.n0 == 1);
    CHECK(sys.d == 1);
    CHECK(sys.A0(0, 0) == doctest::Approx(3.0 - b.lambda(1)));
    CHECK(sys.A0(0, 0) == doctest::Approx(0.6868).epsilon(1e-4));
    REQUIRE(sys.A1.rows() == 4);
    for (int i = 0; i < 4; ++i) CHECK(sys.A1(i, i) == doctest::Approx(3.0 - b.lambda(static_cast<std::size_t>(i) + 2)));
    CHECK(sys.C0.rows() == 1);
    CHECK(sys.C0.cols() == 1);
    CHECK(*sys.tail.b_tail == doctest::Approx(3.0846870247545777).epsilon(1e-9));
    CHECK(*sys.tail.c_tail == doctest::Approx(0.6498498150678831).epsilon(1e-9));
    CHECK(sys.tail.lambda_Nplus1 == doctest::Approx(17.1176).epsilon(1e-5));
    CHECK_FALSE(sys.tail.grad_b_tail.has_value());
    const CouplingWeights w = coupling_weights(sys);
    CHECK(w.actuation == *sys.tail.b_tail);

    const ModalSystem deg = assemble_modal_system(b, 3.0, 1.0, 1, {catalog_shape("f1", kDom)}, {catalog_shape("g1", kDom)},
                                                  Wiring::InteriorInterior);
    CHECK(deg.A1.size() == 0);
    CHECK(deg.B1.size() == 0);
    CHECK(deg.C1.size() == 0);
    CHECK(*deg.tail.b_tail > *sys.tail.b_tail);
}

TEST_CASE("assembly, boundary wirings") {
    const SpectralBasis b = basis(50);
    const ModalSystem s3 = assemble_modal_system(b, 3.0, 1.0, 4, {catalog_shape("f3", kDom)}, {catalog_shape("g3", kDom)},
                                                 Wiring::InteriorBoundary);
    REQUIRE(s3.tail.grad_b_tail.has_value());
    REQUIRE(s3.tail.varrho_N.has_value());
    const CouplingWeights w3 = coupling_weights(s3);
    CHECK(w3.actuation == *s3.tail.grad_b_tail);
    CHECK(w3.sensing == *s3.tail.varrho_N);

    const ModalSystem s4 = assemble_modal_system(b, 3.0, 1.0, 4, {catalog_shape("f5", kDom)}, {catalog_shape("g1", kDom)},
                                                 Wiring::BoundaryInterior);
    const CouplingWeights w4 = coupling_weights(s4);
    CHECK(w4.actuation == *s4.tail.rho_N);
    CHECK(w4.sensing == doctest::Approx(*s4.tail.c_tail / b.lambda(4)));

    CHECK_THROWS_AS((void)assemble_modal_system(b, 3.0, 1.0, 4, {catalog_shape("f1", kDom)}, {catalog_shape("g3", kDom)},
                                                Wiring::InteriorBoundary),
                    Error);
    CHECK_THROWS_AS((void)assemble_modal_system(b, 3.0, 1.0, 4, {catalog_shape("g3", kDom)}, {catalog_shape("g1", kDom)},
                                                Wiring::InteriorInterior),
                    Error);
    CHECK_THROWS_AS((void)assemble_modal_system(b, 3.0, 1.0, 50, {catalog_shape("f1", kDom)}, {catalog_shape("g1", kDom)},
                                                Wiring::InteriorInterior),
                    Error);
}

TEST_CASE("rank test") {
    const SpectralBasis b = basis(80);
    const ModalSystem ok = assemble_modal_system(b, 3.0, 1.0, 3, {catalog_shape("f1", kDom)}, {catalog_shape("g1", kDom)},
                                                 Wiring::InteriorInterior);
    const RankReport r1 = check_rank(ok);
    CHECK(r1.assumption_holds);
    CHECK(r1.controllable);
    CHECK(r1.observable);

    const ModalSystem bad = assemble_modal_system(b, 3.0, 1.0, 3, {catalog_shape("f4", kDom)}, {catalog_shape("g1", kDom)},
                                                  Wiring::InteriorInterior);
    const RankReport r2 = check_rank(bad);
    CHECK_FALSE(r2.assumption_holds);
    CHECK(r2.b_ranks.front() == 0);
    CHECK_FALSE(r2.controllable);

    AssemblyOptions opts;
    opts.n0 = 3;
    const ModalSystem big = assemble_modal_system(b, 8.1, 0.04, 20, {catalog_shape("f1", kDom), catalog_shape("f2", kDom)},
                                                  {catalog_shape("g1", kDom), catalog_shape("g2", kDom)},
                                                  Wiring::InteriorInterior, opts);
    CHECK(big.B0.rows() == 3);
    CHECK(big.B0.cols() == 2);
    CHECK(big.C0.rows() == 2);
    CHECK(big.C0.cols() == 3);
    const RankReport r3 = check_rank(big);
    CHECK(r3.assumption_holds);
    CHECK(r3.controllable);
    CHECK(r3.observable);

    ModalSystem scaled = big;
    scaled.B0.col(0) *= 1e3;
    scaled.C0.row(1) *= 1e-2;
    const RankReport r4 = check_rank(scaled);
    CHECK(r4.b_ranks == r3.b_ranks);
    CHECK(r4.c_ranks == r3.c_ranks);
}

TEST_CASE("coefficient-table assembly") {
    const SpectralBasis table = SpectralBasis::from_table({1.0, 4.0, 9.0, 16.0});
    Eigen::MatrixXd bc(4, 1), cc(4, 1);
    bc << 1.0, 0.5, 0.25, 0.125;
    cc << 2.0, 1.0, 0.5, 0.25;
    TailQuantities tails;
    tails.b_tail = 0.1;
    tails.c_tail = 0.2;
    const ModalSystem sys = assemble_modal_system(table, 2.0, 0.5, 2, bc, cc, Wiring::InteriorInterior, tails);
    CHECK(sys.n0 == 1);
    CHECK(sys.A0(0, 0) == doctest::Approx(1.0));
    CHECK(sys.B1(0, 0) == doctest::Approx(0.5));
    CHECK(sys.tail.lambda_Nplus1 == doctest::Approx(9.0));
    TailQuantities missing;
    missing.b_tail = 0.1;
    CHECK_THROWS_AS((void)assemble_modal_system(table, 2.0, 0.5, 2, bc, cc, Wiring::InteriorInterior, missing), Error);
}
