#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "heatctl/certificates.hpp"
#include "heatctl/error.hpp"
#include "heatctl/gains.hpp"
#include "heatctl/reference.hpp"

using namespace heatctl;
using Eigen::MatrixXd;

namespace {

MatrixXd scalar(double v) { return MatrixXd::Constant(1, 1, v); }

double max_real(const MatrixXd& m) {
    const Eigen::EigenSolver<MatrixXd> es(m);
    return es.eigenvalues().real().maxCoeff();
}

std::vector<double> sorted_spectrum(const MatrixXd& m) {
    const Eigen::EigenSolver<MatrixXd> es(m);
    std::vector<double> v;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        v.push_back(es.eigenvalues()(i).real());
        v.push_back(std::abs(es.eigenvalues()(i).imag()));
    }
    std::sort(v.begin(), v.end());
    return v;
}

ControllerStep2Data step2_data(const ModalSystem& s, const MatrixXd& L0, double delta) {
    const CouplingWeights w = coupling_weights(s);
    return {s.A0, s.B0, s.C0, L0, delta, delta, w.actuation, w.sensing, s.tail.lambda_Nplus1, s.q};
}

}  // namespace

TEST_CASE("route names round-trip") {
    for (GainRoute r : {GainRoute::Basic, GainRoute::TwoStep, GainRoute::Imported}) {
        CHECK(gain_route_from_string(to_string(r)) == r);
    }
    CHECK_THROWS_AS((void)gain_route_from_string("other"), Error);
}

TEST_CASE("scalar closed forms of the minimum-norm gains") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> a(-0.5, 3.0), bc(0.3, 2.5), dl(0.1, 1.5);
    for (int trial = 0; trial < 12; ++trial) {
        const double A = a(rng), b = bc(rng) * (trial % 2 ? -1.0 : 1.0), c = bc(rng), delta = dl(rng);
        if (A + delta <= 0.05) continue;
        const GainSet g = design_basic(scalar(A), scalar(b), scalar(c), delta);
        CHECK(g.L0(0, 0) == doctest::Approx((A + delta) / c).epsilon(1e-6));
        CHECK(g.K0(0, 0) == doctest::Approx((A + delta) / b).epsilon(1e-6));
        CHECK(all_satisfied(g.margins));
    }
}

TEST_CASE("q = 3 designed gains sit at the closed forms") {
    for (Wiring w : {Wiring::InteriorInterior, Wiring::InteriorBoundary, Wiring::BoundaryInterior}) {
        const ModalSystem s = reference_system(w, 3.0, 5, 1.0);
        const GainSet g = design_basic(s.A0, s.B0, s.C0, 1.0);
        CHECK(g.L0(0, 0) == doctest::Approx((s.A0(0, 0) + 1.0) / s.C0(0, 0)).epsilon(1e-6));
        CHECK(g.K0(0, 0) == doctest::Approx((s.A0(0, 0) + 1.0) / s.B0(0, 0)).epsilon(1e-6));
    }
}

TEST_CASE("stable A0 needs no gain") {
    MatrixXd A = MatrixXd::Zero(2, 2);
    A(0, 0) = -1.0;
    A(1, 1) = -2.0;
    MatrixXd B(2, 1), C(1, 2);
    B << 1.0, 0.5;
    C << 0.7, -0.2;
    const GainSet g = design_basic(A, B, C, 0.3);
    CHECK(g.L0.norm() < 1e-3);
    CHECK(g.K0.norm() < 1e-3);
    const GainSet zero = verify_basic(A, B, C, MatrixXd::Zero(2, 1), MatrixXd::Zero(1, 2), 0.3);
    CHECK(all_satisfied(zero.margins));
}

TEST_CASE("q = 3 stored gains satisfy the Lyapunov pair") {
    for (Wiring w : {Wiring::InteriorInterior, Wiring::InteriorBoundary, Wiring::BoundaryInterior}) {
        const ReferenceGains ref = reference_gains(w, 3.0);
        const ModalSystem s = reference_system(w, 3.0, 5, ref.design_delta);
        const GainSet g = verify_basic(s.A0, s.B0, s.C0, ref.L0, ref.K0, ref.design_delta);
        for (const ConstraintMargin& m : g.margins) {
            CAPTURE(m.name);
            CHECK(m.margin > 0.0);
        }
    }
}

TEST_CASE("infeasible design is reported") {
    CHECK_THROWS_AS((void)design_basic(scalar(1.0), scalar(1.0), scalar(0.0), 0.5), Error);
    try {
        (void)design_basic(scalar(1.0), scalar(0.0), scalar(1.0), 0.5);
        FAIL("expected design-infeasible");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DesignInfeasible);
    }
}

TEST_CASE("step 1 border vanishing recovers the plain observer inequality") {
    const ModalSystem s = reference_system(Wiring::InteriorInterior, 8.1, 20, 0.01);
    // designed for a larger decay, so it has margin at 0.01
    const MatrixXd L = design_basic(s.A0, s.B0, s.C0, 0.5).L0;
    CHECK(verify_observer_step1(s.A0, s.C0, L, 0.01, 1e-4).feasible());
    const ObserverDesign o = design_observer_step1(s.A0, s.C0, 0.01, coupling_weights(s).sensing);
    CHECK(all_satisfied(o.margins));
    CHECK(max_real(s.A0 - o.L * s.C0) < -0.01);
}

TEST_CASE("two-step design re-verifies") {
    const ModalSystem s20 = reference_system(Wiring::InteriorInterior, 8.1, 20, 0.01);
    const ModalSystem s60 = reference_system(Wiring::InteriorInterior, 8.1, 60, 0.04);
    GainDesignOptions opt;
    opt.alpha_search = AlphaSearch::Joint;
    const GainSet g = design_two_step(step2_data(s60, MatrixXd(), 0.04), 0.01, coupling_weights(s20).sensing, opt);
    CHECK(g.route == GainRoute::TwoStep);
    CHECK(all_satisfied(g.margins));
    const MatrixXd& Q = g.certificates.at("Qz");
    const MatrixXd& Y = g.certificates.at("Yz");
    CHECK((g.K0 * Q - Y).cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, Y.cwiseAbs().maxCoeff()));
    CHECK(verify_controller_step2(step2_data(s60, g.L0, 0.04), g.K0).feasible());
    CHECK(max_real(s60.A0 - s60.B0 * g.K0) < -0.04);
    // full certificate data accepts the designed pair
    const CertificateData data = certificate_data(s60, g.L0, g.K0);
    CHECK(max_real(data.loop.F0) < 0.0);
}

TEST_CASE("step 2 infeasibility names the binding condition") {
    const ModalSystem s = reference_system(Wiring::InteriorInterior, 8.1, 20, 0.01);
    ControllerStep2Data d = step2_data(s, design_basic(s.A0, s.B0, s.C0, 0.01).L0, 0.04);
    d.lambda_Nplus1 = d.q - 0.5;
    try {
        (void)design_controller_step2(d);
        FAIL("expected design-infeasible");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DesignInfeasible);
        CHECK(std::string(e.what()).find("scalar") != std::string::npos);
    }
}

TEST_CASE("scalar conditions hold with alpha = 1 for a wide spectral gap") {
    ControllerStep2Data d;
    d.A0 = scalar(0.5);
    d.B0 = scalar(1.0);
    d.C0 = scalar(1.0);
    d.L0 = scalar(2.0);
    d.delta = 0.1;
    d.delta1 = 0.1;
    d.b_weight = 1e-9;
    d.c_weight = 1e-9;
    d.lambda_Nplus1 = 1e4;
    d.q = 3.0;
    const ControllerStep2Problem p = controller_step2_problem(d, std::nullopt, 1.0);
    const std::vector<AffineConstraint> scalars{p.constraints[2], p.constraints[3]};
    CHECK(solve_feasibility(p.layout, scalars).feasible());
}

TEST_CASE("alpha grid and joint solve agree") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    GainDesignOptions grid;
    grid.alpha_per_decade = 24;
    int agreed = 0;
    int feasible_count = 0;
    for (int trial = 0; trial < 20; ++trial) {
        ControllerStep2Data d;
        const Eigen::Index n = 2;
        d.A0 = MatrixXd::Zero(n, n);
        d.A0(0, 0) = 0.2 + 1.5 * u(rng);
        d.A0(1, 1) = -0.5 + u(rng);
        d.B0 = MatrixXd::Random(n, 1) + MatrixXd::Constant(n, 1, 1.2);
        d.C0 = MatrixXd::Random(1, n) + MatrixXd::Constant(1, n, 1.2);
        d.delta = 0.05 + 0.3 * u(rng);
        d.delta1 = d.delta;
        d.L0 = design_basic(d.A0, d.B0, d.C0, d.delta).L0 * 1.5;
        d.b_weight = std::pow(10.0, -2.0 + 2.5 * u(rng));
        d.c_weight = std::pow(10.0, -2.0 + 2.0 * u(rng));
        d.q = 3.0;
        d.lambda_Nplus1 = d.q + std::pow(10.0, 0.5 + 2.0 * u(rng));
        const ControllerStep2Problem joint = controller_step2_problem(d);
        const bool joint_ok = solve_feasibility(joint.layout, joint.constraints).feasible();
        bool grid_ok = false;
        for (const auto& [alpha, ok] : step2_alpha_scan(d, grid)) grid_ok = grid_ok || ok;
        CAPTURE(trial);
        CHECK(joint_ok == grid_ok);
        agreed += joint_ok == grid_ok;
        feasible_count += joint_ok;
    }
    CHECK(agreed == 20);
    CHECK(feasible_count > 0);
    CHECK(feasible_count < 20);
}

TEST_CASE("sign flips of modes leave the closed-loop spectrum unchanged") {
    const ModalSystem s = reference_system(Wiring::InteriorInterior, 8.1, 20, 0.01);
    const GainSet g = design_basic(s.A0, s.B0, s.C0, 0.05);
    MatrixXd S = MatrixXd::Identity(3, 3);
    S(1, 1) = -1.0;
    const MatrixXd B = S * s.B0;
    const MatrixXd C = s.C0 * S;
    const GainSet h = design_basic(s.A0, B, C, 0.05);
    CHECK((h.L0 - S * g.L0).norm() < 1e-3 * std::max(1.0, g.L0.norm()));
    CHECK((h.K0 - g.K0 * S).norm() < 1e-3 * std::max(1.0, g.K0.norm()));
    const auto f0 = [](const MatrixXd& A, const MatrixXd& B0, const MatrixXd& C0, const GainSet& gs) {
        const Eigen::Index n = A.rows();
        MatrixXd F = MatrixXd::Zero(2 * n, 2 * n);
        F.topLeftCorner(n, n) = A - B0 * gs.K0;
        F.topRightCorner(n, n) = gs.L0 * C0;
        F.bottomRightCorner(n, n) = A - gs.L0 * C0;
        return F;
    };
    const std::vector<double> a = sorted_spectrum(f0(s.A0, s.B0, s.C0, g));
    const std::vector<double> b = sorted_spectrum(f0(s.A0, B, C, h));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-3));
}

TEST_CASE("gains CSV round-trip") {
    GainSet g;
    g.L0 = MatrixXd::Random(3, 2);
    g.K0 = MatrixXd::Random(2, 3);
    g.delta = 0.04;
    g.route = GainRoute::TwoStep;
    std::stringstream ss;
    write_gains_csv(ss, g);
    CHECK(ss.str().rfind("# delta=0.04", 0) == 0);
    const GainSet back = read_gains_csv(ss);
    CHECK(back.L0 == g.L0);
    CHECK(back.K0 == g.K0);
    CHECK(back.delta == 0.04);
    CHECK(back.route == GainRoute::TwoStep);
    std::stringstream bad("# delta=1 N0=1 d=1 route=basic\nL0,1\n");
    CHECK_THROWS_AS((void)read_gains_csv(bad), Error);
}
