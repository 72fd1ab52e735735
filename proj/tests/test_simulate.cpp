#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "heatctl/error.hpp"
#include "heatctl/reference.hpp"
#include "heatctl/simulate.hpp"

using namespace heatctl;

namespace {

SimConfig base(const ModalSystem& sys, std::size_t M, Wiring w) {
    const ReferenceGains g = reference_gains(w, 3.0);
    SimConfig c;
    c.M_sim = M;
    c.L0 = g.L0;
    c.K0 = g.K0;
    c.z0 = initial_coefficients(default_initial_shape(reference_domain()), sys.basis, M);
    return c;
}

}  // namespace

TEST_CASE("delay profiles stay within their bounds") {
    for (DelayKind k : {DelayKind::Zero, DelayKind::Constant, DelayKind::SinSquared, DelayKind::CosSquared,
                        DelayKind::Sawtooth}) {
        const DelaySpec d{k, 0.3, 0.0};
        for (int i = 0; i <= 1000; ++i) {
            const double t = 0.01 * i;
            CHECK(d(t) >= 0.0);
            CHECK(d(t) <= 0.3 + 1e-15);
        }
        CHECK(delay_kind_from_string(to_string(k)) == k);
    }
    CHECK(DelaySpec{DelayKind::SinSquared, 0.3, 0.0}(0.0) == doctest::Approx(0.15));
    CHECK(DelaySpec{DelayKind::CosSquared, 0.3, 0.0}(0.0) == doctest::Approx(0.3));
    CHECK(DelaySpec{DelayKind::Sawtooth, 0.3, 0.0}(0.45) == doctest::Approx(0.15));
    CHECK_THROWS_AS((void)delay_kind_from_string("ramp"), Error);
}

TEST_CASE("zero initial state stays at zero") {
    const ModalSystem sys = reference_system(Wiring::InteriorInterior, 3.0, 5, 0.1);
    SimConfig c = base(sys, 20, Wiring::InteriorInterior);
    c.z0 = Eigen::VectorXd::Zero(20);
    c.T = 1.0;
    c.tau_y = c.tau_u = {DelayKind::SinSquared, 0.2, 0.0};
    const SimTrace tr = simulate_closed_loop(sys, c);
    CHECK_FALSE(tr.diverged);
    for (double v : tr.z_l2) CHECK(v == 0.0);
}

TEST_CASE("open loop grows at the unstable modal rate") {
    const ModalSystem sys = reference_system(Wiring::InteriorInterior, 3.0, 5, 0.1);
    SimConfig c = base(sys, 40, Wiring::InteriorInterior);
    c.open_loop = true;
    c.T = 8.0;
    const SimTrace tr = simulate_closed_loop(sys, c);
    const DecayFit f = fit_decay(tr, NormChannel::L2, 0.5);
    const double expected = -2.0 * (3.0 - sys.basis.lambda(1));
    CHECK(f.rate == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("single mode gradient norm equals its eigenvalue") {
    const ModalSystem sys = reference_system(Wiring::InteriorInterior, 3.0, 5, 0.1);
    SimConfig c = base(sys, 10, Wiring::InteriorInterior);
    c.z0 = Eigen::VectorXd::Zero(10);
    c.z0(0) = 1.0;
    c.T = 0.01;
    const SimTrace tr = simulate_closed_loop(sys, c);
    CHECK(tr.z_h1.front() == doctest::Approx(sys.basis.lambda(1)));
    CHECK(tr.z_l2.front() == doctest::Approx(1.0));
}

TEST_CASE("projected initial state satisfies Parseval") {
    const RectangleDomain dom = reference_domain();
    const ShapeFunction s = default_initial_shape(dom);
    const SpectralBasis basis = rectangle_spectrum(dom, 300);
    const Eigen::VectorXd z = initial_coefficients(s, basis, 300);
    CHECK(z.squaredNorm() == doctest::Approx(s.l2_norm_squared()).epsilon(1e-4));
    const Eigen::VectorXd z150 = z.head(150);
    CHECK(z.squaredNorm() - z150.squaredNorm() < 1e-4 * z.squaredNorm());
    CHECK_THROWS_AS((void)initial_coefficients(s, basis, 301), Error);
}

TEST_CASE("truncation at 150 modes matches 300 modes") {
    const ModalSystem sys = reference_system(Wiring::InteriorInterior, 3.0, 5, 0.1, 300);
    SimConfig a = base(sys, 150, Wiring::InteriorInterior);
    SimConfig b = base(sys, 300, Wiring::InteriorInterior);
    for (SimConfig* c : {&a, &b}) {
        c->T = 2.0;
        c->tau_y = {DelayKind::SinSquared, 0.2, 0.0};
        c->tau_u = {DelayKind::CosSquared, 0.2, 0.0};
    }
    const SimTrace ta = simulate_closed_loop(sys, a);
    const SimTrace tb = simulate_closed_loop(sys, b);
    REQUIRE(ta.t.size() == tb.t.size());
    for (std::size_t i = 0; i < ta.t.size(); ++i) {
        const double rel = std::abs(ta.z_l2[i] - tb.z_l2[i]) / tb.z_l2[i];
        CHECK(rel < (ta.t[i] <= 0.5 ? 1e-6 : 1e-3));
    }
}

TEST_CASE("observer tracks the plant exactly without delays") {
    const ModalSystem sys = reference_system(Wiring::InteriorInterior, 3.0, 5, 0.1);
    SimConfig c = base(sys, 5, Wiring::InteriorInterior);
    c.zhat0 = c.z0;
    c.T = 3.0;
    const SimTrace tr = simulate_closed_loop(sys, c);
    for (double e : tr.e_l2) CHECK(e < 1e-20);
}

TEST_CASE("integrator converges at fourth order with aligned delays") {
    const ModalSystem sys = reference_system(Wiring::InteriorInterior, 3.0, 5, 0.1);
    const auto run = [&](double dt) {
        SimConfig c = base(sys, 8, Wiring::InteriorInterior);
        c.T = 1.0;
        c.dt = dt;
        c.record_interval = 0.1;
        c.tau_y = c.tau_u = {DelayKind::Constant, 0.1, 0.0};
        return simulate_closed_loop(sys, c).z.back();
    };
    const Eigen::VectorXd ref = run(0.1 / 256);
    const double e1 = (run(0.1 / 8) - ref).norm();
    const double e2 = (run(0.1 / 16) - ref).norm();
    MESSAGE("observed order " << std::log2(e1 / e2));
    CHECK(std::log2(e1 / e2) >= 3.5);
}

TEST_CASE("closed loop decays with the reference gains") {
    const ModalSystem sys = reference_system(Wiring::InteriorInterior, 3.0, 5, 0.1, 150);
    SimConfig c = base(sys, 150, Wiring::InteriorInterior);
    c.T = 6.0;
    c.tau_y = {DelayKind::SinSquared, 0.311, 0.0};
    c.tau_u = {DelayKind::CosSquared, 0.311, 0.0};
    const SimTrace tr = simulate_closed_loop(sys, c);
    CHECK_FALSE(tr.diverged);
    for (const ChannelNorms& ch : norm_channels(tr, Wiring::InteriorInterior)) {
        CHECK(fit_decay(tr.t, ch.values).rate > 0.0);
        CHECK(ch.values.back() < ch.values.front());
    }
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        CHECK(tr.tau_y[i] <= 0.311 + 1e-12);
        CHECK(tr.tau_u[i] >= 0.0);
    }
}

TEST_CASE("decay fit recovers an exact exponential") {
    std::vector<double> t, v;
    for (int i = 0; i <= 500; ++i) {
        t.push_back(0.01 * i);
        v.push_back(3.0 * std::exp(-2.0 * t.back()));
    }
    const DecayFit f = fit_decay(t, v);
    CHECK(f.rate == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(f.residual < 1e-9);
    CHECK(f.samples == 251);
    v[400] = 0.0;
    CHECK_THROWS_AS((void)fit_decay(t, v), Error);
}

TEST_CASE("invalid simulation settings are rejected") {
    const ModalSystem sys = reference_system(Wiring::InteriorInterior, 3.0, 5, 0.1);
    SimConfig c = base(sys, 20, Wiring::InteriorInterior);
    c.M_sim = 41;
    CHECK_THROWS_AS((void)simulate_closed_loop(sys, c), Error);
    c = base(sys, 20, Wiring::InteriorInterior);
    c.K0 = Eigen::MatrixXd::Zero(2, 1);
    CHECK_THROWS_AS((void)simulate_closed_loop(sys, c), Error);
    c = base(sys, 20, Wiring::InteriorInterior);
    c.tau_y = {DelayKind::Constant, 0.01, 0.01};
    c.dt = 0.02;
    CHECK_THROWS_AS((void)simulate_closed_loop(sys, c), Error);
}

TEST_CASE("trace csv layout") {
    const ModalSystem sys = reference_system(Wiring::InteriorInterior, 3.0, 5, 0.1);
    SimConfig c = base(sys, 10, Wiring::InteriorInterior);
    c.T = 0.05;
    std::ostringstream os;
    write_trace_csv(os, simulate_closed_loop(sys, c));
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "t,z_l2,z_h1,e_l2,e_h1,u_norm,tau_y,tau_u");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 6);
}
