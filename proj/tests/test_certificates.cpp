#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "heatctl/certificates.hpp"
#include "heatctl/error.hpp"
#include "heatctl/reference.hpp"

using namespace heatctl;
using Eigen::MatrixXd;

namespace {

CertificateData q3_data(Wiring w, std::size_t N) {
    const ModalSystem sys = reference_system(w, 3.0, N, 1.0);
    const ReferenceGains g = reference_gains(w, 3.0);
    return certificate_data(sys, g.L0, g.K0);
}

CertificateParams params(double delta, double tau, double delta1 = -1.0) {
    CertificateParams p;
    p.delta = delta;
    p.delta1 = delta1 > 0.0 ? delta1 : delta;
    p.tau_y = tau;
    p.tau_u = tau;
    return p;
}

bool feasible(CertificateVariant v, const CertificateData& data, const CertificateParams& p) {
    return evaluate(build(v, data, p)).feasible();
}

}  // namespace

TEST_CASE("variant names and wiring") {
    for (CertificateVariant v : all_variants()) {
        CHECK(variant_from_string(to_string(v)) == v);
        CHECK(counterpart(counterpart(v)) == v);
        CHECK(is_vector(v) != is_vector(counterpart(v)));
        CHECK(wiring_of(v) == wiring_of(counterpart(v)));
    }
    CHECK(wiring_of(CertificateVariant::Thm2) == Wiring::InteriorBoundary);
    CHECK(wiring_of(CertificateVariant::Thm3) == Wiring::BoundaryInterior);
    CHECK_THROWS_AS((void)variant_from_string("thm9"), Error);
}

TEST_CASE("closed-loop matrices") {
    const ModalSystem sys = reference_system(Wiring::InteriorInterior, 8.1, 20, 0.01);
    const ReferenceGains g = reference_gains(Wiring::InteriorInterior, 8.1);
    const ClosedLoopMatrices cl = closed_loop(sys, g.L0, g.K0);
    CHECK(cl.F0.rows() == 6);
    CHECK(cl.F0.bottomLeftCorner(3, 3).norm() == 0.0);
    Eigen::VectorXd ours = cl.F0.eigenvalues().real();
    Eigen::VectorXd parts(6);
    parts << (sys.A0 - sys.B0 * g.K0).eigenvalues().real(), (sys.A0 - g.L0 * sys.C0).eigenvalues().real();
    std::sort(ours.begin(), ours.end());
    std::sort(parts.begin(), parts.end());
    CHECK((ours - parts).norm() < 1e-9);
    CHECK((cl.script_L0.topRows(3) + cl.script_L0.bottomRows(3)).norm() == 0.0);
    CHECK(cl.script_C0.rightCols(3).norm() == 0.0);
    CHECK(cl.script_K0.rightCols(3).norm() == 0.0);
    CHECK_THROWS_AS((void)closed_loop(sys, g.K0, g.L0), Error);
}

TEST_CASE("assembled blocks are symmetric") {
    std::mt19937 rng(11);
    std::normal_distribution<double> nd;
    for (CertificateVariant v : all_variants()) {
        const ModalSystem sys = reference_system(wiring_of(v), 8.1, 20, 0.01);
        const ReferenceGains g = reference_gains(wiring_of(v), 8.1);
        CertificateParams p = params(0.05, 0.02);
        p.full_form = true;
        const CertificateProblem prob = build(v, certificate_data(sys, g.L0, g.K0), p);
        Eigen::VectorXd x(prob.layout.dimension());
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = nd(rng);
        const Witness w = prob.layout.unpack(x);
        for (const AffineConstraint& c : prob.constraints) {
            const MatrixXd m = c.expr.evaluate(prob.layout, w);
            CHECK((m - m.transpose()).norm() <= 1e-12 * (1.0 + m.norm()));
        }
    }
}

TEST_CASE("constraint lists per variant") {
    const CertificateData data = q3_data(Wiring::InteriorInterior, 5);
    auto names = [&](CertificateVariant v, bool full) {
        CertificateParams p = params(0.1, 0.1);
        p.full_form = full;
        std::vector<std::string> out;
        for (const auto& c : build(v, data, p).constraints) out.push_back(c.name);
        return out;
    };
    CHECK(names(CertificateVariant::Thm1, false) ==
          std::vector<std::string>{"LMI11abc", "G1G2y", "G1G2u", "scalar", "Hurwitz2", "Phi"});
    CHECK(names(CertificateVariant::Rmk3, false) == std::vector<std::string>{"G1G2y", "G1G2u", "cLMI1", "Phi"});
    CHECK(names(CertificateVariant::Thm1, true) ==
          std::vector<std::string>{"LMI11abc", "G1G2y", "G1G2u", "scalar", "Hurwitz2", "Phi@0", "Phi@tau"});
    const CertificateProblem prob = build(CertificateVariant::Thm1, data, params(0.1, 0.1));
    CHECK(prob.layout.find("beta0").id > 0);
    CHECK_THROWS_AS((void)prob.layout.find("alpha1"), Error);
    CHECK_THROWS_AS((void)build(CertificateVariant::Thm1, data, params(-0.1, 0.1)), Error);
}

TEST_CASE("substitution slots differ only where the weights enter") {
    // Changing one weight changes exactly the blocks that carry it.
    const CertificateData base = q3_data(Wiring::InteriorInterior, 5);
    CertificateData act = base;
    act.weights.actuation *= 3.0;
    CertificateData sen = base;
    sen.weights.sensing *= 3.0;
    for (CertificateVariant v : {CertificateVariant::Thm1, CertificateVariant::Rmk3}) {
        const CertificateProblem p0 = build(v, base, params(0.2, 0.1));
        const CertificateProblem pa = build(v, act, params(0.2, 0.1));
        const CertificateProblem ps = build(v, sen, params(0.2, 0.1));
        std::mt19937 rng(3);
        std::normal_distribution<double> nd;
        Eigen::VectorXd x(p0.layout.dimension());
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = nd(rng);
        const Witness w = p0.layout.unpack(x);
        for (std::size_t i = 0; i < p0.constraints.size(); ++i) {
            const MatrixXd m0 = p0.constraints[i].expr.evaluate(p0.layout, w);
            const MatrixXd ma = pa.constraints[i].expr.evaluate(pa.layout, w);
            const MatrixXd ms = ps.constraints[i].expr.evaluate(ps.layout, w);
            const std::string& name = p0.constraints[i].name;
            const bool act_slot = (name == "LMI11abc") || (name == "Phi" && !is_vector(v));
            CHECK_MESSAGE(((m0 - ma).norm() > 0.0) == act_slot, name);
            MatrixXd ds = m0 - ms;
            if (name == "Phi") {
                // only the zeta diagonal block (row/col 2) moves
                CHECK(ds(2, 2) != 0.0);
                ds.row(2).setZero();
                CHECK(ds.norm() < 1e-14);
            } else {
                CHECK(ds.norm() == 0.0);
            }
        }
    }
}

TEST_CASE("zero delay and small delay feasibility, q=3") {
    const CertificateData data = q3_data(Wiring::InteriorInterior, 5);
    const CertificateProblem p = build(CertificateVariant::Thm1, data, params(0.07, 0.0));
    CHECK(p.eps_y() == 1.0);
    CHECK(p.eps_u() == 1.0);
    const CertificateResult r = evaluate(p);
    REQUIRE(r.feasible());
    CHECK(all_satisfied(verify_witness(p.layout, p.constraints, r.feasibility.witness)));
    REQUIRE(r.decay.has_value());
    CHECK(r.decay->halanay->hurwitz);
    CHECK(r.decay->delta0 > 0.0);

    CHECK(feasible(CertificateVariant::Thm1, data, params(0.07, 0.2)));
    CHECK_FALSE(feasible(CertificateVariant::Thm1, data, params(0.07, 0.40)));
    CHECK(feasible(CertificateVariant::Rmk3, data, params(0.95, 0.1, 0.855)));
    CHECK_FALSE(feasible(CertificateVariant::Rmk3, data, params(0.95, 0.1, 0.095)));
}

TEST_CASE("monotone in the delay bound") {
    const CertificateData data = q3_data(Wiring::InteriorInterior, 4);
    for (CertificateVariant v : {CertificateVariant::Thm1, CertificateVariant::Rmk3}) {
        const double delta = is_vector(v) ? 0.1 : 1.0;
        const double delta1 = is_vector(v) ? delta : 0.5;
        bool seen_infeasible = false;
        for (double tau : {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35}) {
            const bool ok = feasible(v, data, params(delta, tau, delta1));
            if (seen_infeasible) CHECK_FALSE(ok);
            if (!ok) seen_infeasible = true;
        }
        CHECK(seen_infeasible);
    }
}

TEST_CASE("full form implies the reduced form") {
    const CertificateData data = q3_data(Wiring::InteriorInterior, 5);
    CertificateParams p = params(0.07, 0.15);
    p.full_form = true;
    const CertificateProblem full = build(CertificateVariant::Thm1, data, p);
    const CertificateResult rf = evaluate(full);
    REQUIRE(rf.feasible());
    // dropping the residual block of a feasible full witness leaves a reduced witness
    p.full_form = false;
    const CertificateProblem reduced = build(CertificateVariant::Thm1, data, p);
    Witness w = rf.feasibility.witness;
    w.erase("pe");
    CHECK(all_satisfied(verify_witness(reduced.layout, reduced.constraints, w)));
}

TEST_CASE("vector Halanay check agrees with its scalar pair") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> u(-3.0, 1.5);
    auto draw = [&]() { return std::pow(10.0, u(rng)); };
    int hurwitz = 0;
    for (int i = 0; i < 500; ++i) {
        const double delta = draw(), delta1 = draw(), alpha = draw(), beta0 = draw();
        const double q = 3.0 * draw();
        const double lambda = q + draw();
        const VectorHalanayCheck c = vector_halanay_matrix(delta, delta1, alpha, beta0, lambda, q);
        CHECK(c.hurwitz == c.inequality_pair);
        CHECK(c.M(0, 1) >= 0.0);
        CHECK(c.M(1, 0) >= 0.0);
        CHECK((c.P_delay.array() >= 0.0).all());
        const double ev = (c.M + c.P_delay).eigenvalues().real().maxCoeff();
        CHECK(c.dominant_eigenvalue == doctest::Approx(ev).epsilon(1e-9).scale(1.0));
        hurwitz += c.hurwitz ? 1 : 0;
    }
    CHECK(hurwitz > 50);
    CHECK(hurwitz < 450);
}

TEST_CASE("vector Halanay examples") {
    // decoupled: triangular, Hurwitz iff the tail diagonal is negative
    const VectorHalanayCheck dec = vector_halanay_matrix(1.0, 0.0, 1.0, 0.5, 3.4, 3.0);
    CHECK(dec.hurwitz == (-2 * 3.4 + 6.0 + 1.0 < 0.0));
    const VectorHalanayCheck ex = vector_halanay_matrix(0.07, 0.07, 1.0, 1e-3, 17.1176, 3.0);
    CHECK(ex.hurwitz);
    CHECK(ex.inequality_pair);
    // M + P with eigenvalues {-0.1, -3}
    VectorHalanayCheck c;
    c.M << -0.1, 0.0, 0.0, -3.0;
    c.P_delay.setZero();
    c.dominant_eigenvalue = -0.1;
    c.hurwitz = true;
    CHECK(vector_halanay_rate(c, 0.0) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(vector_halanay_rate(c, 1.0) == doctest::Approx(0.1).epsilon(1e-12));
    // delay lowers the rate once P couples the channels
    const VectorHalanayCheck k = vector_halanay_matrix(0.5, 0.2, 1.0, 0.5, 4.0, 3.0);
    REQUIRE(k.hurwitz);
    const double r0 = vector_halanay_rate(k, 0.0);
    CHECK(r0 == doctest::Approx(-k.dominant_eigenvalue).epsilon(1e-10));
    CHECK(vector_halanay_rate(k, 0.5) < r0);
}

TEST_CASE("classical Halanay rate") {
    CHECK(classical_halanay_rate(1.0, 1e-12, 0.3) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(classical_halanay_rate(1.0, 0.5, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
    const double d0 = classical_halanay_rate(0.9, 0.4, 0.25);
    CHECK(d0 == doctest::Approx(0.9 - 0.4 * std::exp(2 * d0 * 0.25)).epsilon(1e-12));
    CHECK(classical_halanay_rate(1.0, 1.0, 0.1) == 0.0);
}

TEST_CASE("delta1 scaling map") {
    const CertificateData data = q3_data(Wiring::InteriorInterior, 5);
    const CertificateProblem p = build(CertificateVariant::Thm1, data, params(0.07, 0.1));
    const CertificateProblem same = delta1_scaling_map(p, 1.0);
    CHECK(same.params.delta1 == p.params.delta1);
    const CertificateResult r = evaluate(p);
    REQUIRE(r.feasible());
    for (double gamma : {10.0, 0.1}) {
        const CertificateProblem q = delta1_scaling_map(p, gamma);
        CHECK(q.params.delta1 == doctest::Approx(gamma * p.params.delta1));
        const Witness mapped = delta1_scaling_witness(r.feasibility.witness, gamma);
        CHECK(mapped.at("P").isApprox(gamma * r.feasibility.witness.at("P")));
        CHECK(mapped.at("alpha") == r.feasibility.witness.at("alpha"));
        CHECK(all_satisfied(verify_witness(q.layout, q.constraints, mapped)));
    }
    // infeasible stays infeasible
    const CertificateProblem bad = build(CertificateVariant::Thm1, data, params(0.07, 0.5));
    CHECK_FALSE(evaluate(bad).feasible());
    CHECK_FALSE(evaluate(delta1_scaling_map(bad, 0.1)).feasible());
    CHECK_THROWS_AS((void)delta1_scaling_map(build(CertificateVariant::Rmk3, data, params(0.5, 0.1)), 2.0), Error);
}

TEST_CASE("boundary wirings build and solve") {
    for (CertificateVariant v : {CertificateVariant::Thm2, CertificateVariant::Thm3}) {
        const CertificateData data = q3_data(wiring_of(v), 6);
        CHECK(feasible(v, data, params(0.2, 0.02)));
    }
}

TEST_CASE("export carries a header") {
    const CertificateProblem p = build(CertificateVariant::Rmk3, q3_data(Wiring::InteriorInterior, 3), params(1.0, 0.1, 0.5));
    std::ostringstream os;
    export_certificate(os, p);
    const std::string s = os.str();
    CHECK(s.rfind("# variant rmk3", 0) == 0);
    CHECK(s.find("heatctl-lmi 1") != std::string::npos);
    CHECK(s.find("constraint Phi negative-definite") != std::string::npos);
}
