#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "heatctl/error.hpp"
#include "heatctl/lmi.hpp"

using namespace heatctl;
using Eigen::MatrixXd;

TEST_CASE("layout bookkeeping") {
    DecisionLayout L;
    const Variable P = L.symmetric("P", 3);
    const Variable G = L.full("G", 2, 3);
    const Variable a = L.scalar("a");
    CHECK(L.dimension() == 6 + 6 + 1);
    CHECK(L.spec(G).offset == 6);
    CHECK(L.find("a").id == a.id);
    CHECK_THROWS_AS(L.scalar("a"), Error);
    CHECK_THROWS_AS(L.add("S", 2, 3, VarStructure::Symmetric), Error);
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(L.dimension(), 1.0, 13.0);
    const Witness w = L.unpack(x);
    CHECK(w.at("P").isApprox(w.at("P").transpose()));
    CHECK((L.pack(w) - x).norm() == 0.0);
    CHECK(L.basis_matrix(P, 1)(0, 1) == 1.0);
    CHECK(L.basis_matrix(P, 1)(1, 0) == 1.0);
}

TEST_CASE("coefficients reproduce direct evaluation") {
    std::mt19937 rng(7);
    std::normal_distribution<double> nd;
    auto rnd = [&](Eigen::Index r, Eigen::Index c) { return MatrixXd(MatrixXd::NullaryExpr(r, c, [&]() { return nd(rng); })); };
    DecisionLayout L;
    const Variable P = L.symmetric("P", 3);
    const Variable G = L.full("G", 3, 2);
    const Variable a = L.scalar("a", false);
    const MatrixXd A = rnd(3, 3), B = rnd(2, 3), M = rnd(3, 3);
    const AffineExpr e = AffineExpr::var(L, P) * A + A.transpose() * AffineExpr::var(L, P) +
                         AffineExpr::var(L, G) * B + (AffineExpr::var(L, G) * B).transpose() +
                         scaled(AffineExpr::var(L, a), M + M.transpose()) + AffineExpr(MatrixXd::Identity(3, 3));
    const Eigen::VectorXd x = rnd(L.dimension(), 1);
    const Witness w = L.unpack(x);
    MatrixXd direct = e.constant();
    for (const auto& [idx, m] : e.coefficients(L)) direct += x(idx) * m;
    CHECK((direct - e.evaluate(L, w)).norm() < 1e-12);
    const MatrixXd ref = w.at("P") * A + A.transpose() * w.at("P") + w.at("G") * B + (w.at("G") * B).transpose() +
                         w.at("a")(0, 0) * (M + M.transpose()) + MatrixXd::Identity(3, 3);
    CHECK((ref - e.evaluate(L, w)).norm() < 1e-12);
}

TEST_CASE("trivial feasibility verdicts") {
    {
        DecisionLayout L;
        const Variable x = L.scalar("x");
        const auto r = solve_feasibility(L, {make_constraint("neg", Sense::NegativeDefinite, -AffineExpr::var(L, x))});
        CHECK(r.status == FeasibilityStatus::Feasible);
        CHECK(r.witness.at("x")(0, 0) > 0.0);
    }
    {
        DecisionLayout L;
        const auto r = solve_feasibility(L, {make_constraint("one", Sense::NegativeDefinite, AffineExpr(MatrixXd::Ones(1, 1)))});
        CHECK(r.status == FeasibilityStatus::Infeasible);
    }
    {
        DecisionLayout L;
        const Variable x = L.scalar("x", false);
        // x < -1 and x > 1
        const auto r = solve_feasibility(
            L, {make_constraint("a", Sense::NegativeDefinite, AffineExpr::var(L, x) + AffineExpr(MatrixXd::Ones(1, 1))),
                make_constraint("b", Sense::NegativeDefinite, AffineExpr(MatrixXd::Ones(1, 1)) - AffineExpr::var(L, x))});
        CHECK(r.status == FeasibilityStatus::Infeasible);
    }
}

TEST_CASE("Lyapunov inequality for a Hurwitz matrix") {
    MatrixXd A(2, 2);
    A << -1.0, 3.0, 0.0, -2.0;
    DecisionLayout L;
    const Variable P = L.symmetric("P", 2);
    const AffineExpr p = AffineExpr::var(L, P);
    const std::vector<AffineConstraint> cons{make_constraint("lyap", Sense::NegativeDefinite, p * A + A.transpose() * p)};
    const auto r = solve_feasibility(L, cons);
    REQUIRE(r.status == FeasibilityStatus::Feasible);
    const auto margins = verify_witness(L, with_structural_constraints(L, cons), r.witness);
    for (const auto& m : margins) CHECK(m.margin > 0.0);

    // the Lyapunov equation solution PA + A^T P = -I is an independent witness
    MatrixXd big = MatrixXd::Zero(4, 4);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            MatrixXd E = MatrixXd::Zero(2, 2);
            E(i, j) = 1.0;
            const MatrixXd img = E * A + A.transpose() * E;
            big.col(2 * j + i) = Eigen::Map<const Eigen::VectorXd>(img.data(), 4);
        }
    }
    const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(MatrixXd::Identity(2, 2).eval().data(), 4);
    const Eigen::VectorXd vp = big.fullPivLu().solve(rhs);
    const MatrixXd Plyap = Eigen::Map<const MatrixXd>(vp.data(), 2, 2);
    CHECK(all_satisfied(verify_witness(L, with_structural_constraints(L, cons), {{"P", Plyap}})));
}

TEST_CASE("unstable matrix has no Lyapunov certificate") {
    MatrixXd A(2, 2);
    A << 0.5, 1.0, 0.0, -2.0;
    DecisionLayout L;
    const Variable P = L.symmetric("P", 2);
    const AffineExpr p = AffineExpr::var(L, P);
    const auto r = solve_feasibility(L, {make_constraint("lyap", Sense::NegativeDefinite, p * A + A.transpose() * p)});
    CHECK(r.status == FeasibilityStatus::Infeasible);
}

TEST_CASE("minimization recovers the largest eigenvalue") {
    std::mt19937 rng(3);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 5; ++trial) {
        MatrixXd S = MatrixXd::NullaryExpr(5, 5, [&]() { return nd(rng); });
        S = (S + S.transpose()).eval();
        DecisionLayout L;
        const Variable t = L.scalar("t", false);
        // S - t I <= 0, minimize t
        const auto r = solve_minimize(
            L, {make_constraint("cap", Sense::NegativeSemidefinite, AffineExpr(S) - scaled(AffineExpr::var(L, t), MatrixXd::Identity(5, 5)))},
            Eigen::VectorXd::Ones(1));
        REQUIRE(r.feasible());
        const double lmax = Eigen::SelfAdjointEigenSolver<MatrixXd>(S).eigenvalues()(4);
        CHECK(r.witness.at("t")(0, 0) == doctest::Approx(lmax).epsilon(1e-6));
    }
}

TEST_CASE("scalar Schur complement: [[-1,k],[k,-beta]] < 0 iff beta > k^2") {
    for (double k = -2.0; k <= 2.0; k += 0.25) {
        for (double beta = 0.05; beta <= 5.0; beta += 0.15) {
            MatrixXd m(2, 2);
            m << -1.0, k, k, -beta;
            const bool bordered = Eigen::SelfAdjointEigenSolver<MatrixXd>(m).eigenvalues()(1) < 0.0;
            const MatrixXd red = schur_reduce(m, 0, 1);
            CHECK(bordered == (red(0, 0) < 0.0));
            CHECK(bordered == (beta > k * k));
        }
    }
    MatrixXd singular = MatrixXd::Zero(2, 2);
    CHECK_THROWS_AS((void)schur_reduce(singular, 0, 1), Error);
}

TEST_CASE("symbolic Schur reduction with a variable-free pivot row") {
    DecisionLayout L;
    const Variable beta = L.scalar("beta");
    BlockMatrix bm({1, 1, 2});
    bm.set(0, 0, AffineExpr(-MatrixXd::Ones(1, 1)));
    bm.set(0, 1, AffineExpr(0.7 * MatrixXd::Ones(1, 1)));
    bm.set(1, 1, -AffineExpr::var(L, beta));
    bm.set(2, 2, AffineExpr(-MatrixXd::Identity(2, 2)));
    const AffineConstraint red = schur_reduce("red", Sense::NegativeDefinite, bm, 0);
    const auto r = solve_feasibility(L, {red});
    REQUIRE(r.feasible());
    CHECK(r.witness.at("beta")(0, 0) > 0.49);
    const auto full = verify_witness(L, {make_constraint("full", Sense::NegativeDefinite, bm)}, r.witness);
    CHECK(all_satisfied(full));
    // block-diagonal: eliminating block 2 leaves the rest unchanged
    BlockMatrix diag({1, 2});
    diag.set(0, 0, -AffineExpr::var(L, beta));
    diag.set(1, 1, AffineExpr(-2.0 * MatrixXd::Identity(2, 2)));
    const AffineConstraint kept = schur_reduce("kept", Sense::NegativeDefinite, diag, 1);
    Witness w{{"beta", MatrixXd::Constant(1, 1, 0.3)}};
    CHECK(kept.expr.evaluate(L, w)(0, 0) == doctest::Approx(-0.3));
    BlockMatrix varpivot({1, 1});
    varpivot.set(0, 0, -AffineExpr::var(L, beta));
    CHECK_THROWS_AS((void)schur_reduce("bad", Sense::NegativeDefinite, varpivot, 0), Error);
}

TEST_CASE("bordered vs complemented beta inequality on random samples") {
    // [-P, K^T; K, -beta/w I] < 0  <=>  (w/beta) K^T K < P
    std::mt19937 rng(11);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(0.05, 3.0);
    int agree = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2, d = 1;
        MatrixXd R = MatrixXd::NullaryExpr(n, n, [&]() { return nd(rng); });
        const MatrixXd P = R * R.transpose() + 0.1 * MatrixXd::Identity(n, n);
        const MatrixXd K = MatrixXd::NullaryExpr(d, n, [&]() { return nd(rng); });
        const double beta = ud(rng), w = ud(rng);
        MatrixXd big(n + d, n + d);
        big << -P, K.transpose(), K, -(beta / w) * MatrixXd::Identity(d, d);
        const bool bordered = Eigen::SelfAdjointEigenSolver<MatrixXd>(big).eigenvalues().maxCoeff() < 0.0;
        const MatrixXd reduced = (w / beta) * K.transpose() * K - P;
        const bool complemented = Eigen::SelfAdjointEigenSolver<MatrixXd>(reduced).eigenvalues().maxCoeff() < 0.0;
        const bool schur = Eigen::SelfAdjointEigenSolver<MatrixXd>(schur_reduce(big, n, d)).eigenvalues().maxCoeff() < 0.0;
        if (bordered == complemented && bordered == schur) ++agree;
    }
    CHECK(agree == 200);
}

TEST_CASE("witness round trip and violated witnesses") {
    DecisionLayout L;
    const Variable P = L.symmetric("P", 2);
    const std::vector<AffineConstraint> cons{make_constraint("negP", Sense::NegativeDefinite, -AffineExpr::var(L, P))};
    const auto m = verify_witness(L, cons, {{"P", MatrixXd::Identity(2, 2)}});
    CHECK(m[0].margin == doctest::Approx(1.0));
    CHECK(m[0].satisfied);
    const auto bad = verify_witness(L, cons, {{"P", -MatrixXd::Identity(2, 2)}});
    CHECK(bad[0].margin < 0.0);
    CHECK_FALSE(bad[0].satisfied);
    CHECK_THROWS_AS((void)verify_witness(L, cons, {}), Error);
}

TEST_CASE("scaling a witness preserves homogeneous verdicts") {
    MatrixXd A(2, 2);
    A << -1.0, 2.0, -0.5, -0.3;
    DecisionLayout L;
    const Variable P = L.symmetric("P", 2);
    const AffineExpr p = AffineExpr::var(L, P);
    const auto cons = with_structural_constraints(L, {make_constraint("lyap", Sense::NegativeDefinite, p * A + A.transpose() * p)});
    const auto r = solve_feasibility(L, cons);
    REQUIRE(r.feasible());
    for (double g : {1e-3, 0.5, 10.0, 1e4}) {
        Witness w = r.witness;
        w["P"] *= g;
        CHECK(all_satisfied(verify_witness(L, cons, w)));
    }
}

TEST_CASE("text export") {
    DecisionLayout L;
    const Variable P = L.symmetric("P", 2);
    std::ostringstream os;
    export_problem(os, L, {make_constraint("c", Sense::NegativeDefinite, -AffineExpr::var(L, P) + AffineExpr(MatrixXd::Identity(2, 2)))});
    const std::string s = os.str();
    CHECK(s.find("heatctl-lmi 1") == 0);
    CHECK(s.find("P 2 2 symmetric-pd 0 3") != std::string::npos);
    CHECK(s.find("constraint c negative-definite 2") != std::string::npos);
    CHECK(s.find("-1 0 0 1") != std::string::npos);
}
