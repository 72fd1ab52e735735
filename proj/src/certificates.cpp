#include "heatctl/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include <Eigen/Eigenvalues>

#include "heatctl/error.hpp"

namespace heatctl {

using Eigen::Index;
using Eigen::MatrixXd;

std::string to_string(CertificateVariant v) {
    switch (v) {
        case CertificateVariant::Thm1: return "thm1";
        case CertificateVariant::Thm2: return "thm2";
        case CertificateVariant::Thm3: return "thm3";
        case CertificateVariant::Rmk3: return "rmk3";
        case CertificateVariant::Rmk4: return "rmk4";
        case CertificateVariant::Rmk5: return "rmk5";
    }
    return "unknown";
}

CertificateVariant variant_from_string(const std::string& text) {
    for (CertificateVariant v : all_variants()) {
        if (to_string(v) == text) return v;
    }
    throw Error(ErrorKind::InvalidArgument, "unknown certificate variant '" + text + "'");
}

bool is_vector(CertificateVariant v) noexcept {
    return v == CertificateVariant::Thm1 || v == CertificateVariant::Thm2 || v == CertificateVariant::Thm3;
}

Wiring wiring_of(CertificateVariant v) noexcept {
    switch (v) {
        case CertificateVariant::Thm1:
        case CertificateVariant::Rmk3: return Wiring::InteriorInterior;
        case CertificateVariant::Thm2:
        case CertificateVariant::Rmk4: return Wiring::InteriorBoundary;
        case CertificateVariant::Thm3:
        case CertificateVariant::Rmk5: return Wiring::BoundaryInterior;
    }
    return Wiring::InteriorInterior;
}

CertificateVariant counterpart(CertificateVariant v) noexcept {
    switch (v) {
        case CertificateVariant::Thm1: return CertificateVariant::Rmk3;
        case CertificateVariant::Thm2: return CertificateVariant::Rmk4;
        case CertificateVariant::Thm3: return CertificateVariant::Rmk5;
        case CertificateVariant::Rmk3: return CertificateVariant::Thm1;
        case CertificateVariant::Rmk4: return CertificateVariant::Thm2;
        case CertificateVariant::Rmk5: return CertificateVariant::Thm3;
    }
    return v;
}

const std::vector<CertificateVariant>& all_variants() {
    static const std::vector<CertificateVariant> v{CertificateVariant::Thm1, CertificateVariant::Thm2,
                                                   CertificateVariant::Thm3, CertificateVariant::Rmk3,
                                                   CertificateVariant::Rmk4, CertificateVariant::Rmk5};
    return v;
}

ClosedLoopMatrices closed_loop(const ModalSystem& system, const MatrixXd& L0, const MatrixXd& K0) {
    const Index n0 = static_cast<Index>(system.n0);
    const Index d = static_cast<Index>(system.d);
    if (L0.rows() != n0 || L0.cols() != d || K0.rows() != d || K0.cols() != n0) {
        throw Error(ErrorKind::InvalidArgument, "gain shapes must be L0: N0 x d and K0: d x N0");
    }
    ClosedLoopMatrices out;
    const MatrixXd& A0 = system.A0;
    out.F0 = MatrixXd::Zero(2 * n0, 2 * n0);
    out.F0.topLeftCorner(n0, n0) = A0 - system.B0 * K0;
    out.F0.topRightCorner(n0, n0) = L0 * system.C0;
    out.F0.bottomRightCorner(n0, n0) = A0 - L0 * system.C0;
    out.script_L0.resize(2 * n0, d);
    out.script_L0 << L0, -L0;
    out.script_B0 = MatrixXd::Zero(2 * n0, d);
    out.script_B0.topRows(n0) = system.B0;
    out.script_C0 = MatrixXd::Zero(d, 2 * n0);
    out.script_C0.leftCols(n0) = system.C0;
    out.script_K0 = MatrixXd::Zero(d, 2 * n0);
    out.script_K0.leftCols(n0) = K0;
    out.A1 = system.A1;
    out.B1 = system.B1;
    out.C1 = system.C1;
    return out;
}

CertificateData certificate_data(const ModalSystem& system, const MatrixXd& L0, const MatrixXd& K0) {
    CertificateData data;
    data.loop = closed_loop(system, L0, K0);
    data.weights = coupling_weights(system);
    data.lambda_Nplus1 = system.tail.lambda_Nplus1;
    data.q = system.q;
    data.n0 = static_cast<Index>(system.n0);
    data.d = static_cast<Index>(system.d);
    return data;
}

namespace {

MatrixXd eye(Index n) { return MatrixXd::Identity(n, n); }

MatrixXd scalar_matrix(double v) { return MatrixXd::Constant(1, 1, v); }

void check_params(const CertificateData& data, const CertificateParams& p) {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(p.delta) || !finite(p.delta1) || !finite(p.tau_y) || !finite(p.tau_u) || p.delta <= 0.0 ||
        p.delta1 <= 0.0 || p.tau_y < 0.0 || p.tau_u < 0.0) {
        throw Error(ErrorKind::InvalidArgument, "certificate needs delta, delta1 > 0 and tau >= 0");
    }
    if (!(data.weights.actuation > 0.0) || !(data.weights.sensing > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "coupling weights must be positive");
    }
    if (data.loop.F0.rows() != 2 * data.n0 || data.loop.script_B0.cols() != data.d) {
        throw Error(ErrorKind::InvalidArgument, "closed-loop data inconsistent with N0, d");
    }
}

}  // namespace

CertificateProblem build(CertificateVariant variant, const CertificateData& data, const CertificateParams& params) {
    check_params(data, params);
    CertificateProblem prob;
    prob.variant = variant;
    prob.data = data;
    prob.params = params;

    const ClosedLoopMatrices& cl = data.loop;
    const Index n = 2 * data.n0;
    const Index d = data.d;
    const Index r = cl.A1.rows();
    const bool vec = is_vector(variant);
    const bool full = params.full_form && r > 0;
    const double act = data.weights.actuation;
    const double sen = data.weights.sensing;
    const double delta = params.delta;
    const double delta1 = params.delta1;
    const double ey = prob.eps_y();
    const double eu = prob.eps_u();
    const double gap = data.lambda_Nplus1 - data.q;

    DecisionLayout& L = prob.layout;
    const AffineExpr P = AffineExpr::var(L, L.symmetric("P", n));
    const AffineExpr Sy = AffineExpr::var(L, L.symmetric("Sy", n));
    const AffineExpr Ry = AffineExpr::var(L, L.symmetric("Ry", n));
    const AffineExpr Gy = AffineExpr::var(L, L.full("Gy", n, n));
    const AffineExpr Su = AffineExpr::var(L, L.symmetric("Su", d));
    const AffineExpr Ru = AffineExpr::var(L, L.symmetric("Ru", d));
    const AffineExpr Gu = AffineExpr::var(L, L.full("Gu", d, d));
    AffineExpr s1, s2;  // (alpha, beta0) or (alpha1, alpha2)
    if (vec) {
        s1 = AffineExpr::var(L, L.scalar("alpha"));
        s2 = AffineExpr::var(L, L.scalar("beta0"));
    } else {
        s1 = AffineExpr::var(L, L.scalar("alpha1"));
        s2 = AffineExpr::var(L, L.scalar("alpha2"));
    }
    AffineExpr pe;
    if (full) pe = AffineExpr::var(L, L.scalar("pe"));

    const MatrixXd& F0 = cl.F0;
    const MatrixXd& LL = cl.script_L0;
    const MatrixXd& BB = cl.script_B0;
    const MatrixXd& KK = cl.script_K0;
    const MatrixXd LC = LL * cl.script_C0;
    const MatrixXd KKt = KK.transpose();

    auto& cons = prob.constraints;

    if (vec) {
        BlockMatrix b({n, d});
        b.set(0, 0, -P);
        b.set(0, 1, AffineExpr(KKt));
        b.set(1, 1, scaled(s2, -eye(d) / act));
        cons.push_back(make_constraint("LMI11abc", Sense::NegativeDefinite, b));
    }
    {
        BlockMatrix gy({n, n});
        gy.set(0, 0, Ry);
        gy.set(0, 1, Gy);
        gy.set(1, 1, Ry);
        cons.push_back(make_constraint("G1G2y", Sense::PositiveSemidefinite, gy));
        BlockMatrix gu({d, d});
        gu.set(0, 0, Ru);
        gu.set(0, 1, Gu);
        gu.set(1, 1, Ru);
        cons.push_back(make_constraint("G1G2u", Sense::PositiveSemidefinite, gu));
    }
    if (vec) {
        cons.push_back(make_constraint("scalar", Sense::NegativeDefinite,
                                       AffineExpr(scalar_matrix(-2.0 * (gap + delta))) + s1));
        BlockMatrix h({1, 1});
        h.set(0, 0, scaled(s1, scalar_matrix(-2.0 * gap)) + scaled(s2, scalar_matrix(delta1 / delta)));
        h.set(0, 1, s1);
        h.set(1, 1, AffineExpr(scalar_matrix(-1.0)));
        cons.push_back(make_constraint("Hurwitz2", Sense::NegativeDefinite, h));
    } else {
        BlockMatrix h({1, 1, 1});
        h.set(0, 0, AffineExpr(scalar_matrix(-gap + delta)));
        h.set(0, 1, AffineExpr(scalar_matrix(1.0)));
        h.set(0, 2, AffineExpr(scalar_matrix(1.0)));
        h.set(1, 1, -2.0 * s1);
        h.set(2, 2, -2.0 * s2);
        cons.push_back(make_constraint("cLMI1", Sense::NegativeDefinite, h));
    }

    // eta = (X0, zeta, nu_y, theta_y, K0 nu_u, K0 theta_u [, e^{N-N0}])
    AffineExpr Om0 = P * F0 + F0.transpose() * P + (1.0 - ey) * Sy + (1.0 - eu) * (KKt * Su * KK);
    AffineExpr Om1 = ey * Sy - P * LC;
    const AffineExpr Om2 = P * BB + eu * (KKt * Su);
    AffineExpr Omy00 = -ey * (Sy + Ry);
    AffineExpr Omu00 = -eu * (Su + Ru);
    if (vec) {
        Om0 += 2.0 * delta * P;
    } else {
        Om0 += 2.0 * (delta - delta1) * P + scaled(s1, act * KKt * KK);
        Om1 += 2.0 * delta1 * P;
        Omy00 -= 2.0 * delta1 * P;
        Omu00 += scaled(s2, act * eye(d));
    }

    std::vector<Index> sizes{n, d, n, n, d, d};
    if (full) sizes.push_back(r);
    MatrixXd Lam0 = MatrixXd::Zero(n, n + d + 2 * n + 2 * d + (full ? r : 0));
    Lam0.block(0, 0, n, n) = F0;
    Lam0.block(0, n, n, d) = LL;
    Lam0.block(0, n + d, n, n) = -LC;
    Lam0.block(0, 3 * n + d, n, d) = BB;
    const AffineExpr W = params.tau_y * params.tau_y * Ry + params.tau_u * params.tau_u * (KKt * Ru * KK);

    auto main_block = [&](double tau_residual) {
        BlockMatrix phi(sizes);
        phi.set(0, 0, Om0);
        phi.set(0, 1, P * LL);
        phi.set(0, 2, Om1);
        phi.set(0, 3, ey * Sy);
        phi.set(0, 4, Om2);
        phi.set(0, 5, eu * (KKt * Su));
        phi.set(1, 1, AffineExpr(-2.0 * delta1 / sen * eye(d)));
        phi.set(2, 2, Omy00);
        phi.set(2, 3, -ey * (Sy + Gy));
        phi.set(3, 3, -ey * (Sy + Ry));
        phi.set(4, 4, Omu00);
        phi.set(4, 5, -eu * (Su + Gu));
        phi.set(5, 5, -eu * (Su + Ru));
        MatrixXd Lam = Lam0;
        if (full) {
            const MatrixXd decay = (-cl.A1.diagonal().array() * tau_residual).exp().matrix().asDiagonal();
            const MatrixXd coupling = LL * cl.C1 * decay;
            phi.set(0, 6, P * coupling);
            phi.set(6, 6, scaled(pe, 2.0 * (cl.A1 + delta * eye(r))));
            Lam.rightCols(r) = coupling;
        }
        return phi.assemble() + Lam.transpose() * W * Lam;
    };

    if (full) {
        cons.push_back(make_constraint("Phi@0", Sense::NegativeDefinite, main_block(0.0)));
        cons.push_back(make_constraint("Phi@tau", Sense::NegativeDefinite, main_block(params.tau_y)));
    } else {
        cons.push_back(make_constraint("Phi", Sense::NegativeDefinite, main_block(0.0)));
    }
    return prob;
}

VectorHalanayCheck vector_halanay_matrix(double delta, double delta1, double alpha, double beta0, double lambda_Nplus1,
                                         double q) {
    if (!(delta > 0.0) || !(delta1 >= 0.0) || !(alpha > 0.0) || !(beta0 >= 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "vector Halanay scalars must be positive");
    }
    VectorHalanayCheck c;
    const double beta = beta0 / alpha;
    c.M << -2.0 * delta, 0.0, 0.0, -2.0 * lambda_Nplus1 + 2.0 * q + alpha;
    c.P_delay << 0.0, 2.0 * delta1, beta, 0.0;
    const Eigen::Matrix2d S = c.M + c.P_delay;
    // real spectrum: off-diagonal product is nonnegative
    const double tr = S.trace();
    const double det = S.determinant();
    const double disc = std::max(0.0, tr * tr / 4.0 - det);
    c.dominant_eigenvalue = tr / 2.0 + std::sqrt(disc);
    c.hurwitz = c.dominant_eigenvalue < 0.0;
    const double gap = lambda_Nplus1 - q;
    const bool first = -2.0 * (gap + delta) + alpha < 0.0;
    Eigen::Matrix2d H;
    H << -2.0 * alpha * gap + delta1 / delta * beta0, alpha, alpha, -1.0;
    const bool second = H.trace() < 0.0 && H.determinant() > 0.0;
    c.inequality_pair = first && second;
    return c;
}

double vector_halanay_rate(const VectorHalanayCheck& check, double tau) {
    if (!check.hurwitz) return 0.0;
    auto dominant = [&](double rate) {
        const Eigen::Matrix2d S = check.M + rate * Eigen::Matrix2d::Identity() + std::exp(rate * tau) * check.P_delay;
        const double tr = S.trace();
        return tr / 2.0 + std::sqrt(std::max(0.0, tr * tr / 4.0 - S.determinant()));
    };
    double lo = 0.0;
    double hi = -check.dominant_eigenvalue;
    for (int i = 0; i < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        (dominant(mid) <= 0.0 ? lo : hi) = mid;
    }
    return lo;
}

double classical_halanay_rate(double delta, double delta1, double tau) {
    if (!(delta > 0.0) || !(delta1 >= 0.0) || !(tau >= 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "classical Halanay needs delta > 0, delta1 >= 0, tau >= 0");
    }
    if (delta1 >= delta) return 0.0;
    auto f = [&](double x) { return x - delta + delta1 * std::exp(2.0 * x * tau); };
    double lo = 0.0;
    double hi = delta;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * delta; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

DecayReport decay_report(const CertificateProblem& problem, const Witness& witness) {
    const CertificateParams& p = problem.params;
    DecayReport out;
    if (is_vector(problem.variant)) {
        const double alpha = witness.at("alpha")(0, 0);
        const double beta0 = witness.at("beta0")(0, 0);
        const VectorHalanayCheck c =
            vector_halanay_matrix(p.delta, p.delta1, alpha, beta0, problem.data.lambda_Nplus1, problem.data.q);
        out.v_rate = vector_halanay_rate(c, std::max(p.tau_y, p.tau_u));
        out.delta0 = 0.5 * out.v_rate;
        out.halanay = c;
    } else {
        out.delta0 = classical_halanay_rate(p.delta, p.delta1, p.tau_y);
        out.v_rate = 2.0 * out.delta0;
    }
    return out;
}

CertificateResult evaluate(const CertificateProblem& problem, const LmiOptions& options) {
    CertificateResult out;
    out.feasibility = solve_feasibility(problem.layout, problem.constraints, options);
    if (out.feasibility.feasible()) out.decay = decay_report(problem, out.feasibility.witness);
    return out;
}

CertificateProblem delta1_scaling_map(const CertificateProblem& problem, double gamma) {
    if (!is_vector(problem.variant)) {
        throw Error(ErrorKind::InvalidArgument, "the delta1 scaling map applies to vector variants only");
    }
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw Error(ErrorKind::InvalidArgument, "gamma must be positive");
    CertificateParams p = problem.params;
    p.delta1 *= gamma;
    return build(problem.variant, problem.data, p);
}

Witness delta1_scaling_witness(const Witness& witness, double gamma) {
    Witness out = witness;
    for (auto& [name, value] : out) {
        if (name == "beta0") {
            value /= gamma;
        } else if (name != "alpha") {
            value *= gamma;
        }
    }
    return out;
}

void export_certificate(std::ostream& out, const CertificateProblem& problem) {
    const CertificateParams& p = problem.params;
    out << std::setprecision(17);
    out << "# variant " << to_string(problem.variant) << "\n";
    out << "# delta " << p.delta << " delta1 " << p.delta1 << " tau_y " << p.tau_y << " tau_u " << p.tau_u
        << " full_form " << (p.full_form ? 1 : 0) << "\n";
    out << "# N0 " << problem.data.n0 << " d " << problem.data.d << " lambda_Nplus1 " << problem.data.lambda_Nplus1
        << " q " << problem.data.q << " actuation " << problem.data.weights.actuation << " sensing "
        << problem.data.weights.sensing << "\n";
    export_problem(out, problem.layout, problem.constraints);
}

}  // namespace heatctl
