#include "heatctl/gains.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "heatctl/error.hpp"
#include "heatctl/parallel.hpp"

namespace heatctl {

using Eigen::Index;
using Eigen::MatrixXd;

std::string to_string(GainRoute r) {
    switch (r) {
        case GainRoute::Basic: return "basic";
        case GainRoute::TwoStep: return "two-step";
        case GainRoute::Imported: return "imported";
    }
    return "unknown";
}

GainRoute gain_route_from_string(const std::string& text) {
    for (GainRoute r : {GainRoute::Basic, GainRoute::TwoStep, GainRoute::Imported}) {
        if (to_string(r) == text) return r;
    }
    throw Error(ErrorKind::InvalidArgument, "unknown gain route '" + text + "'");
}

namespace {

MatrixXd eye(Index n) { return MatrixXd::Identity(n, n); }

void require_pair(const MatrixXd& A, const MatrixXd& C) {
    if (A.rows() != A.cols()) throw Error(ErrorKind::InvalidArgument, "A0 must be square");
    if (C.cols() != A.rows()) throw Error(ErrorKind::InvalidArgument, "C0 must have N0 columns");
    if (!A.allFinite() || !C.allFinite()) throw Error(ErrorKind::InvalidArgument, "non-finite system matrix");
}

void require_delta(double delta) {
    if (!std::isfinite(delta) || delta <= 0.0) throw Error(ErrorKind::InvalidArgument, "delta must be positive");
}

// Observer inequality with one of (P, L) fixed. Both sides null means the
// variable change Y = P L.
struct ObserverForm {
    const MatrixXd* P{};
    const MatrixXd* L{};
};

AffineConstraint observer_constraint(const DecisionLayout& layout, const MatrixXd& A, const MatrixXd& C, double delta,
                                     std::optional<double> border, ObserverForm form) {
    const Index n = A.rows();
    const Index d = C.rows();
    AffineExpr top;
    AffineExpr side;
    if (form.P != nullptr) {
        const MatrixXd& P = *form.P;
        const AffineExpr PLC = P * AffineExpr::var(layout, layout.find("L")) * C;
        top = AffineExpr(MatrixXd(P * A + A.transpose() * P + 2.0 * delta * P)) - PLC - PLC.transpose();
        side = -(P * AffineExpr::var(layout, layout.find("L")));
    } else if (form.L != nullptr) {
        const MatrixXd F = A - *form.L * C;
        const AffineExpr P = AffineExpr::var(layout, layout.find("P"));
        top = P * F + F.transpose() * P + 2.0 * delta * P;
        side = -(P * *form.L);
    } else {
        const AffineExpr P = AffineExpr::var(layout, layout.find("P"));
        const AffineExpr YC = AffineExpr::var(layout, layout.find("Y")) * C;
        top = P * A + A.transpose() * P - YC - YC.transpose() + 2.0 * delta * P;
        side = -AffineExpr::var(layout, layout.find("Y"));
    }
    if (!border) return make_constraint("observer", Sense::NegativeDefinite, top);
    BlockMatrix bm({n, d});
    bm.set(0, 0, top);
    bm.set(0, 1, side);
    bm.set(1, 1, AffineExpr(MatrixXd(-2.0 * delta / *border * eye(d))));
    return make_constraint("observer", Sense::NegativeDefinite, bm);
}

// P for a fixed L, or nullopt.
std::optional<std::pair<MatrixXd, std::vector<ConstraintMargin>>> lyapunov_for_gain(
    const MatrixXd& A, const MatrixXd& C, const MatrixXd& L, double delta, std::optional<double> border,
    const LmiOptions& opt) {
    DecisionLayout layout;
    layout.symmetric("P", A.rows());
    const std::vector<AffineConstraint> cons{observer_constraint(layout, A, C, delta, border, {nullptr, &L})};
    const FeasibilityResult r = solve_feasibility(layout, cons, opt);
    if (!r.feasible()) return std::nullopt;
    return std::make_pair(r.witness.at("P"), r.margins);
}

// Smallest ||L||_F for a fixed P.
std::optional<MatrixXd> min_norm_gain(const MatrixXd& A, const MatrixXd& C, const MatrixXd& P, double delta,
                                      std::optional<double> border, const LmiOptions& opt) {
    const Index n = A.rows();
    const Index d = C.rows();
    DecisionLayout layout;
    const Variable T = layout.symmetric("T", d, false);
    const Variable L = layout.full("L", n, d);
    BlockMatrix bound({d, n});
    bound.set(0, 0, AffineExpr::var(layout, T));
    bound.set(0, 1, AffineExpr::var(layout, L).transpose());
    bound.set(1, 1, AffineExpr(eye(n)));
    const std::vector<AffineConstraint> cons{observer_constraint(layout, A, C, delta, border, {&P, nullptr}),
                                             make_constraint("norm", Sense::PositiveSemidefinite, bound)};
    Eigen::VectorXd objective = Eigen::VectorXd::Zero(layout.dimension());
    const VariableSpec& ts = layout.spec(T);
    for (Index e = 0; e < ts.free; ++e) objective(ts.offset + e) = layout.basis_matrix(T, e).trace();
    const FeasibilityResult r = solve_minimize(layout, cons, objective, opt);
    if (!r.feasible()) return std::nullopt;
    return r.witness.at("L");
}

}  // namespace

ObserverDesign design_observer_lmi(const MatrixXd& A, const MatrixXd& C, double delta, std::optional<double> border_weight,
                                   const GainDesignOptions& options) {
    require_pair(A, C);
    require_delta(delta);
    if (border_weight && !(*border_weight > 0.0 && std::isfinite(*border_weight))) {
        throw Error(ErrorKind::InvalidArgument, "border weight must be positive");
    }
    DecisionLayout layout;
    layout.symmetric("P", A.rows());
    layout.full("Y", A.rows(), C.rows());
    const std::vector<AffineConstraint> cons{observer_constraint(layout, A, C, delta, border_weight, {})};
    const FeasibilityResult start = solve_feasibility(layout, cons, options.lmi);
    if (!start.feasible()) {
        throw Error(ErrorKind::DesignInfeasible,
                    "observer inequality infeasible at delta = " + std::to_string(delta) + " (" +
                        to_string(start.status) + ")");
    }
    MatrixXd P = start.witness.at("P");
    MatrixXd L = P.llt().solve(start.witness.at("Y"));
    double norm = L.norm();
    for (int sweep = 0; sweep < options.refinement_sweeps; ++sweep) {
        const std::optional<MatrixXd> Lnext = min_norm_gain(A, C, P, delta, border_weight, options.lmi);
        if (!Lnext || Lnext->norm() > norm) break;
        const auto Pnext = lyapunov_for_gain(A, C, *Lnext, delta, border_weight, options.lmi);
        if (!Pnext) break;
        const double moved = norm - Lnext->norm();
        L = *Lnext;
        P = Pnext->first;
        norm = L.norm();
        if (moved <= options.refinement_tol * std::max(1.0, norm)) break;
    }
    const auto final_p = lyapunov_for_gain(A, C, L, delta, border_weight, options.lmi);
    if (!final_p) throw Error(ErrorKind::InternalError, "refined observer gain lost its certificate");
    DecisionLayout check;
    check.symmetric("P", A.rows());
    const std::vector<AffineConstraint> vc =
        with_structural_constraints(check, {observer_constraint(check, A, C, delta, border_weight, {nullptr, &L})});
    ObserverDesign out;
    out.L = L;
    out.P = final_p->first;
    out.margins = verify_witness(check, vc, {{"P", out.P}}, 0.0, 0.0);
    if (!all_satisfied(out.margins)) throw Error(ErrorKind::InternalError, "observer certificate failed re-verification");
    return out;
}

GainSet design_basic(const MatrixXd& A0, const MatrixXd& B0, const MatrixXd& C0, double delta,
                     const GainDesignOptions& options) {
    require_pair(A0, C0);
    if (B0.rows() != A0.rows() || B0.cols() != C0.rows()) {
        throw Error(ErrorKind::InvalidArgument, "B0 must be N0 x d with the same d as C0");
    }
    const ObserverDesign obs = design_observer_lmi(A0, C0, delta, std::nullopt, options);
    const ObserverDesign dual = design_observer_lmi(A0.transpose(), B0.transpose(), delta, std::nullopt, options);
    const MatrixXd K0 = dual.L.transpose();
    return verify_basic(A0, B0, C0, obs.L, K0, delta, options.lmi);
}

ObserverDesign design_observer_step1(const MatrixXd& A0, const MatrixXd& C0, double delta, double c_weight,
                                     const GainDesignOptions& options) {
    GainDesignOptions central = options;
    central.refinement_sweeps = 0;
    return design_observer_lmi(A0, C0, delta, c_weight, central);
}

GainSet verify_basic(const MatrixXd& A0, const MatrixXd& B0, const MatrixXd& C0, const MatrixXd& L0, const MatrixXd& K0,
                     double delta, const LmiOptions& options) {
    require_pair(A0, C0);
    require_delta(delta);
    if (L0.rows() != A0.rows() || L0.cols() != C0.rows() || K0.rows() != B0.cols() || K0.cols() != A0.rows()) {
        throw Error(ErrorKind::InvalidArgument, "gain shapes do not match (N0, d)");
    }
    const Index n = A0.rows();
    DecisionLayout layout;
    const Variable Po = layout.symmetric("Po", n);
    const Variable Pc = layout.symmetric("Pc", n);
    const MatrixXd Fo = A0 - L0 * C0;
    const MatrixXd Fc = A0 - B0 * K0;
    const AffineExpr po = AffineExpr::var(layout, Po);
    const AffineExpr pc = AffineExpr::var(layout, Pc);
    const std::vector<AffineConstraint> cons{
        make_constraint("observer", Sense::NegativeDefinite, po * Fo + Fo.transpose() * po + 2.0 * delta * po),
        make_constraint("controller", Sense::NegativeSemidefinite, pc * Fc + Fc.transpose() * pc + 2.0 * delta * pc)};
    const FeasibilityResult r = solve_feasibility(layout, cons, options);
    if (!r.feasible()) {
        throw Error(ErrorKind::DesignInfeasible, std::string("gains do not satisfy the Lyapunov pair (") +
                                                     to_string(r.status) + ")");
    }
    GainSet g;
    g.L0 = L0;
    g.K0 = K0;
    g.delta = delta;
    g.route = GainRoute::Basic;
    g.certificates = r.witness;
    // the controller inequality is certified strictly as well
    std::vector<AffineConstraint> strict_cons = cons;
    strict_cons[1].sense = Sense::NegativeDefinite;
    g.margins = verify_witness(layout, with_structural_constraints(layout, strict_cons), r.witness, 0.0, 0.0);
    return g;
}

FeasibilityResult verify_observer_step1(const MatrixXd& A0, const MatrixXd& C0, const MatrixXd& L0, double delta,
                                        double c_weight, const LmiOptions& options) {
    require_pair(A0, C0);
    require_delta(delta);
    if (L0.rows() != A0.rows() || L0.cols() != C0.rows()) throw Error(ErrorKind::InvalidArgument, "L0 must be N0 x d");
    DecisionLayout layout;
    layout.symmetric("P", A0.rows());
    return solve_feasibility(layout, {observer_constraint(layout, A0, C0, delta, c_weight, {nullptr, &L0})}, options);
}

// ---------------------------------------------------------------- step 2

ControllerStep2Problem controller_step2_problem(const ControllerStep2Data& data, const std::optional<MatrixXd>& fixed_K,
                                                std::optional<double> fixed_alpha) {
    require_pair(data.A0, data.C0);
    require_delta(data.delta);
    const Index n = data.A0.rows();
    const Index d = data.C0.rows();
    if (data.B0.rows() != n || data.B0.cols() != d || data.L0.rows() != n || data.L0.cols() != d) {
        throw Error(ErrorKind::InvalidArgument, "B0 and L0 must be N0 x d");
    }
    if (!(data.delta1 > 0.0) || !(data.b_weight > 0.0) || !(data.c_weight > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "delta1 and the tail weights must be positive");
    }
    if (fixed_K && (fixed_K->rows() != d || fixed_K->cols() != n)) throw Error(ErrorKind::InvalidArgument, "K0 must be d x N0");

    ControllerStep2Problem p;
    DecisionLayout& layout = p.layout;
    const Variable Qz = layout.symmetric("Qz", n);
    const Variable Pe = layout.symmetric("Pe", n);
    std::optional<Variable> Yz;
    if (!fixed_K) Yz = layout.full("Yz", d, n);
    std::optional<Variable> alpha;
    if (!fixed_alpha) alpha = layout.scalar("alpha");
    const Variable beta0 = layout.scalar("beta0");

    const AffineExpr q = AffineExpr::var(layout, Qz);
    const AffineExpr pe = AffineExpr::var(layout, Pe);
    const AffineExpr yz = fixed_K ? *fixed_K * q : AffineExpr::var(layout, *Yz);
    const AffineExpr b0 = AffineExpr::var(layout, beta0);
    const auto alpha_times = [&](const MatrixXd& m) {
        return alpha ? scaled(AffineExpr::var(layout, *alpha), m) : AffineExpr(MatrixXd(*fixed_alpha * m));
    };

    BlockMatrix gain({n, d});
    gain.set(0, 0, -q);
    gain.set(0, 1, yz.transpose());
    gain.set(1, 1, scaled(b0, -eye(d) / data.b_weight));
    p.constraints.push_back(make_constraint("gain", Sense::NegativeDefinite, gain));

    const MatrixXd& A0 = data.A0;
    const MatrixXd Fe = A0 - data.L0 * data.C0;
    const AffineExpr BY = data.B0 * yz;
    BlockMatrix loop({n, n, d});
    loop.set(0, 0, A0 * q + q * A0.transpose() - BY - BY.transpose() + 2.0 * data.delta * q);
    loop.set(0, 1, AffineExpr(MatrixXd(data.L0 * data.C0)));
    loop.set(0, 2, AffineExpr(data.L0));
    loop.set(1, 1, pe * Fe + Fe.transpose() * pe + 2.0 * data.delta * pe);
    loop.set(1, 2, -(pe * data.L0));
    loop.set(2, 2, AffineExpr(MatrixXd(-2.0 * data.delta1 / data.c_weight * eye(d))));
    p.constraints.push_back(make_constraint("loop", Sense::NegativeDefinite, loop));

    const double gap = data.lambda_Nplus1 - data.q;
    const MatrixXd one = MatrixXd::Ones(1, 1);
    p.constraints.push_back(make_constraint(
        "scalar", Sense::NegativeDefinite, AffineExpr(MatrixXd(-2.0 * (gap + data.delta) * one)) + alpha_times(one)));

    MatrixXd e00 = MatrixXd::Zero(2, 2);
    e00(0, 0) = 1.0;
    MatrixXd diag_part = -2.0 * gap * e00;
    diag_part(0, 1) = diag_part(1, 0) = 1.0;
    MatrixXd c11 = MatrixXd::Zero(2, 2);
    c11(1, 1) = -1.0;
    p.constraints.push_back(make_constraint(
        "Hurwitz2", Sense::NegativeDefinite,
        alpha_times(diag_part) + scaled(b0, data.delta1 / data.delta * e00) + AffineExpr(c11)));
    return p;
}

std::vector<double> alpha_grid(double lo, double hi, int per_decade) {
    if (!(lo > 0.0) || !(hi >= lo) || per_decade < 1) throw Error(ErrorKind::InvalidArgument, "invalid alpha grid");
    const double decades = std::log10(hi / lo);
    const int steps = std::max(1, static_cast<int>(std::lround(decades * per_decade)));
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);
    for (int i = 0; i <= steps; ++i) out.push_back(lo * std::pow(10.0, decades * i / steps));
    return out;
}

namespace {

ControllerDesign extract(const FeasibilityResult& r, std::optional<double> fixed_alpha) {
    ControllerDesign out;
    out.result = r;
    out.witness = r.witness;
    if (fixed_alpha) out.witness["alpha"] = MatrixXd::Constant(1, 1, *fixed_alpha);
    const MatrixXd& Q = out.witness.at("Qz");
    out.K = Q.llt().solve(out.witness.at("Yz").transpose()).transpose();
    return out;
}

std::string binding_condition(const ControllerStep2Data& data, const LmiOptions& opt) {
    if (data.lambda_Nplus1 - data.q + data.delta <= 0.0) return "scalar";
    const ControllerStep2Problem full = controller_step2_problem(data);
    for (std::size_t keep : {std::size_t{3}, std::size_t{0}, std::size_t{1}}) {
        std::vector<AffineConstraint> subset{full.constraints[keep]};
        if (keep == 3) subset.push_back(full.constraints[2]);
        if (!solve_feasibility(full.layout, subset, opt).feasible()) return keep == 3 ? "Hurwitz2" : full.constraints[keep].name;
    }
    return "joint";
}

}  // namespace

std::vector<std::pair<double, bool>> step2_alpha_scan(const ControllerStep2Data& data, const GainDesignOptions& options) {
    const std::vector<double> grid = alpha_grid(options.alpha_lo, options.alpha_hi, options.alpha_per_decade);
    std::vector<std::pair<double, bool>> out(grid.size());
    parallel_for(grid.size(), options.threads, [&](std::size_t i) {
        const ControllerStep2Problem p = controller_step2_problem(data, std::nullopt, grid[i]);
        out[i] = {grid[i], solve_feasibility(p.layout, p.constraints, options.lmi).feasible()};
    });
    return out;
}

ControllerDesign design_controller_step2(const ControllerStep2Data& data, const GainDesignOptions& options) {
    std::optional<ControllerDesign> best;
    if (options.alpha_search == AlphaSearch::Joint) {
        const ControllerStep2Problem p = controller_step2_problem(data);
        const FeasibilityResult r = solve_feasibility(p.layout, p.constraints, options.lmi);
        if (r.feasible()) best = extract(r, std::nullopt);
    } else {
        const std::vector<double> grid = alpha_grid(options.alpha_lo, options.alpha_hi, options.alpha_per_decade);
        std::vector<std::optional<ControllerDesign>> found(grid.size());
        parallel_for(grid.size(), options.threads, [&](std::size_t i) {
            const ControllerStep2Problem p = controller_step2_problem(data, std::nullopt, grid[i]);
            const FeasibilityResult r = solve_feasibility(p.layout, p.constraints, options.lmi);
            if (r.feasible()) found[i] = extract(r, grid[i]);
        });
        for (auto& f : found) {
            if (f && (!best || f->K.norm() < best->K.norm())) best = std::move(f);
        }
    }
    if (!best) {
        throw Error(ErrorKind::DesignInfeasible,
                    "controller set infeasible; binding condition: " + binding_condition(data, options.lmi));
    }
    return *best;
}

FeasibilityResult verify_controller_step2(const ControllerStep2Data& data, const MatrixXd& K0, const LmiOptions& options) {
    const ControllerStep2Problem p = controller_step2_problem(data, K0);
    return solve_feasibility(p.layout, p.constraints, options);
}

GainSet design_two_step(ControllerStep2Data data, double observer_delta, double observer_c_weight,
                        const GainDesignOptions& options) {
    const ObserverDesign obs = design_observer_step1(data.A0, data.C0, observer_delta, observer_c_weight, options);
    data.L0 = obs.L;
    const ControllerDesign ctl = design_controller_step2(data, options);
    GainSet g;
    g.L0 = obs.L;
    g.K0 = ctl.K;
    g.delta = data.delta;
    g.route = GainRoute::TwoStep;
    g.certificates = ctl.witness;
    g.certificates["Po"] = obs.P;
    g.margins = obs.margins;
    for (const ConstraintMargin& m : ctl.result.margins) g.margins.push_back(m);
    return g;
}

// ---------------------------------------------------------------- CSV

void write_gains_csv(std::ostream& out, const GainSet& gains) {
    out << "# delta=" << std::setprecision(17) << gains.delta << " N0=" << gains.n0() << " d=" << gains.d()
        << " route=" << to_string(gains.route) << '\n';
    const auto rows = [&](const char* tag, const MatrixXd& m) {
        for (Index i = 0; i < m.rows(); ++i) {
            out << tag;
            for (Index j = 0; j < m.cols(); ++j) out << ',' << m(i, j);
            out << '\n';
        }
    };
    rows("L0", gains.L0);
    rows("K0", gains.K0);
}

GainSet read_gains_csv(std::istream& in) {
    std::string line;
    GainSet g;
    Index n0 = -1;
    Index d = -1;
    bool header = false;
    std::vector<std::vector<double>> L, K;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string tok;
            while (hs >> tok) {
                const auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = tok.substr(0, eq);
                const std::string val = tok.substr(eq + 1);
                try {
                    if (key == "delta") g.delta = std::stod(val);
                    else if (key == "N0") n0 = std::stol(val);
                    else if (key == "d") d = std::stol(val);
                    else if (key == "route") g.route = gain_route_from_string(val);
                } catch (const std::logic_error&) {
                    throw Error(ErrorKind::ConfigError, "bad gains header value '" + tok + "'");
                }
            }
            header = true;
            continue;
        }
        std::istringstream ls(line);
        std::string cell;
        std::getline(ls, cell, ',');
        std::vector<double> row;
        std::string v;
        while (std::getline(ls, v, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(v, &used));
            } catch (const std::logic_error&) {
                throw Error(ErrorKind::ConfigError, "bad number '" + v + "' in gains table");
            }
        }
        if (cell == "L0") L.push_back(row);
        else if (cell == "K0") K.push_back(row);
        else throw Error(ErrorKind::ConfigError, "unknown gains row tag '" + cell + "'");
    }
    if (!header || n0 < 1 || d < 1) throw Error(ErrorKind::ConfigError, "gains file lacks a header with N0 and d");
    const auto fill = [](const std::vector<std::vector<double>>& rows, Index r, Index c, const char* name) {
        if (static_cast<Index>(rows.size()) != r) throw Error(ErrorKind::ConfigError, std::string(name) + " has the wrong row count");
        MatrixXd m(r, c);
        for (Index i = 0; i < r; ++i) {
            if (static_cast<Index>(rows[i].size()) != c) {
                throw Error(ErrorKind::ConfigError, std::string(name) + " has the wrong column count");
            }
            for (Index j = 0; j < c; ++j) m(i, j) = rows[i][j];
        }
        return m;
    };
    g.L0 = fill(L, n0, d, "L0");
    g.K0 = fill(K, d, n0, "K0");
    if (!g.L0.allFinite() || !g.K0.allFinite()) throw Error(ErrorKind::ConfigError, "non-finite gain entry");
    return g;
}

}  // namespace heatctl
