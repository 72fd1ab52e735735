#include "heatctl/lmi.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <set>

#include "heatctl/error.hpp"

namespace heatctl {

const char* to_string(VarStructure s) noexcept {
    switch (s) {
        case VarStructure::SymmetricPD: return "symmetric-pd";
        case VarStructure::Symmetric: return "symmetric";
        case VarStructure::Full: return "full";
        case VarStructure::ScalarPositive: return "scalar-positive";
        case VarStructure::Scalar: return "scalar";
    }
    return "unknown";
}

const char* to_string(Sense s) noexcept {
    switch (s) {
        case Sense::NegativeDefinite: return "negative-definite";
        case Sense::NegativeSemidefinite: return "negative-semidefinite";
        case Sense::PositiveSemidefinite: return "positive-semidefinite";
        case Sense::PositiveDefinite: return "positive-definite";
    }
    return "unknown";
}

const char* to_string(FeasibilityStatus s) noexcept {
    switch (s) {
        case FeasibilityStatus::Feasible: return "feasible";
        case FeasibilityStatus::Infeasible: return "infeasible";
        case FeasibilityStatus::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

namespace {

bool is_symmetric_structure(VarStructure s) {
    return s == VarStructure::SymmetricPD || s == VarStructure::Symmetric;
}

bool is_scalar_structure(VarStructure s) {
    return s == VarStructure::ScalarPositive || s == VarStructure::Scalar;
}

// (row, col) of the e-th free entry
std::pair<Eigen::Index, Eigen::Index> free_entry(const VariableSpec& v, Eigen::Index e) {
    if (is_symmetric_structure(v.structure)) {
        Eigen::Index i = 0;
        Eigen::Index remaining = e;
        while (remaining >= v.rows - i) {
            remaining -= v.rows - i;
            ++i;
        }
        return {i, i + remaining};
    }
    return {e / v.cols, e % v.cols};
}

bool strict(Sense s) { return s == Sense::NegativeDefinite || s == Sense::PositiveDefinite; }

bool negative(Sense s) { return s == Sense::NegativeDefinite || s == Sense::NegativeSemidefinite; }

}  // namespace

// ---------------------------------------------------------------- layout

Variable DecisionLayout::add(const std::string& name, Eigen::Index rows, Eigen::Index cols, VarStructure structure) {
    if (name.empty()) throw Error(ErrorKind::InvalidArgument, "variable name must be non-empty");
    for (const VariableSpec& v : vars_) {
        if (v.name == name) throw Error(ErrorKind::InvalidArgument, "duplicate variable '" + name + "'");
    }
    if (rows <= 0 || cols <= 0) throw Error(ErrorKind::InvalidArgument, "variable '" + name + "' has an empty shape");
    if (is_symmetric_structure(structure) && rows != cols) {
        throw Error(ErrorKind::InvalidArgument, "symmetric variable '" + name + "' must be square");
    }
    if (is_scalar_structure(structure) && (rows != 1 || cols != 1)) {
        throw Error(ErrorKind::InvalidArgument, "scalar variable '" + name + "' must be 1x1");
    }
    VariableSpec spec{name, rows, cols, structure, dimension_, 0};
    spec.free = is_symmetric_structure(structure) ? rows * (rows + 1) / 2 : rows * cols;
    dimension_ += spec.free;
    vars_.push_back(spec);
    return Variable{vars_.size() - 1};
}

Variable DecisionLayout::symmetric(const std::string& name, Eigen::Index n, bool positive_definite) {
    return add(name, n, n, positive_definite ? VarStructure::SymmetricPD : VarStructure::Symmetric);
}

Variable DecisionLayout::full(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    return add(name, rows, cols, VarStructure::Full);
}

Variable DecisionLayout::scalar(const std::string& name, bool positive) {
    return add(name, 1, 1, positive ? VarStructure::ScalarPositive : VarStructure::Scalar);
}

const VariableSpec& DecisionLayout::spec(Variable v) const {
    if (v.id >= vars_.size()) throw Error(ErrorKind::InvalidArgument, "variable handle outside layout");
    return vars_[v.id];
}

Variable DecisionLayout::find(const std::string& name) const {
    for (std::size_t i = 0; i < vars_.size(); ++i) {
        if (vars_[i].name == name) return Variable{i};
    }
    throw Error(ErrorKind::InvalidArgument, "no variable named '" + name + "'");
}

Eigen::MatrixXd DecisionLayout::basis_matrix(Variable v, Eigen::Index e) const {
    const VariableSpec& s = spec(v);
    if (e < 0 || e >= s.free) throw Error(ErrorKind::InvalidArgument, "free index outside variable");
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(s.rows, s.cols);
    const auto [i, j] = free_entry(s, e);
    E(i, j) = 1.0;
    if (is_symmetric_structure(s.structure)) E(j, i) = 1.0;
    return E;
}

Eigen::MatrixXd DecisionLayout::unpack(Variable v, const Eigen::VectorXd& x) const {
    const VariableSpec& s = spec(v);
    if (x.size() != dimension_) throw Error(ErrorKind::InvalidArgument, "vector does not match layout dimension");
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(s.rows, s.cols);
    for (Eigen::Index e = 0; e < s.free; ++e) {
        const auto [i, j] = free_entry(s, e);
        out(i, j) = x(s.offset + e);
        if (is_symmetric_structure(s.structure)) out(j, i) = x(s.offset + e);
    }
    return out;
}

Witness DecisionLayout::unpack(const Eigen::VectorXd& x) const {
    Witness w;
    for (std::size_t i = 0; i < vars_.size(); ++i) w[vars_[i].name] = unpack(Variable{i}, x);
    return w;
}

Eigen::VectorXd DecisionLayout::pack(const Witness& witness) const {
    Eigen::VectorXd x(dimension_);
    for (const VariableSpec& s : vars_) {
        auto it = witness.find(s.name);
        if (it == witness.end()) throw Error(ErrorKind::InvalidArgument, "witness misses variable '" + s.name + "'");
        const Eigen::MatrixXd& m = it->second;
        if (m.rows() != s.rows || m.cols() != s.cols) {
            throw Error(ErrorKind::InvalidArgument, "witness for '" + s.name + "' has the wrong shape");
        }
        for (Eigen::Index e = 0; e < s.free; ++e) {
            const auto [i, j] = free_entry(s, e);
            x(s.offset + e) = is_symmetric_structure(s.structure) ? 0.5 * (m(i, j) + m(j, i)) : m(i, j);
        }
    }
    return x;
}

// ---------------------------------------------------------------- expressions

AffineExpr::AffineExpr(Eigen::Index rows, Eigen::Index cols) : constant_(Eigen::MatrixXd::Zero(rows, cols)) {}

AffineExpr::AffineExpr(const Eigen::MatrixXd& constant) : constant_(constant) {}

AffineExpr AffineExpr::var(const DecisionLayout& layout, Variable v) {
    const VariableSpec& s = layout.spec(v);
    AffineExpr e(s.rows, s.cols);
    if (is_scalar_structure(s.structure)) {
        e.scalars_.push_back(ScalarTerm{v.id, Eigen::MatrixXd::Ones(1, 1)});
    } else {
        e.terms_.push_back(Term{v.id, Eigen::MatrixXd::Identity(s.rows, s.rows), Eigen::MatrixXd::Identity(s.cols, s.cols), false});
    }
    return e;
}

AffineExpr AffineExpr::transpose() const {
    AffineExpr out(constant_.transpose());
    for (const Term& t : terms_) out.terms_.push_back(Term{t.var, t.right.transpose(), t.left.transpose(), !t.transposed});
    for (const ScalarTerm& s : scalars_) out.scalars_.push_back(ScalarTerm{s.var, s.coeff.transpose()});
    return out;
}

Eigen::MatrixXd AffineExpr::evaluate(const DecisionLayout& layout, const Witness& witness) const {
    Eigen::MatrixXd out = constant_;
    auto lookup = [&](std::size_t id) -> const Eigen::MatrixXd& {
        const VariableSpec& s = layout.spec(Variable{id});
        auto it = witness.find(s.name);
        if (it == witness.end()) throw Error(ErrorKind::InvalidArgument, "witness misses variable '" + s.name + "'");
        if (it->second.rows() != s.rows || it->second.cols() != s.cols) {
            throw Error(ErrorKind::InvalidArgument, "witness for '" + s.name + "' has the wrong shape");
        }
        return it->second;
    };
    for (const Term& t : terms_) {
        const Eigen::MatrixXd& X = lookup(t.var);
        if (t.transposed) {
            out += t.left * X.transpose() * t.right;
        } else {
            out += t.left * X * t.right;
        }
    }
    for (const ScalarTerm& s : scalars_) out += lookup(s.var)(0, 0) * s.coeff;
    return out;
}

std::map<Eigen::Index, Eigen::MatrixXd> AffineExpr::coefficients(const DecisionLayout& layout) const {
    std::map<Eigen::Index, Eigen::MatrixXd> out;
    auto add = [&](Eigen::Index idx, const Eigen::MatrixXd& m) {
        auto it = out.find(idx);
        if (it == out.end()) {
            out.emplace(idx, m);
        } else {
            it->second += m;
        }
    };
    for (const Term& t : terms_) {
        const VariableSpec& s = layout.spec(Variable{t.var});
        const bool symm = is_symmetric_structure(s.structure);
        for (Eigen::Index e = 0; e < s.free; ++e) {
            auto [i, j] = free_entry(s, e);
            if (t.transposed && !symm) std::swap(i, j);
            Eigen::MatrixXd m = t.left.col(i) * t.right.row(j);
            if (symm && i != j) m += t.left.col(j) * t.right.row(i);
            add(s.offset + e, m);
        }
    }
    for (const ScalarTerm& st : scalars_) {
        const VariableSpec& s = layout.spec(Variable{st.var});
        if (s.free != 1) throw Error(ErrorKind::InternalError, "scalar term on a non-scalar variable");
        add(s.offset, st.coeff);
    }
    return out;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& other) {
    if (rows() != other.rows() || cols() != other.cols()) {
        throw Error(ErrorKind::InvalidArgument, "affine expression shapes differ in a sum");
    }
    constant_ += other.constant_;
    terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
    scalars_.insert(scalars_.end(), other.scalars_.begin(), other.scalars_.end());
    return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& other) { return *this += -other; }

AffineExpr& AffineExpr::operator*=(double s) {
    constant_ *= s;
    for (Term& t : terms_) t.left *= s;
    for (ScalarTerm& st : scalars_) st.coeff *= s;
    return *this;
}

AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
AffineExpr operator-(AffineExpr a) { return a *= -1.0; }
AffineExpr operator*(double s, AffineExpr e) { return e *= s; }

AffineExpr operator*(const Eigen::MatrixXd& left, const AffineExpr& e) {
    if (left.cols() != e.rows()) throw Error(ErrorKind::InvalidArgument, "shape mismatch in matrix * expression");
    AffineExpr out(left * e.constant_);
    for (const AffineExpr::Term& t : e.terms_) out.terms_.push_back({t.var, left * t.left, t.right, t.transposed});
    for (const AffineExpr::ScalarTerm& s : e.scalars_) out.scalars_.push_back({s.var, left * s.coeff});
    return out;
}

AffineExpr operator*(const AffineExpr& e, const Eigen::MatrixXd& right) {
    if (e.cols() != right.rows()) throw Error(ErrorKind::InvalidArgument, "shape mismatch in expression * matrix");
    AffineExpr out(e.constant_ * right);
    for (const AffineExpr::Term& t : e.terms_) out.terms_.push_back({t.var, t.left, t.right * right, t.transposed});
    for (const AffineExpr::ScalarTerm& s : e.scalars_) out.scalars_.push_back({s.var, s.coeff * right});
    return out;
}

AffineExpr scaled(const AffineExpr& scalar_expr, const Eigen::MatrixXd& m) {
    if (scalar_expr.rows() != 1 || scalar_expr.cols() != 1) {
        throw Error(ErrorKind::InvalidArgument, "scaled() needs a 1x1 expression");
    }
    AffineExpr out(scalar_expr.constant_(0, 0) * m);
    for (const AffineExpr::Term& t : scalar_expr.terms_) out.scalars_.push_back({t.var, (t.left * t.right)(0, 0) * m});
    for (const AffineExpr::ScalarTerm& s : scalar_expr.scalars_) out.scalars_.push_back({s.var, s.coeff(0, 0) * m});
    return out;
}

// ---------------------------------------------------------------- blocks

BlockMatrix::BlockMatrix(std::vector<Eigen::Index> sizes) : sizes_(std::move(sizes)) {
    for (Eigen::Index s : sizes_) {
        if (s < 0) throw Error(ErrorKind::InvalidArgument, "negative block size");
    }
}

void BlockMatrix::set(std::size_t i, std::size_t j, const AffineExpr& e) {
    if (i >= sizes_.size() || j >= sizes_.size()) throw Error(ErrorKind::InvalidArgument, "block index outside template");
    if (i > j) {
        set(j, i, e.transpose());
        return;
    }
    if (e.rows() != sizes_[i] || e.cols() != sizes_[j]) {
        throw Error(ErrorKind::InvalidArgument, "block (" + std::to_string(i) + "," + std::to_string(j) + ") has the wrong shape");
    }
    blocks_[{i, j}] = e;
}

Eigen::Index BlockMatrix::dimension() const {
    Eigen::Index n = 0;
    for (Eigen::Index s : sizes_) n += s;
    return n;
}

AffineExpr BlockMatrix::block(std::size_t i, std::size_t j) const {
    if (i > j) return block(j, i).transpose();
    auto it = blocks_.find({i, j});
    if (it == blocks_.end()) return AffineExpr(sizes_.at(i), sizes_.at(j));
    return it->second;
}

AffineExpr BlockMatrix::assemble() const {
    const Eigen::Index n = dimension();
    std::vector<Eigen::Index> offsets(sizes_.size(), 0);
    for (std::size_t i = 1; i < sizes_.size(); ++i) offsets[i] = offsets[i - 1] + sizes_[i - 1];
    auto selector = [&](std::size_t i) {
        Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, sizes_[i]);
        S.block(offsets[i], 0, sizes_[i], sizes_[i]).setIdentity();
        return S;
    };
    AffineExpr out(n, n);
    for (const auto& [key, e] : blocks_) {
        const auto [i, j] = key;
        const Eigen::MatrixXd Si = selector(i);
        const Eigen::MatrixXd Sj = selector(j);
        out += Si * e * Sj.transpose();
        if (i != j) out += Sj * e.transpose() * Si.transpose();
    }
    return out;
}

AffineConstraint make_constraint(std::string name, Sense sense, const AffineExpr& expr) {
    if (expr.rows() != expr.cols()) throw Error(ErrorKind::InvalidArgument, "constraint '" + name + "' is not square");
    return AffineConstraint{std::move(name), sense, expr};
}

AffineConstraint make_constraint(std::string name, Sense sense, const BlockMatrix& blocks) {
    return make_constraint(std::move(name), sense, blocks.assemble());
}

// ---------------------------------------------------------------- solving

double constraint_scale(const DecisionLayout& layout, const AffineConstraint& c) {
    const double cn = c.expr.constant().norm();
    if (cn > 0.0) return cn;
    double best = 0.0;
    for (const auto& [idx, m] : c.expr.coefficients(layout)) best = std::max(best, m.norm());
    return best > 0.0 ? best : 1.0;
}

std::vector<AffineConstraint> with_structural_constraints(const DecisionLayout& layout,
                                                          const std::vector<AffineConstraint>& constraints) {
    std::vector<AffineConstraint> all = constraints;
    for (std::size_t i = 0; i < layout.size(); ++i) {
        const VariableSpec& s = layout.variables()[i];
        if (s.structure == VarStructure::SymmetricPD || s.structure == VarStructure::ScalarPositive) {
            all.push_back(make_constraint(s.name + ">0", Sense::PositiveDefinite, AffineExpr::var(layout, Variable{i})));
        }
    }
    return all;
}

namespace {

struct Compiled {
    std::vector<SdpBlock> blocks;  // without the phase-I column
    std::vector<double> scales;
};

// Slack form Z = -F/scale - eps I - sum x_i F_i/scale >= 0, F <= 0 oriented.
Compiled compile(const DecisionLayout& layout, const std::vector<AffineConstraint>& constraints, double eps) {
    Compiled out;
    for (const AffineConstraint& c : constraints) {
        if (c.expr.rows() != c.expr.cols()) throw Error(ErrorKind::InvalidArgument, "constraint '" + c.name + "' is not square");
        const double scale = constraint_scale(layout, c);
        const double sign = negative(c.sense) ? 1.0 : -1.0;
        const double margin = strict(c.sense) ? eps : 0.0;
        const Eigen::Index n = c.expr.rows();
        SdpBlock blk;
        const Eigen::MatrixXd& f0 = c.expr.constant();
        if ((f0 - f0.transpose()).norm() > 1e-10 * (1.0 + f0.norm())) {
            throw Error(ErrorKind::InvalidArgument, "constraint '" + c.name + "' has a non-symmetric constant term");
        }
        blk.C = -sign / scale * 0.5 * (f0 + f0.transpose()) - margin * Eigen::MatrixXd::Identity(n, n);
        for (auto& [idx, m] : c.expr.coefficients(layout)) {
            if ((m - m.transpose()).norm() > 1e-10 * (1.0 + m.norm())) {
                throw Error(ErrorKind::InvalidArgument, "constraint '" + c.name + "' is not symmetric in its variables");
            }
            if (m.norm() == 0.0) continue;
            blk.A.emplace_back(idx, sign / scale * 0.5 * (m + m.transpose()));
        }
        out.blocks.push_back(std::move(blk));
        out.scales.push_back(scale);
    }
    return out;
}

struct PhaseOne {
    FeasibilityStatus status{FeasibilityStatus::Inconclusive};
    Eigen::VectorXd x;
    SolverDiagnostics diag;
};

PhaseOne phase_one(const Compiled& comp, Eigen::Index dim, const LmiOptions& opt) {
    SdpProblem p;
    p.b = Eigen::VectorXd::Zero(dim + 1);
    p.b(dim) = -1.0;
    double t0 = 0.0;
    for (const SdpBlock& blk : comp.blocks) {
        SdpBlock b = blk;
        const Eigen::Index n = b.size();
        b.A.emplace_back(dim, -Eigen::MatrixXd::Identity(n, n));
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(blk.C, Eigen::EigenvaluesOnly);
        t0 = std::max(t0, -es.eigenvalues()(0));
        p.blocks.push_back(std::move(b));
    }
    SdpBlock bound;
    bound.C = Eigen::MatrixXd::Ones(1, 1);
    bound.A.emplace_back(dim, -Eigen::MatrixXd::Ones(1, 1));
    p.blocks.push_back(bound);

    Eigen::VectorXd y0 = Eigen::VectorXd::Zero(dim + 1);
    y0(dim) = t0 + 1.0;
    SdpOptions so = opt.sdp;
    so.stop_below = std::pair(dim, -0.1 * opt.eps_strict);
    const SdpSolution sol = sdp_solve(p, y0, so);

    PhaseOne out;
    out.x = sol.y.head(dim);
    out.diag.iterations = sol.iterations;
    out.diag.phase1_t = sol.y(dim);
    out.diag.primal_residual = sol.primal_residual;
    out.diag.gap = sol.primal_objective - sol.dual_objective;
    out.diag.lower_bound = -sol.primal_objective;
    out.diag.message = sol.message;
    if (sol.status == SdpStatus::StoppedEarly) {
        out.status = FeasibilityStatus::Feasible;
    } else if (sol.primal_residual < 1e-6 && out.diag.lower_bound > opt.infeasible_tol) {
        out.status = FeasibilityStatus::Infeasible;
    } else {
        out.status = FeasibilityStatus::Inconclusive;
        if (out.diag.message.empty()) out.diag.message = "phase-I optimum at the feasibility boundary";
    }
    return out;
}

FeasibilityResult finish(const DecisionLayout& layout, const std::vector<AffineConstraint>& all, const Eigen::VectorXd& x,
                         const SolverDiagnostics& diag, const LmiOptions& opt) {
    FeasibilityResult r;
    r.diagnostics = diag;
    r.x = x;
    r.witness = layout.unpack(x);
    r.margins = verify_witness(layout, all, r.witness, 0.0, opt.eps_strict);
    if (all_satisfied(r.margins)) {
        r.status = FeasibilityStatus::Feasible;
    } else {
        r.status = FeasibilityStatus::Inconclusive;
        r.diagnostics.message = "solver point failed independent verification";
    }
    return r;
}

}  // namespace

FeasibilityResult solve_feasibility(const DecisionLayout& layout, const std::vector<AffineConstraint>& constraints,
                                    const LmiOptions& options) {
    const std::vector<AffineConstraint> all =
        options.structural_constraints ? with_structural_constraints(layout, constraints) : constraints;
    const Compiled comp = compile(layout, all, options.eps_strict);
    const PhaseOne p1 = phase_one(comp, layout.dimension(), options);
    if (p1.status == FeasibilityStatus::Feasible) return finish(layout, all, p1.x, p1.diag, options);
    FeasibilityResult r;
    r.status = p1.status;
    r.x = p1.x;
    r.diagnostics = p1.diag;
    return r;
}

FeasibilityResult solve_minimize(const DecisionLayout& layout, const std::vector<AffineConstraint>& constraints,
                                 const Eigen::VectorXd& objective, const LmiOptions& options) {
    if (objective.size() != layout.dimension()) throw Error(ErrorKind::InvalidArgument, "objective has the wrong dimension");
    const std::vector<AffineConstraint> all =
        options.structural_constraints ? with_structural_constraints(layout, constraints) : constraints;
    const PhaseOne p1 = phase_one(compile(layout, all, options.eps_strict), layout.dimension(), options);
    if (p1.status != FeasibilityStatus::Feasible) {
        FeasibilityResult r;
        r.status = p1.status;
        r.x = p1.x;
        r.diagnostics = p1.diag;
        return r;
    }
    // phase II keeps a slightly wider margin so rounding cannot undercut eps_strict
    SdpProblem p;
    p.b = -objective;
    p.blocks = compile(layout, all, 1.01 * options.eps_strict).blocks;
    bool start_ok = true;
    for (const Eigen::MatrixXd& Z : sdp_slack(p, p1.x)) {
        if (Eigen::LLT<Eigen::MatrixXd>(Z).info() != Eigen::Success) start_ok = false;
    }
    if (!start_ok) return finish(layout, all, p1.x, p1.diag, options);
    const SdpSolution sol = sdp_solve(p, p1.x, options.sdp);
    SolverDiagnostics diag = p1.diag;
    diag.iterations += sol.iterations;
    diag.primal_residual = sol.primal_residual;
    diag.gap = sol.primal_objective - sol.dual_objective;
    diag.message = sol.message;
    FeasibilityResult r = finish(layout, all, sol.y, diag, options);
    if (!r.feasible()) return finish(layout, all, p1.x, p1.diag, options);
    return r;
}

std::vector<ConstraintMargin> verify_witness(const DecisionLayout& layout, const std::vector<AffineConstraint>& constraints,
                                             const Witness& witness, double tol, double eps_strict) {
    std::vector<ConstraintMargin> out;
    out.reserve(constraints.size());
    for (const AffineConstraint& c : constraints) {
        const Eigen::MatrixXd m = c.expr.evaluate(layout, witness);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
        ConstraintMargin cm;
        cm.name = c.name;
        cm.min_eigenvalue = es.eigenvalues()(0);
        cm.max_eigenvalue = es.eigenvalues()(es.eigenvalues().size() - 1);
        cm.margin = negative(c.sense) ? -cm.max_eigenvalue : cm.min_eigenvalue;
        if (strict(c.sense)) {
            cm.required = eps_strict > 0.0 ? eps_strict * constraint_scale(layout, c) : 0.0;
            cm.satisfied = cm.margin > cm.required - tol;
        } else {
            cm.satisfied = cm.margin >= -tol;
        }
        out.push_back(cm);
    }
    return out;
}

bool all_satisfied(const std::vector<ConstraintMargin>& margins) {
    return std::all_of(margins.begin(), margins.end(), [](const ConstraintMargin& m) { return m.satisfied; });
}

// ---------------------------------------------------------------- Schur complements

Eigen::MatrixXd schur_reduce(const Eigen::MatrixXd& m, Eigen::Index pivot_start, Eigen::Index pivot_size) {
    const Eigen::Index n = m.rows();
    if (m.cols() != n || pivot_start < 0 || pivot_size <= 0 || pivot_start + pivot_size > n) {
        throw Error(ErrorKind::InvalidArgument, "pivot block outside matrix");
    }
    const Eigen::MatrixXd pivot = m.block(pivot_start, pivot_start, pivot_size, pivot_size);
    const bool neg = Eigen::LLT<Eigen::MatrixXd>(-pivot).info() == Eigen::Success;
    const bool pos = Eigen::LLT<Eigen::MatrixXd>(pivot).info() == Eigen::Success;
    if (!neg && !pos) throw Error(ErrorKind::PivotSingular, "pivot block is not sign-definite");
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i < pivot_start || i >= pivot_start + pivot_size) keep.push_back(i);
    }
    const auto r = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd rest(r, r), cross(r, pivot_size);
    for (Eigen::Index a = 0; a < r; ++a) {
        for (Eigen::Index b = 0; b < r; ++b) rest(a, b) = m(keep[static_cast<std::size_t>(a)], keep[static_cast<std::size_t>(b)]);
        cross.row(a) = m.block(keep[static_cast<std::size_t>(a)], pivot_start, 1, pivot_size);
    }
    return rest - cross * pivot.ldlt().solve(cross.transpose());
}

AffineConstraint schur_reduce(const std::string& name, Sense sense, const BlockMatrix& blocks, std::size_t pivot) {
    const std::size_t nb = blocks.sizes().size();
    if (pivot >= nb) throw Error(ErrorKind::InvalidArgument, "pivot block outside template");
    const AffineExpr pp = blocks.block(pivot, pivot);
    if (!pp.is_constant()) throw Error(ErrorKind::InvalidArgument, "pivot block must be variable-free");
    const Eigen::MatrixXd& P = pp.constant();
    const bool ok = negative(sense) ? Eigen::LLT<Eigen::MatrixXd>(-P).info() == Eigen::Success
                                    : Eigen::LLT<Eigen::MatrixXd>(P).info() == Eigen::Success;
    if (!ok) throw Error(ErrorKind::PivotSingular, "pivot block is not definite in the constraint's sense");
    std::vector<Eigen::Index> sizes;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < nb; ++i) {
        if (i == pivot) continue;
        keep.push_back(i);
        sizes.push_back(blocks.sizes()[i]);
        if (!blocks.block(i, pivot).is_constant()) {
            throw Error(ErrorKind::InvalidArgument, "pivot row must be variable-free");
        }
    }
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(P);
    BlockMatrix reduced(sizes);
    for (std::size_t a = 0; a < keep.size(); ++a) {
        for (std::size_t b = a; b < keep.size(); ++b) {
            const Eigen::MatrixXd& Ca = blocks.block(keep[a], pivot).constant();
            const Eigen::MatrixXd& Cb = blocks.block(keep[b], pivot).constant();
            reduced.set(a, b, blocks.block(keep[a], keep[b]) - AffineExpr(Ca * ldlt.solve(Cb.transpose())));
        }
    }
    return make_constraint(name, sense, reduced);
}

// ---------------------------------------------------------------- export

void export_problem(std::ostream& out, const DecisionLayout& layout, const std::vector<AffineConstraint>& constraints) {
    out << "heatctl-lmi 1\n";
    out << "variables " << layout.size() << " dimension " << layout.dimension() << "\n";
    for (const VariableSpec& v : layout.variables()) {
        out << v.name << ' ' << v.rows << ' ' << v.cols << ' ' << to_string(v.structure) << ' ' << v.offset << ' ' << v.free
            << "\n";
    }
    out << "constraints " << constraints.size() << "\n";
    out << std::setprecision(17);
    for (const AffineConstraint& c : constraints) {
        const auto coeffs = c.expr.coefficients(layout);
        out << "constraint " << c.name << ' ' << to_string(c.sense) << ' ' << c.expr.rows() << "\n";
        auto dump = [&](long index, const Eigen::MatrixXd& m) {
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                for (Eigen::Index j = i; j < m.cols(); ++j) {
                    if (m(i, j) != 0.0) out << index << ' ' << i << ' ' << j << ' ' << m(i, j) << "\n";
                }
            }
        };
        dump(-1, c.expr.constant());
        for (const auto& [idx, m] : coeffs) dump(static_cast<long>(idx), m);
        out << "end\n";
    }
}

}  // namespace heatctl
