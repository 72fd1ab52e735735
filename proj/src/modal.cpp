#include "heatctl/modal.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "heatctl/error.hpp"

namespace heatctl {

std::string to_string(Wiring wiring) {
    switch (wiring) {
        case Wiring::InteriorInterior: return "interior-interior";
        case Wiring::InteriorBoundary: return "interior-boundary";
        case Wiring::BoundaryInterior: return "boundary-interior";
    }
    return "unknown";
}

Wiring wiring_from_string(const std::string& text) {
    if (text == "interior-interior") return Wiring::InteriorInterior;
    if (text == "interior-boundary") return Wiring::InteriorBoundary;
    if (text == "boundary-interior") return Wiring::BoundaryInterior;
    throw Error(ErrorKind::InvalidArgument, "unknown wiring '" + text + "'");
}

namespace {

void require_eigenfunctions(const SpectralBasis& basis) {
    if (!basis.has_eigenfunctions()) {
        throw Error(ErrorKind::InvalidArgument, "tabulated spectrum has no eigenfunctions; supply coefficient tables");
    }
}

// Caches the 1D factor integrals, which depend only on m (resp. k).
class FactorCache {
public:
    FactorCache(const ShapeFunction& shape, const RectangleDomain& domain) : shape_(shape), domain_(domain) {}

    double x1(int m) {
        auto it = sines_.find(m);
        if (it != sines_.end()) return it->second;
        const double v = integrate_product(shape_.x1, sine_mode(m, domain_.a1));
        sines_.emplace(m, v);
        return v;
    }

    double x2(int k) {
        auto it = cosines_.find(k);
        if (it != cosines_.end()) return it->second;
        const double v = integrate_product(shape_.x2, cosine_half_mode(k, domain_.a2));
        cosines_.emplace(k, v);
        return v;
    }

private:
    const ShapeFunction& shape_;
    const RectangleDomain& domain_;
    std::map<int, double> sines_;
    std::map<int, double> cosines_;
};

double coefficient(FactorCache& cache, const ShapeFunction& shape, const Mode& mode) {
    if (shape.kind == ShapeKind::Boundary) return shape.scale * mode.normalization * cache.x1(mode.m);
    return shape.scale * mode.normalization * cache.x1(mode.m) * cache.x2(mode.k);
}

double clamp_tail(double raw, double reference, const char* what) {
    const double tol = 1e-9 * (1.0 + reference);
    if (raw < -tol) {
        throw Error(ErrorKind::InconsistentQuadrature,
                    std::string(what) + " tail is negative (" + std::to_string(raw) + ")");
    }
    return std::max(raw, 0.0);
}

void require_kind(const std::vector<ShapeFunction>& shapes, ShapeKind kind, const char* role) {
    for (const ShapeFunction& s : shapes) {
        if (s.kind != kind) {
            throw Error(ErrorKind::InvalidArgument, std::string(role) + " shape '" + s.name + "' has the wrong kind for this wiring");
        }
    }
}

}  // namespace

double project_interior(const ShapeFunction& shape, const SpectralBasis& basis, std::size_t n) {
    if (shape.kind != ShapeKind::Interior) throw Error(ErrorKind::InvalidArgument, "project_interior needs an interior shape");
    require_eigenfunctions(basis);
    FactorCache cache(shape, basis.domain());
    return coefficient(cache, shape, basis.mode(n));
}

double project_boundary(const ShapeFunction& shape, const SpectralBasis& basis, std::size_t n) {
    if (shape.kind != ShapeKind::Boundary) throw Error(ErrorKind::InvalidArgument, "project_boundary needs a boundary shape");
    require_eigenfunctions(basis);
    FactorCache cache(shape, basis.domain());
    return coefficient(cache, shape, basis.mode(n));
}

double project(const ShapeFunction& shape, const SpectralBasis& basis, std::size_t n) {
    return shape.kind == ShapeKind::Interior ? project_interior(shape, basis, n) : project_boundary(shape, basis, n);
}

double project_quadrature(const ShapeFunction& shape, const SpectralBasis& basis, std::size_t n) {
    require_eigenfunctions(basis);
    const Mode& mode = basis.mode(n);
    const RectangleDomain& dom = basis.domain();
    const double i1 = integrate_product_quadrature(shape.x1, sine_mode(mode.m, dom.a1), 1e-10);
    if (shape.kind == ShapeKind::Boundary) return shape.scale * mode.normalization * i1;
    const double i2 = integrate_product_quadrature(shape.x2, cosine_half_mode(mode.k, dom.a2), 1e-10);
    return shape.scale * mode.normalization * i1 * i2;
}

Eigen::MatrixXd projection_table(const std::vector<ShapeFunction>& shapes, const SpectralBasis& basis) {
    require_eigenfunctions(basis);
    Eigen::MatrixXd table(basis.count(), shapes.size());
    for (std::size_t j = 0; j < shapes.size(); ++j) {
        FactorCache cache(shapes[j], basis.domain());
        for (std::size_t n = 1; n <= basis.count(); ++n) {
            table(n - 1, j) = coefficient(cache, shapes[j], basis.mode(n));
        }
    }
    return table;
}

double tail_interior(const std::vector<ShapeFunction>& shapes, const SpectralBasis& basis, std::size_t N, bool gradient) {
    require_eigenfunctions(basis);
    if (N > basis.count()) throw Error(ErrorKind::InsufficientBasis, "basis shorter than N");
    double total = 0.0;
    double norm = 0.0;
    for (const ShapeFunction& s : shapes) {
        if (s.kind != ShapeKind::Interior) throw Error(ErrorKind::InvalidArgument, "tail_interior needs interior shapes");
        const double full = gradient ? s.gradient_norm_squared(basis.domain()) : s.l2_norm_squared();
        norm += full;
        FactorCache cache(s, basis.domain());
        double captured = 0.0;
        for (std::size_t n = 1; n <= N; ++n) {
            const Mode& mode = basis.mode(n);
            const double c = coefficient(cache, s, mode);
            captured += gradient ? mode.lambda * c * c : c * c;
        }
        total += full - captured;
    }
    return clamp_tail(total, norm, gradient ? "gradient" : "L2");
}

BoundaryTail tail_boundary(const std::vector<ShapeFunction>& shapes, const SpectralBasis& basis, std::size_t N) {
    require_eigenfunctions(basis);
    if (N > basis.count()) throw Error(ErrorKind::InsufficientBasis, "basis shorter than N");
    BoundaryTail out;
    double captured = 0.0;
    for (const ShapeFunction& s : shapes) {
        if (s.kind != ShapeKind::Boundary) throw Error(ErrorKind::InvalidArgument, "tail_boundary needs boundary shapes");
        out.cap += basis.domain().a2 * s.l2_norm_squared();
        FactorCache cache(s, basis.domain());
        for (std::size_t n = 1; n <= N; ++n) {
            const Mode& mode = basis.mode(n);
            const double c = coefficient(cache, s, mode);
            captured += c * c / mode.lambda;
        }
    }
    out.tail = clamp_tail(out.cap - captured, out.cap, "boundary");
    return out;
}

CouplingWeights coupling_weights(const ModalSystem& system) {
    auto need = [](const std::optional<double>& v, const char* name) {
        if (!v) throw Error(ErrorKind::InvalidArgument, std::string("modal system lacks ") + name);
        return *v;
    };
    const TailQuantities& t = system.tail;
    switch (system.wiring) {
        case Wiring::InteriorInterior: return {need(t.b_tail, "b_tail"), need(t.c_tail, "c_tail")};
        case Wiring::InteriorBoundary: return {need(t.grad_b_tail, "grad_b_tail"), need(t.varrho_N, "varrho_N")};
        case Wiring::BoundaryInterior: return {need(t.rho_N, "rho_N"), need(t.c_tail, "c_tail") / t.lambda_N};
    }
    throw Error(ErrorKind::InternalError, "unreachable wiring");
}

namespace {

ModalSystem fill_matrices(const SpectralBasis& basis, double q, double delta, std::size_t N, const Eigen::MatrixXd& bc,
                          const Eigen::MatrixXd& cc, Wiring wiring, const AssemblyOptions& options) {
    if (!std::isfinite(q) || !std::isfinite(delta) || delta <= 0.0) {
        throw Error(ErrorKind::InvalidArgument, "q must be finite and delta positive");
    }
    if (bc.cols() != cc.cols() || bc.cols() == 0) {
        throw Error(ErrorKind::InvalidArgument, "actuation and sensing need the same positive number of shapes");
    }
    if (static_cast<std::size_t>(bc.rows()) < N || static_cast<std::size_t>(cc.rows()) < N) {
        throw Error(ErrorKind::InsufficientBasis, "coefficient tables shorter than N");
    }
    if (basis.count() <= N) throw Error(ErrorKind::InsufficientBasis, "basis must contain lambda_{N+1}");

    const std::size_t n0 = options.n0 ? *options.n0 : count_unstable_modes(basis, q, delta);
    if (n0 == 0) throw Error(ErrorKind::InvalidArgument, "N0 must be positive");
    if (N < n0) throw Error(ErrorKind::InvalidArgument, "N must be at least N0");
    for (std::size_t n = n0 + 1; n <= N + 1; ++n) {
        if (-basis.lambda(n) + q >= -delta) {
            throw Error(ErrorKind::InvalidArgument, "mode " + std::to_string(n) + " beyond N0 is not stable with margin delta");
        }
    }

    ModalSystem sys(basis);
    sys.wiring = wiring;
    sys.q = q;
    sys.delta = delta;
    sys.n0 = n0;
    sys.n = N;
    sys.d = static_cast<std::size_t>(bc.cols());
    sys.partition = multiplicity_partition(basis, n0, options.partition_tol);

    const Eigen::VectorXd lam = basis.lambdas();
    const auto i0 = static_cast<Eigen::Index>(n0);
    const auto i1 = static_cast<Eigen::Index>(N - n0);
    sys.A0 = (q - lam.head(i0).array()).matrix().asDiagonal();
    sys.A1 = (q - lam.segment(i0, i1).array()).matrix().asDiagonal();
    sys.B0 = bc.topRows(i0);
    sys.B1 = bc.middleRows(i0, i1);
    sys.C0 = cc.topRows(i0).transpose();
    sys.C1 = cc.middleRows(i0, i1).transpose();
    sys.b_coeffs = bc;
    sys.c_coeffs = cc;
    sys.tail.lambda_N = basis.lambda(N);
    sys.tail.lambda_Nplus1 = basis.lambda(N + 1);
    return sys;
}

}  // namespace

ModalSystem assemble_modal_system(const SpectralBasis& basis, double q, double delta, std::size_t N,
                                  const std::vector<ShapeFunction>& b_shapes, const std::vector<ShapeFunction>& c_shapes,
                                  Wiring wiring, const AssemblyOptions& options) {
    require_eigenfunctions(basis);
    const bool b_boundary = wiring == Wiring::BoundaryInterior;
    const bool c_boundary = wiring == Wiring::InteriorBoundary;
    require_kind(b_shapes, b_boundary ? ShapeKind::Boundary : ShapeKind::Interior, "actuation");
    require_kind(c_shapes, c_boundary ? ShapeKind::Boundary : ShapeKind::Interior, "sensing");
    if (wiring == Wiring::InteriorBoundary) {
        for (const ShapeFunction& s : b_shapes) {
            if (!s.vanishes_on_dirichlet(basis.domain())) {
                throw Error(ErrorKind::InvalidArgument, "actuation shape '" + s.name + "' must vanish on the Dirichlet edges");
            }
        }
    }

    ModalSystem sys = fill_matrices(basis, q, delta, N, projection_table(b_shapes, basis), projection_table(c_shapes, basis),
                                    wiring, options);
    TailQuantities& t = sys.tail;
    if (b_boundary) {
        const BoundaryTail bt = tail_boundary(b_shapes, basis, N);
        t.rho_N = bt.tail;
        t.rho_cap = bt.cap;
    } else {
        t.b_tail = tail_interior(b_shapes, basis, N);
        const bool h1 = std::all_of(b_shapes.begin(), b_shapes.end(),
                                    [&](const ShapeFunction& s) { return s.is_h1(basis.domain()); });
        if (h1) t.grad_b_tail = tail_interior(b_shapes, basis, N, true);
    }
    if (c_boundary) {
        const BoundaryTail ct = tail_boundary(c_shapes, basis, N);
        t.varrho_N = ct.tail;
        t.varrho_cap = ct.cap;
    } else {
        t.c_tail = tail_interior(c_shapes, basis, N);
    }
    return sys;
}

ModalSystem assemble_modal_system(const SpectralBasis& basis, double q, double delta, std::size_t N,
                                  const Eigen::MatrixXd& b_coeffs, const Eigen::MatrixXd& c_coeffs, Wiring wiring,
                                  const TailQuantities& tails, const AssemblyOptions& options) {
    ModalSystem sys = fill_matrices(basis, q, delta, N, b_coeffs, c_coeffs, wiring, options);
    const double lambda_N = sys.tail.lambda_N;
    const double lambda_N1 = sys.tail.lambda_Nplus1;
    sys.tail = tails;
    sys.tail.lambda_N = lambda_N;
    sys.tail.lambda_Nplus1 = lambda_N1;
    for (const auto* v : {&tails.b_tail, &tails.c_tail, &tails.grad_b_tail, &tails.varrho_N, &tails.rho_N}) {
        if (*v && !(**v >= 0.0)) throw Error(ErrorKind::InvalidArgument, "tail quantities must be nonnegative");
    }
    (void)coupling_weights(sys);
    return sys;
}

int numeric_rank(const Eigen::MatrixXd& m, double rel_tol, double scale) {
    if (m.size() == 0) return 0;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const Eigen::VectorXd& s = svd.singularValues();
    const double ref = std::max(s.size() > 0 ? s(0) : 0.0, scale);
    if (ref == 0.0) return 0;
    return static_cast<int>((s.array() > rel_tol * ref).count());
}

RankReport check_rank(const ModalSystem& system) {
    RankReport report;
    report.cluster_sizes = system.partition.sizes;
    report.assumption_holds = true;
    const double b_scale = system.b_coeffs.size() > 0 ? system.b_coeffs.colwise().norm().minCoeff() : 0.0;
    const double c_scale = system.c_coeffs.size() > 0 ? system.c_coeffs.colwise().norm().minCoeff() : 0.0;
    Eigen::Index offset = 0;
    const auto n0 = static_cast<Eigen::Index>(system.n0);
    for (std::size_t size : system.partition.sizes) {
        const auto nj = static_cast<Eigen::Index>(size);
        const int rb = numeric_rank(system.B0.middleRows(offset, nj), 1e-9, b_scale);
        const int rc = numeric_rank(system.C0.middleCols(offset, nj), 1e-9, c_scale);
        report.b_ranks.push_back(rb);
        report.c_ranks.push_back(rc);
        if (rb != nj || rc != nj) report.assumption_holds = false;
        offset += nj;
    }
    report.controllable = true;
    report.observable = true;
    for (Eigen::Index i = 0; i < n0; ++i) {
        const double mu = system.A0(i, i);
        const Eigen::MatrixXd shifted = system.A0 - mu * Eigen::MatrixXd::Identity(n0, n0);
        Eigen::MatrixXd ctrl(n0, n0 + system.B0.cols());
        ctrl << shifted, system.B0;
        Eigen::MatrixXd obs(n0 + system.C0.rows(), n0);
        obs << shifted, system.C0;
        if (numeric_rank(ctrl, 1e-9, b_scale) < n0) report.controllable = false;
        if (numeric_rank(obs, 1e-9, c_scale) < n0) report.observable = false;
    }
    return report;
}

}  // namespace heatctl
