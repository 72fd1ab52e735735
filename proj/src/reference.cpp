#include "heatctl/reference.hpp"

#include <algorithm>
#include <cmath>

#include "heatctl/error.hpp"
#include "heatctl/shapes.hpp"
#include "heatctl/spectral.hpp"

namespace heatctl {

namespace {

bool is_q3(double q) { return std::abs(q - 3.0) < 1e-12; }
bool is_q81(double q) { return std::abs(q - 8.1) < 1e-12; }

void require_reference_q(double q) {
    if (!is_q3(q) && !is_q81(q)) throw Error(ErrorKind::InvalidArgument, "reference data exists for q = 3 and q = 8.1 only");
}

Eigen::MatrixXd mat(Eigen::Index r, Eigen::Index c, std::initializer_list<double> values) {
    Eigen::MatrixXd m(r, c);
    auto it = values.begin();
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = *it++;
    }
    return m;
}

using Row = std::vector<std::pair<double, double>>;  // (delta, tau); negative delta marks "none"

std::vector<ReferenceCell> cells(const std::vector<std::size_t>& Ns, const Row& row) {
    std::vector<ReferenceCell> out;
    for (std::size_t i = 0; i < Ns.size(); ++i) {
        ReferenceCell c;
        c.N = Ns[i];
        if (row[i].first > 0.0) {
            c.delta = row[i].first;
            c.tau_M = row[i].second;
        }
        out.push_back(c);
    }
    return out;
}

}  // namespace

ReferenceShapes reference_shapes(Wiring wiring, double q) {
    require_reference_q(q);
    const bool two = is_q81(q);
    switch (wiring) {
        case Wiring::InteriorInterior:
            return two ? ReferenceShapes{{"f1", "f2"}, {"g1", "g2"}} : ReferenceShapes{{"f1"}, {"g1"}};
        case Wiring::InteriorBoundary:
            return two ? ReferenceShapes{{"f3", "f4"}, {"g3", "g4"}} : ReferenceShapes{{"f3"}, {"g3"}};
        case Wiring::BoundaryInterior:
            return two ? ReferenceShapes{{"f5", "f6"}, {"g1", "g2"}} : ReferenceShapes{{"f5"}, {"g1"}};
    }
    throw Error(ErrorKind::InternalError, "unreachable wiring");
}

ReferenceGains reference_gains(Wiring wiring, double q) {
    require_reference_q(q);
    ReferenceGains g;
    if (is_q3(q)) {
        g.design_delta = 1.0;
        g.observer_delta = 1.0;
        switch (wiring) {
            case Wiring::InteriorInterior:
                g.L0 = mat(1, 1, {1.6349});
                g.K0 = mat(1, 1, {1.2696});
                break;
            case Wiring::InteriorBoundary:
                g.L0 = mat(1, 1, {47.3821});
                g.K0 = mat(1, 1, {2.1837});
                break;
            case Wiring::BoundaryInterior:
                g.L0 = mat(1, 1, {1.6349});
                g.K0 = mat(1, 1, {4.1634});
                break;
        }
        return g;
    }
    g.observer_delta = 0.01;
    g.observer_N = 20;
    g.design_N = 30;
    switch (wiring) {
        case Wiring::InteriorInterior:
            g.L0 = mat(3, 2, {8.428, 6.036, -0.295, -0.424, 0.204, 0.150});
            g.K0 = mat(2, 3, {5.260, 0.029, -0.034, -0.094, 0.253, -0.097});
            g.design_delta = 0.04;
            break;
        case Wiring::InteriorBoundary:
            g.L0 = mat(3, 2, {9.964, 58.153, 0.161, -0.416, 0.927, -0.188});
            g.K0 = mat(2, 3, {11.033, 0.026, 0.0, 0.0, 0.0, -0.040});
            g.design_delta = 0.02;
            break;
        case Wiring::BoundaryInterior:
            g.L0 = mat(3, 2, {7.108, 4.841, -0.133, -0.525, 0.709, 0.085});
            g.K0 = mat(2, 3, {7.886, -0.280, 0.385, -8.444, 0.039, 0.518});
            g.design_delta = 0.05;
            break;
    }
    return g;
}

ModalSystem reference_system(Wiring wiring, double q, std::size_t N, double delta, std::size_t basis_modes) {
    const ReferenceShapes names = reference_shapes(wiring, q);
    const RectangleDomain dom = reference_domain();
    std::vector<ShapeFunction> b, c;
    for (const auto& n : names.b) b.push_back(catalog_shape(n, dom));
    for (const auto& n : names.c) c.push_back(catalog_shape(n, dom));
    const SpectralBasis basis = rectangle_spectrum(dom, std::max<std::size_t>({N + 2, 40, basis_modes}));
    return assemble_modal_system(basis, q, delta, N, b, c, wiring);
}

std::vector<ReferenceCell> reference_max_delay(CertificateVariant variant, double q) {
    require_reference_q(q);
    if (is_q3(q)) {
        const std::vector<std::size_t> Ns{2, 3, 4, 5, 6, 7, 8};
        switch (variant) {
            case CertificateVariant::Thm1:
                return cells(Ns, {{0.35, 0.237}, {0.12, 0.292}, {0.1, 0.303}, {0.07, 0.311}, {0.05, 0.318}, {0.05, 0.39},
                                  {0.04, 0.323}});
            case CertificateVariant::Rmk3:
                return cells(Ns, {{1, 0.196}, {1, 0.225}, {1, 0.236}, {0.95, 0.247}, {0.9, 0.256}, {0.8, 0.259},
                                  {0.7, 0.264}});
            case CertificateVariant::Thm2:
                return cells(Ns, {{-1, 0}, {-1, 0}, {0.48, 0.137}, {0.45, 0.175}, {0.3, 0.248}, {0.25, 0.259},
                                  {0.2, 0.272}});
            case CertificateVariant::Rmk4:
                return cells(Ns, {{-1, 0}, {-1, 0}, {3, 0.033}, {2.5, 0.041}, {1.2, 0.107}, {1.1, 0.123}, {1.08, 0.141}});
            case CertificateVariant::Thm3:
                return cells(Ns, {{0.18, 0.276}, {0.06, 0.312}, {0.06, 0.319}, {0.03, 0.323}, {0.03, 0.328},
                                  {0.02, 0.329}, {0.02, 0.331}});
            case CertificateVariant::Rmk5:
                return cells(Ns, {{0.9, 0.222}, {0.8, 0.257}, {0.6, 0.266}, {0.6, 0.275}, {0.5, 0.281}, {0.4, 0.285},
                                  {0.3, 0.291}});
        }
    }
    switch (variant) {
        case CertificateVariant::Thm1:
            return cells({20, 25, 30, 35, 40, 45}, {{0.051, 0.0104}, {0.049, 0.0342}, {0.048, 0.0414}, {0.047, 0.0454},
                                                    {0.045, 0.0481}, {0.045, 0.0502}});
        case CertificateVariant::Rmk3:
            return cells({20, 25, 30, 35, 40, 45},
                         {{4.5, 0.0267}, {4, 0.0330}, {3, 0.0357}, {3, 0.0376}, {2.8, 0.0395}, {2.5, 0.0407}});
        case CertificateVariant::Thm2:
            return cells({30, 35, 40, 45, 50, 55}, {{0.019, 0.0168}, {0.018, 0.0219}, {0.018, 0.0271}, {0.017, 0.0301},
                                                    {0.017, 0.0311}, {0.017, 0.0337}});
        case CertificateVariant::Rmk4:
            return cells({30, 35, 40, 45, 50, 55},
                         {{6, 0.0206}, {6, 0.0215}, {5, 0.0230}, {4.5, 0.0238}, {4, 0.0240}, {4, 0.0254}});
        case CertificateVariant::Thm3:
            return cells({7, 8, 9, 10, 15, 20}, {{-1, 0}, {0.15, 0.0112}, {0.15, 0.0242}, {0.15, 0.0291}, {0.14, 0.0467},
                                                 {0.12, 0.0506}});
        case CertificateVariant::Rmk5:
            return cells({7, 8, 9, 10, 15, 20},
                         {{7, 0.0036}, {6, 0.0106}, {5, 0.0136}, {5, 0.0151}, {2.5, 0.0254}, {2, 0.0311}});
    }
    return {};
}

double reference_tolerance(double reference_tau) { return std::max(0.03, 0.1 * std::abs(reference_tau)); }

}  // namespace heatctl
