#include "heatctl/reproduce.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "heatctl/error.hpp"
#include "heatctl/shapes.hpp"

namespace heatctl {

using Eigen::MatrixXd;

namespace {

double abscissa(const MatrixXd& m) { return m.eigenvalues().real().maxCoeff(); }

void append(std::vector<ConstraintMargin>& out, const std::vector<ConstraintMargin>& in, const std::string& prefix) {
    for (ConstraintMargin m : in) {
        m.name = prefix + m.name;
        out.push_back(std::move(m));
    }
}

}  // namespace

ControllerStep2Data controller_step2_data(const ModalSystem& system, const MatrixXd& L0, double delta,
                                          std::optional<double> delta1) {
    const CouplingWeights w = coupling_weights(system);
    return {system.A0, system.B0, system.C0, L0, delta, delta1.value_or(delta), w.actuation, w.sensing,
            system.tail.lambda_Nplus1, system.q};
}

GainCheck check_reference_gains(Wiring wiring, double q, const LmiOptions& options) {
    const ReferenceGains g = reference_gains(wiring, q);
    GainCheck out;
    out.wiring = wiring;
    out.q = q;
    if (g.design_N == 0) {
        const ModalSystem s = reference_system(wiring, q, 2, g.design_delta);
        const GainSet v = verify_basic(s.A0, s.B0, s.C0, g.L0, g.K0, g.design_delta, options);
        out.route = GainRoute::Basic;
        out.margins = v.margins;
        out.observer_abscissa = abscissa(s.A0 - g.L0 * s.C0);
        out.controller_abscissa = abscissa(s.A0 - s.B0 * g.K0);
        out.verified = all_satisfied(out.margins);
        return out;
    }
    out.route = GainRoute::TwoStep;
    const ModalSystem s1 = reference_system(wiring, q, g.observer_N, g.observer_delta);
    const FeasibilityResult r1 =
        verify_observer_step1(s1.A0, s1.C0, g.L0, g.observer_delta, coupling_weights(s1).sensing, options);
    const ModalSystem s2 = reference_system(wiring, q, g.design_N, g.design_delta);
    const FeasibilityResult r2 =
        verify_controller_step2(controller_step2_data(s2, g.L0, g.design_delta), g.K0, options);
    append(out.margins, r1.margins, "step1:");
    append(out.margins, r2.margins, "step2:");
    out.observer_abscissa = abscissa(s1.A0 - g.L0 * s1.C0);
    out.controller_abscissa = abscissa(s2.A0 - s2.B0 * g.K0);
    out.verified = r1.feasible() && r2.feasible() && all_satisfied(out.margins);
    return out;
}

CertificateData reference_certificate_data(Wiring wiring, double q, std::size_t N) {
    const ReferenceGains g = reference_gains(wiring, q);
    return certificate_data(reference_system(wiring, q, N, g.design_delta), g.L0, g.K0);
}

std::size_t DelayTableReport::cells_within() const {
    return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const TableCell& c) { return c.within; }));
}

DelayTableReport reproduce_delay_table(double q, const std::vector<CertificateVariant>& variants,
                                       const SearchSpec& search, const ProgressFn& progress) {
    DelayTableReport rep;
    rep.q = q;
    for (CertificateVariant v : variants) {
        for (const ReferenceCell& ref : reference_max_delay(v, q)) {
            SearchSpec s = search;
            s.variant = v;
            DelayResult r = max_delay(s, reference_certificate_data(wiring_of(v), q, ref.N), ref.N);
            if (progress) progress(r);
            TableCell c;
            c.variant = v;
            c.N = ref.N;
            c.delta = r.delta;
            c.tau_M = r.tau_M;
            c.ref_delta = ref.delta;
            c.ref_tau_M = ref.tau_M;
            c.tolerance = reference_tolerance(ref.tau_M.value_or(0.0));
            if (!c.ref_tau_M || !c.tau_M) {
                c.within = !c.ref_tau_M && !c.tau_M;
            } else {
                c.within = std::abs(*c.tau_M - *c.ref_tau_M) <= c.tolerance;
            }
            rep.cells.push_back(c);
            rep.results.push_back(std::move(r));
        }
    }
    rep.ordering = compare_vector_vs_classical(rep.results);
    return rep;
}

namespace {

void put(std::ostream& out, const std::optional<double>& v) {
    if (v) {
        out << *v;
    } else {
        out << "none";
    }
}

}  // namespace

void write_table_csv(std::ostream& out, const DelayTableReport& report) {
    out << "variant,N,delta,tau_M,ref_delta,ref_tau_M,tolerance,within\n" << std::setprecision(6);
    for (const TableCell& c : report.cells) {
        out << to_string(c.variant) << ',' << c.N << ',';
        put(out, c.delta);
        out << ',';
        put(out, c.tau_M);
        out << ',';
        put(out, c.ref_delta);
        out << ',';
        put(out, c.ref_tau_M);
        out << ',' << c.tolerance << ',' << (c.within ? "yes" : "no") << '\n';
    }
}

void write_ordering_csv(std::ostream& out, const std::vector<OrderingReport>& ordering) {
    out << "wiring,N,vector_tau_M,classical_tau_M,difference,winner\n" << std::setprecision(6);
    for (const OrderingReport& rep : ordering) {
        for (const OrderingRow& r : rep.rows) {
            out << to_string(rep.wiring) << ',' << r.N << ',';
            put(out, r.vector_tau);
            out << ',';
            put(out, r.classical_tau);
            out << ',' << r.difference << ',' << r.winner << '\n';
        }
    }
}

DecayRun decay_run(Wiring wiring, double tau_M, double T, std::size_t M_sim) {
    const ReferenceGains g = reference_gains(wiring, 3.0);
    const ModalSystem sys = reference_system(wiring, 3.0, 5, g.design_delta, M_sim);
    SimConfig c;
    c.M_sim = M_sim;
    c.L0 = g.L0;
    c.K0 = g.K0;
    c.T = T;
    c.z0 = initial_coefficients(default_initial_shape(reference_domain()), sys.basis, M_sim);
    c.tau_y = {DelayKind::SinSquared, tau_M, 0.0};
    c.tau_u = {DelayKind::CosSquared, tau_M, 0.0};
    DecayRun run;
    run.wiring = wiring;
    run.tau_M = tau_M;
    run.trace = simulate_closed_loop(sys, c);
    run.channels = norm_channels(run.trace, wiring);
    for (const ChannelNorms& ch : run.channels) run.fits.push_back(fit_decay(run.trace.t, ch.values));
    run.l2_ratio = run.trace.z_l2.back() / run.trace.z_l2.front();
    return run;
}

double reference_simulation_delay(Wiring wiring) {
    const CertificateVariant v = wiring == Wiring::InteriorInterior   ? CertificateVariant::Thm1
                                 : wiring == Wiring::InteriorBoundary ? CertificateVariant::Thm2
                                                                      : CertificateVariant::Thm3;
    for (const ReferenceCell& c : reference_max_delay(v, 3.0)) {
        if (c.N == 5 && c.tau_M) return *c.tau_M;
    }
    throw Error(ErrorKind::InternalError, "missing reference row");
}

std::optional<std::string> multiplicity_note(const SpectralBasis& basis, double q, double delta) {
    if (!basis.has_eigenfunctions() || std::abs(q - 8.1) > 1e-12) return std::nullopt;
    const RectangleDomain ref = reference_domain();
    const RectangleDomain& dom = basis.domain();
    if (std::abs(dom.a1 - ref.a1) > 1e-12 || std::abs(dom.a2 - ref.a2) > 1e-12) return std::nullopt;
    const std::size_t n0 = count_unstable_modes(basis, q, delta);
    const MultiplicityPartition part = multiplicity_partition(basis, n0);
    if (part.max_multiplicity >= 2) return std::nullopt;
    std::ostringstream os;
    os << std::setprecision(6) << "multiplicity discrepancy: the reference configuration lists lambda_2 = lambda_3 "
       << "(d = 2); the closed form gives simple eigenvalues";
    for (std::size_t n = 1; n <= n0; ++n) os << (n == 1 ? " " : ", ") << "lambda_" << n << " = " << basis.lambda(n);
    os << " (computed d = " << part.max_multiplicity << "); two actuators and sensors are kept";
    return os.str();
}

}  // namespace heatctl
