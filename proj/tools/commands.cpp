#include "commands.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "heatctl/error.hpp"
#include "heatctl/reference.hpp"
#include "heatctl/reproduce.hpp"

namespace heatctl::cli {

namespace fs = std::filesystem;
using Eigen::MatrixXd;

ReportWriter::ReportWriter(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::ConfigError, "cannot create output directory '" + dir_.string() + "'");
}

void ReportWriter::write(const std::string& name, const std::function<void(std::ostream&)>& fill) {
    std::ofstream f(dir_ / name);
    if (!f) throw Error(ErrorKind::ConfigError, "cannot write '" + (dir_ / name).string() + "'");
    f << std::setprecision(10);
    fill(f);
    if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
}

void ReportWriter::manifest(const std::string& command, const RunConfig& config, unsigned threads, std::uint64_t seed,
                            const json& extra) {
    json m;
    m["tool"] = "heatctl";
    m["version"] = "1.0.0";
    m["command"] = command;
    m["config"] = config.source;
    m["config_hash"] = config_hash(config.source);
    m["threads"] = threads;
    m["seed"] = seed;
    m["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
    m["tolerances"] = {{"eps_strict", config.lmi.eps_strict},
                       {"infeasible_tol", config.lmi.infeasible_tol},
                       {"verify_tol", config.lmi.verify_tol},
                       {"sdp_gap_tol", config.lmi.sdp.gap_tol},
                       {"sdp_max_iterations", config.lmi.sdp.max_iterations},
                       {"tau_tol", config.search.tau_tol},
                       {"table_cell", "max(0.03, 0.1 * |reference|)"}};
    m["simulation"] = {{"T", config.T}, {"M_sim", config.M_sim}, {"record_interval", config.record_interval}};
    m["simulation"]["dt"] = config.dt ? json(*config.dt) : json("min(1e-3, tau_M / 50)");
    m["files"] = files_;
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    std::ofstream f(dir_ / "manifest.json");
    f << m.dump(2) << '\n';
}

namespace {

bool has_reference(double q) { return std::abs(q - 3.0) < 1e-12 || std::abs(q - 8.1) < 1e-12; }

void write_margins(std::ostream& out, const std::vector<ConstraintMargin>& margins) {
    out << "name,min_eigenvalue,max_eigenvalue,margin,required,satisfied\n";
    for (const ConstraintMargin& m : margins) {
        out << m.name << ',' << m.min_eigenvalue << ',' << m.max_eigenvalue << ',' << m.margin << ',' << m.required << ','
            << (m.satisfied ? "yes" : "no") << '\n';
    }
}

void print_margins(std::ostream& log, const std::vector<ConstraintMargin>& margins) {
    for (const ConstraintMargin& m : margins) {
        log << "  " << std::left << std::setw(24) << m.name << std::right << " margin " << std::setw(12) << m.margin
            << (m.satisfied ? "  ok" : "  VIOLATED") << '\n';
    }
}

json matrix_json(const MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        rows.push_back(r);
    }
    return rows;
}

json witness_json(const Witness& w) {
    json j = json::object();
    for (const auto& [name, m] : w) j[name] = matrix_json(m);
    return j;
}

std::size_t max_N(const RunConfig& c) { return *std::max_element(c.N.begin(), c.N.end()); }

GainDesignOptions design_options(const Context& ctx) {
    GainDesignOptions o;
    o.lmi = ctx.config.lmi;
    o.alpha_search = ctx.config.gains.alpha_search;
    o.threads = ctx.threads;
    return o;
}

struct GainVerdict {
    std::vector<ConstraintMargin> margins;
    bool verified{};
};

// Gains in the inequalities of their route.
GainVerdict verify_gains(const Context& ctx, const GainSet& g, GainRoute route) {
    const RunConfig& c = ctx.config;
    GainVerdict v;
    if (route == GainRoute::TwoStep) {
        const ModalSystem s1 = configured_system(c, c.gains.observer_N.value_or(max_N(c)), c.gains.observer_delta);
        const FeasibilityResult r1 =
            verify_observer_step1(s1.A0, s1.C0, g.L0, c.gains.observer_delta, coupling_weights(s1).sensing, c.lmi);
        const ModalSystem s2 = configured_system(c, c.gains.design_N.value_or(max_N(c)), c.delta);
        const FeasibilityResult r2 =
            verify_controller_step2(controller_step2_data(s2, g.L0, c.delta, c.delta1_or_delta()), g.K0, c.lmi);
        for (ConstraintMargin m : r1.margins) {
            m.name = "step1:" + m.name;
            v.margins.push_back(m);
        }
        for (ConstraintMargin m : r2.margins) {
            m.name = "step2:" + m.name;
            v.margins.push_back(m);
        }
        if (!r1.feasible()) v.margins.push_back({"step1", 0, 0, -1, 0, false});
        if (!r2.feasible()) v.margins.push_back({"step2", 0, 0, -1, 0, false});
        v.verified = r1.feasible() && r2.feasible() && all_satisfied(v.margins);
        return v;
    }
    const double delta = g.delta > 0.0 ? g.delta : c.delta;
    const ModalSystem s = configured_system(c, max_N(c), delta);
    const GainSet r = verify_basic(s.A0, s.B0, s.C0, g.L0, g.K0, delta, c.lmi);
    v.margins = r.margins;
    v.verified = !v.margins.empty() && all_satisfied(v.margins);
    if (v.margins.empty()) v.margins.push_back({"basic", 0, 0, -1, 0, false});
    return v;
}

// Gains by route; the second member is the route whose inequalities they satisfy.
std::pair<GainSet, GainRoute> obtain_gains(const Context& ctx) {
    const RunConfig& c = ctx.config;
    if (c.gains.route == GainRoute::Imported) {
        if (*c.gains.import == "reference") {
            if (!has_reference(c.q)) throw Error(ErrorKind::ConfigError, "reference gains exist for q = 3 and q = 8.1 only");
            if (c.b_shapes) throw Error(ErrorKind::ConfigError, "reference gains belong to the reference shapes");
            const ReferenceGains r = reference_gains(c.wiring(), c.q);
            GainSet g;
            g.L0 = r.L0;
            g.K0 = r.K0;
            g.delta = r.design_delta;
            g.route = GainRoute::Imported;
            return {g, r.design_N == 0 ? GainRoute::Basic : GainRoute::TwoStep};
        }
        std::ifstream in(*c.gains.import);
        if (!in) throw Error(ErrorKind::ConfigError, "cannot open gains file '" + *c.gains.import + "'");
        GainSet g = read_gains_csv(in);
        const GainRoute origin = g.route == GainRoute::TwoStep ? GainRoute::TwoStep : GainRoute::Basic;
        g.route = GainRoute::Imported;
        return {g, origin};
    }
    for (const auto& [N, delta] : {std::pair{max_N(c), c.delta}, std::pair{c.gains.observer_N.value_or(max_N(c)),
                                                                           c.gains.observer_delta}}) {
        if (c.gains.route == GainRoute::Basic && delta != c.delta) continue;
        const SpectralBasis b = rectangle_spectrum(c.domain, N + 1);
        const double gap = b.lambda(N + 1) - c.q;
        if (delta >= gap) {
            std::ostringstream os;
            os << "binding condition: spectral gap, delta = " << delta << " is not below lambda_{N+1} - q = " << gap
               << " at N = " << N;
            throw Error(ErrorKind::DesignInfeasible, os.str());
        }
    }
    if (c.gains.route == GainRoute::Basic) {
        const ModalSystem s = configured_system(c, max_N(c), c.delta);
        return {design_basic(s.A0, s.B0, s.C0, c.delta, design_options(ctx)), GainRoute::Basic};
    }
    const ModalSystem s1 = configured_system(c, c.gains.observer_N.value_or(max_N(c)), c.gains.observer_delta);
    const ModalSystem s2 = configured_system(c, c.gains.design_N.value_or(max_N(c)), c.delta);
    GainSet g = design_two_step(controller_step2_data(s2, MatrixXd(), c.delta, c.delta1_or_delta()), c.gains.observer_delta,
                                coupling_weights(s1).sensing, design_options(ctx));
    return {g, GainRoute::TwoStep};
}

void check_gain_shapes(const ModalSystem& s, const GainSet& g) {
    const auto n0 = static_cast<Eigen::Index>(s.n0);
    const auto d = static_cast<Eigen::Index>(s.d);
    if (g.L0.rows() != n0 || g.L0.cols() != d || g.K0.rows() != d || g.K0.cols() != n0) {
        throw Error(ErrorKind::ConfigError, "gains are " + std::to_string(g.L0.rows()) + "x" + std::to_string(g.L0.cols()) +
                                                " but the problem has N0 = " + std::to_string(n0) +
                                                ", d = " + std::to_string(d));
    }
}

void put(std::ostream& out, const std::optional<double>& v) {
    if (v) {
        out << *v;
    } else {
        out << "none";
    }
}

const char* wiring_tag(Wiring w) {
    switch (w) {
        case Wiring::InteriorInterior: return "ii";
        case Wiring::InteriorBoundary: return "ib";
        case Wiring::BoundaryInterior: return "bi";
    }
    return "ii";
}

}  // namespace

ModalSystem configured_system(const RunConfig& c, std::size_t N, double delta, std::size_t basis_modes) {
    std::vector<ShapeFunction> b, cc;
    if (c.b_shapes) {
        b = *c.b_shapes;
        cc = *c.c_shapes;
    } else {
        if (!has_reference(c.q)) {
            throw Error(ErrorKind::ConfigError, "shapes.b and shapes.c are required unless q is 3 or 8.1");
        }
        const ReferenceShapes names = reference_shapes(c.wiring(), c.q);
        for (const std::string& n : names.b) b.push_back(catalog_shape(n, c.domain));
        for (const std::string& n : names.c) cc.push_back(catalog_shape(n, c.domain));
    }
    std::size_t count = std::max<std::size_t>({N + 2, 40, basis_modes});
    SpectralBasis basis = rectangle_spectrum(c.domain, count);
    while (basis.lambda(count) <= c.q + delta) {
        count *= 2;
        basis = rectangle_spectrum(c.domain, count);
    }
    AssemblyOptions opt;
    opt.n0 = c.N0;
    return assemble_modal_system(basis, c.q, delta, N, b, cc, c.wiring(), opt);
}

int cmd_spectrum(Context& ctx) {
    const RunConfig& c = ctx.config;
    const std::size_t count = ctx.count_override > 0 ? ctx.count_override : c.spectrum_count;
    const SpectralBasis shown = rectangle_spectrum(c.domain, count);
    const SpectralBasis basis = rectangle_spectrum(c.domain, std::max<std::size_t>(count, 64));
    const std::size_t n0 = c.N0.value_or(count_unstable_modes(basis, c.q, c.delta));
    const MultiplicityPartition part = multiplicity_partition(basis, n0);
    ctx.out->write("spectrum.csv", [&](std::ostream& o) {
        o << "n,m,k,lambda\n";
        for (const Mode& m : shown.modes()) o << m.index << ',' << m.m << ',' << m.k << ',' << m.lambda << '\n';
    });
    std::ostream& log = *ctx.log;
    log << "   n    m    k        lambda\n";
    for (const Mode& m : shown.modes()) {
        log << std::setw(4) << m.index << ' ' << std::setw(4) << m.m << ' ' << std::setw(4) << m.k << ' ' << std::setw(13)
            << std::setprecision(8) << m.lambda << '\n';
    }
    log << "N0 = " << n0 << " (q = " << c.q << ", delta = " << c.delta << ")\n";
    log << "multiplicities:";
    for (std::size_t s : part.sizes) log << ' ' << s;
    log << "  d = " << part.max_multiplicity << '\n';
    const std::optional<std::string> note = multiplicity_note(basis, c.q, c.delta);
    if (note) log << "note: " << *note << '\n';
    json extra{{"N0", n0}, {"d", part.max_multiplicity}};
    if (note) extra["note"] = *note;
    ctx.out->manifest("spectrum", c, ctx.threads, ctx.seed, extra);
    return kOk;
}

int cmd_design(Context& ctx) {
    const RunConfig& c = ctx.config;
    std::ostream& log = *ctx.log;
    std::pair<GainSet, GainRoute> got;
    try {
        got = obtain_gains(ctx);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::DesignInfeasible) throw;
        log << e.what() << '\n';
        ctx.out->write("design.txt", [&](std::ostream& o) { o << e.what() << '\n'; });
        ctx.out->manifest("design", c, ctx.threads, ctx.seed, {{"status", "design-infeasible"}});
        return kInfeasible;
    }
    GainSet& g = got.first;
    check_gain_shapes(configured_system(c, max_N(c), g.delta > 0.0 ? g.delta : c.delta), g);
    const bool imported = c.gains.route == GainRoute::Imported;
    GainVerdict v;
    if (imported && *c.gains.import == "reference") {
        const GainCheck k = check_reference_gains(c.wiring(), c.q, c.lmi);
        v.margins = k.margins;
        v.verified = k.verified;
        if (!k.verified) {
            log << "spectral abscissae: A0 - L0 C0 " << k.observer_abscissa << ", A0 - B0 K0 " << k.controller_abscissa
                << '\n';
        }
        g.margins = v.margins;
    } else if (imported) {
        v = verify_gains(ctx, g, got.second);
        g.margins = v.margins;
    } else {
        v.margins = g.margins;
        v.verified = all_satisfied(g.margins);
    }
    ctx.out->write("gains.csv", [&](std::ostream& o) { write_gains_csv(o, g); });
    ctx.out->write("margins.csv", [&](std::ostream& o) { write_margins(o, v.margins); });
    if (!g.certificates.empty()) {
        ctx.out->write("certificates.json", [&](std::ostream& o) { o << witness_json(g.certificates).dump(2) << '\n'; });
    }
    log << (imported ? "verified" : "designed") << " gains, route " << to_string(imported ? got.second : g.route) << '\n';
    log << "L0 =\n" << g.L0 << "\nK0 =\n" << g.K0 << '\n';
    print_margins(log, v.margins);
    log << (v.verified ? "all margins positive\n" : "margins violated\n");
    ctx.out->manifest("design", c, ctx.threads, ctx.seed, {{"status", v.verified ? "ok" : "infeasible"}});
    return v.verified ? kOk : kInfeasible;
}

int cmd_verify(Context& ctx) {
    const RunConfig& c = ctx.config;
    std::ostream& log = *ctx.log;
    const GainSet g = obtain_gains(ctx).first;
    bool any_infeasible = false, any_inconclusive = false;
    std::ostringstream table;
    table << std::setprecision(10) << "variant,N,delta,delta1,tau_y,tau_u,status,decay_rate\n";
    for (std::size_t N : c.N) {
        const ModalSystem s = configured_system(c, N, g.delta > 0.0 ? g.delta : c.delta);
        check_gain_shapes(s, g);
        const CertificateData data = certificate_data(s, g.L0, g.K0);
        for (CertificateVariant v : c.variants) {
            CertificateParams p;
            p.delta = c.delta;
            p.delta1 = c.delta1_or_delta();
            p.tau_y = c.tau_M;
            p.tau_u = c.search.tau_u_ratio * c.tau_M;
            p.full_form = c.search.full_form;
            const CertificateProblem prob = build(v, data, p);
            const CertificateResult r = evaluate(prob, c.lmi);
            const std::string tag = to_string(v) + "_N" + std::to_string(N);
            ctx.out->write("certificate_" + tag + ".lmi", [&](std::ostream& o) { export_certificate(o, prob); });
            if (r.feasible()) {
                ctx.out->write("witness_" + tag + ".json",
                               [&](std::ostream& o) { o << witness_json(r.feasibility.witness).dump(2) << '\n'; });
            }
            ctx.out->write("margins_" + tag + ".csv", [&](std::ostream& o) { write_margins(o, r.feasibility.margins); });
            const char* status = to_string(r.feasibility.status);
            table << to_string(v) << ',' << N << ',' << p.delta << ',' << p.delta1 << ',' << p.tau_y << ',' << p.tau_u << ','
                  << status << ',';
            put(table, r.decay ? std::optional<double>(r.decay->delta0) : std::nullopt);
            table << '\n';
            log << to_string(v) << " N=" << N << " tau_M=" << c.tau_M << ": " << status;
            if (r.decay) log << " (decay exponent " << r.decay->delta0 << ")";
            log << '\n';
            any_infeasible |= r.feasibility.status == FeasibilityStatus::Infeasible;
            any_inconclusive |= r.feasibility.status == FeasibilityStatus::Inconclusive;
        }
    }
    ctx.out->write("verdicts.csv", [&](std::ostream& o) { o << table.str(); });
    ctx.out->manifest("verify", c, ctx.threads, ctx.seed);
    if (any_infeasible) return kInfeasible;
    return any_inconclusive ? kInconclusive : kOk;
}

int cmd_max_delay(Context& ctx) {
    const RunConfig& c = ctx.config;
    std::ostream& log = *ctx.log;
    const GainSet g = obtain_gains(ctx).first;
    std::vector<DelayResult> results;
    for (CertificateVariant v : c.variants) {
        for (std::size_t N : c.N) {
            const ModalSystem s = configured_system(c, N, g.delta > 0.0 ? g.delta : c.delta);
            check_gain_shapes(s, g);
            SearchSpec spec = c.search;
            spec.variant = v;
            spec.threads = ctx.threads;
            results.push_back(max_delay(spec, certificate_data(s, g.L0, g.K0), N));
            const DelayResult& r = results.back();
            log << to_string(v) << " N=" << N << ": ";
            if (r.none()) {
                log << "none\n";
            } else {
                log << "tau_M = " << *r.tau_M << " at delta = " << *r.delta;
                if (!is_vector(v)) log << ", delta1 = " << *r.delta1;
                log << '\n';
            }
        }
    }
    ctx.out->write("max_delay.csv", [&](std::ostream& o) { write_delay_csv(o, results); });
    ctx.out->write("grid.csv", [&](std::ostream& o) {
        o << "variant,N,delta,delta1,tau_M,tau_fail,screened\n";
        for (const DelayResult& r : results) {
            for (const GridEntry& e : r.log) {
                o << to_string(r.variant) << ',' << r.N << ',' << e.delta << ',' << e.delta1 << ',';
                put(o, e.tau_M);
                o << ',';
                put(o, e.tau_fail);
                o << ',' << (e.screened ? "yes" : "no") << '\n';
            }
        }
    });
    const std::vector<OrderingReport> ordering = compare_vector_vs_classical(results);
    if (!ordering.empty()) ctx.out->write("ordering.csv", [&](std::ostream& o) { write_ordering_csv(o, ordering); });
    ctx.out->manifest("max-delay", c, ctx.threads, ctx.seed);
    return kOk;
}

int cmd_simulate(Context& ctx) {
    const RunConfig& c = ctx.config;
    std::ostream& log = *ctx.log;
    const GainSet g = obtain_gains(ctx).first;
    const std::size_t N = max_N(c);
    const ModalSystem s = configured_system(c, N, g.delta > 0.0 ? g.delta : c.delta, c.M_sim);
    check_gain_shapes(s, g);
    SimConfig sc;
    sc.M_sim = c.M_sim;
    sc.L0 = g.L0;
    sc.K0 = g.K0;
    sc.T = c.T;
    sc.dt = c.dt;
    sc.record_interval = c.record_interval;
    sc.open_loop = c.open_loop;
    sc.tau_y = {c.kind_y, c.tau_M, c.tau_m};
    sc.tau_u = {c.kind_u, c.tau_M, c.tau_m};
    if (c.z0.coefficients) {
        if (static_cast<std::size_t>(c.z0.coefficients->size()) > c.M_sim) {
            throw Error(ErrorKind::ConfigError, "sim.z0.coefficients longer than M_sim");
        }
        sc.z0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c.M_sim));
        sc.z0.head(c.z0.coefficients->size()) = *c.z0.coefficients;
    } else {
        const ShapeFunction shape = c.z0.shape ? *c.z0.shape : default_initial_shape(c.domain);
        sc.z0 = initial_coefficients(shape, s.basis, c.M_sim);
    }
    const SimTrace tr = simulate_closed_loop(s, sc);
    ctx.out->write("trace.csv", [&](std::ostream& o) { write_trace_csv(o, tr); });
    json summary{{"diverged", tr.diverged}, {"dt", tr.dt}, {"samples", tr.t.size()}, {"t_end", tr.t.back()}};
    json fits = json::object();
    for (const ChannelNorms& ch : norm_channels(tr, c.wiring())) {
        try {
            const DecayFit f = fit_decay(tr.t, ch.values);
            fits[ch.name] = {{"rate", f.rate}, {"residual", f.residual}, {"samples", f.samples},
                             {"initial", ch.values.front()}, {"final", ch.values.back()}};
            log << ch.name << ": decay rate " << f.rate << " (residual " << f.residual << "), final/initial "
                << ch.values.back() / ch.values.front() << '\n';
        } catch (const Error& e) {
            fits[ch.name] = {{"error", e.what()}};
            log << ch.name << ": " << e.what() << '\n';
        }
    }
    summary["fits"] = fits;
    const std::string sum_name = norm_channels(tr, c.wiring()).back().name;
    const bool decaying = fits[sum_name].contains("rate") && fits[sum_name]["rate"].get<double>() > 0.0;
    summary["decaying"] = decaying;
    ctx.out->write("summary.json", [&](std::ostream& o) { o << summary.dump(2) << '\n'; });
    if (tr.diverged) log << "diverged at t = " << tr.t.back() << '\n';
    if (!tr.diverged && !decaying && !c.open_loop) log << "not decaying over the fit window\n";
    ctx.out->manifest("simulate", c, ctx.threads, ctx.seed);
    return tr.diverged || (!decaying && !c.open_loop) ? kInfeasible : kOk;
}

int cmd_reproduce(Context& ctx, const std::string& which) {
    const RunConfig& c = ctx.config;
    std::ostream& log = *ctx.log;
    const std::vector<Wiring> wirings{Wiring::InteriorInterior, Wiring::InteriorBoundary, Wiring::BoundaryInterior};
    json extra{{"reproduce", which}};
    if (which == "table1-check") {
        std::vector<GainCheck> checks;
        for (double q : {3.0, 8.1}) {
            for (Wiring w : wirings) checks.push_back(check_reference_gains(w, q, c.lmi));
        }
        ctx.out->write("table1_check.csv", [&](std::ostream& o) {
            o << "q,wiring,route,verified,observer_abscissa,controller_abscissa,min_margin\n";
            for (const GainCheck& k : checks) {
                double mm = k.margins.empty() ? -1.0 : k.margins.front().margin;
                for (const ConstraintMargin& m : k.margins) mm = std::min(mm, m.margin);
                o << k.q << ',' << to_string(k.wiring) << ',' << to_string(k.route) << ',' << (k.verified ? "yes" : "no")
                  << ',' << k.observer_abscissa << ',' << k.controller_abscissa << ',';
                if (k.margins.empty()) {
                    o << "none";
                } else {
                    o << mm;
                }
                o << '\n';
            }
        });
        ctx.out->write("table1_margins.csv", [&](std::ostream& o) {
            o << "q,wiring,name,margin,satisfied\n";
            for (const GainCheck& k : checks) {
                for (const ConstraintMargin& m : k.margins) {
                    o << k.q << ',' << to_string(k.wiring) << ',' << m.name << ',' << m.margin << ','
                      << (m.satisfied ? "yes" : "no") << '\n';
                }
            }
        });
        for (const GainCheck& k : checks) {
            log << "q=" << k.q << ' ' << to_string(k.wiring) << ": " << (k.verified ? "verified" : "NOT verified")
                << " (observer abscissa " << k.observer_abscissa << ", controller abscissa " << k.controller_abscissa
                << ")\n";
        }
    } else if (which == "table2" || which == "table3") {
        const double q = which == "table2" ? 3.0 : 8.1;
        SearchSpec spec = c.search;
        spec.threads = ctx.threads;
        const DelayTableReport rep = reproduce_delay_table(q, all_variants(), spec, [&](const DelayResult& r) {
            log << to_string(r.variant) << " N=" << r.N << ": ";
            put(log, r.tau_M);
            log << std::endl;
        });
        ctx.out->write(which + ".csv", [&](std::ostream& o) { write_table_csv(o, rep); });
        ctx.out->write(which + "_ordering.csv", [&](std::ostream& o) { write_ordering_csv(o, rep.ordering); });
        log << rep.cells_within() << " of " << rep.cells.size() << " cells within tolerance\n";
        for (const OrderingReport& o : rep.ordering) {
            const bool empty = std::all_of(o.rows.begin(), o.rows.end(), [](const OrderingRow& r) {
                return !r.vector_tau && !r.classical_tau;
            });
            if (empty) {
                log << to_string(o.wiring) << ": no certified delay on any row\n";
                continue;
            }
            log << to_string(o.wiring) << ": vector >= classical on every N: " << (o.vector_dominates ? "yes" : "no");
            if (o.crossover_N) log << ", vector >= classical from N = " << *o.crossover_N;
            log << '\n';
        }
        extra["cells_within"] = rep.cells_within();
        extra["cells"] = rep.cells.size();
        if (q == 8.1) {
            const SpectralBasis basis = rectangle_spectrum(reference_domain(), 64);
            const std::optional<std::string> note = multiplicity_note(basis, 8.1, 0.04);
            json gains = json::array();
            for (Wiring w : wirings) {
                const GainCheck k = check_reference_gains(w, 8.1, c.lmi);
                gains.push_back({{"wiring", to_string(w)},
                                 {"observer_abscissa", k.observer_abscissa},
                                 {"controller_abscissa", k.controller_abscissa}});
            }
            ctx.out->write("table3_notes.txt", [&](std::ostream& o) {
                if (note) o << *note << '\n';
                o << "stored gains, spectral abscissae of A0 - L0 C0 and A0 - B0 K0:\n";
                for (const json& k : gains) {
                    o << "  " << k["wiring"].get<std::string>() << ": " << k["observer_abscissa"].get<double>() << ", "
                      << k["controller_abscissa"].get<double>() << '\n';
                }
            });
            if (note) log << "note: " << *note << '\n';
            extra["stored_gains"] = gains;
        }
    } else if (which == "fig1") {
        json runs = json::array();
        std::vector<std::pair<Wiring, double>> plan;
        for (Wiring w : wirings) plan.emplace_back(w, reference_simulation_delay(w));
        plan.emplace_back(Wiring::InteriorInterior, 0.45);
        for (const auto& [w, tau] : plan) {
            const DecayRun run = decay_run(w, tau, c.T, c.M_sim);
            std::ostringstream name;
            name << "fig1_" << wiring_tag(w) << "_tau" << tau << ".csv";
            ctx.out->write(name.str(), [&](std::ostream& o) {
                o << "t";
                for (const ChannelNorms& ch : run.channels) o << ',' << ch.name;
                o << '\n';
                for (std::size_t i = 0; i < run.trace.t.size(); ++i) {
                    o << run.trace.t[i];
                    for (const ChannelNorms& ch : run.channels) o << ',' << ch.values[i];
                    o << '\n';
                }
            });
            json fits = json::object();
            for (std::size_t i = 0; i < run.channels.size(); ++i) fits[run.channels[i].name] = run.fits[i].rate;
            runs.push_back({{"wiring", to_string(w)}, {"tau_M", tau}, {"diverged", run.trace.diverged},
                            {"l2_ratio", run.l2_ratio}, {"rates", fits}});
            log << to_string(w) << " tau_M=" << tau << ": rate " << run.fits.front().rate << ", final/initial L2 "
                << run.l2_ratio << '\n';
        }
        ctx.out->write("fig1_summary.json", [&](std::ostream& o) { o << runs.dump(2) << '\n'; });
    } else {
        throw Error(ErrorKind::ConfigError, "unknown reproduction '" + which + "'");
    }
    ctx.out->manifest("reproduce", c, ctx.threads, ctx.seed, extra);
    return kOk;
}

}  // namespace heatctl::cli
