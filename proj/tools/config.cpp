#include "config.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <set>
#include <sstream>

#include "heatctl/error.hpp"

namespace heatctl::cli {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw Error(ErrorKind::ConfigError, where + ": " + what);
}

void allow(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) fail(where, "expected an object");
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!ok.count(it.key())) fail(where, "unknown key '" + it.key() + "'");
    }
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(where, "must be finite");
    return v;
}

double positive(const json& j, const std::string& where) {
    const double v = number(j, where);
    if (!(v > 0.0)) fail(where, "must be positive");
    return v;
}

double nonnegative(const json& j, const std::string& where) {
    const double v = number(j, where);
    if (v < 0.0) fail(where, "must be non-negative");
    return v;
}

std::size_t count(const json& j, const std::string& where) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) fail(where, "expected an integer");
    const auto v = j.get<long long>();
    if (v < 0) fail(where, "must be non-negative");
    return static_cast<std::size_t>(v);
}

std::string text(const json& j, const std::string& where) {
    if (!j.is_string()) fail(where, "expected a string");
    return j.get<std::string>();
}

bool flag(const json& j, const std::string& where) {
    if (!j.is_boolean()) fail(where, "expected true or false");
    return j.get<bool>();
}

std::vector<double> numbers(const json& j, const std::string& where) {
    if (!j.is_array()) fail(where, "expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

template <class Fn>
auto convert(const std::string& where, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ConfigError) throw;
        fail(where, e.what());
    }
}

Trig trig_from(const std::string& s, const std::string& where) {
    if (s == "one") return Trig::One;
    if (s == "sin") return Trig::Sin;
    if (s == "cos") return Trig::Cos;
    fail(where, "trig must be one, sin or cos");
}

const char* trig_name(Trig t) {
    switch (t) {
        case Trig::One: return "one";
        case Trig::Sin: return "sin";
        case Trig::Cos: return "cos";
    }
    return "one";
}

Factor factor_from(const json& j, const std::string& where) {
    allow(j, where, {"lo", "hi", "terms"});
    Factor f;
    f.lo = number(j.at("lo"), where + ".lo");
    f.hi = number(j.at("hi"), where + ".hi");
    if (!(f.hi > f.lo)) fail(where, "hi must exceed lo");
    const json& terms = j.at("terms");
    if (!terms.is_array() || terms.empty()) fail(where + ".terms", "expected a non-empty array");
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::string w = where + ".terms[" + std::to_string(i) + "]";
        allow(terms[i], w, {"poly", "trig", "freq"});
        TrigPolyTerm t;
        const std::vector<double> p = numbers(terms[i].at("poly"), w + ".poly");
        if (p.empty()) fail(w + ".poly", "needs at least one coefficient");
        t.poly = Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
        if (terms[i].contains("trig")) t.trig = trig_from(text(terms[i]["trig"], w + ".trig"), w + ".trig");
        if (terms[i].contains("freq")) t.freq = number(terms[i]["freq"], w + ".freq");
        f.terms.push_back(t);
    }
    return f;
}

json factor_to_json(const Factor& f) {
    json terms = json::array();
    for (const TrigPolyTerm& t : f.terms) {
        terms.push_back({{"poly", std::vector<double>(t.poly.data(), t.poly.data() + t.poly.size())},
                         {"trig", trig_name(t.trig)},
                         {"freq", t.freq}});
    }
    return {{"lo", f.lo}, {"hi", f.hi}, {"terms", terms}};
}

ShapeFunction shape_from(const json& j, const RectangleDomain& dom, const std::string& where) {
    if (j.is_string()) return convert(where, [&] { return catalog_shape(j.get<std::string>(), dom); });
    allow(j, where, {"name", "kind", "scale", "x1", "x2"});
    ShapeFunction s;
    s.name = j.contains("name") ? text(j["name"], where + ".name") : "custom";
    const std::string kind = j.contains("kind") ? text(j["kind"], where + ".kind") : "interior";
    if (kind == "interior") {
        s.kind = ShapeKind::Interior;
    } else if (kind == "boundary") {
        s.kind = ShapeKind::Boundary;
    } else {
        fail(where + ".kind", "must be interior or boundary");
    }
    if (j.contains("scale")) s.scale = number(j["scale"], where + ".scale");
    s.x1 = factor_from(j.at("x1"), where + ".x1");
    if (s.kind == ShapeKind::Interior) {
        if (!j.contains("x2")) fail(where, "interior shapes need x2");
        s.x2 = factor_from(j["x2"], where + ".x2");
    } else if (j.contains("x2")) {
        fail(where, "boundary shapes take no x2");
    }
    return s;
}

std::vector<ShapeFunction> shapes_from(const json& j, const RectangleDomain& dom, const std::string& where) {
    if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array");
    std::vector<ShapeFunction> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(shape_from(j[i], dom, where + "[" + std::to_string(i) + "]"));
    return out;
}

template <class T>
std::vector<T> one_or_many(const json& j, const std::string& where, T (*each)(const json&, const std::string&)) {
    std::vector<T> out;
    if (j.is_array()) {
        if (j.empty()) fail(where, "must not be empty");
        for (std::size_t i = 0; i < j.size(); ++i) out.push_back(each(j[i], where + "[" + std::to_string(i) + "]"));
    } else {
        out.push_back(each(j, where));
    }
    return out;
}

std::size_t positive_count(const json& j, const std::string& where) {
    const std::size_t n = count(j, where);
    if (n == 0) fail(where, "must be at least 1");
    return n;
}

CertificateVariant variant_from(const json& j, const std::string& where) {
    const std::string s = text(j, where);
    return convert(where, [&] { return variant_from_string(s); });
}

}  // namespace

RunConfig parse_run_config(const json& j) {
    allow(j, "config", {"domain", "problem", "shapes", "variant", "gains", "delays", "sim", "solver", "spectrum"});
    RunConfig c;
    c.source = j;
    if (j.contains("domain")) {
        const json& d = j["domain"];
        allow(d, "domain", {"a1", "a2"});
        c.domain = RectangleDomain(positive(d.at("a1"), "domain.a1"), positive(d.at("a2"), "domain.a2"));
    }
    if (j.contains("problem")) {
        const json& p = j["problem"];
        allow(p, "problem", {"q", "delta", "delta1", "N0", "N"});
        if (p.contains("q")) c.q = number(p["q"], "problem.q");
        if (p.contains("delta")) c.delta = positive(p["delta"], "problem.delta");
        if (p.contains("delta1")) c.delta1 = positive(p["delta1"], "problem.delta1");
        if (p.contains("N0")) c.N0 = count(p["N0"], "problem.N0");
        if (p.contains("N")) c.N = one_or_many<std::size_t>(p["N"], "problem.N", positive_count);
    }
    if (j.contains("variant")) c.variants = one_or_many<CertificateVariant>(j["variant"], "variant", variant_from);
    for (CertificateVariant v : c.variants) {
        if (wiring_of(v) != c.wiring()) fail("variant", "all variants must share one wiring");
    }
    if (j.contains("shapes")) {
        const json& s = j["shapes"];
        allow(s, "shapes", {"b", "c"});
        if (s.contains("b")) c.b_shapes = shapes_from(s["b"], c.domain, "shapes.b");
        if (s.contains("c")) c.c_shapes = shapes_from(s["c"], c.domain, "shapes.c");
        if (c.b_shapes.has_value() != c.c_shapes.has_value()) fail("shapes", "give both b and c");
        if (c.b_shapes && c.b_shapes->size() != c.c_shapes->size()) fail("shapes", "b and c need the same count");
    }
    if (j.contains("gains")) {
        const json& g = j["gains"];
        allow(g, "gains", {"route", "import", "observer_delta", "observer_N", "design_N", "alpha_search"});
        if (g.contains("route")) {
            const std::string r = text(g["route"], "gains.route");
            c.gains.route = convert("gains.route", [&] { return gain_route_from_string(r); });
        }
        if (g.contains("import")) c.gains.import = text(g["import"], "gains.import");
        if (c.gains.route == GainRoute::Imported && !c.gains.import) fail("gains", "route imported needs an import source");
        if (c.gains.import && c.gains.route != GainRoute::Imported) fail("gains", "import requires route imported");
        if (g.contains("observer_delta")) c.gains.observer_delta = positive(g["observer_delta"], "gains.observer_delta");
        if (g.contains("observer_N")) c.gains.observer_N = positive_count(g["observer_N"], "gains.observer_N");
        if (g.contains("design_N")) c.gains.design_N = positive_count(g["design_N"], "gains.design_N");
        if (g.contains("alpha_search")) {
            const std::string a = text(g["alpha_search"], "gains.alpha_search");
            if (a == "grid") {
                c.gains.alpha_search = AlphaSearch::Grid;
            } else if (a == "joint") {
                c.gains.alpha_search = AlphaSearch::Joint;
            } else {
                fail("gains.alpha_search", "must be grid or joint");
            }
        }
    }
    if (j.contains("delays")) {
        const json& d = j["delays"];
        allow(d, "delays", {"kind_y", "kind_u", "tau_M", "tau_m", "sweep"});
        const auto kind = [&](const char* key) {
            const std::string w = std::string("delays.") + key;
            const std::string s = text(d[key], w);
            return convert(w, [&] { return delay_kind_from_string(s); });
        };
        if (d.contains("kind_y")) c.kind_y = kind("kind_y");
        if (d.contains("kind_u")) c.kind_u = kind("kind_u");
        if (d.contains("tau_M")) c.tau_M = nonnegative(d["tau_M"], "delays.tau_M");
        if (d.contains("tau_m")) c.tau_m = nonnegative(d["tau_m"], "delays.tau_m");
        if (c.tau_m > c.tau_M) fail("delays.tau_m", "must not exceed tau_M");
        if (d.contains("sweep")) {
            const json& s = d["sweep"];
            allow(s, "delays.sweep", {"delta_grid", "refine", "refine_points", "delta1_fractions", "tau_tol", "tau_start",
                                      "tau_cap", "tau_u_ratio", "full_form"});
            if (s.contains("delta_grid")) {
                c.search.delta_grid = numbers(s["delta_grid"], "delays.sweep.delta_grid");
                for (double v : c.search.delta_grid) {
                    if (!(v > 0.0)) fail("delays.sweep.delta_grid", "entries must be positive");
                }
            }
            if (s.contains("refine")) c.search.refine = flag(s["refine"], "delays.sweep.refine");
            if (s.contains("refine_points")) {
                c.search.refine_points = static_cast<int>(count(s["refine_points"], "delays.sweep.refine_points"));
            }
            if (s.contains("delta1_fractions")) {
                c.search.delta1_fractions = numbers(s["delta1_fractions"], "delays.sweep.delta1_fractions");
                for (double f : c.search.delta1_fractions) {
                    if (!(f > 0.0 && f < 1.0)) fail("delays.sweep.delta1_fractions", "entries must lie in (0, 1)");
                }
            }
            if (s.contains("tau_tol")) c.search.tau_tol = positive(s["tau_tol"], "delays.sweep.tau_tol");
            if (s.contains("tau_start")) c.search.tau_start = positive(s["tau_start"], "delays.sweep.tau_start");
            if (s.contains("tau_cap")) c.search.tau_cap = positive(s["tau_cap"], "delays.sweep.tau_cap");
            if (s.contains("tau_u_ratio")) c.search.tau_u_ratio = nonnegative(s["tau_u_ratio"], "delays.sweep.tau_u_ratio");
            if (s.contains("full_form")) c.search.full_form = flag(s["full_form"], "delays.sweep.full_form");
            if (c.search.tau_cap < c.search.tau_start) fail("delays.sweep", "tau_cap below tau_start");
        }
    }
    if (j.contains("sim")) {
        const json& s = j["sim"];
        allow(s, "sim", {"T", "dt", "M_sim", "z0", "record_interval", "open_loop"});
        if (s.contains("T")) c.T = positive(s["T"], "sim.T");
        if (s.contains("dt")) c.dt = positive(s["dt"], "sim.dt");
        if (s.contains("M_sim")) c.M_sim = positive_count(s["M_sim"], "sim.M_sim");
        if (s.contains("record_interval")) c.record_interval = positive(s["record_interval"], "sim.record_interval");
        if (s.contains("open_loop")) c.open_loop = flag(s["open_loop"], "sim.open_loop");
        if (s.contains("z0")) {
            const json& z = s["z0"];
            if (z.is_string() && z.get<std::string>() == "default") {
                // default shape
            } else if (z.is_string()) {
                c.z0.shape = shape_from(z, c.domain, "sim.z0");
            } else {
                allow(z, "sim.z0", {"shape", "coefficients"});
                if (z.contains("shape") == z.contains("coefficients")) fail("sim.z0", "give exactly one of shape, coefficients");
                if (z.contains("shape")) c.z0.shape = shape_from(z["shape"], c.domain, "sim.z0.shape");
                if (z.contains("coefficients")) {
                    const std::vector<double> v = numbers(z["coefficients"], "sim.z0.coefficients");
                    c.z0.coefficients = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
                }
            }
        }
        if (c.z0.shape && c.z0.shape->kind != ShapeKind::Interior) fail("sim.z0", "initial shape must be interior");
    }
    if (j.contains("solver")) {
        const json& s = j["solver"];
        allow(s, "solver", {"eps_strict", "infeasible_tol", "verify_tol", "max_iterations", "gap_tol"});
        if (s.contains("eps_strict")) c.lmi.eps_strict = positive(s["eps_strict"], "solver.eps_strict");
        if (s.contains("infeasible_tol")) c.lmi.infeasible_tol = positive(s["infeasible_tol"], "solver.infeasible_tol");
        if (s.contains("verify_tol")) c.lmi.verify_tol = positive(s["verify_tol"], "solver.verify_tol");
        if (s.contains("max_iterations")) {
            c.lmi.sdp.max_iterations = static_cast<int>(positive_count(s["max_iterations"], "solver.max_iterations"));
        }
        if (s.contains("gap_tol")) c.lmi.sdp.gap_tol = positive(s["gap_tol"], "solver.gap_tol");
    }
    if (j.contains("spectrum")) {
        const json& s = j["spectrum"];
        allow(s, "spectrum", {"count"});
        if (s.contains("count")) c.spectrum_count = positive_count(s["count"], "spectrum.count");
    }
    c.search.lmi = c.lmi;
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot open config '" + path + "'");
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::ConfigError, std::string("malformed config: ") + e.what());
    }
    return parse_run_config(j);
}

std::string config_hash(const json& j) {
    std::uint64_t h = 14695981039346656037ull;
    for (const unsigned char ch : j.dump()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

json shape_to_json(const ShapeFunction& s) {
    json j{{"name", s.name}, {"kind", s.kind == ShapeKind::Interior ? "interior" : "boundary"}, {"scale", s.scale},
           {"x1", factor_to_json(s.x1)}};
    if (s.kind == ShapeKind::Interior) j["x2"] = factor_to_json(s.x2);
    return j;
}

}  // namespace heatctl::cli
