#include "heatctl/delaysearch.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>

#include "heatctl/error.hpp"
#include "heatctl/parallel.hpp"

namespace heatctl {

std::vector<double> default_delta_grid() {
    std::vector<double> g;
    for (int i = 0; i < 40; ++i) g.push_back(0.01 * std::pow(1000.0, i / 39.0));
    return g;
}

namespace {

void validate(const SearchSpec& s) {
    if (!(s.tau_tol > 0.0) || !(s.tau_start > 0.0) || !(s.tau_cap >= s.tau_start) || !(s.tau_u_ratio >= 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "search tolerances must be positive");
    }
    for (double d : s.delta_grid) {
        if (!(d > 0.0) || !std::isfinite(d)) throw Error(ErrorKind::InvalidArgument, "delta grid entries must be positive");
    }
    if (!is_vector(s.variant)) {
        if (s.delta1_fractions.empty()) throw Error(ErrorKind::InvalidArgument, "empty delta1 fraction grid");
        for (double f : s.delta1_fractions) {
            if (!(f > 0.0 && f < 1.0)) throw Error(ErrorKind::InvalidArgument, "delta1 fractions must lie in (0, 1)");
        }
    }
}

struct Probe {
    bool ok{};
    Witness witness;
};

Probe probe(const SearchSpec& spec, const CertificateData& data, double delta, double delta1, double tau) {
    CertificateParams p;
    p.delta = delta;
    p.delta1 = delta1;
    p.tau_y = tau;
    p.tau_u = spec.tau_u_ratio * tau;
    p.full_form = spec.full_form;
    const CertificateResult r = evaluate(build(spec.variant, data, p), spec.lmi);
    return {r.feasible(), r.feasibility.witness};
}

// better: larger tau, then smaller delta
bool better(const GridEntry& a, const GridEntry& b) {
    if (!a.tau_M) return false;
    if (!b.tau_M) return true;
    if (*a.tau_M != *b.tau_M) return *a.tau_M > *b.tau_M;
    if (a.delta != b.delta) return a.delta < b.delta;
    return a.delta1 < b.delta1;
}

std::vector<std::pair<double, double>> pairs_for(const SearchSpec& spec, const std::vector<double>& deltas) {
    std::vector<std::pair<double, double>> out;
    for (double d : deltas) {
        if (is_vector(spec.variant)) {
            out.emplace_back(d, d);
        } else {
            for (double f : spec.delta1_fractions) out.emplace_back(d, f * d);
        }
    }
    return out;
}

std::vector<GridEntry> run(const SearchSpec& spec, const CertificateData& data,
                           const std::vector<std::pair<double, double>>& jobs) {
    std::vector<GridEntry> out(jobs.size());
    parallel_for(jobs.size(), spec.threads,
                 [&](std::size_t i) { out[i] = max_delay_at(spec, data, jobs[i].first, jobs[i].second); });
    return out;
}

}  // namespace

GridEntry max_delay_at(const SearchSpec& spec, const CertificateData& data, double delta, double delta1) {
    GridEntry e;
    e.delta = delta;
    e.delta1 = delta1;
    const double shift = is_vector(spec.variant) ? delta : delta - delta1;
    if (data.loop.F0.size() > 0 && data.loop.F0.eigenvalues().real().maxCoeff() + shift >= 0.0) {
        e.tau_fail = 0.0;
        e.screened = true;
        return e;
    }
    Probe p0 = probe(spec, data, delta, delta1, 0.0);
    if (!p0.ok) {
        e.tau_fail = 0.0;
        return e;
    }
    double lo = 0.0;
    Witness lo_w = std::move(p0.witness);
    double hi = spec.tau_start;
    bool capped = false;
    for (;;) {
        Probe p = probe(spec, data, delta, delta1, hi);
        if (!p.ok) break;
        lo = hi;
        lo_w = std::move(p.witness);
        if (hi >= spec.tau_cap) {
            capped = true;
            break;
        }
        hi = std::min(2.0 * hi, spec.tau_cap);
    }
    if (!capped) {
        while (hi - lo > spec.tau_tol) {
            const double mid = 0.5 * (lo + hi);
            Probe p = probe(spec, data, delta, delta1, mid);
            if (p.ok) {
                lo = mid;
                lo_w = std::move(p.witness);
            } else {
                hi = mid;
            }
        }
        e.tau_fail = hi;
    }
    e.tau_M = lo;
    e.witness = std::move(lo_w);
    return e;
}

DelayResult max_delay(const SearchSpec& spec, const CertificateData& data, std::size_t N) {
    validate(spec);
    std::vector<double> deltas = spec.delta_grid.empty() ? default_delta_grid() : spec.delta_grid;
    std::sort(deltas.begin(), deltas.end());
    deltas.erase(std::unique(deltas.begin(), deltas.end()), deltas.end());

    DelayResult res;
    res.variant = spec.variant;
    res.N = N;
    res.log = run(spec, data, pairs_for(spec, deltas));

    const auto best_of = [](const std::vector<GridEntry>& log) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < log.size(); ++i) {
            if (better(log[i], log[best])) best = i;
        }
        return best;
    };
    std::size_t best = best_of(res.log);
    if (spec.refine && res.log[best].tau_M && deltas.size() > 1 && spec.refine_points > 0) {
        const auto at = std::find(deltas.begin(), deltas.end(), res.log[best].delta) - deltas.begin();
        const double lo = deltas[static_cast<std::size_t>(std::max<std::ptrdiff_t>(at - 1, 0))];
        const double hi = deltas[static_cast<std::size_t>(std::min<std::ptrdiff_t>(at + 1, std::ssize(deltas) - 1))];
        std::vector<double> fine;
        for (int i = 1; i <= spec.refine_points; ++i) {
            const double d = lo * std::pow(hi / lo, static_cast<double>(i) / (spec.refine_points + 1));
            if (std::find(deltas.begin(), deltas.end(), d) == deltas.end()) fine.push_back(d);
        }
        std::vector<GridEntry> extra = run(spec, data, pairs_for(spec, fine));
        res.log.insert(res.log.end(), std::make_move_iterator(extra.begin()), std::make_move_iterator(extra.end()));
        best = best_of(res.log);
    }
    const GridEntry& b = res.log[best];
    if (b.tau_M) {
        res.delta = b.delta;
        res.delta1 = b.delta1;
        res.tau_M = b.tau_M;
        res.tau_fail = b.tau_fail;
        res.witness = b.witness;
    }
    return res;
}

std::vector<OrderingReport> compare_vector_vs_classical(const std::vector<DelayResult>& results) {
    std::map<std::pair<int, std::size_t>, std::pair<const DelayResult*, const DelayResult*>> paired;
    for (const DelayResult& r : results) {
        auto& slot = paired[{static_cast<int>(wiring_of(r.variant)), r.N}];
        (is_vector(r.variant) ? slot.first : slot.second) = &r;
    }
    std::map<int, OrderingReport> by_wiring;
    for (const auto& [key, pr] : paired) {
        if (pr.first == nullptr || pr.second == nullptr) continue;
        OrderingReport& rep = by_wiring[key.first];
        rep.wiring = static_cast<Wiring>(key.first);
        OrderingRow row;
        row.N = key.second;
        row.vector_tau = pr.first->tau_M;
        row.classical_tau = pr.second->tau_M;
        row.difference = row.vector_tau.value_or(0.0) - row.classical_tau.value_or(0.0);
        row.winner = row.difference > 0.0 ? "vector" : row.difference < 0.0 ? "classical" : "tie";
        rep.rows.push_back(row);
    }
    std::vector<OrderingReport> out;
    for (auto& [w, rep] : by_wiring) {
        rep.vector_dominates = std::all_of(rep.rows.begin(), rep.rows.end(),
                                           [](const OrderingRow& r) { return r.difference >= 0.0; });
        for (std::size_t i = rep.rows.size(); i-- > 0;) {
            if (rep.rows[i].difference < 0.0) break;
            rep.crossover_N = rep.rows[i].N;
        }
        out.push_back(std::move(rep));
    }
    return out;
}

void write_delay_csv(std::ostream& out, const std::vector<DelayResult>& results) {
    out << "variant,N,delta,tau_M\n";
    const auto opt = [&](const std::optional<double>& v) {
        if (v) {
            out << std::setprecision(6) << *v;
        } else {
            out << "none";
        }
    };
    for (const DelayResult& r : results) {
        out << to_string(r.variant) << ',' << r.N << ',';
        opt(r.delta);
        out << ',';
        opt(r.tau_M);
        out << '\n';
    }
}

}  // namespace heatctl
