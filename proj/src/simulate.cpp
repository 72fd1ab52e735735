#include "heatctl/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "heatctl/error.hpp"

namespace heatctl {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string to_string(DelayKind k) {
    switch (k) {
        case DelayKind::Zero: return "zero";
        case DelayKind::Constant: return "constant";
        case DelayKind::SinSquared: return "sin2";
        case DelayKind::CosSquared: return "cos2";
        case DelayKind::Sawtooth: return "sawtooth";
    }
    return "unknown";
}

DelayKind delay_kind_from_string(const std::string& text) {
    for (DelayKind k : {DelayKind::Zero, DelayKind::Constant, DelayKind::SinSquared, DelayKind::CosSquared,
                        DelayKind::Sawtooth}) {
        if (to_string(k) == text) return k;
    }
    throw Error(ErrorKind::InvalidArgument, "unknown delay kind '" + text + "'");
}

double DelaySpec::operator()(double t) const {
    switch (kind) {
        case DelayKind::Zero: return 0.0;
        case DelayKind::Constant: return tau_M;
        case DelayKind::SinSquared: {
            const double s = std::sin(t);
            return 0.5 * tau_M * (1.0 + s * s);
        }
        case DelayKind::CosSquared: {
            const double c = std::cos(t);
            return 0.5 * tau_M * (1.0 + c * c);
        }
        case DelayKind::Sawtooth: {
            if (tau_M <= 0.0) return 0.0;
            const double r = t - std::floor(t / tau_M) * tau_M;
            return std::clamp(r, 0.0, tau_M);
        }
    }
    return 0.0;
}

ShapeFunction default_initial_shape(const RectangleDomain& domain) {
    ShapeFunction s;
    s.name = "z0";
    s.kind = ShapeKind::Interior;
    TrigPolyTerm px;
    px.poly = (VectorXd(3) << 0.0, domain.a1, -1.0).finished();
    s.x1 = Factor{0.0, domain.a1, {px}};
    TrigPolyTerm cx;
    cx.poly = VectorXd::Ones(1);
    cx.trig = Trig::Cos;
    cx.freq = std::numbers::pi / (2.0 * domain.a2);
    s.x2 = Factor{0.0, domain.a2, {cx}};
    return s;
}

VectorXd initial_coefficients(const ShapeFunction& shape, const SpectralBasis& basis, std::size_t M) {
    if (M > basis.count()) throw Error(ErrorKind::InsufficientBasis, "basis shorter than the requested mode count");
    VectorXd z(static_cast<Index>(M));
    for (std::size_t n = 1; n <= M; ++n) z(static_cast<Index>(n - 1)) = project_interior(shape, basis, n);
    return z;
}

namespace {

// Signals stacked as [y (d), yhat (d), u (d)].
class History {
public:
    History(Index width, double h) : width_(width), h_(h) {}

    void push(const VectorXd& v, const VectorXd& dleft) {
        v_.push_back(v);
        dl_.push_back(dleft);
        dr_.push_back(VectorXd::Zero(width_));
    }
    void set_right_derivative(std::size_t n, const VectorXd& d) { dr_[n] = d; }
    [[nodiscard]] std::size_t last() const { return v_.size() - 1; }
    [[nodiscard]] const VectorXd& value(std::size_t n) const { return v_[n]; }

    // s: lookup time, left: use left limits at grid points, (t_stage, v_stage):
    // current stage for lookups beyond the recorded range.
    [[nodiscard]] VectorXd at(double s, bool left, double t_stage, const VectorXd& v_stage) const {
        if (s < 0.0 || (left && s <= 0.0)) return VectorXd::Zero(width_);
        const std::size_t n = last();
        const double t_last = static_cast<double>(n) * h_;
        const double eps = 1e-12 * h_;
        if (s > t_last + eps) {
            if (t_stage <= t_last) throw Error(ErrorKind::InternalError, "history lookup ahead of the integrator");
            const double th = (s - t_last) / (t_stage - t_last);
            return (1.0 - th) * v_[n] + th * v_stage;
        }
        auto j = static_cast<std::size_t>(std::max(0.0, std::floor(s / h_)));
        j = std::min(j, n);
        double r = s - static_cast<double>(j) * h_;
        if (left && j > 0 && r <= eps) {
            --j;
            r = h_;
        }
        if (j == n) {
            if (r > eps) throw Error(ErrorKind::InternalError, "history lookup outside the recorded range");
            return v_[n];
        }
        const double th = std::clamp(r / h_, 0.0, 1.0);
        const double h00 = (1.0 + 2.0 * th) * (1.0 - th) * (1.0 - th);
        const double h10 = th * (1.0 - th) * (1.0 - th);
        const double h01 = th * th * (3.0 - 2.0 * th);
        const double h11 = th * th * (th - 1.0);
        return h00 * v_[j] + h10 * h_ * dr_[j] + h01 * v_[j + 1] + h11 * h_ * dl_[j + 1];
    }

private:
    Index width_;
    double h_;
    std::vector<VectorXd> v_, dl_, dr_;
};

struct Model {
    Index M{}, N{}, N0{}, d{};
    VectorXd a;       // -lambda_n + q, M entries
    VectorXd lambda;  // M entries
    MatrixXd B;       // M x d
    MatrixXd C;       // M x d
    MatrixXd L;       // N x d, zero below N0
    MatrixXd K;       // d x N0
    bool open_loop{};

    [[nodiscard]] VectorXd signals(const VectorXd& x) const {
        VectorXd s(3 * d);
        s.segment(0, d) = C.transpose() * x.head(M);
        s.segment(d, d) = C.topRows(N).transpose() * x.segment(M, N);
        s.segment(2 * d, d) = open_loop ? VectorXd::Zero(d) : VectorXd(-K * x.segment(M, N0));
        return s;
    }

    [[nodiscard]] VectorXd signal_derivative(const VectorXd& dx) const { return signals(dx); }

    // y_d, yhat_d: measurement channels at t - tau_y; u_d: control at t - tau_u
    [[nodiscard]] VectorXd rhs(const VectorXd& x, const VectorXd& y_d, const VectorXd& yhat_d, const VectorXd& u_d) const {
        VectorXd dx(M + N);
        dx.head(M) = a.cwiseProduct(x.head(M)) + B * u_d;
        dx.segment(M, N) = a.head(N).cwiseProduct(x.segment(M, N)) + B.topRows(N) * u_d - L * (yhat_d - y_d);
        return dx;
    }
};

}  // namespace

SimTrace simulate_closed_loop(const ModalSystem& system, const SimConfig& config) {
    const std::size_t count = system.basis.count();
    if (config.M_sim < 1 || config.M_sim > count || static_cast<Index>(config.M_sim) > system.b_coeffs.rows()) {
        throw Error(ErrorKind::InsufficientBasis, "system basis carries fewer than M_sim modes");
    }
    if (system.n > config.M_sim) throw Error(ErrorKind::InvalidArgument, "M_sim must be at least N");
    Model m;
    m.M = static_cast<Index>(config.M_sim);
    m.N = static_cast<Index>(system.n);
    m.N0 = static_cast<Index>(system.n0);
    m.d = static_cast<Index>(system.d);
    m.open_loop = config.open_loop;
    if (config.L0.rows() != m.N0 || config.L0.cols() != m.d || config.K0.rows() != m.d || config.K0.cols() != m.N0) {
        throw Error(ErrorKind::InvalidArgument, "gain shapes do not match (N0, d)");
    }
    if (config.z0.size() != m.M) throw Error(ErrorKind::InvalidArgument, "z0 must have M_sim coefficients");
    if (config.zhat0 && config.zhat0->size() != m.N) throw Error(ErrorKind::InvalidArgument, "zhat0 must have N entries");
    if (!(config.T > 0.0) || !std::isfinite(config.T)) throw Error(ErrorKind::InvalidArgument, "horizon must be positive");
    for (const DelaySpec* ds : {&config.tau_y, &config.tau_u}) {
        if (!(ds->tau_M >= 0.0) || !(ds->tau_m >= 0.0) || ds->tau_m > ds->tau_M) {
            throw Error(ErrorKind::InvalidArgument, "delay bounds must be non-negative");
        }
    }
    m.lambda.resize(m.M);
    for (Index n = 0; n < m.M; ++n) m.lambda(n) = system.basis.lambda(static_cast<std::size_t>(n + 1));
    m.a = (-m.lambda).array() + system.q;
    m.B = system.b_coeffs.topRows(m.M);
    m.C = system.c_coeffs.topRows(m.M);
    m.L = MatrixXd::Zero(m.N, m.d);
    m.L.topRows(m.N0) = config.L0;
    m.K = config.K0;

    const double tau_max = std::max(config.tau_y.tau_M, config.tau_u.tau_M);
    double dt = config.dt.value_or(tau_max > 0.0 ? std::min(1e-3, tau_max / 50.0) : 1e-3);
    if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "step must be positive");
    const auto steps = static_cast<std::size_t>(std::ceil(config.T / dt - 1e-9));
    const double h = config.T / static_cast<double>(steps);
    for (const DelaySpec* ds : {&config.tau_y, &config.tau_u}) {
        if (ds->tau_m > 0.0 && !(h < ds->tau_m)) throw Error(ErrorKind::InvalidArgument, "step must be below tau_m");
    }
    const auto stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(config.record_interval / h)));

    VectorXd x = VectorXd::Zero(m.M + m.N);
    x.head(m.M) = config.z0;
    if (config.zhat0) x.segment(m.M, m.N) = *config.zhat0;

    const Index d = m.d;
    History hist(3 * d, h);
    hist.push(m.signals(x), VectorXd::Zero(3 * d));

    const auto eval = [&](double t, const VectorXd& state, bool left, VectorXd* y_out, VectorXd* u_out) {
        const VectorXd sig = m.signals(state);
        const VectorXd ly = hist.at(t - config.tau_y(t), left, t, sig);
        const VectorXd lu = hist.at(t - config.tau_u(t), left, t, sig);
        const VectorXd y_d = ly.segment(0, d);
        const VectorXd u_d = lu.segment(2 * d, d);
        if (y_out != nullptr) *y_out = y_d;
        if (u_out != nullptr) *u_out = u_d;
        return m.rhs(state, y_d, ly.segment(d, d), u_d);
    };

    SimTrace tr;
    tr.dt = h;
    const auto record = [&](double t, const VectorXd& state) {
        VectorXd y_d, u_d;
        (void)eval(t, state, false, &y_d, &u_d);
        const VectorXd z = state.head(m.M);
        const VectorXd zh = state.segment(m.M, m.N);
        VectorXd e = z;
        e.head(m.N) -= zh;
        tr.t.push_back(t);
        tr.z.push_back(z);
        tr.zhat.push_back(zh);
        tr.y.push_back(y_d);
        tr.u.push_back(u_d);
        tr.tau_y.push_back(config.tau_y(t));
        tr.tau_u.push_back(config.tau_u(t));
        tr.z_l2.push_back(z.squaredNorm());
        tr.z_h1.push_back(m.lambda.dot(z.cwiseAbs2()));
        tr.e_l2.push_back(e.squaredNorm());
        tr.e_h1.push_back(m.lambda.dot(e.cwiseAbs2()));
    };
    record(0.0, x);

    for (std::size_t n = 0; n < steps; ++n) {
        const double t = static_cast<double>(n) * h;
        const VectorXd k1 = eval(t, x, false, nullptr, nullptr);
        hist.set_right_derivative(n, m.signal_derivative(k1));
        const VectorXd k2 = eval(t + 0.5 * h, x + 0.5 * h * k1, false, nullptr, nullptr);
        const VectorXd k3 = eval(t + 0.5 * h, x + 0.5 * h * k2, false, nullptr, nullptr);
        const VectorXd k4 = eval(t + h, x + h * k3, true, nullptr, nullptr);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double t1 = static_cast<double>(n + 1) * h;
        const VectorXd dl = m.signal_derivative(eval(t1, x, true, nullptr, nullptr));
        hist.push(m.signals(x), dl);
        const double norm = x.head(m.M).squaredNorm();
        if (!std::isfinite(norm) || norm > config.blowup) {
            record(t1, x);
            tr.diverged = true;
            return tr;
        }
        if ((n + 1) % stride == 0 || n + 1 == steps) record(t1, x);
    }
    return tr;
}

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& values, double window) {
    if (t.size() != values.size() || t.size() < 2) throw Error(ErrorKind::UndefinedFit, "need at least two samples");
    if (!(window > 0.0 && window <= 1.0)) throw Error(ErrorKind::InvalidArgument, "window must lie in (0, 1]");
    const double t_end = t.back();
    const double t_start = t_end - window * (t_end - t.front());
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_start - 1e-12) continue;
        if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
            throw Error(ErrorKind::UndefinedFit, "non-positive norm inside the fit window");
        }
        xs.push_back(t[i]);
        ys.push_back(std::log(values[i]));
    }
    if (xs.size() < 2) throw Error(ErrorKind::UndefinedFit, "fewer than two samples in the window");
    const auto n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx <= 0.0) throw Error(ErrorKind::UndefinedFit, "degenerate time window");
    const double slope = sxy / sxx;
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (my + slope * (xs[i] - mx));
        ss += r * r;
    }
    return {-slope, std::sqrt(ss / n), xs.size()};
}

DecayFit fit_decay(const SimTrace& trace, NormChannel channel, double window) {
    switch (channel) {
        case NormChannel::L2: return fit_decay(trace.t, trace.z_l2, window);
        case NormChannel::H1: return fit_decay(trace.t, trace.z_h1, window);
        case NormChannel::ErrorL2: return fit_decay(trace.t, trace.e_l2, window);
        case NormChannel::ErrorH1: return fit_decay(trace.t, trace.e_h1, window);
    }
    throw Error(ErrorKind::InternalError, "unreachable channel");
}

std::vector<ChannelNorms> norm_channels(const SimTrace& trace, Wiring wiring) {
    const bool grad = wiring != Wiring::InteriorInterior;
    const std::vector<double>& z = grad ? trace.z_h1 : trace.z_l2;
    const std::vector<double>& e = grad ? trace.e_h1 : trace.e_l2;
    std::vector<double> sum(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) sum[i] = z[i] + e[i];
    const std::string tag = grad ? "h1" : "l2";
    return {{"z_" + tag, z}, {"e_" + tag, e}, {"sum_" + tag, sum}};
}

void write_trace_csv(std::ostream& out, const SimTrace& trace) {
    out << "t,z_l2,z_h1,e_l2,e_h1,u_norm,tau_y,tau_u\n";
    out << std::setprecision(10);
    for (std::size_t i = 0; i < trace.t.size(); ++i) {
        out << trace.t[i] << ',' << trace.z_l2[i] << ',' << trace.z_h1[i] << ',' << trace.e_l2[i] << ','
            << trace.e_h1[i] << ',' << trace.u[i].norm() << ',' << trace.tau_y[i] << ',' << trace.tau_u[i] << '\n';
    }
}

}  // namespace heatctl
