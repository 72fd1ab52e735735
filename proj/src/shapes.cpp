#include "heatctl/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "heatctl/error.hpp"
#include "heatctl/quadrature.hpp"

namespace heatctl {

namespace {

using Poly = Eigen::VectorXd;
using std::numbers::pi;

double poly_eval(const Poly& p, double x) {
    double acc = 0.0;
    for (Eigen::Index i = p.size() - 1; i >= 0; --i) acc = acc * x + p(i);
    return acc;
}

Poly poly_derivative(const Poly& p) {
    if (p.size() <= 1) return Poly::Zero(1);
    Poly d(p.size() - 1);
    for (Eigen::Index i = 1; i < p.size(); ++i) d(i - 1) = static_cast<double>(i) * p(i);
    return d;
}

Poly poly_multiply(const Poly& a, const Poly& b) {
    Poly out = Poly::Zero(a.size() + b.size() - 1);
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i, b.size()) += a(i) * b;
    return out;
}

double poly_integral(const Poly& p, double lo, double hi) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double e = static_cast<double>(i + 1);
        acc += p(i) * (std::pow(hi, e) - std::pow(lo, e)) / e;
    }
    return acc;
}

// integral of p(x) * exp(i nu x) over [lo, hi]
std::complex<double> poly_exp_integral(const Poly& p, double nu, double lo, double hi) {
    const double reach = std::max(std::abs(lo), std::abs(hi));
    if (std::abs(nu) * reach < 1e-6) {
        // exp(i nu x) by its Taylor polynomial; truncation error below 1e-30 relative
        std::complex<double> acc = 0.0;
        std::complex<double> coeff = 1.0;
        Poly shifted = p;
        for (int n = 0; n <= 5; ++n) {
            acc += coeff * poly_integral(shifted, lo, hi);
            coeff *= std::complex<double>(0.0, nu) / static_cast<double>(n + 1);
            Poly next = Poly::Zero(shifted.size() + 1);
            next.tail(shifted.size()) = shifted;
            shifted = next;
        }
        return acc;
    }
    const std::complex<double> inu(0.0, nu);
    auto antiderivative = [&](double x) {
        std::complex<double> sum = 0.0;
        std::complex<double> denom = inu;
        Poly deriv = p;
        double sign = 1.0;
        for (Eigen::Index j = 0; j < p.size(); ++j) {
            sum += sign * poly_eval(deriv, x) / denom;
            deriv = poly_derivative(deriv);
            denom *= inu;
            sign = -sign;
        }
        return std::exp(inu * x) * sum;
    };
    return antiderivative(hi) - antiderivative(lo);
}

struct TrigComponent {
    double coeff;
    bool is_sin;
    double nu;
};

// trig(a x) * trig(b x) as a sum of cos/sin components
std::vector<TrigComponent> trig_product(Trig ta, double a, Trig tb, double b) {
    if (ta == Trig::One && tb == Trig::One) return {{1.0, false, 0.0}};
    if (ta == Trig::One) return {{1.0, tb == Trig::Sin, b}};
    if (tb == Trig::One) return {{1.0, ta == Trig::Sin, a}};
    if (ta == Trig::Sin && tb == Trig::Sin) return {{0.5, false, a - b}, {-0.5, false, a + b}};
    if (ta == Trig::Cos && tb == Trig::Cos) return {{0.5, false, a - b}, {0.5, false, a + b}};
    if (ta == Trig::Sin) return {{0.5, true, a + b}, {0.5, true, a - b}};  // sin a cos b
    return {{0.5, true, a + b}, {0.5, true, b - a}};                      // cos a sin b
}

double term_product_integral(const TrigPolyTerm& f, const TrigPolyTerm& g, double lo, double hi) {
    const Poly p = poly_multiply(f.poly, g.poly);
    double acc = 0.0;
    for (const TrigComponent& c : trig_product(f.trig, f.freq, g.trig, g.freq)) {
        if (c.nu == 0.0) {
            if (!c.is_sin) acc += c.coeff * poly_integral(p, lo, hi);
            continue;
        }
        const std::complex<double> v = poly_exp_integral(p, c.nu, lo, hi);
        acc += c.coeff * (c.is_sin ? v.imag() : v.real());
    }
    return acc;
}

Poly monomials(std::initializer_list<double> coeffs) {
    Poly p(static_cast<Eigen::Index>(coeffs.size()));
    Eigen::Index i = 0;
    for (double c : coeffs) p(i++) = c;
    return p;
}

Factor constant_factor(double lo, double hi, double value = 1.0) {
    return Factor{lo, hi, {TrigPolyTerm{monomials({value}), Trig::One, 0.0}}};
}

Factor poly_factor(double lo, double hi, std::initializer_list<double> coeffs) {
    return Factor{lo, hi, {TrigPolyTerm{monomials(coeffs), Trig::One, 0.0}}};
}

Factor trig_factor(double lo, double hi, Trig trig, double freq) {
    return Factor{lo, hi, {TrigPolyTerm{monomials({1.0}), trig, freq}}};
}

}  // namespace

double TrigPolyTerm::operator()(double x) const {
    const double p = poly_eval(poly, x);
    switch (trig) {
        case Trig::One: return p;
        case Trig::Sin: return p * std::sin(freq * x);
        case Trig::Cos: return p * std::cos(freq * x);
    }
    return p;
}

double Factor::operator()(double x) const {
    if (x < lo || x > hi) return 0.0;
    double acc = 0.0;
    for (const TrigPolyTerm& t : terms) acc += t(x);
    return acc;
}

Factor Factor::derivative() const {
    Factor d{lo, hi, {}};
    for (const TrigPolyTerm& t : terms) {
        d.terms.push_back(TrigPolyTerm{poly_derivative(t.poly), t.trig, t.freq});
        if (t.trig == Trig::Sin) d.terms.push_back(TrigPolyTerm{t.freq * t.poly, Trig::Cos, t.freq});
        if (t.trig == Trig::Cos) d.terms.push_back(TrigPolyTerm{-t.freq * t.poly, Trig::Sin, t.freq});
    }
    return d;
}

double integrate_product(const Factor& f, const Factor& g) {
    const double lo = std::max(f.lo, g.lo);
    const double hi = std::min(f.hi, g.hi);
    if (!(hi > lo)) return 0.0;
    double acc = 0.0;
    for (const TrigPolyTerm& a : f.terms) {
        for (const TrigPolyTerm& b : g.terms) acc += term_product_integral(a, b, lo, hi);
    }
    return acc;
}

double integrate_product_quadrature(const Factor& f, const Factor& g, double abs_tol) {
    const double lo = std::max(f.lo, g.lo);
    const double hi = std::min(f.hi, g.hi);
    if (!(hi > lo)) return 0.0;
    auto integrand = [&](double x) {
        double fa = 0.0, gb = 0.0;
        for (const TrigPolyTerm& t : f.terms) fa += t(x);
        for (const TrigPolyTerm& t : g.terms) gb += t(x);
        return fa * gb;
    };
    const auto res = integrate_adaptive<double>(integrand, lo, hi, abs_tol);
    if (!res.converged) {
        throw Error(ErrorKind::QuadratureFailure,
                    "adaptive quadrature stopped at error estimate " + std::to_string(res.error_estimate));
    }
    return res.value;
}

double ShapeFunction::operator()(double s1, double s2) const {
    if (kind == ShapeKind::Boundary) return scale * x1(s1);
    return scale * x1(s1) * x2(s2);
}

double ShapeFunction::l2_norm_squared() const {
    const double n1 = integrate_product(x1, x1);
    if (kind == ShapeKind::Boundary) return scale * scale * n1;
    return scale * scale * n1 * integrate_product(x2, x2);
}

namespace {

// a factor is continuous on the whole side if it vanishes at any cut
// strictly inside [0, side]
bool factor_continuous(const Factor& f, double side) {
    const double tol = 1e-12 * (1.0 + side);
    auto value_at = [&](double x) {
        double acc = 0.0;
        for (const TrigPolyTerm& t : f.terms) acc += t(x);
        return acc;
    };
    const double scale = 1.0 + std::abs(value_at((f.lo + f.hi) / 2));
    if (f.lo > tol && std::abs(value_at(f.lo)) > 1e-9 * scale) return false;
    if (f.hi < side - tol && std::abs(value_at(f.hi)) > 1e-9 * scale) return false;
    return true;
}

}  // namespace

bool ShapeFunction::is_h1(const RectangleDomain& domain) const {
    if (kind == ShapeKind::Boundary) return factor_continuous(x1, domain.a1);
    return factor_continuous(x1, domain.a1) && factor_continuous(x2, domain.a2);
}

bool ShapeFunction::vanishes_on_dirichlet(const RectangleDomain& domain) const {
    auto value_at = [](const Factor& f, double x) {
        double acc = 0.0;
        for (const TrigPolyTerm& t : f.terms) acc += t(x);
        return acc;
    };
    const double tol = 1e-9;
    if (!factor_continuous(x1, domain.a1)) return false;
    const bool left = x1.lo > tol || std::abs(value_at(x1, 0.0)) <= tol;
    const bool right = x1.hi < domain.a1 - tol || std::abs(value_at(x1, domain.a1)) <= tol;
    if (kind == ShapeKind::Boundary) return left && right;
    if (!factor_continuous(x2, domain.a2)) return false;
    const bool top = x2.hi < domain.a2 - tol || std::abs(value_at(x2, domain.a2)) <= tol;
    return left && right && top;
}

double ShapeFunction::gradient_norm_squared(const RectangleDomain& domain) const {
    if (kind == ShapeKind::Boundary) {
        throw Error(ErrorKind::InvalidArgument, "gradient norm is defined for interior shapes only");
    }
    if (!is_h1(domain)) throw Error(ErrorKind::InvalidArgument, "shape '" + name + "' is not in H^1 (jump at a support cut)");
    const Factor d1 = x1.derivative();
    const Factor d2 = x2.derivative();
    return scale * scale * (integrate_product(d1, d1) * integrate_product(x2, x2) + integrate_product(x1, x1) * integrate_product(d2, d2));
}

RectangleDomain reference_domain() {
    const double side = 4.0 / std::sqrt(3.0);
    return RectangleDomain(side, side);
}

Factor sine_mode(int m, double a) { return trig_factor(0.0, a, Trig::Sin, m * pi / a); }

Factor cosine_half_mode(int k, double a) { return trig_factor(0.0, a, Trig::Cos, (k - 0.5) * pi / a); }

std::vector<std::string> catalog_names() { return {"f1", "f2", "f3", "f4", "f5", "f6", "g1", "g2", "g3", "g4"}; }

ShapeFunction catalog_shape(const std::string& name, const RectangleDomain& domain) {
    const double a1 = domain.a1;
    const double a2 = domain.a2;
    ShapeFunction s;
    s.name = name;
    if (name == "f1") {
        s.scale = 20.0;
        s.x1 = poly_factor(0.0, a1 / 2, {0.0, 1.0});
        s.x2 = poly_factor(0.0, a2 / 2, {0.0, 1.0, -1.0});
    } else if (name == "f2") {
        s.x1 = poly_factor(a1 / 2, 3 * a1 / 4, {0.0, 1.0});
        s.x2 = poly_factor(a2 / 2, a2, {0.0, 1.0, -1.0});
    } else if (name == "f3") {
        s.x1 = poly_factor(0.0, a1, {0.0, -a1, 1.0});
        s.x2 = poly_factor(0.0, a2, {0.0, 0.0, -a2, 1.0});
    } else if (name == "f4") {
        s.x1 = trig_factor(0.0, a1, Trig::Sin, 2 * pi / a1);
        s.x2 = poly_factor(0.0, a2, {-a2, 1.0});
    } else if (name == "f5") {
        s.kind = ShapeKind::Boundary;
        s.x1 = trig_factor(0.0, a1 / 2, Trig::Sin, 2 * pi / a1);
    } else if (name == "f6") {
        s.kind = ShapeKind::Boundary;
        s.x1 = trig_factor(a1 / 3, 2 * a1 / 3, Trig::Sin, 3 * pi / a1);
    } else if (name == "g1") {
        s.x1 = constant_factor(0.0, a1);
        s.x2 = constant_factor(0.0, a2 / 2);
    } else if (name == "g2") {
        s.x1 = constant_factor(a1 / 2, a1);
        s.x2 = constant_factor(0.0, a2);
    } else if (name == "g3") {
        s.kind = ShapeKind::Boundary;
        s.x1 = constant_factor(0.0, a1 / 4, 0.2);
    } else if (name == "g4") {
        s.kind = ShapeKind::Boundary;
        s.x1 = constant_factor(a1 / 4, a1, 0.2);
    } else {
        throw Error(ErrorKind::InvalidArgument, "unknown catalog shape '" + name + "'");
    }
    return s;
}

}  // namespace heatctl
