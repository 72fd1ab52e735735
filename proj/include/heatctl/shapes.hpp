#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "heatctl/spectral.hpp"

namespace heatctl {

enum class Trig { One, Sin, Cos };

/// p(x) * trig(freq * x), with p stored as ascending monomial coefficients.
struct TrigPolyTerm {
    Eigen::VectorXd poly;
    Trig trig{Trig::One};
    double freq{};

    [[nodiscard]] double operator()(double x) const;
};

/// One-dimensional factor: a sum of trig-polynomial terms supported on [lo, hi].
struct Factor {
    double lo{};
    double hi{};
    std::vector<TrigPolyTerm> terms;

    [[nodiscard]] double operator()(double x) const;  // zero outside [lo, hi]
    [[nodiscard]] Factor derivative() const;
};

/// Exact value of the integral of f(x) g(x) over the overlap of both supports.
[[nodiscard]] double integrate_product(const Factor& f, const Factor& g);

/// Same integral via adaptive Gauss-Kronrod; independent of the closed form.
[[nodiscard]] double integrate_product_quadrature(const Factor& f, const Factor& g, double abs_tol = 1e-12);

enum class ShapeKind { Interior, Boundary };

/// Separable actuation/sensing profile. Interior shapes are scale*X(x1)*Y(x2)
/// on the rectangle; boundary shapes are scale*X(x1) on the Neumann edge.
struct ShapeFunction {
    std::string name;
    ShapeKind kind{ShapeKind::Interior};
    double scale{1.0};
    Factor x1;
    Factor x2;  // unused for boundary shapes

    [[nodiscard]] double operator()(double s1, double s2 = 0.0) const;
    [[nodiscard]] double l2_norm_squared() const;
    /// ||grad f||^2 over the rectangle; requires an H^1 profile.
    [[nodiscard]] double gradient_norm_squared(const RectangleDomain& domain) const;
    [[nodiscard]] bool is_h1(const RectangleDomain& domain) const;
    [[nodiscard]] bool vanishes_on_dirichlet(const RectangleDomain& domain) const;
};

/// Catalog profiles f1..f6, g1..g4 for the given rectangle.
[[nodiscard]] ShapeFunction catalog_shape(const std::string& name, const RectangleDomain& domain);
[[nodiscard]] std::vector<std::string> catalog_names();

/// Side length 4/sqrt(3) of the square used by the reference examples.
[[nodiscard]] RectangleDomain reference_domain();

/// Factor for sin(m pi x / a) on [0, a] or cos((k-1/2) pi x / a) on [0, a].
[[nodiscard]] Factor sine_mode(int m, double a);
[[nodiscard]] Factor cosine_half_mode(int k, double a);

}  // namespace heatctl
