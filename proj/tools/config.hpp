#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "heatctl/certificates.hpp"
#include "heatctl/delaysearch.hpp"
#include "heatctl/gains.hpp"
#include "heatctl/shapes.hpp"
#include "heatctl/simulate.hpp"
#include "heatctl/spectral.hpp"

namespace heatctl::cli {

using json = nlohmann::json;

struct GainConfig {
    GainRoute route{GainRoute::Basic};
    std::optional<std::string> import;  // "reference" or a gains CSV path
    double observer_delta{0.01};         // two-step: Step 1 decay target
    std::optional<std::size_t> observer_N;
    std::optional<std::size_t> design_N;  // N of the tail weights in Step 2; default max(N)
    AlphaSearch alpha_search{AlphaSearch::Grid};
};

struct InitialState {
    std::optional<ShapeFunction> shape;       // default shape when both are empty
    std::optional<Eigen::VectorXd> coefficients;
};

struct RunConfig {
    RectangleDomain domain = reference_domain();
    double q{3.0};
    double delta{1.0};
    std::optional<double> delta1;
    std::optional<std::size_t> N0;
    std::vector<std::size_t> N{5};
    std::optional<std::vector<ShapeFunction>> b_shapes;  // reference shapes when absent
    std::optional<std::vector<ShapeFunction>> c_shapes;
    std::vector<CertificateVariant> variants{CertificateVariant::Thm1};
    GainConfig gains;
    DelayKind kind_y{DelayKind::SinSquared};
    DelayKind kind_u{DelayKind::CosSquared};
    double tau_M{0.0};
    double tau_m{0.0};
    SearchSpec search;
    double T{10.0};
    std::optional<double> dt;
    std::size_t M_sim{150};
    double record_interval{0.01};
    bool open_loop{false};
    InitialState z0;
    LmiOptions lmi;
    std::size_t spectrum_count{10};
    json source = json::object();  // as given, for the manifest

    [[nodiscard]] Wiring wiring() const { return wiring_of(variants.front()); }
    [[nodiscard]] double delta1_or_delta() const { return delta1.value_or(delta); }
};

/// Throws Error(ConfigError) on unknown keys, wrong types or non-finite scalars.
[[nodiscard]] RunConfig parse_run_config(const json& j);
[[nodiscard]] RunConfig load_run_config(const std::string& path);

/// FNV-1a 64 of the compact dump of `j`, as 16 hex digits.
[[nodiscard]] std::string config_hash(const json& j);

[[nodiscard]] json shape_to_json(const ShapeFunction& s);

}  // namespace heatctl::cli
