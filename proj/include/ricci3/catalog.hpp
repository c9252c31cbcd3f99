#pragma once

// Built-in metric charts with reference frames and independently known
// curvature data. Expected principal Ricci values come from closed forms
// (constant-curvature models, products) or from the structure-constant
// formula for unimodular Lie groups, never from the engine itself.

#include <map>
#include <string>
#include <vector>

#include "chart.hpp"

namespace ricci3 {

// Principal Ricci curvatures of a unimodular 3-dimensional Lie group with a
// left-invariant metric, in terms of the structure constants of an adapted
// orthonormal eigenframe: [f2,f3] = l1 f1, [f3,f1] = l2 f2, [f1,f2] = l3 f3.
// With mu_i = (l_j + l_k - l_i)/2 the principal values are r_i = 2 mu_j mu_k.
inline Vec3 milnor_ricci(double l1, double l2, double l3) {
    const double m1 = (l2 + l3 - l1) / 2.0;
    const double m2 = (l1 + l3 - l2) / 2.0;
    const double m3 = (l1 + l2 - l3) / 2.0;
    return {2.0 * m2 * m3, 2.0 * m1 * m3, 2.0 * m1 * m2};
}

struct CatalogEntry {
    std::string name;
    std::string description;
    MetricChart chart;  // parameters already bound into chart.params
    FrameField frame;   // reference orthonormal frame (k, x, y)
    std::map<std::string, FrameField> named_frames;  // alternates, e.g. "hopf"

    Vec3 expected_eigen{};  // principal Ricci values at the bound parameters, ascending
    std::array<std::string, 3> expected_eigen_expr{};  // same, in parameter form

    bool has_milnor = false;
    Vec3 milnor_lambda{};  // structure constants of a Milnor eigenframe (not
                           // necessarily the chart frame; sol uses a rotated one)
};

namespace detail {

inline Expr pe(const std::string& text, const std::vector<std::string>& params = {}) {
    return Expr::parse(text, {"x", "y", "z"}, params);
}

inline FrameField frame_from(const std::array<std::array<std::string, 3>, 3>& comp,
                             const std::vector<std::string>& params = {}) {
    FrameField f;
    for (int a = 0; a < 3; ++a)
        for (int c = 0; c < 3; ++c)
            f.comp[static_cast<size_t>(a)][static_cast<size_t>(c)] =
                pe(comp[static_cast<size_t>(a)][static_cast<size_t>(c)], params);
    return f;
}

inline void sort3(Vec3& v) {
    if (v[0] > v[1]) std::swap(v[0], v[1]);
    if (v[1] > v[2]) std::swap(v[1], v[2]);
    if (v[0] > v[1]) std::swap(v[0], v[1]);
}

}  // namespace detail

inline std::vector<std::string> catalog_names() {
    return {"flat",  "round-sphere", "hyperbolic", "nil",
            "sol",   "euclidean-e2-group", "su2-berger", "s2xr"};
}

// Builds a catalog entry. `overrides` may set the entry's parameters
// (round-sphere/hyperbolic/s2xr: r; su2-berger: a); unknown names throw.
inline CatalogEntry catalog_metric(const std::string& name, const ParamMap& overrides = {}) {
    using detail::frame_from;
    using detail::pe;

    CatalogEntry e;
    e.name = name;
    e.chart.name = name;

    auto bind_params = [&](std::map<std::string, double> defaults) {
        for (const auto& [k, v] : overrides) {
            if (!defaults.count(k))
                throw ChartError("metric '" + name + "' has no parameter '" + k + "'");
            defaults[k] = v;
        }
        for (const auto& [k, v] : defaults)
            e.chart.params[k] = v;
    };
    auto box = [](double ax, double bx, double ay, double by, double az, double bz) {
        DomainBox d;
        d.lo = {ax, ay, az};
        d.hi = {bx, by, bz};
        return d;
    };
    auto entries = [&](std::array<std::string, 6> texts, const std::vector<std::string>& params = {}) {
        for (int i = 0; i < 6; ++i)
            e.chart.entries[static_cast<size_t>(i)] = pe(texts[static_cast<size_t>(i)], params);
    };

    const std::string rho = "(x^2+y^2+z^2)";

    if (name == "flat") {
        e.description = "Euclidean metric in Cartesian coordinates";
        bind_params({});
        e.chart.domain = box(-4, 4, -4, 4, -4, 4);
        entries({"1", "0", "0", "1", "0", "1"});
        e.frame = frame_from({{{"0", "0", "1"}, {"1", "0", "0"}, {"0", "1", "0"}}});
        e.expected_eigen = {0, 0, 0};
        e.expected_eigen_expr = {"0", "0", "0"};
        e.has_milnor = true;
        e.milnor_lambda = {0, 0, 0};
    } else if (name == "round-sphere") {
        // Stereographic chart of the radius-r sphere; constant curvature 1/r^2.
        // The default frame rescales the coordinate directions; the "hopf"
        // frame extends the unit Hopf field by quaternion translates.
        e.description = "radius-r sphere in a stereographic chart";
        bind_params({{"r", 1.0}});
        e.chart.domain = box(-4, 4, -4, 4, -4, 4);
        const std::string conf = "4*r^4/(r^2+" + rho + ")^2";
        entries({conf, "0", "0", conf, "0", conf}, {"r"});
        const std::string s = "(r^2+" + rho + ")/(2*r^2)";
        e.frame = frame_from({{{"0", "0", s}, {s, "0", "0"}, {"0", s, "0"}}}, {"r"});
        e.named_frames["hopf"] = frame_from(
            {{{"(1-" + rho + "/r^2)/2 + x^2/r^2", "x*y/r^2 + z/r", "x*z/r^2 - y/r"},
              {"x*y/r^2 - z/r", "(1-" + rho + "/r^2)/2 + y^2/r^2", "y*z/r^2 + x/r"},
              {"x*z/r^2 + y/r", "y*z/r^2 - x/r", "(1-" + rho + "/r^2)/2 + z^2/r^2"}}},
            {"r"});
        const double r = e.chart.params.at("r");
        e.expected_eigen = {2.0 / (r * r), 2.0 / (r * r), 2.0 / (r * r)};
        e.expected_eigen_expr = {"2/r^2", "2/r^2", "2/r^2"};
        e.has_milnor = true;
        e.milnor_lambda = {2.0 / r, 2.0 / r, 2.0 / r};
    } else if (name == "hyperbolic") {
        // Poincare ball of radius r, restricted to a concentric box.
        e.description = "hyperbolic space, Poincare ball chart";
        bind_params({{"r", 1.0}});
        const double r = e.chart.params.at("r");
        e.chart.domain = box(-r / 2, r / 2, -r / 2, r / 2, -r / 2, r / 2);
        const std::string conf = "4*r^4/(r^2-" + rho + ")^2";
        entries({conf, "0", "0", conf, "0", conf}, {"r"});
        const std::string s = "(r^2-" + rho + ")/(2*r^2)";
        e.frame = frame_from({{{"0", "0", s}, {s, "0", "0"}, {"0", s, "0"}}}, {"r"});
        e.expected_eigen = {-2.0 / (r * r), -2.0 / (r * r), -2.0 / (r * r)};
        e.expected_eigen_expr = {"-2/r^2", "-2/r^2", "-2/r^2"};
    } else if (name == "nil") {
        // Heisenberg group: dx^2 + dy^2 + (dz - x dy)^2. The k leg spans the
        // center, the +1/2 principal direction.
        e.description = "Heisenberg group with its standard left-invariant metric";
        bind_params({});
        e.chart.domain = box(-2, 2, -2, 2, -8, 8);
        entries({"1", "0", "0", "1+x^2", "-x", "1"});
        e.frame = frame_from({{{"0", "0", "1"}, {"1", "0", "0"}, {"0", "1", "x"}}});
        e.expected_eigen = {-0.5, -0.5, 0.5};
        e.expected_eigen_expr = {"-1/2", "-1/2", "1/2"};
        e.has_milnor = true;
        e.milnor_lambda = {1, 0, 0};  // frame order (k, x, y)
    } else if (name == "sol") {
        e.description = "solvable group metric exp(2z) dx^2 + exp(-2z) dy^2 + dz^2";
        bind_params({});
        e.chart.domain = box(-2, 2, -2, 2, -2, 2);
        entries({"exp(2*z)", "0", "0", "exp(-2*z)", "0", "1"});
        e.frame = frame_from({{{"0", "0", "1"}, {"exp(-z)", "0", "0"}, {"0", "exp(z)", "0"}}});
        e.expected_eigen = {-2, 0, 0};
        e.expected_eigen_expr = {"-2", "0", "0"};
        e.has_milnor = true;
        e.milnor_lambda = {1, -1, 0};  // eigenframe mixes the two horizontal legs
    } else if (name == "euclidean-e2-group") {
        // Flat metric carried by the Euclidean-plane motion group; the frame
        // rotates with z, so its spin coefficients are nonzero even though
        // every curvature quantity vanishes.
        e.description = "flat metric with the rotating frame of the plane motion group";
        bind_params({});
        e.chart.domain = box(-4, 4, -4, 4, -4, 4);
        entries({"1", "0", "0", "1", "0", "1"});
        e.frame = frame_from({{{"cos(z)", "sin(z)", "0"}, {"-sin(z)", "cos(z)", "0"}, {"0", "0", "1"}}});
        e.expected_eigen = {0, 0, 0};
        e.expected_eigen_expr = {"0", "0", "0"};
        e.has_milnor = true;
        e.milnor_lambda = {1, 1, 0};
    } else if (name == "su2-berger") {
        // Berger sphere: the round metric stretched by a^2 along the Hopf
        // direction. Never has signature (-,+,+): the transverse pair stays
        // together for every a.
        e.description = "Berger sphere, squashed by a along the fiber direction";
        bind_params({{"a", 0.5}});
        const std::string K1 = "((1-" + rho + ")/2 + x^2)";
        const std::string K2 = "(x*y+z)";
        const std::string K3 = "(x*z-y)";
        const std::string P = "4/(1+" + rho + ")^2";
        const std::string Q = "(a^2-1)*16/(1+" + rho + ")^4";
        e.chart.domain = box(-4, 4, -4, 4, -4, 4);
        entries({P + " + " + Q + "*" + K1 + "*" + K1, Q + "*" + K1 + "*" + K2,
                 Q + "*" + K1 + "*" + K3, P + " + " + Q + "*" + K2 + "*" + K2,
                 Q + "*" + K2 + "*" + K3, P + " + " + Q + "*" + K3 + "*" + K3},
                {"a"});
        e.frame = frame_from({{{"(1/a)*" + K1, "(1/a)*" + K2, "(1/a)*" + K3},
                               {"x*y - z", "(1-" + rho + ")/2 + y^2", "y*z + x"},
                               {"x*z + y", "y*z - x", "(1-" + rho + ")/2 + z^2"}}},
                             {"a"});
        const double a = e.chart.params.at("a");
        e.expected_eigen = {2.0 * a * a, 4.0 - 2.0 * a * a, 4.0 - 2.0 * a * a};
        detail::sort3(e.expected_eigen);
        e.expected_eigen_expr = {"2*a^2", "4-2*a^2", "4-2*a^2"};
        e.has_milnor = true;
        e.milnor_lambda = {2.0 * a, 2.0 / a, 2.0 / a};
    } else if (name == "s2xr") {
        // Product of the radius-r sphere (polar coordinates x, y away from
        // the poles) with a line.
        e.description = "product of a radius-r sphere with a line";
        bind_params({{"r", 1.0}});
        e.chart.domain = box(0.15, 3.14159265358979323846 - 0.15, -3, 3, -8, 8);
        entries({"r^2", "0", "0", "r^2*sin(x)^2", "0", "1"}, {"r"});
        e.frame = frame_from({{{"0", "0", "1"}, {"1/r", "0", "0"}, {"0", "1/(r*sin(x))", "0"}}}, {"r"});
        const double r = e.chart.params.at("r");
        e.expected_eigen = {0.0, 1.0 / (r * r), 1.0 / (r * r)};
        e.expected_eigen_expr = {"0", "1/r^2", "1/r^2"};
    } else {
        throw ChartError("unknown catalog metric '" + name + "'");
    }
    return e;
}

inline bool catalog_has(const std::string& name) {
    for (const std::string& n : catalog_names())
        if (n == name)
            return true;
    return false;
}

}  // namespace ricci3
