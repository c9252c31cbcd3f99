#pragma once

// Metric charts: a named coordinate box, bound parameters, six expression
// entries for a symmetric metric tensor, and optional frame fields. Jets of
// the entries supply exact first and second metric derivatives everywhere.

#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "expr.hpp"
#include "linalg.hpp"
#include "rng.hpp"

namespace ricci3 {

struct ChartError : std::runtime_error {
    explicit ChartError(const std::string& what) : std::runtime_error(what) {}
};

struct ChartDomainError : std::runtime_error {
    explicit ChartDomainError(const std::string& what) : std::runtime_error(what) {}
};

struct DomainBox {
    Vec3 lo{-1.0, -1.0, -1.0};
    Vec3 hi{1.0, 1.0, 1.0};

    bool contains(const Vec3& p) const {
        for (int i = 0; i < 3; ++i)
            if (!(p[i] > lo[i] && p[i] < hi[i]))
                return false;
        return true;
    }

    // Smallest side length; used to scale finite-difference steps.
    double scale() const {
        double s = hi[0] - lo[0];
        for (int i = 1; i < 3; ++i)
            s = std::min(s, hi[i] - lo[i]);
        return s;
    }

    // Uniform sample of the box shrunk by `margin` (fraction of each side),
    // keeping finite-difference stencils around the sample inside the domain.
    Vec3 sample(SplitMix64& rng, double margin = 0.05) const {
        Vec3 p;
        for (int i = 0; i < 3; ++i) {
            const double w = hi[i] - lo[i];
            p[i] = rng.uniform(lo[i] + margin * w, hi[i] - margin * w);
        }
        return p;
    }
};

// Symmetric-entry order shared by metric storage and Hessians.
inline constexpr int sym_index[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
inline constexpr int sym_pairs[6][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};

struct MetricJets {
    Mat3 g{};
    Mat3 ginv{};
    std::array<Mat3, 3> dg{};                  // dg[a][i][j] = d_a g_ij
    std::array<std::array<Mat3, 3>, 3> d2g{};  // d2g[a][b][i][j] = d_a d_b g_ij
};

struct MetricChart {
    std::string name;
    std::array<std::string, 3> coords{"x", "y", "z"};
    DomainBox domain;
    ParamMap params;
    std::array<Expr, 6> entries;  // g11, g12, g13, g22, g23, g33

    const Expr& entry(int i, int j) const { return entries[static_cast<size_t>(sym_index[i][j])]; }

    void require_inside(const Vec3& p) const {
        if (!domain.contains(p)) {
            std::ostringstream os;
            os << "point (" << p[0] << ", " << p[1] << ", " << p[2] << ") is outside the chart domain of '"
               << (name.empty() ? "<unnamed>" : name) << "'";
            throw ChartDomainError(os.str());
        }
    }

    Mat3 metric_value(const Vec3& p) const {
        require_inside(p);
        Mat3 g{};
        for (int e = 0; e < 6; ++e) {
            const double v = entries[static_cast<size_t>(e)].eval<double>({p[0], p[1], p[2]}, params);
            g[sym_pairs[e][0]][sym_pairs[e][1]] = v;
            g[sym_pairs[e][1]][sym_pairs[e][0]] = v;
        }
        if (!is_spd(g))
            throw ChartDomainError("metric is not positive definite at the evaluated point in '" + name + "'");
        return g;
    }

    MetricJets metric_jets(const Vec3& p) const {
        require_inside(p);
        const std::array<Jet2, 3> vars = {Jet2::variable(0, p[0]), Jet2::variable(1, p[1]),
                                          Jet2::variable(2, p[2])};
        MetricJets m;
        for (int e = 0; e < 6; ++e) {
            const Jet2 j = entries[static_cast<size_t>(e)].eval<Jet2>(vars, params);
            const int i = sym_pairs[e][0], k = sym_pairs[e][1];
            m.g[i][k] = m.g[k][i] = j.v;
            for (int a = 0; a < 3; ++a) {
                m.dg[a][i][k] = m.dg[a][k][i] = j.d[static_cast<size_t>(a)];
                for (int b = 0; b < 3; ++b) {
                    const double h = j.hess(a, b);
                    m.d2g[a][b][i][k] = m.d2g[a][b][k][i] = h;
                }
            }
        }
        if (!is_spd(m.g))
            throw ChartDomainError("metric is not positive definite at the evaluated point in '" + name + "'");
        m.ginv = inverse3(m.g);
        return m;
    }
};

// Three expression-defined vector fields (k, x, y) forming a frame. The
// spin-coefficient machinery needs their first derivatives, so evaluation
// reports jets of each component.
struct FrameField {
    std::array<std::array<Expr, 3>, 3> comp;  // comp[f][c]: field f in {k,x,y}, component c

    Vec3 value(int f, const Vec3& p, const ParamMap& params) const {
        Vec3 v;
        for (int c = 0; c < 3; ++c)
            v[c] = comp[static_cast<size_t>(f)][static_cast<size_t>(c)].eval<double>({p[0], p[1], p[2]}, params);
        return v;
    }

    // Constant-angle rotation of the transverse legs: x' = cos(a) x + sin(a) y,
    // y' = -sin(a) x + cos(a) y, with the angle folded in as a literal.
    FrameField rotated(double angle) const {
        const Expr c = Expr::literal(std::cos(angle));
        const Expr s = Expr::literal(std::sin(angle));
        FrameField out;
        out.comp[0] = comp[0];
        for (int i = 0; i < 3; ++i) {
            out.comp[1][static_cast<size_t>(i)] =
                c * comp[1][static_cast<size_t>(i)] + s * comp[2][static_cast<size_t>(i)];
            out.comp[2][static_cast<size_t>(i)] =
                c * comp[2][static_cast<size_t>(i)] - s * comp[1][static_cast<size_t>(i)];
        }
        return out;
    }
};

struct FrameJets {
    std::array<Vec3, 3> v{};   // values of k, x, y
    std::array<Mat3, 3> dv{};  // dv[f][a][c] = d_a (field f, component c)
};

inline FrameJets frame_jets(const FrameField& frame, const Vec3& p, const ParamMap& params) {
    const std::array<Jet2, 3> vars = {Jet2::variable(0, p[0]), Jet2::variable(1, p[1]),
                                      Jet2::variable(2, p[2])};
    FrameJets out;
    for (int f = 0; f < 3; ++f)
        for (int c = 0; c < 3; ++c) {
            const Jet2 j = frame.comp[static_cast<size_t>(f)][static_cast<size_t>(c)].eval<Jet2>(vars, params);
            out.v[f][c] = j.v;
            for (int a = 0; a < 3; ++a)
                out.dv[f][a][c] = j.d[static_cast<size_t>(a)];
        }
    return out;
}

// |<k,k>-1|, |<x,x>-1|, |<y,y>-1|, |<k,x>|, |<k,y>|, |<x,y>| at p.
inline std::array<double, 6> orthonormality_residuals(const MetricChart& chart, const FrameField& frame,
                                                      const Vec3& p) {
    const Mat3 g = chart.metric_value(p);
    const Vec3 k = frame.value(0, p, chart.params);
    const Vec3 x = frame.value(1, p, chart.params);
    const Vec3 y = frame.value(2, p, chart.params);
    return {std::abs(ip(g, k, k) - 1.0), std::abs(ip(g, x, x) - 1.0), std::abs(ip(g, y, y) - 1.0),
            std::abs(ip(g, k, x)), std::abs(ip(g, k, y)), std::abs(ip(g, x, y))};
}

// ---- metric spec files ----------------------------------------------------
//
// [chart]
// coords = "x,y,z"
// domain = "(-1,1)x(-1,1)x(-1,1)"
// [params]
// r = 1.0
// [metric]
// g11 = "..."   (six upper-triangle entries; g21 etc. are rejected)
// [frame]
// k = "k1,k2,k3"  (optional section; x and y likewise)

struct MetricFile {
    MetricChart chart;
    std::optional<FrameField> frame;
};

namespace detail {

inline std::string strip(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
        return s.substr(1, s.size() - 2);
    return s;
}

inline std::vector<std::string> split_top_level(const std::string& s, char sep) {
    std::vector<std::string> parts;
    int depth = 0;
    std::string cur;
    for (char c : s) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == sep && depth == 0) {
            parts.push_back(strip(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(strip(cur));
    return parts;
}

inline bool valid_identifier(const std::string& s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_'))
        return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
            return false;
    return true;
}

inline double parse_bound(const std::string& tok, int line_no) {
    try {
        size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size() || !std::isfinite(v))
            throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ChartError("line " + std::to_string(line_no) + ": malformed domain bound '" + tok + "'");
    }
}

inline DomainBox parse_domain(const std::string& text, int line_no) {
    // "(a,b)x(c,d)x(e,f)" with arbitrary spacing.
    DomainBox box;
    size_t pos = 0;
    auto expect = [&](char c) {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos >= text.size() || text[pos] != c)
            throw ChartError("line " + std::to_string(line_no) + ": malformed domain '" + text + "'");
        ++pos;
    };
    auto number = [&]() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        size_t start = pos;
        while (pos < text.size() && text[pos] != ',' && text[pos] != ')')
            ++pos;
        return parse_bound(strip(text.substr(start, pos - start)), line_no);
    };
    for (int i = 0; i < 3; ++i) {
        if (i > 0)
            expect('x');
        expect('(');
        box.lo[i] = number();
        expect(',');
        box.hi[i] = number();
        expect(')');
        if (!(box.lo[i] < box.hi[i]))
            throw ChartError("line " + std::to_string(line_no) + ": empty domain interval in '" + text + "'");
    }
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos != text.size())
        throw ChartError("line " + std::to_string(line_no) + ": malformed domain '" + text + "'");
    return box;
}

}  // namespace detail

inline MetricFile parse_metric_file(const std::string& text, const std::string& display_name = "") {
    using detail::strip;
    using detail::unquote;

    std::string section;
    std::array<std::string, 3> coords{"x", "y", "z"};
    std::optional<DomainBox> domain;
    ParamMap params;
    std::vector<std::string> param_names;
    std::map<std::string, std::string> metric_entries;
    std::map<std::string, std::string> frame_entries;
    bool saw_frame_section = false;

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;

    while (std::getline(in, raw)) {
        ++line_no;
        const size_t hash = raw.find('#');
        if (hash != std::string::npos)
            raw = raw.substr(0, hash);
        for (const std::string& stmt_raw : detail::split_top_level(raw, ';')) {
            const std::string stmt = strip(stmt_raw);
            if (stmt.empty())
                continue;
            if (stmt.front() == '[') {
                if (stmt.back() != ']')
                    throw ChartError("line " + std::to_string(line_no) + ": malformed section header '" + stmt + "'");
                section = strip(stmt.substr(1, stmt.size() - 2));
                if (section != "chart" && section != "params" && section != "metric" && section != "frame")
                    throw ChartError("line " + std::to_string(line_no) + ": unknown section '[" + section + "]'");
                if (section == "frame")
                    saw_frame_section = true;
                continue;
            }
            const size_t eq = stmt.find('=');
            if (eq == std::string::npos)
                throw ChartError("line " + std::to_string(line_no) + ": expected 'key = value' in '" + stmt + "'");
            const std::string key = strip(stmt.substr(0, eq));
            const std::string value = unquote(strip(stmt.substr(eq + 1)));

            if (section == "chart") {
                if (key == "coords") {
                    const auto names = detail::split_top_level(value, ',');
                    if (names.size() != 3)
                        throw ChartError("line " + std::to_string(line_no) + ": coords needs three names");
                    for (int i = 0; i < 3; ++i) {
                        if (!detail::valid_identifier(names[static_cast<size_t>(i)]))
                            throw ChartError("line " + std::to_string(line_no) + ": bad coordinate name '"
                                             + names[static_cast<size_t>(i)] + "'");
                        coords[static_cast<size_t>(i)] = names[static_cast<size_t>(i)];
                    }
                    if (coords[0] == coords[1] || coords[0] == coords[2] || coords[1] == coords[2])
                        throw ChartError("line " + std::to_string(line_no) + ": coordinate names must be distinct");
                } else if (key == "domain") {
                    domain = detail::parse_domain(value, line_no);
                } else {
                    throw ChartError("line " + std::to_string(line_no) + ": unknown [chart] key '" + key + "'");
                }
            } else if (section == "params") {
                if (!detail::valid_identifier(key))
                    throw ChartError("line " + std::to_string(line_no) + ": bad parameter name '" + key + "'");
                params[key] = detail::parse_bound(value, line_no);
                param_names.push_back(key);
            } else if (section == "metric") {
                static const char* allowed[6] = {"g11", "g12", "g13", "g22", "g23", "g33"};
                bool ok = false;
                for (const char* a : allowed)
                    ok = ok || key == a;
                if (!ok)
                    throw ChartError("line " + std::to_string(line_no) + ": unknown metric entry '" + key
                                     + "' (supply the upper triangle g11..g33)");
                metric_entries[key] = value;
            } else if (section == "frame") {
                if (key != "k" && key != "x" && key != "y")
                    throw ChartError("line " + std::to_string(line_no) + ": unknown [frame] key '" + key + "'");
                frame_entries[key] = value;
            } else {
                throw ChartError("line " + std::to_string(line_no) + ": statement before any section: '" + stmt + "'");
            }
        }
    }

    if (!domain)
        throw ChartError("metric file is missing 'domain' in [chart]");
    static const char* required[6] = {"g11", "g12", "g13", "g22", "g23", "g33"};
    for (const char* r : required)
        if (!metric_entries.count(r))
            throw ChartError(std::string("metric file is missing entry '") + r + "'");

    MetricFile out;
    out.chart.name = display_name;
    out.chart.coords = coords;
    out.chart.domain = *domain;
    out.chart.params = params;
    for (int e = 0; e < 6; ++e) {
        const std::string key = std::string("g") + std::to_string(sym_pairs[e][0] + 1)
                              + std::to_string(sym_pairs[e][1] + 1);
        try {
            out.chart.entries[static_cast<size_t>(e)] = Expr::parse(metric_entries[key], coords, param_names);
        } catch (const ParseError& pe) {
            throw ChartError("metric entry " + key + ": " + pe.what());
        }
    }

    if (saw_frame_section) {
        static const char* legs[3] = {"k", "x", "y"};
        FrameField frame;
        for (int f = 0; f < 3; ++f) {
            auto it = frame_entries.find(legs[f]);
            if (it == frame_entries.end())
                throw ChartError(std::string("frame section is missing leg '") + legs[f] + "'");
            const auto comps = detail::split_top_level(it->second, ',');
            if (comps.size() != 3)
                throw ChartError(std::string("frame leg '") + legs[f] + "' needs three components");
            for (int c = 0; c < 3; ++c) {
                try {
                    frame.comp[static_cast<size_t>(f)][static_cast<size_t>(c)] =
                        Expr::parse(comps[static_cast<size_t>(c)], coords, param_names);
                } catch (const ParseError& pe) {
                    throw ChartError(std::string("frame leg '") + legs[f] + "': " + pe.what());
                }
            }
        }
        out.frame = frame;
    }
    return out;
}

inline std::string emit_metric_file(const MetricChart& chart, const std::optional<FrameField>& frame) {
    std::ostringstream os;
    os << "[chart]\n";
    os << "coords = \"" << chart.coords[0] << "," << chart.coords[1] << "," << chart.coords[2] << "\"\n";
    char buf[224];  // six %.17g fields at up to 24 chars each
    std::snprintf(buf, sizeof buf, "domain = \"(%.17g,%.17g)x(%.17g,%.17g)x(%.17g,%.17g)\"\n",
                  chart.domain.lo[0], chart.domain.hi[0], chart.domain.lo[1], chart.domain.hi[1],
                  chart.domain.lo[2], chart.domain.hi[2]);
    os << buf;
    if (!chart.params.empty()) {
        os << "[params]\n";
        for (const auto& [k, v] : chart.params) {
            std::snprintf(buf, sizeof buf, "%s = %.17g\n", k.c_str(), v);
            os << buf;
        }
    }
    os << "[metric]\n";
    for (int e = 0; e < 6; ++e) {
        os << "g" << sym_pairs[e][0] + 1 << sym_pairs[e][1] + 1 << " = \""
           << chart.entries[static_cast<size_t>(e)].to_string(chart.coords) << "\"\n";
    }
    if (frame) {
        os << "[frame]\n";
        static const char* legs[3] = {"k", "x", "y"};
        for (int f = 0; f < 3; ++f) {
            os << legs[f] << " = \"";
            for (int c = 0; c < 3; ++c) {
                if (c)
                    os << ",";
                os << frame->comp[static_cast<size_t>(f)][static_cast<size_t>(c)].to_string(chart.coords);
            }
            os << "\"\n";
        }
    }
    return os.str();
}

}  // namespace ricci3
