#pragma once

// Residual verification of the structure equations tying spin coefficients to
// curvature. Derivatives of the coefficient functions are taken by central
// differences along chord lines with one Richardson level (O(h^4)); every
// curvature term on the right-hand side comes from the exact jet pipeline, so
// a conventions mismatch anywhere in the engine shows up as an O(1) residual
// instead of an O(h^4) one.
//
// The five identities, with D = k[.], delta = m[.]:
//
//   S1: k[rho]   - mbar[kappa] = |kappa|^2 + |sigma|^2 + rho^2 + kappa conj(beta) + Ric(k,k)/2
//   S2: k[sigma] - m[kappa]    = kappa^2 + 2 sigma eps + sigma(rho + conj rho) - kappa beta + Ric(m,m)
//   S3: m[rho]   - mbar[sigma] = 2 sigma conj(beta) + (conj(rho) - rho) kappa + Ric(k,m)
//   S4: k[beta]  - m[eps]      = sigma(conj(kappa) - conj(beta)) + kappa(eps - conj(rho))
//                                + beta(eps + conj(rho)) - Ric(k,m)
//   S5: m[conj(beta)] + mbar[beta] = |sigma|^2 - |rho|^2 - 2|beta|^2 + (rho - conj(rho)) eps
//                                    - Ric(m,mbar) + Ric(k,k)/2
//
// and the two second-Bianchi contractions bid1 / bid2 below.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "chart.hpp"
#include "curvature.hpp"
#include "nptriad.hpp"

namespace ricci3 {

struct IdentityOptions {
    double h_rel = 1e-4;  // chord step as a fraction of the smallest domain side
};

// Central difference with one Richardson level along the chord p + t u.
template <class F>
auto chord_derivative(F&& f, const Vec3& p, const Vec3& u, double h) {
    auto at = [&](double t) { return f(Vec3{p[0] + t * u[0], p[1] + t * u[1], p[2] + t * u[2]}); };
    auto d = [&](double hh) { return (1.0 / (2.0 * hh)) * (at(hh) - at(-hh)); };
    return (1.0 / 3.0) * (4.0 * d(h / 2.0) - d(h));
}

// u[f] at p for a scalar point-function f and direction field u (evaluated at
// p; the derivative only sees the frozen vector).
inline std::complex<double> directional_derivative(const MetricChart& chart, const Vec3& p,
                                                   const std::function<std::complex<double>(const Vec3&)>& f,
                                                   const Vec3& direction, double h_rel = 1e-4) {
    chart.require_inside(p);
    const double h = h_rel * chart.domain.scale();
    return chord_derivative(f, p, direction, h);
}

inline std::complex<double> directional_derivative(const MetricChart& chart, const Vec3& p,
                                                   const std::function<std::complex<double>(const Vec3&)>& f,
                                                   const std::array<Expr, 3>& direction_field,
                                                   double h_rel = 1e-4) {
    Vec3 u;
    for (int c = 0; c < 3; ++c)
        u[c] = direction_field[static_cast<size_t>(c)].eval<double>({p[0], p[1], p[2]}, chart.params);
    return directional_derivative(chart, p, f, u, h_rel);
}

struct ResidualItem {
    std::string label;
    std::complex<double> residual;
    double scale = 0.0;  // largest |term| appearing in the identity

    double relative() const { return std::abs(residual) / std::max(1.0, scale); }
};

namespace detail {

struct TriadPointData {
    SpinCoefficients sc;
    std::complex<double> rkk, rkm, rmm, rmmb;
};

inline TriadPointData triad_point_data(const MetricChart& chart, const Vec3& p, const FrameField& frame) {
    const MetricJets mj = chart.metric_jets(p);
    const Christoffel gam = christoffel_from_jets(mj);
    const FrameDerivatives fd = frame_derivatives(mj, gam, frame, p, chart.params);
    const CurvaturePack pack = curvature_from_jets(mj, p);

    TriadPointData out;
    out.sc = spin_coefficients_from(fd);

    const std::complex<double> I(0.0, 1.0);
    const double s2 = 1.0 / std::sqrt(2.0);
    CVec3 m, mb;
    for (int c = 0; c < 3; ++c) {
        m[c] = s2 * (fd.leg[1][c] - I * fd.leg[2][c]);
        mb[c] = s2 * (fd.leg[1][c] + I * fd.leg[2][c]);
    }
    auto ric = [&](const CVec3& a, const CVec3& b) {
        std::complex<double> s = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                s += pack.ricci[i][j] * a[i] * b[j];
        return s;
    };
    const CVec3 kc = to_cvec(fd.leg[0]);
    out.rkk = ric(kc, kc);
    out.rkm = ric(kc, m);
    out.rmm = ric(m, m);
    out.rmmb = ric(m, mb);
    return out;
}

// Complex derivatives of one scalar taken from the chord samples.
struct DirDerivs {
    std::complex<double> k, m, mbar;
};

struct TriadDerivs {
    DirDerivs kappa, rho, sigma, eps, beta, rkk, rkm, rmm, rmmb;
};

}  // namespace detail

// All seven residuals (S1..S5, bid1, bid2) at one point.
inline std::array<ResidualItem, 7> all_identity_residuals(const MetricChart& chart, const Vec3& p,
                                                          const FrameField& frame,
                                                          const IdentityOptions& opts = {}) {
    using detail::TriadPointData;
    const double h = opts.h_rel * chart.domain.scale();

    const TriadPointData c0 = detail::triad_point_data(chart, p, frame);
    const Vec3 kv = frame.value(0, p, chart.params);
    const Vec3 xv = frame.value(1, p, chart.params);
    const Vec3 yv = frame.value(2, p, chart.params);

    // Chord samples: directions k, x, y at offsets +-h, +-h/2.
    const Vec3 dirs[3] = {kv, xv, yv};
    std::array<std::array<TriadPointData, 4>, 3> samples;  // [dir][offset: +h, -h, +h/2, -h/2]
    for (int d = 0; d < 3; ++d) {
        const double offs[4] = {h, -h, h / 2.0, -h / 2.0};
        for (int o = 0; o < 4; ++o) {
            const Vec3 q = {p[0] + offs[o] * dirs[d][0], p[1] + offs[o] * dirs[d][1],
                            p[2] + offs[o] * dirs[d][2]};
            samples[static_cast<size_t>(d)][static_cast<size_t>(o)] = detail::triad_point_data(chart, q, frame);
        }
    }

    auto deriv = [&](auto&& get) {
        detail::DirDerivs dd{};
        std::complex<double> along[3];
        for (int d = 0; d < 3; ++d) {
            const auto& s = samples[static_cast<size_t>(d)];
            const std::complex<double> d1 = (get(s[0]) - get(s[1])) / (2.0 * h);
            const std::complex<double> d2 = (get(s[2]) - get(s[3])) / h;
            along[d] = (4.0 * d2 - d1) / 3.0;
        }
        const std::complex<double> I(0.0, 1.0);
        const double s2 = 1.0 / std::sqrt(2.0);
        dd.k = along[0];
        dd.m = s2 * (along[1] - I * along[2]);
        dd.mbar = s2 * (along[1] + I * along[2]);
        return dd;
    };

    detail::TriadDerivs D;
    D.kappa = deriv([](const TriadPointData& t) { return t.sc.kappa; });
    D.rho = deriv([](const TriadPointData& t) { return t.sc.rho; });
    D.sigma = deriv([](const TriadPointData& t) { return t.sc.sigma; });
    D.eps = deriv([](const TriadPointData& t) { return t.sc.eps; });
    D.beta = deriv([](const TriadPointData& t) { return t.sc.beta; });
    D.rkk = deriv([](const TriadPointData& t) { return t.rkk; });
    D.rkm = deriv([](const TriadPointData& t) { return t.rkm; });
    D.rmm = deriv([](const TriadPointData& t) { return t.rmm; });
    D.rmmb = deriv([](const TriadPointData& t) { return t.rmmb; });

    const std::complex<double> kap = c0.sc.kappa, rho = c0.sc.rho, sig = c0.sc.sigma, eps = c0.sc.eps,
                               bet = c0.sc.beta;
    const std::complex<double> rkk = c0.rkk, rkm = c0.rkm, rmm = c0.rmm, rmmb = c0.rmmb;
    auto cj = [](std::complex<double> z) { return std::conj(z); };

    auto item = [](const std::string& label, std::initializer_list<std::complex<double>> lhs_terms,
                   std::initializer_list<std::complex<double>> rhs_terms) {
        std::complex<double> l = 0.0, r = 0.0;
        double scale = 0.0;
        for (auto t : lhs_terms) { l += t; scale = std::max(scale, std::abs(t)); }
        for (auto t : rhs_terms) { r += t; scale = std::max(scale, std::abs(t)); }
        return ResidualItem{label, l - r, scale};
    };

    std::array<ResidualItem, 7> out = {
        item("S1", {D.rho.k, -D.kappa.mbar},
             {kap * cj(kap), sig * cj(sig), rho * rho, kap * cj(bet), 0.5 * rkk}),
        item("S2", {D.sigma.k, -D.kappa.m},
             {kap * kap, 2.0 * sig * eps, sig * (rho + cj(rho)), -kap * bet, rmm}),
        item("S3", {D.rho.m, -D.sigma.mbar},
             {2.0 * sig * cj(bet), (cj(rho) - rho) * kap, rkm}),
        item("S4", {D.beta.k, -D.eps.m},
             {sig * (cj(kap) - cj(bet)), kap * (eps - cj(rho)), bet * (eps + cj(rho)), -rkm}),
        item("S5", {cj(D.beta.mbar), D.beta.mbar},
             {sig * cj(sig), -rho * cj(rho), -2.0 * bet * cj(bet), (rho - cj(rho)) * eps, -rmmb, 0.5 * rkk}),
        // bid1: k[Ric(k,m)] - m[Ric(k,k)]/2 + mbar[Ric(m,m)]
        //     = kappa Ric(k,k) + (eps + 2 rho + conj rho) Ric(k,m) + sigma Ric(k,mbar)
        //       - (conj kappa + 2 conj beta) Ric(m,m) - kappa Ric(m,mbar)
        item("bid1", {D.rkm.k, -0.5 * D.rkk.m, D.rmm.mbar},
             {kap * rkk, (eps + 2.0 * rho + cj(rho)) * rkm, sig * cj(rkm),
              -(cj(kap) + 2.0 * cj(bet)) * rmm, -kap * rmmb}),
        // bid2: m[Ric(k,mbar)] + mbar[Ric(k,m)] - k[Ric(m,mbar) - Ric(k,k)/2]
        //     = (rho + conj rho)(Ric(k,k) - Ric(m,mbar)) - conj(sigma) Ric(m,m)
        //       - sigma Ric(mbar,mbar) - (2 conj kappa + conj beta) Ric(k,m)
        //       - (2 kappa + beta) Ric(k,mbar)
        item("bid2", {cj(D.rkm.mbar), D.rkm.mbar, -(D.rmmb.k - 0.5 * D.rkk.k)},
             {(rho + cj(rho)) * (rkk - rmmb), -cj(sig) * rmm, -sig * cj(rmm),
              -(2.0 * cj(kap) + cj(bet)) * rkm, -(2.0 * kap + bet) * cj(rkm)}),
    };
    return out;
}

inline std::array<ResidualItem, 5> curvature_identity_residuals(const MetricChart& chart, const Vec3& p,
                                                                const FrameField& frame,
                                                                const IdentityOptions& opts = {}) {
    const auto all = all_identity_residuals(chart, p, frame, opts);
    return {all[0], all[1], all[2], all[3], all[4]};
}

inline std::array<ResidualItem, 2> bianchi_residuals(const MetricChart& chart, const Vec3& p,
                                                     const FrameField& frame,
                                                     const IdentityOptions& opts = {}) {
    const auto all = all_identity_residuals(chart, p, frame, opts);
    return {all[5], all[6]};
}

// ---- gated scenarios --------------------------------------------------------

enum class Scenario { Thm1, Thm2Constant, Thm2Closed, Thm3 };

inline const char* scenario_name(Scenario s) {
    switch (s) {
        case Scenario::Thm1: return "thm1";
        case Scenario::Thm2Constant: return "thm2-constant";
        case Scenario::Thm2Closed: return "thm2-closed";
        case Scenario::Thm3: return "thm3";
    }
    return "?";
}

inline Scenario scenario_from_name(const std::string& name) {
    if (name == "thm1") return Scenario::Thm1;
    if (name == "thm2-constant") return Scenario::Thm2Constant;
    if (name == "thm2-closed") return Scenario::Thm2Closed;
    if (name == "thm3") return Scenario::Thm3;
    throw std::runtime_error("unknown scenario '" + name + "' (thm1, thm2-constant, thm2-closed, thm3)");
}

struct HypothesisFlag {
    std::string label;
    bool passed = false;
    double measure = 0.0;  // the number compared against the tolerance
};

struct ScenarioCheck {
    std::string label;
    bool applicable = false;
    double residual = 0.0;  // max |residual| over the sampled points
    double scale = 0.0;
};

struct ScenarioReport {
    Scenario scenario{};
    bool applicable = false;  // all hypothesis flags passed
    std::vector<HypothesisFlag> hypotheses;
    std::vector<ScenarioCheck> checks;
};

struct ScenarioOptions {
    double hyp_tol = 1e-6;
    double h_rel = 1e-4;
    double eps_sig = 1e-7;
};

namespace detail {

struct ScenarioPointData {
    TriadPointData td;
    Vec3 lambda{};       // principal Ricci, ascending
    double S = 0.0;
    Mat3 g{};
    Vec3 kvec{}, xvec{}, yvec{};
    double div_x = 0.0, div_y = 0.0;
    double nxx_y = 0.0;  // <nabla_x x, y>
    Vec3 ric_k{};        // (g^-1 Ric) k
    Vec3 ric_x{};        // (g^-1 Ric) x
};

inline double field_divergence(const MetricJets& mj, const Christoffel& gam, const FrameJets& fj, int leg) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) {
        s += fj.dv[leg][i][i];
        for (int j = 0; j < 3; ++j)
            s += gam[i][i][j] * fj.v[leg][j];
    }
    return s;
}

inline ScenarioPointData scenario_point_data(const MetricChart& chart, const Vec3& p, const FrameField& frame,
                                             double eps_sig) {
    ScenarioPointData out;
    const MetricJets mj = chart.metric_jets(p);
    const Christoffel gam = christoffel_from_jets(mj);
    const FrameJets fj = frame_jets(frame, p, chart.params);
    const FrameDerivatives fd = frame_derivatives(mj, gam, frame, p, chart.params);
    const CurvaturePack pack = curvature_from_jets(mj, p);

    out.td.sc = spin_coefficients_from(fd);
    const std::complex<double> I(0.0, 1.0);
    const double s2 = 1.0 / std::sqrt(2.0);
    CVec3 m, mb;
    for (int c = 0; c < 3; ++c) {
        m[c] = s2 * (fd.leg[1][c] - I * fd.leg[2][c]);
        mb[c] = s2 * (fd.leg[1][c] + I * fd.leg[2][c]);
    }
    auto ric = [&](const CVec3& a, const CVec3& b) {
        std::complex<double> s = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                s += pack.ricci[i][j] * a[i] * b[j];
        return s;
    };
    const CVec3 kc = to_cvec(fd.leg[0]);
    out.td.rkk = ric(kc, kc);
    out.td.rkm = ric(kc, m);
    out.td.rmm = ric(m, m);
    out.td.rmmb = ric(m, mb);

    out.lambda = principal_ricci(pack, eps_sig).values;
    out.S = pack.scalar;
    out.g = mj.g;
    out.kvec = fd.leg[0];
    out.xvec = fd.leg[1];
    out.yvec = fd.leg[2];
    out.div_x = field_divergence(mj, gam, fj, 1);
    out.div_y = field_divergence(mj, gam, fj, 2);
    out.nxx_y = ip(mj.g, fd.nabla[1][1], fd.leg[2]);

    const Mat3 ric_op = [&] {
        Mat3 r{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int l = 0; l < 3; ++l)
                    s += mj.ginv[i][l] * pack.ricci[l][j];
                r[i][j] = s;
            }
        return r;
    }();
    out.ric_k = mat_vec(ric_op, fd.leg[0]);
    out.ric_x = mat_vec(ric_op, fd.leg[1]);
    return out;
}

}  // namespace detail

inline ScenarioReport scenario_residuals(const MetricChart& chart, const std::vector<Vec3>& points,
                                         const FrameField& frame, Scenario scenario,
                                         const ScenarioOptions& opts = {}) {
    if (points.empty())
        throw std::runtime_error("scenario_residuals: empty point sample");

    ScenarioReport rep;
    rep.scenario = scenario;
    const double h = opts.h_rel * chart.domain.scale();

    std::vector<detail::ScenarioPointData> data;
    data.reserve(points.size());
    for (const Vec3& p : points)
        data.push_back(detail::scenario_point_data(chart, p, frame, opts.eps_sig));

    // Point functions used by the chord derivatives below.
    auto sc_at = [&](const Vec3& q) { return spin_coefficients(chart, q, frame); };
    auto lambda_at = [&](const Vec3& q) {
        return principal_ricci(curvature(chart, q), opts.eps_sig).values;
    };
    auto divleg_at = [&](const Vec3& q, int leg) {
        const MetricJets mj = chart.metric_jets(q);
        return detail::field_divergence(mj, christoffel_from_jets(mj), frame_jets(frame, q, chart.params), leg);
    };

    auto flag = [&](const std::string& label, double measure, bool small_is_good = true) {
        const bool ok = small_is_good ? measure <= opts.hyp_tol : measure > opts.hyp_tol;
        rep.hypotheses.push_back({label, ok, measure});
        return ok;
    };
    auto check_max = [&](const std::string& label, auto&& per_point_residual_and_scale) {
        ScenarioCheck c;
        c.label = label;
        c.applicable = true;
        for (size_t i = 0; i < points.size(); ++i) {
            auto [r, s] = per_point_residual_and_scale(points[i], data[i]);
            c.residual = std::max(c.residual, std::abs(r));
            c.scale = std::max(c.scale, s);
        }
        rep.checks.push_back(c);
    };
    auto check_na = [&](const std::string& label) {
        rep.checks.push_back({label, false, 0.0, 0.0});
    };

    auto agg_max = [&](auto&& f) {
        double m = 0.0;
        for (size_t i = 0; i < points.size(); ++i)
            m = std::max(m, f(data[i]));
        return m;
    };
    auto agg_min = [&](auto&& f) {
        double m = f(data[0]);
        for (size_t i = 1; i < points.size(); ++i)
            m = std::min(m, f(data[i]));
        return m;
    };

    using C = std::complex<double>;
    using D = detail::ScenarioPointData;

    switch (scenario) {
        case Scenario::Thm1: {
            const double mu = -data[0].lambda[0];
            const double lam_scale = agg_max([](const D& d) {
                return std::max({std::abs(d.lambda[0]), std::abs(d.lambda[1]), std::abs(d.lambda[2])});
            });
            const double tol_scale = std::max(1.0, lam_scale);
            bool ok = true;
            ok &= flag("transverse eigenvalues coincide (pattern (-mu, f, f))",
                       agg_max([](const D& d) { return std::abs(d.lambda[1] - d.lambda[2]); }) / tol_scale);
            ok &= flag("mu positive", agg_min([](const D& d) { return -d.lambda[0]; }), false);
            ok &= flag("f stays away from 0",
                       agg_min([](const D& d) { return std::abs(d.lambda[1]); }), false);
            ok &= flag("f stays away from -mu",
                       agg_min([](const D& d) { return std::abs(d.lambda[1] - d.lambda[0]); }), false);
            ok &= flag("mu constant over the sample",
                       agg_max([&](const D& d) { return std::abs(d.lambda[0] + mu); }) / tol_scale);
            ok &= flag("k spans the -mu eigendirection", agg_max([&](const D& d) {
                           Vec3 r{};
                           for (int c = 0; c < 3; ++c)
                               r[c] = d.ric_k[c] - d.lambda[0] * d.kvec[c];
                           return std::sqrt(std::abs(ip(d.g, r, r)));
                       }) / tol_scale);
            rep.applicable = ok;
            if (!ok)
                break;

            check_max("kappa = 0", [&](const Vec3&, const D& d) {
                return std::pair<C, double>(d.td.sc.kappa, 1.0);
            });
            check_max("k[f] = -(div k)(mu + f)", [&](const Vec3& p, const D& d) {
                const C lhs = chord_derivative([&](const Vec3& q) { return C(lambda_at(q)[1]); }, p, d.kvec, h);
                const C rhs = -d.td.sc.div_k * (mu + d.lambda[1]);
                return std::pair<C, double>(lhs - rhs, std::max(std::abs(lhs), std::abs(rhs)));
            });
            check_max("k[div k] = 2H - (div k)^2 + 2 mu", [&](const Vec3& p, const D& d) {
                const C lhs = chord_derivative([&](const Vec3& q) { return C(sc_at(q).div_k); }, p, d.kvec, h);
                const double Hv = d.td.sc.omega * d.td.sc.omega / 4.0 - d.td.sc.abs_sigma_sq
                                + d.td.sc.div_k * d.td.sc.div_k / 4.0 - mu / 2.0;
                const C rhs = 2.0 * Hv - d.td.sc.div_k * d.td.sc.div_k + 2.0 * mu;
                return std::pair<C, double>(lhs - rhs, std::max(std::abs(lhs), std::abs(rhs)));
            });
            check_max("k[omega] = -(div k) omega", [&](const Vec3& p, const D& d) {
                const C lhs = chord_derivative([&](const Vec3& q) { return C(sc_at(q).omega); }, p, d.kvec, h);
                const C rhs = -d.td.sc.div_k * d.td.sc.omega;
                return std::pair<C, double>(lhs - rhs, std::max(std::abs(lhs), std::abs(rhs)));
            });
            check_max("k[|sigma|^2] = -2 (div k) |sigma|^2", [&](const Vec3& p, const D& d) {
                const C lhs =
                    chord_derivative([&](const Vec3& q) { return C(sc_at(q).abs_sigma_sq); }, p, d.kvec, h);
                const C rhs = -2.0 * d.td.sc.div_k * d.td.sc.abs_sigma_sq;
                return std::pair<C, double>(lhs - rhs, std::max(std::abs(lhs), std::abs(rhs)));
            });
            check_max("k[H] = -(div k) H", [&](const Vec3& p, const D& d) {
                auto Hat = [&](const Vec3& q) {
                    const SpinCoefficients s = sc_at(q);
                    return C(s.omega * s.omega / 4.0 - s.abs_sigma_sq + s.div_k * s.div_k / 4.0 - mu / 2.0);
                };
                const C lhs = chord_derivative(Hat, p, d.kvec, h);
                const double Hv = Hat(p).real();
                const C rhs = -d.td.sc.div_k * Hv;
                return std::pair<C, double>(lhs - rhs, std::max(std::abs(lhs), std::abs(rhs)));
            });

            const double max_div = agg_max([](const D& d) { return std::abs(d.td.sc.div_k); });
            if (max_div <= opts.hyp_tol) {
                check_max("|sigma|^2 - omega^2/4 = mu/2 (divergence-free case)", [&](const Vec3&, const D& d) {
                    const double lhs = d.td.sc.abs_sigma_sq - d.td.sc.omega * d.td.sc.omega / 4.0;
                    return std::pair<C, double>(C(lhs - mu / 2.0), std::max(std::abs(lhs), mu / 2.0));
                });
            } else {
                check_na("|sigma|^2 - omega^2/4 = mu/2 (divergence-free case)");
            }

            const double root = std::sqrt(mu / 2.0);
            const double adapted = agg_max([&](const D& d) {
                return std::max(std::abs(d.td.sc.sigma.real() + root),
                                std::abs(d.td.sc.sigma.imag() - d.td.sc.omega / 2.0));
            });
            if (adapted <= opts.hyp_tol) {
                check_max("(y - omega/(2 sqrt(mu/2)) x)[div y] = -f (adapted frame)",
                          [&](const Vec3& p, const D& d) {
                              const Vec3 w = d.yvec - (d.td.sc.omega / (2.0 * root)) * d.xvec;
                              const C lhs =
                                  chord_derivative([&](const Vec3& q) { return C(divleg_at(q, 2)); }, p, w, h);
                              return std::pair<C, double>(lhs + d.lambda[1],
                                                          std::max(std::abs(lhs), std::abs(d.lambda[1])));
                          });
            } else {
                check_na("(y - omega/(2 sqrt(mu/2)) x)[div y] = -f (adapted frame)");
            }
            break;
        }

        case Scenario::Thm2Constant: {
            const double lam = data[0].lambda[2];
            const double tol_scale = std::max(1.0, std::abs(lam));
            bool ok = true;
            ok &= flag("scalar curvature vanishes", agg_max([](const D& d) { return std::abs(d.S); }) / tol_scale);
            ok &= flag("eigenvalues form (0, lambda, -lambda)", agg_max([](const D& d) {
                           return std::max(std::abs(d.lambda[1]), std::abs(d.lambda[0] + d.lambda[2]));
                       }) / tol_scale);
            ok &= flag("lambda positive", agg_min([](const D& d) { return d.lambda[2]; }), false);
            ok &= flag("eigenvalues constant over the sample", agg_max([&](const D& d) {
                           return std::max(std::abs(d.lambda[2] - lam), std::abs(d.lambda[0] + lam));
                       }) / tol_scale);
            ok &= flag("k spans the kernel", agg_max([&](const D& d) {
                           return std::sqrt(std::abs(ip(d.g, d.ric_k, d.ric_k)));
                       }) / tol_scale);
            ok &= flag("geodesic flow (kappa = 0)",
                       agg_max([](const D& d) { return std::abs(d.td.sc.kappa); }));
            ok &= flag("frame diagonalizes Ric (Ric(m,m) = lambda)", agg_max([&](const D& d) {
                           return std::max(std::abs(d.td.rmm - lam), std::abs(d.td.rmmb));
                       }) / tol_scale);
            rep.applicable = ok;
            if (!ok)
                break;

            const C eps0 = data[0].td.sc.eps;
            check_max("beta = 0", [&](const Vec3&, const D& d) {
                return std::pair<C, double>(d.td.sc.beta, 1.0);
            });
            check_max("(sigma + conj sigma) lambda = 0", [&](const Vec3&, const D& d) {
                return std::pair<C, double>((d.td.sc.sigma + std::conj(d.td.sc.sigma)) * lam,
                                            std::abs(lam));
            });
            check_max("k[rho] = |sigma|^2 + rho^2", [&](const Vec3& p, const D& d) {
                const C lhs = chord_derivative([&](const Vec3& q) { return sc_at(q).rho; }, p, d.kvec, h);
                const C rhs = d.td.sc.abs_sigma_sq + d.td.sc.rho * d.td.sc.rho;
                return std::pair<C, double>(lhs - rhs, std::max(std::abs(lhs), std::abs(rhs)));
            });
            check_max("k[sigma] = 2 sigma eps + sigma(rho + conj rho) + lambda", [&](const Vec3& p, const D& d) {
                const C lhs = chord_derivative([&](const Vec3& q) { return sc_at(q).sigma; }, p, d.kvec, h);
                const C rhs = 2.0 * d.td.sc.sigma * d.td.sc.eps
                            + d.td.sc.sigma * (d.td.sc.rho + std::conj(d.td.sc.rho)) + lam;
                return std::pair<C, double>(lhs - rhs, std::max(std::abs(lhs), std::abs(rhs)));
            });
            check_max("|sigma|^2 - |rho|^2 - i omega eps = 0", [&](const Vec3&, const D& d) {
                const C I(0.0, 1.0);
                const C v = d.td.sc.abs_sigma_sq - std::norm(d.td.sc.rho) - I * d.td.sc.omega * d.td.sc.eps;
                return std::pair<C, double>(v, std::max(d.td.sc.abs_sigma_sq, std::norm(d.td.sc.rho)));
            });
            check_max("eps constant over the sample", [&](const Vec3&, const D& d) {
                return std::pair<C, double>(d.td.sc.eps - eps0, std::abs(eps0));
            });
            check_max("-i c (sigma - conj sigma) = lambda, eps = ic", [&](const Vec3&, const D& d) {
                const C I(0.0, 1.0);
                const double cc = d.td.sc.eps.imag();
                const C v = -I * cc * (d.td.sc.sigma - std::conj(d.td.sc.sigma)) - lam;
                return std::pair<C, double>(v, std::abs(lam));
            });
            check_max("k[|sigma|^2] = -2 (div k) |sigma|^2", [&](const Vec3& p, const D& d) {
                const C lhs =
                    chord_derivative([&](const Vec3& q) { return C(sc_at(q).abs_sigma_sq); }, p, d.kvec, h);
                const C rhs = -2.0 * d.td.sc.div_k * d.td.sc.abs_sigma_sq;
                return std::pair<C, double>(lhs - rhs, std::max(std::abs(lhs), std::abs(rhs)));
            });
            check_max("k[|rho|^2] = -(div k)(|sigma|^2 + |rho|^2)", [&](const Vec3& p, const D& d) {
                const C lhs = chord_derivative([&](const Vec3& q) { return C(std::norm(sc_at(q).rho)); }, p,
                                               d.kvec, h);
                const C rhs = -d.td.sc.div_k * (d.td.sc.abs_sigma_sq + std::norm(d.td.sc.rho));
                return std::pair<C, double>(lhs - rhs, std::max(std::abs(lhs), std::abs(rhs)));
            });
            break;
        }

        case Scenario::Thm2Closed: {
            bool ok = true;
            const double lam_scale =
                std::max(1.0, agg_max([](const D& d) { return std::abs(d.lambda[2]); }));
            ok &= flag("scalar curvature vanishes",
                       agg_max([](const D& d) { return std::abs(d.S); }) / lam_scale);
            ok &= flag("k spans the kernel", agg_max([&](const D& d) {
                           return std::sqrt(std::abs(ip(d.g, d.ric_k, d.ric_k)));
                       }) / lam_scale);
            ok &= flag("geodesic flow (kappa = 0)",
                       agg_max([](const D& d) { return std::abs(d.td.sc.kappa); }));
            ok &= flag("divergence-free flow",
                       agg_max([](const D& d) { return std::abs(d.td.sc.div_k); }));
            ok &= flag("f positive", agg_min([](const D& d) { return d.lambda[2]; }), false);
            ok &= flag("psi real in this frame",
                       agg_max([](const D& d) { return std::abs(d.td.rmm.imag()); }) / lam_scale);
            ok &= flag("x spans the positive eigendirection", agg_max([&](const D& d) {
                           const Vec3 r = d.ric_x - d.lambda[2] * d.xvec;
                           return std::sqrt(std::abs(ip(d.g, r, r)));
                       }) / lam_scale);
            rep.applicable = ok;
            if (!ok)
                break;

            check_max("sigma conj(psi) + conj(sigma) psi = 0", [&](const Vec3&, const D& d) {
                const C psi = d.td.rmm;
                const C v = d.td.sc.sigma * std::conj(psi) + std::conj(d.td.sc.sigma) * psi;
                return std::pair<C, double>(v, std::abs(psi));
            });
            check_max("k[rho] = |sigma|^2 + rho^2", [&](const Vec3& p, const D& d) {
                const C lhs = chord_derivative([&](const Vec3& q) { return sc_at(q).rho; }, p, d.kvec, h);
                const C rhs = d.td.sc.abs_sigma_sq + d.td.sc.rho * d.td.sc.rho;
                return std::pair<C, double>(lhs - rhs, std::max(std::abs(lhs), std::abs(rhs)));
            });
            check_max("k[sigma] = 2 sigma eps + psi", [&](const Vec3& p, const D& d) {
                const C lhs = chord_derivative([&](const Vec3& q) { return sc_at(q).sigma; }, p, d.kvec, h);
                const C rhs = 2.0 * d.td.sc.sigma * d.td.sc.eps + d.td.rmm;
                return std::pair<C, double>(lhs - rhs, std::max(std::abs(lhs), std::abs(rhs)));
            });
            check_max("k[|sigma|^2] = 0", [&](const Vec3& p, const D& d) {
                const C lhs =
                    chord_derivative([&](const Vec3& q) { return C(sc_at(q).abs_sigma_sq); }, p, d.kvec, h);
                return std::pair<C, double>(lhs, std::max(1e-300, d.td.sc.abs_sigma_sq));
            });
            check_max("|sigma|^2 - omega^2/4 = 0", [&](const Vec3&, const D& d) {
                const double v = d.td.sc.abs_sigma_sq - d.td.sc.omega * d.td.sc.omega / 4.0;
                return std::pair<C, double>(C(v), std::max(d.td.sc.abs_sigma_sq, d.td.sc.omega * d.td.sc.omega / 4.0));
            });
            check_max("k[omega] = 0", [&](const Vec3& p, const D& d) {
                const C lhs = chord_derivative([&](const Vec3& q) { return C(sc_at(q).omega); }, p, d.kvec, h);
                return std::pair<C, double>(lhs, std::abs(d.td.sc.omega));
            });
            check_max("psi = -i omega eps", [&](const Vec3&, const D& d) {
                const C I(0.0, 1.0);
                const C v = d.td.rmm + I * d.td.sc.omega * d.td.sc.eps;
                return std::pair<C, double>(v, std::abs(d.td.rmm));
            });
            check_max("x[omega] = -(div x) omega", [&](const Vec3& p, const D& d) {
                const C lhs = chord_derivative([&](const Vec3& q) { return C(sc_at(q).omega); }, p, d.xvec, h);
                const C rhs = -d.div_x * d.td.sc.omega;
                return std::pair<C, double>(lhs - rhs, std::max(std::abs(lhs), std::abs(rhs)));
            });
            check_max("<nabla_x x, y> omega = 0", [&](const Vec3&, const D& d) {
                return std::pair<C, double>(C(d.nxx_y * d.td.sc.omega), std::abs(d.td.sc.omega));
            });
            check_max("x[div x] = -(div x)^2 + psi", [&](const Vec3& p, const D& d) {
                const C lhs = chord_derivative([&](const Vec3& q) { return C(divleg_at(q, 1)); }, p, d.xvec, h);
                const C rhs = -d.div_x * d.div_x + d.td.rmm;
                return std::pair<C, double>(lhs - rhs, std::max(std::abs(lhs), std::abs(rhs)));
            });
            check_max("dg(x,.)(k,y) + twist of x-tetrad = 0", [&](const Vec3& p, const D& d) {
                // d(alpha)(k,y) = k[alpha(y)] - y[alpha(k)] - alpha([k,y]), alpha = g(x,.)
                auto alpha_y = [&](const Vec3& q) {
                    const Mat3 g = chart.metric_value(q);
                    return C(ip(g, frame.value(1, q, chart.params), frame.value(2, q, chart.params)));
                };
                auto alpha_k = [&](const Vec3& q) {
                    const Mat3 g = chart.metric_value(q);
                    return C(ip(g, frame.value(1, q, chart.params), frame.value(0, q, chart.params)));
                };
                const C t1 = chord_derivative(alpha_y, p, d.kvec, h);
                const C t2 = chord_derivative(alpha_k, p, d.yvec, h);
                const FrameJets fj = frame_jets(frame, p, chart.params);
                Vec3 bracket{};
                for (int c = 0; c < 3; ++c) {
                    double s = 0.0;
                    for (int a = 0; a < 3; ++a)
                        s += fj.v[0][a] * fj.dv[2][a][c] - fj.v[2][a] * fj.dv[0][a][c];
                    bracket[c] = s;
                }
                const Mat3 g = chart.metric_value(p);
                const C dalpha = t1 - t2 - ip(g, d.xvec, bracket);
                // Twist of x against the ordered transverse pair (k, y).
                FrameField xf;
                xf.comp[0] = frame.comp[1];
                xf.comp[1] = frame.comp[0];
                xf.comp[2] = frame.comp[2];
                const double omega_tilde = spin_coefficients(chart, p, xf).omega;
                return std::pair<C, double>(dalpha + omega_tilde,
                                            std::max(std::abs(dalpha), std::abs(omega_tilde)));
            });
            const double aligned = agg_max([](const D& d) {
                const C I(0.0, 1.0);
                return std::abs(d.td.sc.sigma - I * d.td.sc.omega / 2.0);
            });
            if (aligned <= opts.hyp_tol) {
                check_max("sigma = i omega / 2 (shear-aligned frame)", [&](const Vec3&, const D& d) {
                    const C I(0.0, 1.0);
                    return std::pair<C, double>(d.td.sc.sigma - I * d.td.sc.omega / 2.0,
                                                std::abs(d.td.sc.omega));
                });
                check_max("conj(rho) = i omega / 2 (shear-aligned frame)", [&](const Vec3&, const D& d) {
                    const C I(0.0, 1.0);
                    return std::pair<C, double>(std::conj(d.td.sc.rho) - I * d.td.sc.omega / 2.0,
                                                std::abs(d.td.sc.omega));
                });
            } else {
                check_na("sigma = i omega / 2 (shear-aligned frame)");
                check_na("conj(rho) = i omega / 2 (shear-aligned frame)");
            }
            break;
        }

        case Scenario::Thm3: {
            const double f0 = data[0].lambda[2];
            const double tol_scale = std::max(1.0, std::abs(f0));
            bool ok = true;
            ok &= flag("Ric(k,.) = 0", agg_max([&](const D& d) {
                           return std::max(std::abs(d.td.rkk), std::abs(d.td.rkm));
                       }) / tol_scale);
            ok &= flag("scalar curvature positive", agg_min([](const D& d) { return d.S; }), false);
            double worst_ks = 0.0;
            for (size_t i = 0; i < points.size(); ++i) {
                const C ds = chord_derivative([&](const Vec3& q) { return C(curvature(chart, q).scalar); },
                                              points[i], data[i].kvec, h);
                worst_ks = std::max(worst_ks, std::abs(ds));
            }
            ok &= flag("k[S] = 0", worst_ks / tol_scale);
            ok &= flag("transverse eigenvalues equal (pattern (0, f, f))", agg_max([](const D& d) {
                           return std::max(std::abs(d.lambda[0]), std::abs(d.lambda[1] - d.lambda[2]));
                       }) / tol_scale);
            rep.applicable = ok;
            if (!ok)
                break;

            check_max("Ric(k,k) = 0", [&](const Vec3&, const D& d) {
                return std::pair<C, double>(d.td.rkk, d.S);
            });
            check_max("Ric(k,m) = 0", [&](const Vec3&, const D& d) {
                return std::pair<C, double>(d.td.rkm, d.S);
            });
            check_max("Ric(m,m) = 0", [&](const Vec3&, const D& d) {
                return std::pair<C, double>(d.td.rmm, d.S);
            });
            check_max("Ric(m,mbar) = S/2", [&](const Vec3&, const D& d) {
                return std::pair<C, double>(d.td.rmmb - d.S / 2.0, d.S);
            });
            check_max("kappa = 0", [&](const Vec3&, const D& d) {
                return std::pair<C, double>(d.td.sc.kappa, 1.0);
            });
            check_max("div k = 0", [&](const Vec3&, const D& d) {
                return std::pair<C, double>(C(d.td.sc.div_k), 1.0);
            });
            check_max("omega^2/4 - |sigma|^2 = 0", [&](const Vec3&, const D& d) {
                const double v = d.td.sc.omega * d.td.sc.omega / 4.0 - d.td.sc.abs_sigma_sq;
                return std::pair<C, double>(C(v), std::max(d.td.sc.omega * d.td.sc.omega / 4.0,
                                                           d.td.sc.abs_sigma_sq));
            });

            const double max_omega = agg_max([](const D& d) { return std::abs(d.td.sc.omega); });
            if (max_omega <= opts.hyp_tol) {
                check_max("sigma = 0 (twist-free branch)", [&](const Vec3&, const D& d) {
                    return std::pair<C, double>(d.td.sc.sigma, 1.0);
                });
                check_max("rho = 0 (twist-free branch)", [&](const Vec3&, const D& d) {
                    return std::pair<C, double>(d.td.sc.rho, 1.0);
                });
                check_max("R(k, ., ., .) = 0 (twist-free branch)", [&](const Vec3& p, const D& d) {
                    const CurvaturePack pack = curvature(chart, p);
                    double worst = 0.0;
                    for (int j = 0; j < 3; ++j)
                        for (int kk = 0; kk < 3; ++kk)
                            for (int l = 0; l < 3; ++l) {
                                double s = 0.0;
                                for (int i = 0; i < 3; ++i)
                                    s += d.kvec[i] * pack.riem(i, j, kk, l);
                                worst = std::max(worst, std::abs(s));
                            }
                    return std::pair<C, double>(C(worst), d.S);
                });
            } else {
                check_na("sigma = 0 (twist-free branch)");
                check_na("rho = 0 (twist-free branch)");
                check_na("R(k, ., ., .) = 0 (twist-free branch)");
                check_max("x[omega] = -(div x) omega (twisting branch)", [&](const Vec3& p, const D& d) {
                    const C lhs = chord_derivative([&](const Vec3& q) { return C(sc_at(q).omega); }, p, d.xvec, h);
                    const C rhs = -d.div_x * d.td.sc.omega;
                    return std::pair<C, double>(lhs - rhs, std::max(std::abs(lhs), std::abs(rhs)));
                });
                check_max("x[div x] = -(div x)^2 - S/2 (twisting branch)", [&](const Vec3& p, const D& d) {
                    const C lhs = chord_derivative([&](const Vec3& q) { return C(divleg_at(q, 1)); }, p, d.xvec, h);
                    const C rhs = -d.div_x * d.div_x - d.S / 2.0;
                    return std::pair<C, double>(lhs - rhs, std::max(std::abs(lhs), std::abs(rhs)));
                });
            }
            break;
        }
    }
    return rep;
}

}  // namespace ricci3
