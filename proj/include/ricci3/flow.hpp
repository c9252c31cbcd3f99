#pragma once

// Integral curves of a unit field k, parallel transport of the transverse
// legs, and the scalar evolution laws satisfied along the flow:
//
//   k[theta]     = 2H - theta^2 + 2 mu
//   k[omega]     = -theta omega
//   k[H]         = -theta H
//   k[|sigma|^2] = -2 theta |sigma|^2
//   k[|rho|^2]   = -theta (|sigma|^2 + |rho|^2)
//
// with theta = div k and H = det D - mu/2. Residuals use a centered 5-point
// stencil on the stored samples, so they are O(dt^4) when the law holds.

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "chart.hpp"
#include "curvature.hpp"
#include "nptriad.hpp"

namespace ricci3 {

struct FlowOptions {
    double dt = 1e-3;
    double s_max = 5.0;
    double step_err_tol = 1e-6;      // step-doubling monitor threshold
    std::optional<double> mu;        // H offset; default -Ric(k,k) at the start point
};

struct FlowSample {
    double s = 0.0;
    Vec3 p{};
    Vec3 x{}, y{};  // parallel-transported transverse legs, re-orthonormalized
    double theta = 0.0, omega = 0.0, sigma_abs2 = 0.0, rho_abs2 = 0.0;
    double H = 0.0, S = 0.0;
    double f = 0.0;  // middle principal Ricci curvature at p
};

struct Trajectory {
    std::vector<FlowSample> samples;
    double dt = 0.0;
    double mu = 0.0;
    bool hit_boundary = false;    // stopped early because the curve left the chart
    double max_frame_drift = 0.0; // worst orthonormality defect before re-projection
};

namespace detail {

template <size_t N, class F>
std::array<double, N> rk4_step(F&& deriv, const std::array<double, N>& y, double dt) {
    auto axpy = [](const std::array<double, N>& a, double c, const std::array<double, N>& b) {
        std::array<double, N> r;
        for (size_t i = 0; i < N; ++i)
            r[i] = a[i] + c * b[i];
        return r;
    };
    const std::array<double, N> k1 = deriv(y);
    const std::array<double, N> k2 = deriv(axpy(y, dt / 2.0, k1));
    const std::array<double, N> k3 = deriv(axpy(y, dt / 2.0, k2));
    const std::array<double, N> k4 = deriv(axpy(y, dt, k3));
    std::array<double, N> r;
    for (size_t i = 0; i < N; ++i)
        r[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return r;
}

// One monitored step: a full step checked against two half steps. Advances
// with the two-half-step result; throws if they disagree beyond tol.
template <size_t N, class F>
std::array<double, N> rk4_monitored_step(F&& deriv, const std::array<double, N>& y, double dt, double tol) {
    const std::array<double, N> full = rk4_step<N>(deriv, y, dt);
    const std::array<double, N> half = rk4_step<N>(deriv, rk4_step<N>(deriv, y, dt / 2.0), dt / 2.0);
    double err = 0.0;
    for (size_t i = 0; i < N; ++i)
        err = std::max(err, std::abs(full[i] - half[i]));
    if (err > tol)
        throw NumericalError("integration step error " + std::to_string(err) + " exceeds tolerance");
    return half;
}

}  // namespace detail

// Integral curve of the frame's k leg from p0, carrying the x and y legs by
// parallel transport. The transported pair is re-orthonormalized against the
// field value of k after every step; the defect removed is logged.
inline Trajectory integrate_flow(const MetricChart& chart, const FrameField& frame, const Vec3& p0,
                                 const FlowOptions& opts = {}) {
    chart.require_inside(p0);
    Trajectory out;
    out.dt = opts.dt;

    const std::array<Expr, 3> kfield = {frame.comp[0][0], frame.comp[0][1], frame.comp[0][2]};

    auto deriv = [&](const std::array<double, 9>& y) {
        const Vec3 q = {y[0], y[1], y[2]};
        chart.require_inside(q);
        const MetricJets mj = chart.metric_jets(q);
        const Christoffel gam = christoffel_from_jets(mj);
        const Vec3 kv = frame.value(0, q, chart.params);
        std::array<double, 9> d{};
        for (int c = 0; c < 3; ++c)
            d[static_cast<size_t>(c)] = kv[c];
        // transport: dv^c/ds = -Gamma^c_ab k^a v^b
        for (int leg = 0; leg < 2; ++leg) {
            const int base = 3 + 3 * leg;
            for (int c = 0; c < 3; ++c) {
                double s = 0.0;
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b)
                        s -= gam[c][a][b] * kv[a] * y[static_cast<size_t>(base + b)];
                d[static_cast<size_t>(base + c)] = s;
            }
        }
        return d;
    };

    std::array<double, 9> state{};
    for (int c = 0; c < 3; ++c) {
        state[static_cast<size_t>(c)] = p0[c];
        state[static_cast<size_t>(3 + c)] = frame.value(1, p0, chart.params)[c];
        state[static_cast<size_t>(6 + c)] = frame.value(2, p0, chart.params)[c];
    }

    const double mu = opts.mu ? *opts.mu : [&] {
        const CurvaturePack pack = curvature(chart, p0);
        const Vec3 kv = frame.value(0, p0, chart.params);
        double rkk = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                rkk += pack.ricci[i][j] * kv[i] * kv[j];
        return -rkk;
    }();
    out.mu = mu;

    auto record = [&](double s, const std::array<double, 9>& y) {
        const Vec3 p = {y[0], y[1], y[2]};
        Vec3 X = {y[3], y[4], y[5]};
        Vec3 Y = {y[6], y[7], y[8]};
        FlowSample smp;
        smp.s = s;
        smp.p = p;
        smp.x = X;
        smp.y = Y;
        const KinematicScalars ks = transverse_kinematics(chart, p, kfield, X, Y);
        smp.theta = ks.div_k;
        smp.omega = ks.omega;
        smp.sigma_abs2 = ks.abs_sigma_sq;
        smp.rho_abs2 = ks.abs_rho_sq;
        smp.H = ks.det_d - mu / 2.0;
        const CurvaturePack pack = curvature(chart, p);
        smp.S = pack.scalar;
        smp.f = principal_ricci(pack).values[1];
        out.samples.push_back(smp);
    };

    // initial orthonormalization defect is a frame-definition error, not drift
    record(0.0, state);

    const long nsteps = std::lround(opts.s_max / opts.dt);
    for (long i = 1; i <= nsteps; ++i) {
        std::array<double, 9> next;
        try {
            next = detail::rk4_monitored_step<9>(deriv, state, opts.dt, opts.step_err_tol);
            const Vec3 pn = {next[0], next[1], next[2]};
            chart.require_inside(pn);
        } catch (const ChartDomainError&) {
            out.hit_boundary = true;
            break;
        }

        // re-orthonormalize the transported pair against the field value of k
        const Vec3 pn = {next[0], next[1], next[2]};
        const Mat3 g = chart.metric_value(pn);
        Vec3 kv = frame.value(0, pn, chart.params);
        const double kn = std::sqrt(ip(g, kv, kv));
        kv = (1.0 / kn) * kv;
        Vec3 X = {next[3], next[4], next[5]};
        Vec3 Y = {next[6], next[7], next[8]};
        const double drift = std::max({std::abs(ip(g, X, kv)), std::abs(ip(g, Y, kv)),
                                       std::abs(ip(g, X, X) - 1.0), std::abs(ip(g, Y, Y) - 1.0),
                                       std::abs(ip(g, X, Y))});
        out.max_frame_drift = std::max(out.max_frame_drift, drift);
        X = X - ip(g, X, kv) * kv;
        X = (1.0 / std::sqrt(ip(g, X, X))) * X;
        Y = Y - ip(g, Y, kv) * kv - ip(g, Y, X) * X;
        Y = (1.0 / std::sqrt(ip(g, Y, Y))) * Y;
        for (int c = 0; c < 3; ++c) {
            next[static_cast<size_t>(3 + c)] = X[c];
            next[static_cast<size_t>(6 + c)] = Y[c];
        }

        state = next;
        record(static_cast<double>(i) * opts.dt, state);
    }
    return out;
}

// Parallel transport of an arbitrary vector along the integral curve of k.
struct TransportResult {
    std::vector<double> s;
    std::vector<Vec3> p;
    std::vector<Vec3> v;
    bool hit_boundary = false;
};

inline TransportResult parallel_transport(const MetricChart& chart, const FrameField& frame, const Vec3& p0,
                                          const Vec3& v0, const FlowOptions& opts = {}) {
    chart.require_inside(p0);
    TransportResult out;

    auto deriv = [&](const std::array<double, 6>& y) {
        const Vec3 q = {y[0], y[1], y[2]};
        chart.require_inside(q);
        const MetricJets mj = chart.metric_jets(q);
        const Christoffel gam = christoffel_from_jets(mj);
        const Vec3 kv = frame.value(0, q, chart.params);
        std::array<double, 6> d{};
        for (int c = 0; c < 3; ++c) {
            d[static_cast<size_t>(c)] = kv[c];
            double s = 0.0;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    s -= gam[c][a][b] * kv[a] * y[static_cast<size_t>(3 + b)];
            d[static_cast<size_t>(3 + c)] = s;
        }
        return d;
    };

    std::array<double, 6> state = {p0[0], p0[1], p0[2], v0[0], v0[1], v0[2]};
    out.s.push_back(0.0);
    out.p.push_back(p0);
    out.v.push_back(v0);

    const long nsteps = std::lround(opts.s_max / opts.dt);
    for (long i = 1; i <= nsteps; ++i) {
        try {
            state = detail::rk4_monitored_step<6>(deriv, state, opts.dt, opts.step_err_tol);
            chart.require_inside({state[0], state[1], state[2]});
        } catch (const ChartDomainError&) {
            out.hit_boundary = true;
            break;
        }
        out.s.push_back(static_cast<double>(i) * opts.dt);
        out.p.push_back({state[0], state[1], state[2]});
        out.v.push_back({state[3], state[4], state[5]});
    }
    return out;
}

// ---- evolution-law residuals ------------------------------------------------

struct EvolutionResiduals {
    // Per-sample residuals; NaN where the centered stencil does not fit.
    std::vector<double> theta, omega, sigma_abs2, rho_abs2, H;
    double max_theta = 0.0, max_omega = 0.0, max_sigma_abs2 = 0.0, max_rho_abs2 = 0.0, max_H = 0.0;
};

inline EvolutionResiduals evolution_residuals(const Trajectory& traj) {
    const size_t n = traj.samples.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    EvolutionResiduals out;
    out.theta.assign(n, nan);
    out.omega.assign(n, nan);
    out.sigma_abs2.assign(n, nan);
    out.rho_abs2.assign(n, nan);
    out.H.assign(n, nan);
    if (n < 5)
        return out;

    auto d_ds = [&](auto&& get, size_t i) {
        return (-get(traj.samples[i + 2]) + 8.0 * get(traj.samples[i + 1]) - 8.0 * get(traj.samples[i - 1])
                + get(traj.samples[i - 2])) / (12.0 * traj.dt);
    };

    for (size_t i = 2; i + 2 < n; ++i) {
        const FlowSample& c = traj.samples[i];
        out.theta[i] = d_ds([](const FlowSample& s) { return s.theta; }, i)
                     - (2.0 * c.H - c.theta * c.theta + 2.0 * traj.mu);
        out.omega[i] = d_ds([](const FlowSample& s) { return s.omega; }, i) + c.theta * c.omega;
        out.sigma_abs2[i] = d_ds([](const FlowSample& s) { return s.sigma_abs2; }, i)
                          + 2.0 * c.theta * c.sigma_abs2;
        out.rho_abs2[i] = d_ds([](const FlowSample& s) { return s.rho_abs2; }, i)
                        + c.theta * (c.sigma_abs2 + c.rho_abs2);
        out.H[i] = d_ds([](const FlowSample& s) { return s.H; }, i) + c.theta * c.H;
        out.max_theta = std::max(out.max_theta, std::abs(out.theta[i]));
        out.max_omega = std::max(out.max_omega, std::abs(out.omega[i]));
        out.max_sigma_abs2 = std::max(out.max_sigma_abs2, std::abs(out.sigma_abs2[i]));
        out.max_rho_abs2 = std::max(out.max_rho_abs2, std::abs(out.rho_abs2[i]));
        out.max_H = std::max(out.max_H, std::abs(out.H[i]));
    }
    return out;
}

// ---- scalar comparison problems ----------------------------------------------

// First- or second-order scalar problems with a known closed-form solution.
// Each case carries the closed form and its derivative so the closed form can
// be checked by substitution, independent of any integrator.
struct OdeCase {
    std::string id;
    std::string description;
    int order = 1;
    double s0 = 0.0, s1 = 5.0;
    double y0 = 0.0, yp0 = 0.0;  // yp0 unused for order 1
    std::function<double(double s, double y, double yp)> rhs;  // y' (order 1) or y'' (order 2)
    std::function<double(double)> closed_form;
    std::function<double(double)> closed_form_deriv;
};

struct OdeSolution {
    std::vector<double> s, y, yp;
    double max_abs_err = 0.0;  // against the closed form
};

inline OdeSolution integrate_ode(const OdeCase& c, double dt) {
    OdeSolution out;
    const long nsteps = std::lround((c.s1 - c.s0) / dt);
    if (c.order == 1) {
        // state (s, y) so non-autonomous right-hand sides integrate correctly
        out.s.push_back(c.s0);
        out.y.push_back(c.y0);
        std::array<double, 2> st = {c.s0, c.y0};
        auto dv = [&](const std::array<double, 2>& v) {
            return std::array<double, 2>{1.0, c.rhs(v[0], v[1], 0.0)};
        };
        for (long i = 1; i <= nsteps; ++i) {
            st = detail::rk4_step<2>(dv, st, dt);
            out.s.push_back(c.s0 + static_cast<double>(i) * dt);
            out.y.push_back(st[1]);
        }
    } else {
        out.s.push_back(c.s0);
        out.y.push_back(c.y0);
        out.yp.push_back(c.yp0);
        std::array<double, 3> st = {c.s0, c.y0, c.yp0};  // (s, y, y')
        auto dv = [&](const std::array<double, 3>& v) {
            return std::array<double, 3>{1.0, v[2], c.rhs(v[0], v[1], v[2])};
        };
        for (long i = 1; i <= nsteps; ++i) {
            st = detail::rk4_step<3>(dv, st, dt);
            out.s.push_back(c.s0 + static_cast<double>(i) * dt);
            out.y.push_back(st[1]);
            out.yp.push_back(st[2]);
        }
    }
    if (c.closed_form) {
        for (size_t i = 0; i < out.s.size(); ++i)
            out.max_abs_err = std::max(out.max_abs_err, std::abs(out.y[i] - c.closed_form(out.s[i])));
    }
    return out;
}

// max |closed_form' - rhs(closed_form)| over the interval (order 1), or the
// second-derivative analogue by differencing closed_form_deriv (order 2).
inline double substitution_residual(const OdeCase& c, int n_samples = 101) {
    double worst = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        const double s = c.s0 + (c.s1 - c.s0) * static_cast<double>(i) / static_cast<double>(n_samples - 1);
        if (c.order == 1) {
            worst = std::max(worst, std::abs(c.closed_form_deriv(s) - c.rhs(s, c.closed_form(s), 0.0)));
        } else {
            const double h = 1e-5;
            const double ypp = (c.closed_form_deriv(s + h) - c.closed_form_deriv(s - h)) / (2.0 * h);
            worst = std::max(worst, std::abs(ypp - c.rhs(s, c.closed_form(s), c.closed_form_deriv(s))));
        }
    }
    return worst;
}

inline std::optional<double> first_zero_crossing(const OdeSolution& sol) {
    for (size_t i = 1; i < sol.y.size(); ++i) {
        if (sol.y[i - 1] > 0.0 && sol.y[i] <= 0.0) {
            const double t = sol.y[i - 1] / (sol.y[i - 1] - sol.y[i]);
            return sol.s[i - 1] + t * (sol.s[i] - sol.s[i - 1]);
        }
    }
    return std::nullopt;
}

inline std::vector<OdeCase> ode_suite() {
    std::vector<OdeCase> cases;
    const double r2 = std::sqrt(2.0);

    {
        OdeCase c;
        c.id = "ray3";
        c.description = "theta' = -theta^2 + 2 mu, mu = 1, theta(0) = 0";
        c.order = 1;
        c.s0 = 0.0;
        c.s1 = 5.0;
        c.y0 = 0.0;
        c.rhs = [](double, double y, double) { return -y * y + 2.0; };
        c.closed_form = [r2](double s) { return r2 * std::tanh(r2 * s); };
        c.closed_form_deriv = [r2](double s) {
            const double t = std::cosh(r2 * s);
            return 2.0 / (t * t);
        };
        cases.push_back(c);
    }
    {
        OdeCase c;
        c.id = "tanh-closed-form";
        c.description = "theta' = -theta^2 + 2 mu started off-center, theta(0) = sqrt(2) tanh(0.7 sqrt(2))";
        c.order = 1;
        c.s0 = 0.0;
        c.s1 = 5.0;
        c.y0 = r2 * std::tanh(r2 * 0.7);
        c.rhs = [](double, double y, double) { return -y * y + 2.0; };
        c.closed_form = [r2](double s) { return r2 * std::tanh(r2 * (s + 0.7)); };
        c.closed_form_deriv = [r2](double s) {
            const double t = std::cosh(r2 * (s + 0.7));
            return 2.0 / (t * t);
        };
        cases.push_back(c);
    }
    {
        OdeCase c;
        c.id = "raylast";
        c.description = "theta' = -theta^2, theta(0) = 1";
        c.order = 1;
        c.s0 = 0.0;
        c.s1 = 5.0;
        c.y0 = 1.0;
        c.rhs = [](double, double y, double) { return -y * y; };
        c.closed_form = [](double s) { return 1.0 / (s + 1.0); };
        c.closed_form_deriv = [](double s) { return -1.0 / ((s + 1.0) * (s + 1.0)); };
        cases.push_back(c);
    }
    {
        OdeCase c;
        c.id = "g-decay";
        c.description = "g' = -theta(s) g with theta = sqrt(2) tanh(sqrt(2) s), g(0) = 1";
        c.order = 1;
        c.s0 = 0.0;
        c.s1 = 5.0;
        c.y0 = 1.0;
        c.rhs = [r2](double s, double y, double) { return -r2 * std::tanh(r2 * s) * y; };
        c.closed_form = [r2](double s) { return 1.0 / std::cosh(r2 * s); };
        c.closed_form_deriv = [r2](double s) {
            return -r2 * std::sinh(r2 * s) / (std::cosh(r2 * s) * std::cosh(r2 * s));
        };
        cases.push_back(c);
    }
    {
        OdeCase c;
        c.id = "ell-affine";
        c.description = "l'' = 2 + 2 mu l, mu = 1, l(0) = 1, l'(0) = 0";
        c.order = 2;
        c.s0 = 0.0;
        c.s1 = 3.0;
        c.y0 = 1.0;
        c.yp0 = 0.0;
        c.rhs = [](double, double y, double) { return 2.0 + 2.0 * y; };
        c.closed_form = [r2](double s) { return 2.0 * std::cosh(r2 * s) - 1.0; };
        c.closed_form_deriv = [r2](double s) { return 2.0 * r2 * std::sinh(r2 * s); };
        cases.push_back(c);
    }
    {
        OdeCase c;
        c.id = "ell-jacobi";
        c.description = "l'' = psi l, psi = 2, l(0) = 0, l'(0) = 1";
        c.order = 2;
        c.s0 = 0.0;
        c.s1 = 3.0;
        c.y0 = 0.0;
        c.yp0 = 1.0;
        c.rhs = [](double, double y, double) { return 2.0 * y; };
        c.closed_form = [r2](double s) { return std::sinh(r2 * s) / r2; };
        c.closed_form_deriv = [r2](double s) { return std::cosh(r2 * s); };
        cases.push_back(c);
    }
    {
        OdeCase c;
        c.id = "h-concave";
        c.description = "h'' = -(S/2) h, S = 6, h(0) = 1, h'(0) = 0; concave while positive";
        c.order = 2;
        c.s0 = 0.0;
        c.s1 = 1.5;
        c.y0 = 1.0;
        c.yp0 = 0.0;
        c.rhs = [](double, double y, double) { return -3.0 * y; };
        c.closed_form = [](double s) { return std::cos(std::sqrt(3.0) * s); };
        c.closed_form_deriv = [](double s) { return -std::sqrt(3.0) * std::sin(std::sqrt(3.0) * s); };
        cases.push_back(c);
    }
    return cases;
}

inline const OdeCase& ode_case(const std::vector<OdeCase>& suite, const std::string& id) {
    for (const OdeCase& c : suite)
        if (c.id == id)
            return c;
    throw std::runtime_error("unknown comparison problem '" + id + "'");
}

}  // namespace ricci3
