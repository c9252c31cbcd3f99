#pragma once

// Complex triad (k, m, mbar) on an orthonormal frame (k, x, y) and the five
// spin coefficients of the k-flow:
//
//   m = (x - i y)/sqrt(2),  <m,m> = 0,  <m,mbar> = 1   (bilinear pairing)
//   kappa = -<nabla_k k, m>       rho = -<nabla_mbar k, m>
//   sigma = -<nabla_m k, m>       eps = <nabla_k m, mbar>
//   beta  = <nabla_m m, mbar>
//
// Decompositions kept as invariants: -2 rho = div k + i omega with
// omega = <nabla_y k, x> - <nabla_x k, y>; eps is purely imaginary;
// sigma = ((b-a) + i(c+d))/2 for the transverse entries a,b,c,d below.

#include <array>
#include <cmath>
#include <complex>
#include <optional>

#include "chart.hpp"
#include "curvature.hpp"
#include "linalg.hpp"

namespace ricci3 {

struct ComplexTriad {
    Vec3 k{};
    CVec3 m{};
    CVec3 mbar{};
};

inline ComplexTriad complex_triad(const MetricChart& chart, const Vec3& p, const FrameField& frame) {
    chart.require_inside(p);
    ComplexTriad t;
    t.k = frame.value(0, p, chart.params);
    const Vec3 x = frame.value(1, p, chart.params);
    const Vec3 y = frame.value(2, p, chart.params);
    const double s2 = 1.0 / std::sqrt(2.0);
    const std::complex<double> I(0.0, 1.0);
    for (int c = 0; c < 3; ++c) {
        t.m[c] = s2 * (x[c] - I * y[c]);
        t.mbar[c] = s2 * (x[c] + I * y[c]);
    }
    return t;
}

namespace detail {

// (nabla_u w)^c = u^i (d_i w^c + Gamma^c_ij w^j) from frame jets.
inline Vec3 covariant(const Christoffel& gam, const Vec3& u, const Vec3& w, const Mat3& dw) {
    Vec3 out{};
    for (int c = 0; c < 3; ++c) {
        double s = 0.0;
        for (int i = 0; i < 3; ++i) {
            s += u[i] * dw[i][c];
            for (int j = 0; j < 3; ++j)
                s += u[i] * gam[c][i][j] * w[j];
        }
        out[c] = s;
    }
    return out;
}

}  // namespace detail

struct SpinCoefficients {
    std::complex<double> kappa, rho, sigma, eps, beta;
    double div_k = 0.0;  // full trace of nabla k over the frame
    double omega = 0.0;
    double abs_sigma_sq = 0.0;
};

// All nine covariant derivatives nabla_{e_a} e_f of the frame legs at p.
struct FrameDerivatives {
    Mat3 g{};
    Vec3 leg[3];
    Vec3 nabla[3][3];  // nabla[a][f] = nabla_{e_a} e_f
};

inline FrameDerivatives frame_derivatives(const MetricJets& mj, const Christoffel& gam,
                                          const FrameField& frame, const Vec3& p, const ParamMap& params) {
    const FrameJets fj = frame_jets(frame, p, params);
    FrameDerivatives out;
    out.g = mj.g;
    for (int f = 0; f < 3; ++f)
        out.leg[f] = fj.v[f];
    for (int a = 0; a < 3; ++a)
        for (int f = 0; f < 3; ++f)
            out.nabla[a][f] = detail::covariant(gam, fj.v[a], fj.v[f], fj.dv[f]);
    return out;
}

inline FrameDerivatives frame_derivatives(const MetricChart& chart, const Vec3& p, const FrameField& frame) {
    const MetricJets mj = chart.metric_jets(p);
    return frame_derivatives(mj, christoffel_from_jets(mj), frame, p, chart.params);
}

inline SpinCoefficients spin_coefficients_from(const FrameDerivatives& fd) {
    const Mat3& g = fd.g;
    const Vec3 &k = fd.leg[0], &x = fd.leg[1], &y = fd.leg[2];

    const double s2 = 1.0 / std::sqrt(2.0);
    const std::complex<double> I(0.0, 1.0);
    CVec3 m, mb;
    for (int c = 0; c < 3; ++c) {
        m[c] = s2 * (x[c] - I * y[c]);
        mb[c] = s2 * (x[c] + I * y[c]);
    }

    // Complexified derivative directions act linearly on the real legs.
    auto cdir = [&](const Vec3& dx_field, const Vec3& dy_field, std::complex<double> cy) {
        CVec3 out;
        for (int c = 0; c < 3; ++c)
            out[c] = s2 * (dx_field[c] + cy * dy_field[c]);
        return out;
    };

    const Vec3& nkk = fd.nabla[0][0];
    const Vec3& nxk = fd.nabla[1][0];
    const Vec3& nyk = fd.nabla[2][0];
    const CVec3 nmk = cdir(nxk, nyk, -I);   // nabla_m k
    const CVec3 nmbk = cdir(nxk, nyk, I);   // nabla_mbar k
    const CVec3 nkm = cdir(fd.nabla[0][1], fd.nabla[0][2], -I);  // nabla_k m
    const CVec3 nmm = [&] {                 // nabla_m m
        const CVec3 nm_x = cdir(fd.nabla[1][1], fd.nabla[2][1], -I);  // nabla_m x
        const CVec3 nm_y = cdir(fd.nabla[1][2], fd.nabla[2][2], -I);  // nabla_m y
        CVec3 out;
        for (int c = 0; c < 3; ++c)
            out[c] = s2 * (nm_x[c] - I * nm_y[c]);
        return out;
    }();

    SpinCoefficients sc;
    sc.kappa = -ip(g, to_cvec(nkk), m);
    sc.rho = -ip(g, nmbk, m);
    sc.sigma = -ip(g, nmk, m);
    sc.eps = ip(g, nkm, mb);
    sc.beta = ip(g, nmm, mb);
    sc.div_k = ip(g, nkk, k) + ip(g, nxk, x) + ip(g, nyk, y);
    sc.omega = ip(g, nyk, x) - ip(g, nxk, y);
    sc.abs_sigma_sq = std::norm(sc.sigma);
    return sc;
}

inline SpinCoefficients spin_coefficients(const MetricChart& chart, const Vec3& p, const FrameField& frame) {
    return spin_coefficients_from(frame_derivatives(chart, p, frame));
}

// Transverse derivative matrix of the k-flow in the ordered basis (x, y):
// column b holds the (x,y) components of nabla_{e_b} k. Its invariant
// decomposition is
//
//   D = [[-re sigma,  omega/2 + im sigma],
//        [-omega/2 + im sigma,  re sigma]]  +  (div k / 2) I
//
// det(sym0 part) = -|sigma|^2, det(skew part) = omega^2 / 4.
struct DMatrix {
    std::array<std::array<double, 2>, 2> mat{};
    std::array<std::array<double, 2>, 2> sym0{};
    std::array<std::array<double, 2>, 2> skew{};
    double trace = 0.0;
    double det = 0.0;
    double det_sym0 = 0.0;
    double det_skew = 0.0;
    std::optional<double> mu;
    std::optional<double> H;
};

inline DMatrix d_matrix(const MetricChart& chart, const Vec3& p, const FrameField& frame,
                        std::optional<double> mu = std::nullopt) {
    const FrameDerivatives fd = frame_derivatives(chart, p, frame);
    const Mat3& g = fd.g;
    const Vec3 &x = fd.leg[1], &y = fd.leg[2];
    const double a = ip(g, fd.nabla[1][0], x);  // <nabla_x k, x>
    const double b = ip(g, fd.nabla[2][0], y);  // <nabla_y k, y>
    const double c = ip(g, fd.nabla[1][0], y);  // <nabla_x k, y>
    const double d = ip(g, fd.nabla[2][0], x);  // <nabla_y k, x>

    DMatrix out;
    out.mat = {{{a, d}, {c, b}}};
    out.trace = a + b;
    out.det = a * b - c * d;
    const double off = 0.5 * (c + d);
    out.sym0 = {{{a - out.trace / 2.0, off}, {off, b - out.trace / 2.0}}};
    const double w = 0.5 * (d - c);
    out.skew = {{{0.0, w}, {-w, 0.0}}};
    out.det_sym0 = out.sym0[0][0] * out.sym0[1][1] - out.sym0[0][1] * out.sym0[1][0];
    out.det_skew = w * w;
    out.mu = mu;
    if (mu)
        out.H = out.det - *mu / 2.0;
    return out;
}

// H = det D - mu/2; with the decomposition above this is
// omega^2/4 - |sigma|^2 + (div k)^2/4 - mu/2.
inline double h_function(const DMatrix& d, double mu) { return d.det - mu / 2.0; }

// Kinematic scalars of an expression field k against a numeric transverse
// pair (X, Y): used along flows, where the transverse legs exist only as
// parallel-transported vectors, not as fields. Only nabla k enters, so the
// expressions of X, Y are never needed.
struct KinematicScalars {
    double div_k = 0.0;
    double omega = 0.0;
    std::complex<double> kappa, rho, sigma;
    double abs_sigma_sq = 0.0;
    double abs_rho_sq = 0.0;
    double det_d = 0.0;  // transverse block a*b - c*d
};

inline KinematicScalars transverse_kinematics(const MetricChart& chart, const Vec3& p,
                                              const std::array<Expr, 3>& kfield, const Vec3& X,
                                              const Vec3& Y) {
    const MetricJets mj = chart.metric_jets(p);
    const Christoffel gam = christoffel_from_jets(mj);

    const std::array<Jet2, 3> vars = {Jet2::variable(0, p[0]), Jet2::variable(1, p[1]),
                                      Jet2::variable(2, p[2])};
    Vec3 kv{};
    Mat3 dk{};
    for (int c = 0; c < 3; ++c) {
        const Jet2 j = kfield[static_cast<size_t>(c)].eval<Jet2>(vars, chart.params);
        kv[c] = j.v;
        for (int i = 0; i < 3; ++i)
            dk[i][c] = j.d[static_cast<size_t>(i)];
    }

    const Vec3 nkk = detail::covariant(gam, kv, kv, dk);
    const Vec3 nxk = detail::covariant(gam, X, kv, dk);
    const Vec3 nyk = detail::covariant(gam, Y, kv, dk);

    const double a = ip(mj.g, nxk, X);
    const double b = ip(mj.g, nyk, Y);
    const double c = ip(mj.g, nxk, Y);
    const double d = ip(mj.g, nyk, X);

    KinematicScalars out;
    out.div_k = ip(mj.g, nkk, kv) + a + b;
    out.omega = d - c;
    const std::complex<double> I(0.0, 1.0);
    out.sigma = 0.5 * ((b - a) + I * (c + d));
    out.rho = -0.5 * (out.div_k + I * out.omega);
    out.kappa = -(1.0 / std::sqrt(2.0)) * (ip(mj.g, nkk, X) - I * ip(mj.g, nkk, Y));
    out.abs_sigma_sq = std::norm(out.sigma);
    out.abs_rho_sq = std::norm(out.rho);
    out.det_d = a * b - c * d;
    return out;
}

}  // namespace ricci3
