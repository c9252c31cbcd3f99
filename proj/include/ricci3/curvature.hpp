#pragma once

// Curvature of a metric chart at a point. Sign conventions, anchored by the
// unit round sphere:
//
//   R(X,Y)Z        = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z
//   stored R_ijkl  = < R(e_i,e_j) e_l , e_k >     (round unit sphere:
//                    R_ijkl = g_ik g_jl - g_il g_jk, sectional K = +1)
//   Ric_jl         = g^ik R_ijkl                  (round unit sphere: 2 g)
//   S              = g^jl Ric_jl                  (round unit sphere: 6)
//
// In dimension 3 the antisymmetric index pairs are (0,1),(0,2),(1,2), so the
// full tensor is held as a symmetric 3x3 matrix over pairs plus the sign
// bookkeeping in the accessor.

#include <array>
#include <cmath>
#include <complex>
#include <string>

#include "chart.hpp"
#include "linalg.hpp"

namespace ricci3 {

using Christoffel = std::array<Mat3, 3>;  // [k][i][j] = Gamma^k_ij

inline Christoffel christoffel_from_jets(const MetricJets& m) {
    Christoffel gam{};
    for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) {
                double s = 0.0;
                for (int l = 0; l < 3; ++l)
                    s += m.ginv[k][l] * (m.dg[i][j][l] + m.dg[j][i][l] - m.dg[l][i][j]);
                gam[k][i][j] = gam[k][j][i] = 0.5 * s;
            }
    return gam;
}

namespace detail {

inline constexpr int pair_index[3][3] = {{-1, 0, 1}, {-1, -1, 2}, {-1, -1, -1}};
inline constexpr int pair_ij[3][2] = {{0, 1}, {0, 2}, {1, 2}};

}  // namespace detail

struct CurvaturePack {
    Vec3 point{};
    Mat3 g{};
    Mat3 ginv{};
    Christoffel gamma{};
    Mat3 rpair{};  // R over antisymmetric pairs, symmetric in (P,Q)
    Mat3 ricci{};
    double scalar = 0.0;

    double riem(int i, int j, int k, int l) const {
        if (i == j || k == l)
            return 0.0;
        double sign = 1.0;
        if (i > j) { std::swap(i, j); sign = -sign; }
        if (k > l) { std::swap(k, l); sign = -sign; }
        return sign * rpair[detail::pair_index[i][j]][detail::pair_index[k][l]];
    }

    // <R(u,v)w, s> for real vectors.
    double rnp(const Vec3& u, const Vec3& v, const Vec3& w, const Vec3& s) const {
        double acc = 0.0;
        for (int P = 0; P < 3; ++P) {
            const int i = detail::pair_ij[P][0], j = detail::pair_ij[P][1];
            const double b1 = u[i] * v[j] - u[j] * v[i];
            for (int Q = 0; Q < 3; ++Q) {
                const int k = detail::pair_ij[Q][0], l = detail::pair_ij[Q][1];
                const double b2 = s[k] * w[l] - s[l] * w[k];
                acc += rpair[P][Q] * b1 * b2;
            }
        }
        return acc;
    }

    // Complex-bilinear extension of the same contraction.
    std::complex<double> rnp(const CVec3& u, const CVec3& v, const CVec3& w, const CVec3& s) const {
        std::complex<double> acc = 0.0;
        for (int P = 0; P < 3; ++P) {
            const int i = detail::pair_ij[P][0], j = detail::pair_ij[P][1];
            const std::complex<double> b1 = u[i] * v[j] - u[j] * v[i];
            for (int Q = 0; Q < 3; ++Q) {
                const int k = detail::pair_ij[Q][0], l = detail::pair_ij[Q][1];
                const std::complex<double> b2 = s[k] * w[l] - s[l] * w[k];
                acc += rpair[P][Q] * b1 * b2;
            }
        }
        return acc;
    }
};

inline CurvaturePack curvature_from_jets(const MetricJets& m, const Vec3& p = {}) {
    CurvaturePack pack;
    pack.point = p;
    pack.g = m.g;
    pack.ginv = m.ginv;
    pack.gamma = christoffel_from_jets(m);

    // d(g^-1) = -g^-1 dg g^-1, then dGamma from the second metric jets.
    std::array<Mat3, 3> dginv{};
    for (int a = 0; a < 3; ++a)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int r = 0; r < 3; ++r)
                    for (int c = 0; c < 3; ++c)
                        s += m.ginv[i][r] * m.dg[a][r][c] * m.ginv[c][j];
                dginv[a][i][j] = -s;
            }

    // dgam[a][k][i][j] = d_a Gamma^k_ij
    std::array<Christoffel, 3> dgam{};
    for (int a = 0; a < 3; ++a)
        for (int k = 0; k < 3; ++k)
            for (int i = 0; i < 3; ++i)
                for (int j = i; j < 3; ++j) {
                    double s = 0.0;
                    for (int l = 0; l < 3; ++l) {
                        s += dginv[a][k][l] * (m.dg[i][j][l] + m.dg[j][i][l] - m.dg[l][i][j]);
                        s += m.ginv[k][l] * (m.d2g[a][i][j][l] + m.d2g[a][j][i][l] - m.d2g[a][l][i][j]);
                    }
                    dgam[a][k][i][j] = dgam[a][k][j][i] = 0.5 * s;
                }

    // R^m_lij = d_i Gamma^m_jl - d_j Gamma^m_il + Gamma^m_ip Gamma^p_jl - Gamma^m_jp Gamma^p_il,
    // stored as R_ijkl = g_km R^m_lij over antisymmetric pairs.
    for (int P = 0; P < 3; ++P) {
        const int i = detail::pair_ij[P][0], j = detail::pair_ij[P][1];
        for (int Q = P; Q < 3; ++Q) {
            const int k = detail::pair_ij[Q][0], l = detail::pair_ij[Q][1];
            double rmlij[3];
            for (int mm = 0; mm < 3; ++mm) {
                double s = dgam[i][mm][j][l] - dgam[j][mm][i][l];
                for (int pp = 0; pp < 3; ++pp)
                    s += pack.gamma[mm][i][pp] * pack.gamma[pp][j][l]
                       - pack.gamma[mm][j][pp] * pack.gamma[pp][i][l];
                rmlij[mm] = s;
            }
            double r4 = 0.0;
            for (int mm = 0; mm < 3; ++mm)
                r4 += m.g[k][mm] * rmlij[mm];
            pack.rpair[P][Q] = pack.rpair[Q][P] = r4;
        }
    }

    for (int j = 0; j < 3; ++j)
        for (int l = j; l < 3; ++l) {
            double s = 0.0;
            for (int i = 0; i < 3; ++i)
                for (int k = 0; k < 3; ++k)
                    s += m.ginv[i][k] * pack.riem(i, j, k, l);
            pack.ricci[j][l] = pack.ricci[l][j] = s;
        }
    pack.scalar = 0.0;
    for (int j = 0; j < 3; ++j)
        for (int l = 0; l < 3; ++l)
            pack.scalar += m.ginv[j][l] * pack.ricci[j][l];

    return pack;
}

inline CurvaturePack curvature(const MetricChart& chart, const Vec3& p) {
    return curvature_from_jets(chart.metric_jets(p), p);
}

inline Christoffel christoffel(const MetricChart& chart, const Vec3& p) {
    return christoffel_from_jets(chart.metric_jets(p));
}

inline Mat3 ricci(const MetricChart& chart, const Vec3& p) { return curvature(chart, p).ricci; }

inline double scalar_curvature(const MetricChart& chart, const Vec3& p) { return curvature(chart, p).scalar; }

// Sectional curvature of the plane spanned by u, v:
// K = <R(u,v)v, u> / (|u|^2 |v|^2 - <u,v>^2).
inline double sectional(const CurvaturePack& pack, const Vec3& u, const Vec3& v) {
    const double gram = ip(pack.g, u, u) * ip(pack.g, v, v) - ip(pack.g, u, v) * ip(pack.g, u, v);
    const double scale = std::max(ip(pack.g, u, u) * ip(pack.g, v, v), 1e-300);
    if (!(gram > 1e-12 * scale))
        throw LinalgDomainError("sectional: vectors do not span a plane");
    return pack.rnp(u, v, v, u) / gram;
}

struct PrincipalRicci {
    Vec3 values{};                  // ascending eigenvalues of g^-1 Ric
    std::array<Vec3, 3> vectors{};  // g-orthonormal, vectors[i] for values[i]
    std::array<int, 3> signs{};     // -1, 0, +1 after eps_sig thresholding
    std::string signature;          // e.g. "(-,0,+)"
};

namespace detail {

inline void fix_sign(Vec3& v) {
    int arg = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(v[i]) > std::abs(v[arg]))
            arg = i;
    if (v[arg] < 0.0)
        for (int i = 0; i < 3; ++i)
            v[i] = -v[i];
}

}  // namespace detail

// Eigenvalues of the Ricci transformation g^-1 Ric, computed on the
// Cholesky-whitened matrix L^-1 Ric L^-T so the problem stays symmetric.
// Degenerate eigenspaces get a deterministic basis: project the canonical
// coordinate axes onto the eigenspace and Gram-Schmidt in index order.
inline PrincipalRicci principal_ricci(const CurvaturePack& pack, double eps_sig = 1e-7) {
    const Mat3 l = cholesky3(pack.g);
    Mat3 a{};  // L^-1 Ric L^-T, built column by column
    for (int c = 0; c < 3; ++c) {
        Vec3 col = {pack.ricci[0][c], pack.ricci[1][c], pack.ricci[2][c]};
        col = solve_lower(l, col);
        a[0][c] = col[0];
        a[1][c] = col[1];
        a[2][c] = col[2];
    }
    Mat3 aw{};
    for (int r = 0; r < 3; ++r) {
        Vec3 row = {a[r][0], a[r][1], a[r][2]};
        row = solve_lower(l, row);
        aw[r][0] = row[0];
        aw[r][1] = row[1];
        aw[r][2] = row[2];
    }
    // Symmetrize away the last bits of roundoff before the Jacobi sweeps.
    for (int r = 0; r < 3; ++r)
        for (int c = r + 1; c < 3; ++c) {
            const double s = 0.5 * (aw[r][c] + aw[c][r]);
            aw[r][c] = aw[c][r] = s;
        }

    const Eigen3 eig = jacobi_eigen_sym3(aw);

    PrincipalRicci out;
    out.values = eig.values;
    for (int i = 0; i < 3; ++i)
        out.vectors[i] = solve_upper_t(l, eig.vectors[i]);

    double lmax = 0.0;
    for (int i = 0; i < 3; ++i)
        lmax = std::max(lmax, std::abs(out.values[i]));
    const double zero_tol = eps_sig * std::max(1.0, lmax);

    // Degenerate clusters: rebuild the eigenspace basis from canonical axes.
    int i = 0;
    while (i < 3) {
        int j = i;
        while (j + 1 < 3 && std::abs(out.values[j + 1] - out.values[i]) <= zero_tol)
            ++j;
        if (j > i) {
            const int dim = j - i + 1;
            std::array<Vec3, 3> basis{};
            int have = 0;
            for (int axis = 0; axis < 3 && have < dim; ++axis) {
                Vec3 e{};
                e[axis] = 1.0;
                Vec3 proj{};
                for (int c = i; c <= j; ++c) {
                    const double coef = ip(pack.g, e, out.vectors[c]);
                    proj = proj + coef * out.vectors[c];
                }
                for (int c = 0; c < have; ++c)
                    proj = proj - ip(pack.g, proj, basis[c]) * basis[c];
                const double n = ip(pack.g, proj, proj);
                if (n > 1e-12) {
                    basis[have] = (1.0 / std::sqrt(n)) * proj;
                    ++have;
                }
            }
            for (int c = 0; c < have; ++c)
                out.vectors[i + c] = basis[c];
        }
        i = j + 1;
    }
    for (auto& v : out.vectors)
        detail::fix_sign(v);

    out.signature = "(";
    for (int c = 0; c < 3; ++c) {
        out.signs[c] = std::abs(out.values[c]) <= zero_tol ? 0 : (out.values[c] > 0.0 ? 1 : -1);
        out.signature += out.signs[c] < 0 ? '-' : (out.signs[c] > 0 ? '+' : '0');
        if (c < 2)
            out.signature += ',';
    }
    out.signature += ')';
    return out;
}

inline PrincipalRicci principal_ricci(const MetricChart& chart, const Vec3& p, double eps_sig = 1e-7) {
    return principal_ricci(curvature(chart, p), eps_sig);
}

struct TriadRicci {
    std::complex<double> kk, km, mm, mmbar;
};

// Ricci components through the triad trace
// Ric(a,b) = R(k,a,b,k) + R(m,a,b,mbar) + R(mbar,a,b,m), with m = (x - iy)/sqrt(2)
// and the complex-bilinear pairing. Requires the frame to be g-orthonormal.
inline TriadRicci ricci_from_triad(const MetricChart& chart, const Vec3& p, const FrameField& frame,
                                   double ortho_tol = 1e-8) {
    const auto resid = orthonormality_residuals(chart, frame, p);
    for (double r : resid)
        if (!(r <= ortho_tol))
            throw ChartDomainError("ricci_from_triad: frame is not orthonormal at the evaluated point");

    const CurvaturePack pack = curvature(chart, p);
    const Vec3 kv = frame.value(0, p, chart.params);
    const Vec3 xv = frame.value(1, p, chart.params);
    const Vec3 yv = frame.value(2, p, chart.params);
    const std::complex<double> I(0.0, 1.0);
    const double s2 = 1.0 / std::sqrt(2.0);
    CVec3 m, mb, kc = to_cvec(kv);
    for (int c = 0; c < 3; ++c) {
        m[c] = s2 * (xv[c] - I * yv[c]);
        mb[c] = s2 * (xv[c] + I * yv[c]);
    }

    auto tri = [&](const CVec3& a, const CVec3& b) {
        return pack.rnp(kc, a, b, kc) + pack.rnp(m, a, b, mb) + pack.rnp(mb, a, b, m);
    };

    TriadRicci out;
    out.kk = tri(kc, kc);
    out.km = tri(kc, m);
    out.mm = tri(m, m);
    out.mmbar = tri(m, mb);
    return out;
}

}  // namespace ricci3
