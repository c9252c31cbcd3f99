#pragma once

// Small dense kernels for the 3-dimensional case: vectors, symmetric 3x3
// eigenproblems, Cholesky factors, and metric-orthonormalization. Everything
// here is allocation-free and deterministic.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace ricci3 {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;
using CVec3 = std::array<std::complex<double>, 3>;

struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

struct LinalgDomainError : std::runtime_error {
    explicit LinalgDomainError(const std::string& what) : std::runtime_error(what) {}
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

inline Vec3 mat_vec(const Mat3& m, const Vec3& v) {
    Vec3 r{};
    for (int i = 0; i < 3; ++i)
        r[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
    return r;
}

// Inner product with respect to a metric tensor g: g_ij a^i b^j.
inline double ip(const Mat3& g, const Vec3& a, const Vec3& b) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            s += g[i][j] * a[i] * b[j];
    return s;
}

// Complex-bilinear extension of the same pairing: no conjugation on either slot.
inline std::complex<double> ip(const Mat3& g, const CVec3& a, const CVec3& b) {
    std::complex<double> s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            s += g[i][j] * a[i] * b[j];
    return s;
}

inline CVec3 to_cvec(const Vec3& a) { return {a[0], a[1], a[2]}; }

inline CVec3 operator+(const CVec3& a, const CVec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline CVec3 operator*(std::complex<double> s, const CVec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

inline double det3(const Mat3& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
         - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
         + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

inline Mat3 inverse3(const Mat3& m) {
    const double d = det3(m);
    if (d == 0.0)
        throw LinalgDomainError("singular 3x3 matrix has no inverse");
    const double inv = 1.0 / d;
    Mat3 r;
    r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * inv;
    r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv;
    r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv;
    r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv;
    r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv;
    r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv;
    r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * inv;
    r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv;
    r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv;
    return r;
}

// Positive definiteness via leading principal minors.
inline bool is_spd(const Mat3& g, double tol = 0.0) {
    const double m1 = g[0][0];
    const double m2 = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    const double m3 = det3(g);
    return m1 > tol && m2 > tol && m3 > tol;
}

// Lower-triangular Cholesky factor of an SPD matrix, g = L L^T.
inline Mat3 cholesky3(const Mat3& g) {
    Mat3 l{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = g[i][j];
            for (int k = 0; k < j; ++k)
                s -= l[i][k] * l[j][k];
            if (i == j) {
                if (s <= 0.0)
                    throw LinalgDomainError("cholesky3: matrix is not positive definite");
                l[i][i] = std::sqrt(s);
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    return l;
}

inline Vec3 solve_lower(const Mat3& l, const Vec3& b) {
    Vec3 x{};
    for (int i = 0; i < 3; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k)
            s -= l[i][k] * x[k];
        x[i] = s / l[i][i];
    }
    return x;
}

inline Vec3 solve_upper_t(const Mat3& l, const Vec3& b) {
    // Solves L^T x = b with L lower triangular.
    Vec3 x{};
    for (int i = 2; i >= 0; --i) {
        double s = b[i];
        for (int k = i + 1; k < 3; ++k)
            s -= l[k][i] * x[k];
        x[i] = s / l[i][i];
    }
    return x;
}

struct Eigen3 {
    Vec3 values;                  // ascending
    std::array<Vec3, 3> vectors;  // vectors[i] pairs with values[i]; Euclidean-orthonormal
};

// Cyclic Jacobi sweeps for a symmetric 3x3 matrix. The rotation order
// (0,1),(0,2),(1,2) is fixed so results are bit-reproducible across runs.
inline Eigen3 jacobi_eigen_sym3(const Mat3& a_in) {
    Mat3 a = a_in;
    Mat3 v{};
    v[0][0] = v[1][1] = v[2][2] = 1.0;

    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        const double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
        if (off == 0.0)
            break;
        static constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
        for (const auto& pq : pairs) {
            const int p = pq[0], q = pq[1];
            if (a[p][q] == 0.0)
                continue;
            const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            // Stable tangent of the rotation angle; sign tracks theta.
            double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
            const double c = 1.0 / std::sqrt(t * t + 1.0);
            const double s = t * c;
            const double tau = s / (1.0 + c);

            const double apq = a[p][q];
            a[p][p] -= t * apq;
            a[q][q] += t * apq;
            a[p][q] = a[q][p] = 0.0;
            for (int k = 0; k < 3; ++k) {
                if (k == p || k == q)
                    continue;
                const double akp = a[k][p], akq = a[k][q];
                a[k][p] = a[p][k] = akp - s * (akq + tau * akp);
                a[k][q] = a[q][k] = akq + s * (akp - tau * akq);
            }
            for (int k = 0; k < 3; ++k) {
                const double vkp = v[k][p], vkq = v[k][q];
                v[k][p] = vkp - s * (vkq + tau * vkp);
                v[k][q] = vkq + s * (vkp - tau * vkq);
            }
        }
    }

    Eigen3 out;
    std::array<int, 3> order = {0, 1, 2};
    // Insertion sort by eigenvalue; stable, so equal values keep sweep order.
    for (int i = 1; i < 3; ++i)
        for (int j = i; j > 0 && a[order[j]][order[j]] < a[order[j - 1]][order[j - 1]]; --j)
            std::swap(order[j], order[j - 1]);
    for (int i = 0; i < 3; ++i) {
        const int c = order[i];
        out.values[i] = a[c][c];
        out.vectors[i] = {v[0][c], v[1][c], v[2][c]};
    }
    return out;
}

// Metric Gram-Schmidt: returns g-orthonormal (u1, u2) spanning span(v1, v2).
// Throws when the input pair is g-degenerate.
inline std::array<Vec3, 2> gram_schmidt(const Mat3& g, const Vec3& v1, const Vec3& v2) {
    const double n1 = ip(g, v1, v1);
    if (!(n1 > 0.0))
        throw LinalgDomainError("gram_schmidt: first vector has non-positive g-norm");
    const Vec3 u1 = (1.0 / std::sqrt(n1)) * v1;
    const Vec3 w = v2 - ip(g, u1, v2) * u1;
    const double n2 = ip(g, w, w);
    const double scale = std::sqrt(std::max(ip(g, v2, v2), 1.0));
    if (!(std::sqrt(std::max(n2, 0.0)) > 1e-12 * scale))
        throw LinalgDomainError("gram_schmidt: vectors are g-linearly dependent");
    const Vec3 u2 = (1.0 / std::sqrt(n2)) * w;
    return {u1, u2};
}

}  // namespace ricci3
