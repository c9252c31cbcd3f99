#pragma once

// Second-order forward-mode jets in three variables. A Jet2 carries a value,
// its gradient, and its Hessian, propagated exactly through arithmetic so the
// curvature pipeline never touches a finite difference. The Hessian is stored
// as the upper triangle only, which makes its symmetry a bit-level identity.

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ricci3 {

struct JetDomainError : std::runtime_error {
    explicit JetDomainError(const std::string& what) : std::runtime_error(what) {}
};

struct Jet2 {
    double v = 0.0;
    std::array<double, 3> d{};  // d[i] = df/dx_i
    std::array<double, 6> h{};  // upper triangle: (0,0),(0,1),(0,2),(1,1),(1,2),(2,2)

    static constexpr int hidx(int i, int j) {
        // i <= j assumed by the table below.
        constexpr int table[3][3] = {{0, 1, 2}, {-1, 3, 4}, {-1, -1, 5}};
        return table[i][j];
    }

    double hess(int i, int j) const { return i <= j ? h[hidx(i, j)] : h[hidx(j, i)]; }

    static Jet2 constant(double c) { return Jet2{c, {}, {}}; }

    static Jet2 variable(int index, double value) {
        Jet2 j;
        j.v = value;
        j.d[index] = 1.0;
        return j;
    }
};

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
    Jet2 r;
    r.v = a.v + b.v;
    for (int i = 0; i < 3; ++i) r.d[i] = a.d[i] + b.d[i];
    for (int i = 0; i < 6; ++i) r.h[i] = a.h[i] + b.h[i];
    return r;
}

inline Jet2 operator-(const Jet2& a, const Jet2& b) {
    Jet2 r;
    r.v = a.v - b.v;
    for (int i = 0; i < 3; ++i) r.d[i] = a.d[i] - b.d[i];
    for (int i = 0; i < 6; ++i) r.h[i] = a.h[i] - b.h[i];
    return r;
}

inline Jet2 operator-(const Jet2& a) {
    Jet2 r;
    r.v = -a.v;
    for (int i = 0; i < 3; ++i) r.d[i] = -a.d[i];
    for (int i = 0; i < 6; ++i) r.h[i] = -a.h[i];
    return r;
}

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
    Jet2 r;
    r.v = a.v * b.v;
    for (int i = 0; i < 3; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j)
            r.h[Jet2::hidx(i, j)] = a.h[Jet2::hidx(i, j)] * b.v + a.v * b.h[Jet2::hidx(i, j)]
                                  + a.d[i] * b.d[j] + a.d[j] * b.d[i];
    return r;
}

// Composition with a scalar function given value/first/second derivatives at a.v.
inline Jet2 jet_chain(const Jet2& a, double f0, double f1, double f2) {
    Jet2 r;
    r.v = f0;
    for (int i = 0; i < 3; ++i) r.d[i] = f1 * a.d[i];
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j)
            r.h[Jet2::hidx(i, j)] = f1 * a.h[Jet2::hidx(i, j)] + f2 * a.d[i] * a.d[j];
    return r;
}

inline Jet2 inv(const Jet2& a) {
    if (a.v == 0.0)
        throw JetDomainError("division by zero");
    const double iv = 1.0 / a.v;
    return jet_chain(a, iv, -iv * iv, 2.0 * iv * iv * iv);
}

inline Jet2 operator/(const Jet2& a, const Jet2& b) { return a * inv(b); }

inline Jet2 operator*(double s, const Jet2& a) { return Jet2::constant(s) * a; }
inline Jet2 operator*(const Jet2& a, double s) { return Jet2::constant(s) * a; }
inline Jet2 operator+(double s, const Jet2& a) { return Jet2::constant(s) + a; }
inline Jet2 operator+(const Jet2& a, double s) { return Jet2::constant(s) + a; }
inline Jet2 operator-(double s, const Jet2& a) { return Jet2::constant(s) - a; }
inline Jet2 operator-(const Jet2& a, double s) { return a - Jet2::constant(s); }
inline Jet2 operator/(double s, const Jet2& a) { return Jet2::constant(s) / a; }
inline Jet2 operator/(const Jet2& a, double s) { return a * Jet2::constant(1.0 / s); }

inline Jet2 sin(const Jet2& a) { const double s = std::sin(a.v), c = std::cos(a.v); return jet_chain(a, s, c, -s); }
inline Jet2 cos(const Jet2& a) { const double s = std::sin(a.v), c = std::cos(a.v); return jet_chain(a, c, -s, -c); }

inline Jet2 tan(const Jet2& a) {
    const double t = std::tan(a.v);
    const double sec2 = 1.0 + t * t;
    return jet_chain(a, t, sec2, 2.0 * t * sec2);
}

inline Jet2 exp(const Jet2& a) { const double e = std::exp(a.v); return jet_chain(a, e, e, e); }

inline Jet2 log(const Jet2& a) {
    if (!(a.v > 0.0))
        throw JetDomainError("log of non-positive value");
    const double iv = 1.0 / a.v;
    return jet_chain(a, std::log(a.v), iv, -iv * iv);
}

inline Jet2 sqrt(const Jet2& a) {
    if (!(a.v > 0.0))
        throw JetDomainError("sqrt of non-positive value");
    const double s = std::sqrt(a.v);
    return jet_chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}

inline Jet2 sinh(const Jet2& a) { const double s = std::sinh(a.v), c = std::cosh(a.v); return jet_chain(a, s, c, s); }
inline Jet2 cosh(const Jet2& a) { const double s = std::sinh(a.v), c = std::cosh(a.v); return jet_chain(a, c, s, c); }

inline Jet2 tanh(const Jet2& a) {
    const double t = std::tanh(a.v);
    const double sech2 = 1.0 - t * t;
    return jet_chain(a, t, sech2, -2.0 * t * sech2);
}

// Integer power by binary exponentiation; valid for every base, including
// zero and negative values, which `exp(n log a)` would reject.
inline Jet2 powi(const Jet2& a, long long n) {
    if (n < 0)
        return inv(powi(a, -n));
    Jet2 result = Jet2::constant(1.0);
    Jet2 base = a;
    while (n > 0) {
        if (n & 1)
            result = result * base;
        base = base * base;
        n >>= 1;
    }
    return result;
}

// Real-exponent power, restricted to positive bases.
inline Jet2 powc(const Jet2& a, double c) {
    if (!(a.v > 0.0))
        throw JetDomainError("power of non-positive base with non-integer exponent");
    const double f0 = std::pow(a.v, c);
    return jet_chain(a, f0, c * f0 / a.v, c * (c - 1.0) * f0 / (a.v * a.v));
}

inline Jet2 pow(const Jet2& a, const Jet2& b) {
    // Fully general a^b = exp(b log a); used only when the exponent varies.
    return exp(b * log(a));
}

}  // namespace ricci3
