#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "ricci3/jet.hpp"

using namespace ricci3;

namespace {

Jet2 at(double x, double y, double z, int which) {
    const Jet2 X = Jet2::variable(0, x), Y = Jet2::variable(1, y), Z = Jet2::variable(2, z);
    switch (which) {
        case 0: return sin(X) * exp(Y * Z) + powi(Z, 3);
        case 1: return sqrt(1.0 + X * X + Y * Y) / (2.0 + cos(Z));
        case 2: return tanh(X * Y) + log(2.0 + sinh(Z));
        case 3: return pow(1.0 + X * X, Y) * cosh(Z);
        default: return tan(X / 4.0) - Y * Z * X;
    }
}

// finite-difference oracle on the jet VALUES only
double val(double x, double y, double z, int which) { return at(x, y, z, which).v; }

double fd_grad(double x, double y, double z, int which, int dir) {
    const double h = 1e-5;
    double p[3] = {x, y, z};
    auto f = [&](double t) {
        double q[3] = {p[0], p[1], p[2]};
        q[dir] += t;
        return val(q[0], q[1], q[2], which);
    };
    const double d1 = (f(h) - f(-h)) / (2 * h);
    const double d2 = (f(h / 2) - f(-h / 2)) / h;
    return (4 * d2 - d1) / 3;
}

double fd_hess(double x, double y, double z, int which, int i, int j) {
    const double h = 2e-4;
    double p[3] = {x, y, z};
    auto f = [&](double ti, double tj) {
        double q[3] = {p[0], p[1], p[2]};
        q[i] += ti;
        q[j] += tj;
        return val(q[0], q[1], q[2], which);
    };
    if (i == j)
        return (f(h, 0) - 2 * f(0, 0) + f(-h, 0)) / (h * h);
    return (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h);
}

}  // namespace

TEST_CASE("gradients and Hessians against finite differences") {
    const double pts[][3] = {{0.3, -0.7, 0.5}, {1.1, 0.2, -0.4}, {-0.6, 0.9, 1.3}};
    for (int which = 0; which < 5; ++which) {
        for (const auto& p : pts) {
            const Jet2 j = at(p[0], p[1], p[2], which);
            for (int a = 0; a < 3; ++a) {
                const double fd = fd_grad(p[0], p[1], p[2], which, a);
                CHECK(j.d[a] == Catch::Approx(fd).epsilon(1e-9).margin(1e-9));
                for (int b = a; b < 3; ++b) {
                    const double fh = fd_hess(p[0], p[1], p[2], which, a, b);
                    CHECK(j.hess(a, b) == Catch::Approx(fh).epsilon(1e-5).margin(1e-5));
                }
            }
        }
    }
}

TEST_CASE("hand-computed derivatives of sin(x) exp(yz) + z^3") {
    const double x = 0.4, y = -0.3, z = 0.8;
    const Jet2 j = at(x, y, z, 0);
    const double s = std::sin(x), c = std::cos(x), e = std::exp(y * z);
    CHECK(j.v == Catch::Approx(s * e + z * z * z).epsilon(1e-15));
    CHECK(j.d[0] == Catch::Approx(c * e).epsilon(1e-14));
    CHECK(j.d[1] == Catch::Approx(z * s * e).epsilon(1e-14));
    CHECK(j.d[2] == Catch::Approx(y * s * e + 3 * z * z).epsilon(1e-14));
    CHECK(j.hess(0, 0) == Catch::Approx(-s * e).epsilon(1e-14));
    CHECK(j.hess(0, 1) == Catch::Approx(z * c * e).epsilon(1e-14));
    CHECK(j.hess(0, 2) == Catch::Approx(y * c * e).epsilon(1e-14));
    CHECK(j.hess(1, 1) == Catch::Approx(z * z * s * e).epsilon(1e-14));
    CHECK(j.hess(1, 2) == Catch::Approx(s * e * (1 + y * z)).epsilon(1e-14));
    CHECK(j.hess(2, 2) == Catch::Approx(y * y * s * e + 6 * z).epsilon(1e-14));
}

TEST_CASE("variable power x^y carries the log term") {
    const double x = 2.0, y = 3.0;
    const Jet2 j = pow(Jet2::variable(0, x), Jet2::variable(1, y));
    CHECK(j.v == Catch::Approx(8.0).epsilon(1e-14));
    CHECK(j.d[0] == Catch::Approx(12.0).epsilon(1e-14));                    // y x^(y-1)
    CHECK(j.d[1] == Catch::Approx(8.0 * std::log(2.0)).epsilon(1e-14));     // x^y log x
    CHECK(j.hess(0, 0) == Catch::Approx(12.0).epsilon(1e-14));              // y(y-1) x^(y-2)
    CHECK(j.hess(0, 1) == Catch::Approx(4.0 * (1 + 3 * std::log(2.0))).epsilon(1e-14));
    CHECK(j.hess(1, 1) == Catch::Approx(8.0 * std::log(2.0) * std::log(2.0)).epsilon(1e-14));
    CHECK(j.d[2] == 0.0);
    CHECK(j.hess(2, 2) == 0.0);
}

TEST_CASE("algebraic identities propagate to all jet slots") {
    const Jet2 X = Jet2::variable(0, 0.7), Y = Jet2::variable(1, -1.2), Z = Jet2::variable(2, 0.3);
    const Jet2 a = 1.0 + X * X + sin(Y) * Z;

    // (a*b)/b == a
    const Jet2 b = 2.0 + cos(X);
    const Jet2 q = (a * b) / b;
    CHECK(q.v == Catch::Approx(a.v).epsilon(1e-14));
    for (int i = 0; i < 3; ++i)
        CHECK(q.d[i] == Catch::Approx(a.d[i]).epsilon(1e-13).margin(1e-13));
    for (int i = 0; i < 6; ++i)
        CHECK(q.h[i] == Catch::Approx(a.h[i]).epsilon(1e-12).margin(1e-12));

    // exp(log(a)) == a for positive a
    const Jet2 r = exp(log(a));
    CHECK(r.v == Catch::Approx(a.v).epsilon(1e-14));
    for (int i = 0; i < 3; ++i)
        CHECK(r.d[i] == Catch::Approx(a.d[i]).epsilon(1e-13).margin(1e-13));

    // sin^2 + cos^2 == 1 with vanishing derivatives
    const Jet2 one = sin(a) * sin(a) + cos(a) * cos(a);
    CHECK(one.v == Catch::Approx(1.0).epsilon(1e-14));
    for (int i = 0; i < 3; ++i)
        CHECK(std::abs(one.d[i]) < 1e-13);
    for (int i = 0; i < 6; ++i)
        CHECK(std::abs(one.h[i]) < 1e-13);

    // cosh^2 - sinh^2 == 1
    const Jet2 hyp = cosh(a) * cosh(a) - sinh(a) * sinh(a);
    CHECK(hyp.v == Catch::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < 3; ++i)
        CHECK(std::abs(hyp.d[i]) < 1e-11);

    // sqrt(a)^2 == a
    const Jet2 s2 = sqrt(a) * sqrt(a);
    CHECK(s2.v == Catch::Approx(a.v).epsilon(1e-14));
    for (int i = 0; i < 6; ++i)
        CHECK(s2.h[i] == Catch::Approx(a.h[i]).epsilon(1e-12).margin(1e-12));
}

TEST_CASE("integer powers, including negative exponents") {
    const Jet2 X = Jet2::variable(0, 1.7);
    const Jet2 p3 = powi(X, 3);
    CHECK(p3.v == Catch::Approx(1.7 * 1.7 * 1.7).epsilon(1e-15));
    CHECK(p3.d[0] == Catch::Approx(3 * 1.7 * 1.7).epsilon(1e-15));
    CHECK(p3.hess(0, 0) == Catch::Approx(6 * 1.7).epsilon(1e-15));

    const Jet2 pm2 = powi(X, -2);
    CHECK(pm2.v == Catch::Approx(std::pow(1.7, -2.0)).epsilon(1e-14));
    CHECK(pm2.d[0] == Catch::Approx(-2.0 * std::pow(1.7, -3.0)).epsilon(1e-14));

    const Jet2 Xneg = Jet2::variable(0, -1.3);
    const Jet2 p2 = powi(Xneg, 2);  // negative bases are fine for integer exponents
    CHECK(p2.v == Catch::Approx(1.69).epsilon(1e-15));
    CHECK(p2.d[0] == Catch::Approx(-2.6).epsilon(1e-15));

    CHECK(powi(X, 0).v == 1.0);
    CHECK(powi(X, 0).d[0] == 0.0);

    // half-integer via powc
    const Jet2 ph = powc(X, 0.5);
    CHECK(ph.v == Catch::Approx(std::sqrt(1.7)).epsilon(1e-15));
    CHECK(ph.d[0] == Catch::Approx(0.5 / std::sqrt(1.7)).epsilon(1e-14));
}

TEST_CASE("domain guards") {
    const Jet2 Xn = Jet2::variable(0, -0.5);
    const Jet2 X0 = Jet2::variable(0, 0.0);
    CHECK_THROWS_AS(log(Xn), JetDomainError);
    CHECK_THROWS_AS(log(X0), JetDomainError);
    CHECK_THROWS_AS(sqrt(Xn), JetDomainError);
    CHECK_THROWS_AS(inv(X0), JetDomainError);
    CHECK_THROWS_AS(powi(X0, -1), JetDomainError);
    CHECK_THROWS_AS(powc(Xn, 0.5), JetDomainError);
    CHECK_THROWS_AS(pow(Xn, Jet2::variable(1, 0.5)), JetDomainError);
}

TEST_CASE("hessian storage is symmetric by construction") {
    const Jet2 j = at(0.9, 0.4, -0.2, 1);
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
            CHECK(j.hess(i, k) == j.hess(k, i));
}
