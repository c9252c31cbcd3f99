#include <catch2/catch_amalgamated.hpp>

#include "ricci3/catalog.hpp"
#include "ricci3/chart.hpp"

#include <cmath>
#include <string>

using namespace ricci3;
using Catch::Approx;

namespace {

// Chart with every metric entry depending on all three coordinates, so the
// jet path gets exercised off the diagonal too.
MetricChart twisted_chart() {
    MetricChart c;
    c.name = "twisted";
    c.domain.lo = {-0.8, -0.8, -0.8};
    c.domain.hi = {0.8, 0.8, 0.8};
    const std::array<std::string, 3> xyz = {"x", "y", "z"};
    c.entries[0] = Expr::parse("exp(x + y/2)", xyz, {});
    c.entries[1] = Expr::parse("sin(x*y)/4", xyz, {});
    c.entries[2] = Expr::parse("z*x/8", xyz, {});
    c.entries[3] = Expr::parse("2 + tanh(y*z)", xyz, {});
    c.entries[4] = Expr::parse("cos(x)/8 - 1/8", xyz, {});
    c.entries[5] = Expr::parse("1 + x^2/4", xyz, {});
    return c;
}

}  // namespace

TEST_CASE("domain box membership, scale, sampling margins") {
    DomainBox box;
    box.lo = {-2.0, 0.0, -1.0};
    box.hi = {2.0, 10.0, 1.0};

    CHECK(box.contains({0.0, 5.0, 0.0}));
    CHECK_FALSE(box.contains({2.0, 5.0, 0.0}));   // boundary excluded
    CHECK_FALSE(box.contains({0.0, -0.1, 0.0}));
    CHECK(box.scale() == Approx(2.0));            // min side

    SplitMix64 rng(5);
    for (int i = 0; i < 200; ++i) {
        const Vec3 p = box.sample(rng, 0.1);
        CHECK(p[0] >= -2.0 + 0.4);
        CHECK(p[0] <= 2.0 - 0.4);
        CHECK(p[1] >= 1.0);
        CHECK(p[1] <= 9.0);
        CHECK(p[2] >= -0.8);
        CHECK(p[2] <= 0.8);
    }
}

TEST_CASE("require_inside names the chart and the point") {
    MetricChart c = twisted_chart();
    CHECK_NOTHROW(c.require_inside({0.0, 0.0, 0.0}));
    try {
        c.require_inside({3.0, 0.0, 0.0});
        FAIL("expected ChartDomainError");
    } catch (const ChartDomainError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("twisted") != std::string::npos);
        CHECK(msg.find("3") != std::string::npos);
    }
}

TEST_CASE("metric_value symmetry and SPD rejection") {
    MetricChart c = twisted_chart();
    const Mat3 g = c.metric_value({0.3, -0.2, 0.5});
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(g[i][j] == g[j][i]);
    CHECK(is_spd(g));

    // g11 = x goes non-positive inside the box.
    MetricChart bad;
    bad.name = "indefinite";
    const std::array<std::string, 3> xyz = {"x", "y", "z"};
    bad.entries[0] = Expr::parse("x", xyz, {});
    bad.entries[1] = Expr::literal(0.0);
    bad.entries[2] = Expr::literal(0.0);
    bad.entries[3] = Expr::literal(1.0);
    bad.entries[4] = Expr::literal(0.0);
    bad.entries[5] = Expr::literal(1.0);
    CHECK_NOTHROW(bad.metric_value({0.5, 0.0, 0.0}));
    CHECK_THROWS_AS(bad.metric_value({-0.5, 0.0, 0.0}), ChartDomainError);
}

TEST_CASE("metric_jets gradient and hessian against finite differences") {
    MetricChart c = twisted_chart();
    const Vec3 p = {0.25, -0.35, 0.15};
    const MetricJets mj = c.metric_jets(p);

    // value slot matches metric_value
    const Mat3 g = c.metric_value(p);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(mj.g[i][j] == Approx(g[i][j]).margin(1e-15));

    // ginv really inverts g
    Mat3 prod{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                prod[i][j] += mj.g[i][k] * mj.ginv[k][j];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(prod[i][j] == Approx(i == j ? 1.0 : 0.0).margin(1e-14));

    const double h = 1e-5;
    for (int a = 0; a < 3; ++a) {
        Vec3 pp = p, pm = p;
        pp[a] += h;
        pm[a] -= h;
        const Mat3 gp = c.metric_value(pp);
        const Mat3 gm = c.metric_value(pm);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double fd = (gp[i][j] - gm[i][j]) / (2.0 * h);
                CHECK(mj.dg[a][i][j] == Approx(fd).margin(1e-9));
            }
    }

    const double h2 = 2e-4;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            Vec3 pp = p, pm = p, ppm = p, pmp = p;
            pp[a] += h2; pp[b] += h2;
            pm[a] -= h2; pm[b] -= h2;
            ppm[a] += h2; ppm[b] -= h2;
            pmp[a] -= h2; pmp[b] += h2;
            const Mat3 gpp = c.metric_value(pp);
            const Mat3 gmm = c.metric_value(pm);
            const Mat3 gpm = c.metric_value(ppm);
            const Mat3 gmp = c.metric_value(pmp);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    const double fd = (gpp[i][j] - gpm[i][j] - gmp[i][j] + gmm[i][j]) / (4.0 * h2 * h2);
                    CHECK(mj.d2g[a][b][i][j] == Approx(fd).margin(5e-6));
                    CHECK(mj.d2g[a][b][i][j] == mj.d2g[b][a][i][j]);
                }
        }
}

TEST_CASE("frame_jets component derivatives against finite differences") {
    const CatalogEntry entry = catalog_metric("nil");
    const FrameField& frame = entry.frame;
    const Vec3 p = {0.4, -0.7, 1.3};
    const FrameJets fj = frame_jets(frame, p, entry.chart.params);

    const double h = 1e-6;
    for (int f = 0; f < 3; ++f) {
        const Vec3 v = frame.value(f, p, entry.chart.params);
        for (int c = 0; c < 3; ++c)
            CHECK(fj.v[f][c] == Approx(v[c]).margin(1e-15));
        for (int a = 0; a < 3; ++a) {
            Vec3 pp = p, pm = p;
            pp[a] += h;
            pm[a] -= h;
            const Vec3 vp = frame.value(f, pp, entry.chart.params);
            const Vec3 vm = frame.value(f, pm, entry.chart.params);
            for (int c = 0; c < 3; ++c)
                CHECK(fj.dv[f][a][c] == Approx((vp[c] - vm[c]) / (2.0 * h)).margin(1e-9));
        }
    }
}

TEST_CASE("orthonormality residuals are tiny for catalog frames and detect breakage") {
    const CatalogEntry entry = catalog_metric("round-sphere");
    SplitMix64 rng(11);
    for (int i = 0; i < 10; ++i) {
        const Vec3 p = entry.chart.domain.sample(rng);
        for (double r : orthonormality_residuals(entry.chart, entry.frame, p))
            CHECK(r < 1e-12);
    }

    // Scaling one leg breaks normalization but not orthogonality.
    FrameField scaled = entry.frame;
    for (int c = 0; c < 3; ++c)
        scaled.comp[1][c] = Expr::literal(2.0) * scaled.comp[1][c];
    const auto res = orthonormality_residuals(entry.chart, scaled, {0.1, 0.2, -0.3});
    CHECK(res[1] == Approx(3.0).margin(1e-12));  // |4 - 1|
    CHECK(res[3] < 1e-12);
    CHECK(res[5] < 1e-12);
}

TEST_CASE("frame rotation keeps the first leg and mixes the transverse pair") {
    const CatalogEntry entry = catalog_metric("round-sphere");
    const FrameField& frame = entry.frame;
    const double ang = 0.83;
    const FrameField rot = frame.rotated(ang);
    const Vec3 p = {0.2, -0.4, 0.3};

    const Vec3 k0 = frame.value(0, p, entry.chart.params);
    const Vec3 k1 = rot.value(0, p, entry.chart.params);
    for (int c = 0; c < 3; ++c)
        CHECK(k0[c] == k1[c]);

    const Vec3 x0 = frame.value(1, p, entry.chart.params);
    const Vec3 y0 = frame.value(2, p, entry.chart.params);
    const Vec3 x1 = rot.value(1, p, entry.chart.params);
    const Vec3 y1 = rot.value(2, p, entry.chart.params);
    for (int c = 0; c < 3; ++c) {
        CHECK(x1[c] == Approx(std::cos(ang) * x0[c] + std::sin(ang) * y0[c]).margin(1e-15));
        CHECK(y1[c] == Approx(std::cos(ang) * y0[c] - std::sin(ang) * x0[c]).margin(1e-15));
    }

    // Rotation preserves orthonormality.
    for (double r : orthonormality_residuals(entry.chart, rot, p))
        CHECK(r < 1e-12);
}

TEST_CASE("metric file parse accepts the documented format") {
    const std::string text = R"mf(# comment line
[chart]
coords = "u,v,w"
domain = "(-1, 2)x(0, 3)x(-4, -1)"
[params]
r = 2.5
[metric]
g11 = "r^2"
g12 = "0" ; g13 = "0"
g22 = "r^2 * sin(u)^2"   # inline comment
g23 = "0"
g33 = "1"
[frame]
k = "0,0,1"
x = "1/r, 0, 0"
y = "0, 1/(r*sin(u)), 0"
)mf";
    const MetricFile mf = parse_metric_file(text, "demo");
    CHECK(mf.chart.name == "demo");
    CHECK(mf.chart.coords[0] == "u");
    CHECK(mf.chart.coords[2] == "w");
    CHECK(mf.chart.domain.lo[0] == Approx(-1.0));
    CHECK(mf.chart.domain.hi[1] == Approx(3.0));
    CHECK(mf.chart.domain.hi[2] == Approx(-1.0));
    CHECK(mf.chart.params.at("r") == Approx(2.5));
    REQUIRE(mf.frame.has_value());

    const Vec3 p = {1.1, 1.0, -2.0};
    const Mat3 g = mf.chart.metric_value(p);
    CHECK(g[0][0] == Approx(6.25));
    CHECK(g[1][1] == Approx(6.25 * std::sin(1.1) * std::sin(1.1)));
    for (double r : orthonormality_residuals(mf.chart, *mf.frame, p))
        CHECK(r < 1e-14);
}

TEST_CASE("metric file parse errors carry line numbers") {
    auto expect_error = [](const std::string& text, const std::string& needle) {
        try {
            parse_metric_file(text);
            FAIL("expected ChartError for: " << needle);
        } catch (const ChartError& e) {
            const std::string msg = e.what();
            INFO(msg);
            CHECK(msg.find(needle) != std::string::npos);
        }
    };

    expect_error("[chart]\ndomain = \"(0,1)x(0,1)\"\n", "line 2");
    expect_error("[chart]\ndomain = \"(1,0)x(0,1)x(0,1)\"\n", "empty domain interval");
    expect_error("[bogus]\n", "unknown section");
    expect_error("key = 1\n", "before any section");
    expect_error("[metric]\ng21 = \"0\"\n", "g21");
    expect_error("[chart]\ncoords = \"x,x,z\"\n", "distinct");
    expect_error("[chart]\ndomain = \"(0,1)x(0,1)x(0,1)\"\n[metric]\ng11 = \"1\"\n", "missing entry 'g12'");
    expect_error("[chart]\n\n\ndomain = \"(0,1)x(0,zz)x(0,1)\"\n", "line 4");
    expect_error(
        "[chart]\ndomain = \"(0,1)x(0,1)x(0,1)\"\n[metric]\n"
        "g11 = \"1 + qq\"\ng12 = \"0\"\ng13 = \"0\"\ng22 = \"1\"\ng23 = \"0\"\ng33 = \"1\"\n",
        "g11");
    expect_error(
        "[chart]\ndomain = \"(0,1)x(0,1)x(0,1)\"\n[metric]\n"
        "g11 = \"1\"\ng12 = \"0\"\ng13 = \"0\"\ng22 = \"1\"\ng23 = \"0\"\ng33 = \"1\"\n"
        "[frame]\nk = \"0,0,1\"\n",
        "missing leg 'x'");
}

TEST_CASE("emit and reparse round-trips every catalog chart") {
    for (const std::string& name : catalog_names()) {
        const CatalogEntry entry = catalog_metric(name);
        const std::string text = emit_metric_file(entry.chart, entry.frame);
        const MetricFile back = parse_metric_file(text, name);

        SplitMix64 rng(1234);
        for (int i = 0; i < 5; ++i) {
            const Vec3 p = entry.chart.domain.sample(rng);
            const Mat3 a = entry.chart.metric_value(p);
            const Mat3 b = back.chart.metric_value(p);
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c)
                    CHECK(a[r][c] == Approx(b[r][c]).margin(1e-14));
            REQUIRE(back.frame.has_value());
            for (int f = 0; f < 3; ++f) {
                const Vec3 va = entry.frame.value(f, p, entry.chart.params);
                const Vec3 vb = back.frame->value(f, p, back.chart.params);
                for (int c = 0; c < 3; ++c)
                    CHECK(va[c] == Approx(vb[c]).margin(1e-14));
            }
        }
    }
}
