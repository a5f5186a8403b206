#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "twistorlab/chart.hpp"

using namespace twistorlab;
using namespace twistorlab::charts;

namespace {

// Central finite differences of the metric components, the independent check
// on the dual-number jets.
Ten3 fd_dg(const MetricChart& chart, const Vec4& p, double h) {
    Ten3 out{};
    for (int c = 0; c < 4; ++c) {
        Vec4 hi = p, lo = p;
        hi[c] += h;
        lo[c] -= h;
        Mat4 gh = chart.eval<double>(hi);
        Mat4 gl = chart.eval<double>(lo);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) out[c][a][b] = (gh[a][b] - gl[a][b]) / (2 * h);
    }
    return out;
}

Ten4 fd_ddg(const MetricChart& chart, const Vec4& p, double h) {
    Ten4 out{};
    for (int d = 0; d < 4; ++d) {
        Vec4 hi = p, lo = p;
        hi[d] += h;
        lo[d] -= h;
        Ten3 dh = fd_dg(chart, hi, h);
        Ten3 dl = fd_dg(chart, lo, h);
        for (int c = 0; c < 4; ++c)
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    out[d][c][a][b] = (dh[c][a][b] - dl[c][a][b]) / (2 * h);
    }
    return out;
}

double mixed_err(double got, double want) {
    return std::abs(got - want) / (1.0 + std::abs(want));
}

}  // namespace

TEST_CASE("flat chart is the identity metric") {
    MetricChart chart = builtin_chart("flat");
    std::mt19937_64 rng(1);
    for (int k = 0; k < 5; ++k) {
        Vec4 p = domain_sample(chart.domain, rng);
        Mat4 g = chart.eval_checked(p);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) CHECK(g[a][b] == (a == b ? 1.0 : 0.0));
    }
}

TEST_CASE("round sphere chart matches its closed form") {
    MetricChart chart = builtin_chart("s4_round");
    std::mt19937_64 rng(2);
    for (int k = 0; k < 5; ++k) {
        Vec4 p = domain_sample(chart.domain, rng);
        double rho = 1 + p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3];
        double want = 4.0 / (rho * rho);
        Mat4 g = chart.eval_checked(p);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                CHECK(g[a][b] == Catch::Approx(a == b ? want : 0.0).margin(1e-14));
    }
}

TEST_CASE("complex projective chart matches its closed form") {
    MetricChart chart = builtin_chart("cp2_fubini_study");
    std::mt19937_64 rng(3);
    for (int k = 0; k < 5; ++k) {
        Vec4 p = domain_sample(chart.domain, rng);
        const double x1 = p[0], x2 = p[1], x3 = p[2], x4 = p[3];
        double rho = 1 + x1 * x1 + x2 * x2 + x3 * x3 + x4 * x4;
        double r2 = rho * rho;
        Mat4 want{};
        want[0][0] = want[1][1] = (1 + x3 * x3 + x4 * x4) / r2;
        want[2][2] = want[3][3] = (1 + x1 * x1 + x2 * x2) / r2;
        want[0][2] = want[2][0] = -(x1 * x3 + x2 * x4) / r2;
        want[1][3] = want[3][1] = -(x1 * x3 + x2 * x4) / r2;
        want[0][3] = want[3][0] = -(x1 * x4 - x2 * x3) / r2;
        want[1][2] = want[2][1] = (x1 * x4 - x2 * x3) / r2;
        Mat4 g = chart.eval_checked(p);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                CHECK(g[a][b] == Catch::Approx(want[a][b]).margin(1e-14));
    }
}

TEST_CASE("product chart is block-diagonal round spheres") {
    MetricChart chart = builtin_chart("s2xs2");
    std::mt19937_64 rng(4);
    for (int k = 0; k < 5; ++k) {
        Vec4 p = domain_sample(chart.domain, rng);
        double ra = 1 + p[0] * p[0] + p[1] * p[1];
        double rb = 1 + p[2] * p[2] + p[3] * p[3];
        Mat4 g = chart.eval_checked(p);
        CHECK(g[0][0] == Catch::Approx(4 / (ra * ra)).margin(1e-14));
        CHECK(g[1][1] == Catch::Approx(4 / (ra * ra)).margin(1e-14));
        CHECK(g[2][2] == Catch::Approx(4 / (rb * rb)).margin(1e-14));
        CHECK(g[3][3] == Catch::Approx(4 / (rb * rb)).margin(1e-14));
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                if (a != b) CHECK(g[a][b] == 0.0);
    }
}

TEST_CASE("unknown chart names are rejected") {
    CHECK_THROWS_AS(builtin_chart("nope"), ChartError);
}

TEST_CASE("builtin charts are positive-definite at samples") {
    std::mt19937_64 rng(5);
    for (const char* name : {"flat", "s4_round", "cp2_fubini_study", "s2xs2"}) {
        MetricChart chart = builtin_chart(name);
        for (int k = 0; k < 20; ++k) {
            Vec4 p = domain_sample(chart.domain, rng);
            CHECK(domain_contains(chart.domain, p));
            Vec4 ev = sym_eigenvalues4(chart.eval_checked(p));
            CHECK(ev[0] > 0);
        }
    }
}

TEST_CASE("domain membership controls the jet") {
    MetricChart chart = builtin_chart("s4_round");
    CHECK_THROWS_AS(metric_jet(chart, Vec4{3, 0, 0, 0}), DomainViolation);
    CHECK_NOTHROW(metric_jet(chart, Vec4{0.5, 0.5, 0, 0}));

    MetricChart box = builtin_chart("flat");
    CHECK_THROWS_AS(metric_jet(box, Vec4{0, 0, 0, 11}), DomainViolation);
}

TEST_CASE("jet derivatives agree with finite differences") {
    std::mt19937_64 rng(6);
    for (const char* name : {"s4_round", "cp2_fubini_study", "s2xs2"}) {
        MetricChart chart = builtin_chart(name);
        for (int k = 0; k < 4; ++k) {
            Vec4 p = domain_sample(chart.domain, rng);
            MetricJet jet = metric_jet(chart, p);
            CHECK(jet.point == p);
            Mat4 g = chart.eval_checked(p);
            Ten3 dg = fd_dg(chart, p, 1e-5);
            Ten4 ddg = fd_ddg(chart, p, 1e-4);
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) {
                    CHECK(jet.g[a][b] == g[a][b]);
                    for (int c = 0; c < 4; ++c) {
                        CHECK(mixed_err(jet.dg[c][a][b], dg[c][a][b]) < 1e-5);
                        for (int d = 0; d < 4; ++d)
                            CHECK(mixed_err(jet.ddg[d][c][a][b], ddg[d][c][a][b]) < 1e-5);
                    }
                }
        }
    }
}

TEST_CASE("jet second derivatives are symmetric in the derivative slots") {
    std::mt19937_64 rng(7);
    MetricChart chart = builtin_chart("cp2_fubini_study");
    Vec4 p = domain_sample(chart.domain, rng);
    MetricJet jet = metric_jet(chart, p);
    for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d)
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    CHECK(jet.ddg[d][c][a][b] == jet.ddg[c][d][a][b]);
}

TEST_CASE("orientation reversal is a coordinate swap pullback") {
    std::mt19937_64 rng(8);
    MetricChart chart = builtin_chart("cp2_fubini_study");
    MetricChart rev = builtin_chart("cp2_fubini_study", true);
    CHECK(rev.name == chart.name + "_reversed");
    for (int k = 0; k < 5; ++k) {
        Vec4 p = domain_sample(chart.domain, rng);
        Vec4 q{p[0], p[1], p[3], p[2]};
        Mat4 g = chart.eval_checked(q);
        Mat4 h = rev.eval_checked(p);
        static constexpr std::array<int, 4> kSwap{0, 1, 3, 2};
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                CHECK(h[a][b] == Catch::Approx(g[kSwap[a]][kSwap[b]]).margin(1e-15));
    }
    // reversing twice restores the original components
    MetricChart twice = orientation_reversed(rev);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) CHECK(twice.comp[a][b].same_tree(chart.comp[a][b]));
}

TEST_CASE("conformal rescale multiplies by the exponential factor") {
    std::mt19937_64 rng(9);
    MetricChart chart = builtin_chart("s2xs2");
    expr::Expr f = expr::parse_expression("0.1*x1 - 0.2*x3");
    MetricChart scaled = conformal_rescale(chart, f);
    for (int k = 0; k < 5; ++k) {
        Vec4 p = domain_sample(chart.domain, rng);
        double factor = std::exp(2 * (0.1 * p[0] - 0.2 * p[2]));
        Mat4 g = chart.eval_checked(p);
        Mat4 h = scaled.eval_checked(p);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                CHECK(h[a][b] == Catch::Approx(factor * g[a][b]).epsilon(1e-13).margin(1e-15));
    }
}

TEST_CASE("metric text parses with defaults and symmetry rules") {
    MetricChart chart = parse_metric("g11=1; g22=1+x1^2; g33=2; g44=1; g12 = 0.1*x1*x2");
    Mat4 g = chart.eval_checked(Vec4{0.5, 0.25, 0, 0});
    CHECK(g[0][0] == 1.0);
    CHECK(g[1][1] == 1.25);
    CHECK(g[2][2] == 2.0);
    CHECK(g[0][1] == 0.0125);
    CHECK(g[1][0] == 0.0125);
    CHECK(g[0][2] == 0.0);

    SECTION("comments and blank lines are ignored") {
        MetricChart c2 = parse_metric("# nothing\n\ng11=1\ng22=1 # trailing\ng33=1\ng44=1\n");
        CHECK(c2.eval_checked(Vec4{0, 0, 0, 0})[1][1] == 1.0);
    }
    SECTION("missing diagonal is an error") {
        CHECK_THROWS_AS(parse_metric("g11=1; g22=1; g33=1"), ChartError);
    }
    SECTION("conflicting symmetric assignments are an error") {
        CHECK_THROWS_AS(parse_metric("g12=x1; g21=x2; g11=1; g22=1; g33=1; g44=1"), ChartError);
        CHECK_NOTHROW(parse_metric("g12=x1; g21=x1; g11=5; g22=5; g33=5; g44=5"));
    }
    SECTION("malformed statements are an error") {
        CHECK_THROWS_AS(parse_metric("g1=1"), expr::ParseError);
        CHECK_THROWS_AS(parse_metric("h11=1"), expr::ParseError);
        CHECK_THROWS_AS(parse_metric("g11=1+"), expr::ParseError);
    }
    SECTION("indefinite metrics are rejected") {
        CHECK_THROWS_AS(parse_metric("g11=-1; g22=1; g33=1; g44=1"), ChartError);
    }
}

TEST_CASE("domain sampling respects the margin") {
    std::mt19937_64 rng(10);
    BallDomain ball{2.0};
    for (int k = 0; k < 100; ++k) {
        Vec4 p = domain_sample(Domain{ball}, rng);
        double r2 = 0;
        for (double c : p) r2 += c * c;
        CHECK(std::sqrt(r2) <= 2.0 - kDomainMargin + 1e-12);
    }
    BoxDomain box{{-1, -1, -1, -1}, {1, 1, 1, 1}};
    for (int k = 0; k < 100; ++k) {
        Vec4 p = domain_sample(Domain{box}, rng);
        for (double c : p) {
            CHECK(c >= -1 + kDomainMargin - 1e-12);
            CHECK(c <= 1 - kDomainMargin + 1e-12);
        }
    }
}
