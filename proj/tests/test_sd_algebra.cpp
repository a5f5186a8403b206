#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "twistorlab/sd_algebra.hpp"

using namespace twistorlab;
using namespace twistorlab::sd;

namespace {

Mat4 random_spd(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Mat4 a{};
    for (auto& row : a)
        for (double& v : row) v = uni(rng);
    Mat4 g{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            double s = 0;
            for (int k = 0; k < 4; ++k) s += a[k][i] * a[k][j];
            g[i][j] = 0.5 * s + (i == j ? 1.0 : 0.0);
        }
    return g;
}

TwoForm random_form(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Vec6 v;
    for (double& c : v) c = uni(rng);
    return six_to_form(v);
}

TwoForm basis_form(int a, int b) {
    TwoForm w;
    w.c[a][b] = 1;
    w.c[b][a] = -1;
    return w;
}

TwoForm unit_sd_form(const SDFrame& fr, const Vec3& u) {
    TwoForm w;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            w.c[a][b] = u[0] * fr.omega[0].c[a][b] + u[1] * fr.omega[1].c[a][b] +
                        u[2] * fr.omega[2].c[a][b];
    return w;
}

const Mat4 kId = mat4_identity<double>();

}  // namespace

TEST_CASE("six-vector coordinates round trip") {
    std::mt19937_64 rng(1);
    TwoForm w = random_form(rng);
    TwoForm back = six_to_form(form_to_six(w));
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) CHECK(back.c[a][b] == w.c[a][b]);
}

TEST_CASE("wedge of covectors is the antisymmetrized product") {
    Vec4 e1{1, 0, 0, 0}, e2{0, 1, 0, 0};
    Mat4 w = wedge(e1, e2);
    CHECK(w[0][1] == 1.0);
    CHECK(w[1][0] == -1.0);
    CHECK(w[2][3] == 0.0);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Vec4 a, b;
    for (int i = 0; i < 4; ++i) {
        a[i] = uni(rng);
        b[i] = uni(rng);
    }
    Mat4 ab = wedge(a, b);
    Mat4 ba = wedge(b, a);
    for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q) {
            CHECK(ab[p][q] == -ab[q][p]);
            CHECK(ab[p][q] == -ba[p][q]);
            CHECK(ab[p][q] == a[p] * b[q] - a[q] * b[p]);
        }
}

TEST_CASE("inner product normalizes decomposables to one") {
    CHECK(inner(basis_form(0, 1), basis_form(0, 1), kId) == 1.0);
    CHECK(inner(basis_form(0, 1), basis_form(2, 3), kId) == 0.0);
    CHECK(inner(basis_form(0, 1), basis_form(0, 2), kId) == 0.0);

    // with a diagonal metric the dual pairs scale by inverse entries
    Mat4 g{};
    g[0][0] = 4;
    g[1][1] = 1;
    g[2][2] = 1;
    g[3][3] = 1;
    CHECK(inner(basis_form(0, 1), basis_form(0, 1), mat4_inverse(g)) == Catch::Approx(0.25));
}

TEST_CASE("star on the flat metric permutes the basis pairs") {
    auto star = [](const TwoForm& w) { return hodge_star(w, kId); };
    auto expect = [](const TwoForm& got, const TwoForm& want) {
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                CHECK(got.c[a][b] == Catch::Approx(want.c[a][b]).margin(1e-14));
    };
    expect(star(basis_form(0, 1)), basis_form(2, 3));
    expect(star(basis_form(2, 3)), basis_form(0, 1));
    // e1^e3 maps to e4^e2
    expect(star(basis_form(0, 2)), basis_form(3, 1));
    expect(star(basis_form(0, 3)), basis_form(1, 2));
}

TEST_CASE("star squares to the identity for random metrics") {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 50; ++k) {
        Mat4 g = random_spd(rng);
        TwoForm w = random_form(rng);
        TwoForm ww = hodge_star(hodge_star(w, g), g);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                CHECK(ww.c[a][b] == Catch::Approx(w.c[a][b]).margin(1e-11));
    }
}

TEST_CASE("star on 2-forms only sees the conformal class") {
    std::mt19937_64 rng(4);
    Mat4 g = random_spd(rng);
    Mat4 g2 = g;
    for (auto& row : g2)
        for (double& v : row) v *= 1.7;
    Mat6 s1 = star_matrix(g);
    Mat6 s2 = star_matrix(g2);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c) CHECK(s2[r][c] == Catch::Approx(s1[r][c]).margin(1e-12));
}

TEST_CASE("star matrix agrees with the tensor star and is traceless") {
    std::mt19937_64 rng(5);
    Mat4 g = random_spd(rng);
    Mat6 s = star_matrix(g);
    double trace = 0;
    for (int r = 0; r < 6; ++r) trace += s[r][r];
    CHECK(trace == Catch::Approx(0.0).margin(1e-12));
    TwoForm w = random_form(rng);
    Vec6 via_matrix = mat6_apply(s, form_to_six(w));
    Vec6 via_tensor = form_to_six(hodge_star(w, g));
    for (int k = 0; k < 6; ++k)
        CHECK(via_matrix[k] == Catch::Approx(via_tensor[k]).margin(1e-12));
}

TEST_CASE("projectors split the six-space into rank-3 eigenspaces") {
    std::mt19937_64 rng(6);
    for (int iter = 0; iter < 20; ++iter) {
        Mat4 g = random_spd(rng);
        Mat6 s = star_matrix(g);
        auto [plus, minus] = sd_projectors(g);
        double tp = 0, tm = 0;
        for (int r = 0; r < 6; ++r) {
            tp += plus[r][r];
            tm += minus[r][r];
        }
        CHECK(tp == Catch::Approx(3.0).margin(1e-10));
        CHECK(tm == Catch::Approx(3.0).margin(1e-10));
        TwoForm w = random_form(rng);
        Vec6 v = form_to_six(w);
        Vec6 p = mat6_apply(plus, v);
        Vec6 m = mat6_apply(minus, v);
        Vec6 sp = mat6_apply(s, p);
        Vec6 sm = mat6_apply(s, m);
        for (int k = 0; k < 6; ++k) {
            CHECK(p[k] + m[k] == Catch::Approx(v[k]).margin(1e-12));
            CHECK(sp[k] == Catch::Approx(p[k]).margin(1e-10));
            CHECK(sm[k] == Catch::Approx(-m[k]).margin(1e-10));
        }
        Vec6 pp = mat6_apply(plus, p);
        Vec6 pm = mat6_apply(plus, m);
        for (int k = 0; k < 6; ++k) {
            CHECK(pp[k] == Catch::Approx(p[k]).margin(1e-10));
            CHECK(pm[k] == Catch::Approx(0.0).margin(1e-10));
        }
    }
}

TEST_CASE("asd_fraction separates the eigenspaces") {
    SDFrame fr = make_frame(kId);
    for (int i = 0; i < 3; ++i) CHECK(asd_fraction(fr.omega[i], kId) < 1e-12);
    TwoForm eta;  // opposite-eigenspace counterpart of the first frame form
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            eta.c[a][b] = basis_form(0, 1).c[a][b] - basis_form(2, 3).c[a][b];
    CHECK(asd_fraction(eta, kId) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("flat frame is the standard one") {
    SDFrame fr = make_frame(kId);
    for (int i = 0; i < 4; ++i)
        for (int p = 0; p < 4; ++p) CHECK(fr.coframe[i][p] == Catch::Approx(i == p ? 1.0 : 0.0).margin(1e-14));
    CHECK(fr.omega[0].c[0][1] == Catch::Approx(1.0));
    CHECK(fr.omega[0].c[2][3] == Catch::Approx(1.0));
    CHECK(fr.omega[1].c[0][2] == Catch::Approx(1.0));
    CHECK(fr.omega[1].c[3][1] == Catch::Approx(1.0));
    CHECK(fr.omega[2].c[0][3] == Catch::Approx(1.0));
    CHECK(fr.omega[2].c[1][2] == Catch::Approx(1.0));
}

TEST_CASE("frames are triangular, orthonormal, oriented, self-dual") {
    std::mt19937_64 rng(7);
    for (int iter = 0; iter < 30; ++iter) {
        Mat4 g = random_spd(rng);
        Mat4 ginv = mat4_inverse(g);
        SDFrame fr = make_frame(g);
        for (int i = 0; i < 4; ++i) {
            CHECK(fr.coframe[i][i] > 0);
            for (int p = i + 1; p < 4; ++p) CHECK(fr.coframe[i][p] == 0.0);
        }
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                double s = 0;
                for (int p = 0; p < 4; ++p)
                    for (int q = 0; q < 4; ++q)
                        s += fr.coframe[i][p] * ginv[p][q] * fr.coframe[j][q];
                CHECK(s == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-10));
            }
        CHECK(mat4_det(fr.coframe) > 0);
        for (int i = 0; i < 3; ++i) {
            CHECK(asd_fraction(fr.omega[i], g) < 1e-8);
            for (int j = 0; j < 3; ++j)
                CHECK(inner(fr.omega[i], fr.omega[j], ginv) ==
                      Catch::Approx(i == j ? 2.0 : 0.0).margin(1e-10));
        }
    }
}

TEST_CASE("the basic self-dual form induces the block rotation") {
    TwoForm w;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            w.c[a][b] = basis_form(0, 1).c[a][b] + basis_form(2, 3).c[a][b];
    ACStructure acs = form_to_acs(w, kId);
    const Mat4 expected{{{0, -1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, -1}, {0, 0, 1, 0}}};
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) CHECK(acs.j[a][b] == expected[a][b]);
}

TEST_CASE("form and structure convert back and forth") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int iter = 0; iter < 30; ++iter) {
        Mat4 g = random_spd(rng);
        SDFrame fr = make_frame(g);
        Vec3 u{gauss(rng), gauss(rng), gauss(rng)};
        double n = norm3(u);
        if (n < 1e-6) continue;
        for (double& c : u) c /= n;
        TwoForm w = unit_sd_form(fr, u);
        ACStructure acs = form_to_acs(w, g);

        Mat4 jj = mat4_mul(acs.j, acs.j);
        Mat4 jgj = mat4_mul(mat4_transpose(acs.j), mat4_mul(g, acs.j));
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                CHECK(jj[a][b] == Catch::Approx(a == b ? -1.0 : 0.0).margin(1e-10));
                CHECK(jgj[a][b] == Catch::Approx(g[a][b]).margin(1e-10));
            }

        TwoForm back = acs_to_form(acs, g);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                CHECK(back.c[a][b] == Catch::Approx(w.c[a][b]).margin(1e-10));
    }
}

TEST_CASE("conversion rejects forms outside its contract") {
    SDFrame fr = make_frame(kId);
    TwoForm scaled = unit_sd_form(fr, Vec3{2, 0, 0});
    CHECK_THROWS_AS(form_to_acs(scaled, kId), SdError);

    TwoForm eta;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            eta.c[a][b] = basis_form(0, 1).c[a][b] - basis_form(2, 3).c[a][b];
    CHECK_THROWS_AS(form_to_acs(eta, kId), SdError);
}

TEST_CASE("structure conversion rejects non-structures") {
    ACStructure not_acs;
    not_acs.j = mat4_identity<double>();
    CHECK_THROWS_AS(acs_to_form(not_acs, kId), SdError);

    // squares to -identity and preserves g but induces the other orientation
    ACStructure wrong;
    wrong.j = Mat4{{{0, -1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, -1, 0}}};
    CHECK_THROWS_AS(acs_to_form(wrong, kId), SdError);
}

TEST_CASE("transfer between metrics is orthogonal on the self-dual space") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int iter = 0; iter < 20; ++iter) {
        Mat4 g = random_spd(rng);
        Mat4 g2 = random_spd(rng);
        Mat4 ginv = mat4_inverse(g);
        Mat4 g2inv = mat4_inverse(g2);
        SDFrame fr = make_frame(g);
        Vec3 u{gauss(rng), gauss(rng), gauss(rng)};
        double n = norm3(u);
        if (n < 1e-6) continue;
        for (double& c : u) c /= n;
        TwoForm w = unit_sd_form(fr, u);
        TwoForm t = transfer_sd(g, g2, w);
        CHECK(asd_fraction(t, g2) < 1e-8);
        CHECK(inner(t, t, g2inv) == Catch::Approx(inner(w, w, ginv)).margin(1e-9));
    }

    SECTION("transfer to the same metric is the identity") {
        Mat4 g = random_spd(rng);
        SDFrame fr = make_frame(g);
        TwoForm w = unit_sd_form(fr, Vec3{0.6, 0.0, 0.8});
        TwoForm t = transfer_sd(g, g, w);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                CHECK(t.c[a][b] == Catch::Approx(w.c[a][b]).margin(1e-10));
    }

    SECTION("conformal change is also the identity on forms") {
        Mat4 g = random_spd(rng);
        Mat4 g2 = g;
        for (auto& row : g2)
            for (double& v : row) v *= 1.3;
        SDFrame fr = make_frame(g);
        TwoForm w = unit_sd_form(fr, Vec3{0, 1, 0});
        TwoForm t = transfer_sd(g, g2, w);
        // coordinates in the rescaled frame shrink by the conformal factor
        double scale = inner(t, fr.omega[1], mat4_inverse(g2)) / 2.0;
        CHECK(scale * 1.3 == Catch::Approx(1.0).margin(1e-9));
    }
}
