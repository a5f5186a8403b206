#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "twistorlab/chart.hpp"
#include "twistorlab/dual.hpp"
#include "twistorlab/linalg.hpp"

// Algebra of 2-forms on an oriented 4-dimensional inner-product space.
//
// Conventions, fixed here once and relied on everywhere else:
//  * Orientation is the coordinate orientation dx1 ^ dx2 ^ dx3 ^ dx4, and the
//    permutation symbol has eps_{1234} = +1.
//  * (a ^ b)(X, Y) = a(X) b(Y) - a(Y) b(X), so (e1 ^ e2)_{12} = 1.
//  * <w, h>_g = (1/2) w_{ab} g^{ac} g^{bd} h_{cd}; decomposable products of
//    orthonormal covectors then have unit norm.
//  * (star w)_{ab} = (1/2) sqrt(det g) eps_{abcd} g^{ce} g^{df} w_{ef}.
//  * Frames: Gram-Schmidt of dx1..dx4 in that fixed order against g^{-1}
//    produces the coframe rows e1..e4 (lower triangular, positive diagonal,
//    so the coordinate orientation is kept), and
//        omega_1 = e1^e2 + e3^e4,
//        omega_2 = e1^e3 + e4^e2,
//        omega_3 = e1^e4 + e2^e3,
//    each of norm sqrt(2), spanning the +1 eigenspace of star.
//  * A unit-norm w (|w|_g = sqrt(2)) in that eigenspace corresponds to the
//    almost-complex structure j obtained by raising the second slot:
//        j^a_b = g^{ac} w_{bc},   inverse  w_{ab} = -g_{ac} j^c_b.
//    With g the identity and w = e1^e2 + e3^e4 this gives the matrix
//        [ 0 -1  0  0 ]
//        [ 1  0  0  0 ]
//        [ 0  0  0 -1 ]
//        [ 0  0  1  0 ]
//    i.e. j(e1) = e2, j(e3) = e4, and w(X, Y) = g(jX, Y).
namespace twistorlab::sd {

class SdError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Antisymmetric coefficient matrix c[a][b] = w_ab.
struct TwoForm {
    Mat4 c{};
};

struct ACStructure {
    Mat4 j{};  // j[a][b] = j^a_b
};

// Basis order for the six-dimensional coefficient space of 2-forms.
inline constexpr std::array<std::array<int, 2>, 6> kPairs = {
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

inline Vec6 form_to_six(const TwoForm& w) {
    Vec6 v;
    for (int k = 0; k < 6; ++k) v[k] = w.c[kPairs[k][0]][kPairs[k][1]];
    return v;
}

inline TwoForm six_to_form(const Vec6& v) {
    TwoForm w;
    for (int k = 0; k < 6; ++k) {
        w.c[kPairs[k][0]][kPairs[k][1]] = v[k];
        w.c[kPairs[k][1]][kPairs[k][0]] = -v[k];
    }
    return w;
}

template <class T>
Mat4T<T> wedge(const Vec4T<T>& a, const Vec4T<T>& b) {
    Mat4T<T> w;
    for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q) w[p][q] = a[p] * b[q] - a[q] * b[p];
    return w;
}

inline double inner(const TwoForm& w, const TwoForm& h, const Mat4& ginv) {
    double s = 0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d) s += w.c[a][b] * ginv[a][c] * ginv[b][d] * h.c[c][d];
    return 0.5 * s;
}

namespace detail {

inline int levi_civita(int a, int b, int c, int d) {
    int p[4] = {a, b, c, d};
    int sign = 1;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            if (p[i] == p[j]) return 0;
            if (p[i] > p[j]) sign = -sign;
        }
    return sign;
}

}  // namespace detail

inline TwoForm hodge_star(const TwoForm& w, const Mat4& g) {
    Mat4 ginv = mat4_inverse(g);
    double sq = std::sqrt(mat4_det(g));
    TwoForm up;  // w^{ab}
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            double s = 0;
            for (int e = 0; e < 4; ++e)
                for (int f = 0; f < 4; ++f) s += ginv[a][e] * ginv[b][f] * w.c[e][f];
            up.c[a][b] = s;
        }
    TwoForm out;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            double s = 0;
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d) {
                    int eps = detail::levi_civita(a, b, c, d);
                    if (eps != 0) s += eps * up.c[c][d];
                }
            out.c[a][b] = 0.5 * sq * s;
        }
    return out;
}

// Matrix of the star operator on the six-dimensional coefficient space.
inline Mat6 star_matrix(const Mat4& g) {
    Mat6 m{};
    for (int k = 0; k < 6; ++k) {
        Vec6 e{};
        e[k] = 1.0;
        Vec6 col = form_to_six(hodge_star(six_to_form(e), g));
        for (int r = 0; r < 6; ++r) m[r][k] = col[r];
    }
    return m;
}

// P+ and P-, the projectors onto the +1 / -1 eigenspaces of star.
inline std::pair<Mat6, Mat6> sd_projectors(const Mat4& g) {
    Mat6 s = star_matrix(g);
    Mat6 plus{}, minus{};
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            double id = (i == j) ? 1.0 : 0.0;
            plus[i][j] = 0.5 * (id + s[i][j]);
            minus[i][j] = 0.5 * (id - s[i][j]);
        }
    return {plus, minus};
}

inline Vec6 mat6_apply(const Mat6& m, const Vec6& v) {
    Vec6 r{};
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) r[i] += m[i][j] * v[j];
    return r;
}

// Norm of the anti-self-dual part relative to the norm of w.
inline double asd_fraction(const TwoForm& w, const Mat4& g) {
    auto [plus, minus] = sd_projectors(g);
    Mat4 ginv = mat4_inverse(g);
    TwoForm m = six_to_form(mat6_apply(minus, form_to_six(w)));
    double nw = std::sqrt(std::max(0.0, inner(w, w, ginv)));
    double nm = std::sqrt(std::max(0.0, inner(m, m, ginv)));
    return nw > 0 ? nm / nw : 0.0;
}

// Generic frame data; T is double or a dual scalar.
template <class T>
struct FrameT {
    Mat4T<T> coframe;                // rows e1..e4
    std::array<Mat4T<T>, 3> omega;   // the self-dual triple, lower indices
};

template <class T>
FrameT<T> make_frame_t(const Mat4T<T>& g) {
    using std::sqrt;
    Mat4T<T> ginv = mat4_inverse(g);
    auto ip = [&ginv](const Vec4T<T>& u, const Vec4T<T>& v) {
        T s = T(0.0);
        for (int p = 0; p < 4; ++p)
            for (int q = 0; q < 4; ++q) s = s + u[p] * ginv[p][q] * v[q];
        return s;
    };
    FrameT<T> fr;
    for (int i = 0; i < 4; ++i) {
        Vec4T<T> v{};
        for (int k = 0; k < 4; ++k) v[k] = T(i == k ? 1.0 : 0.0);
        for (int k = 0; k < i; ++k) {
            T proj = ip(v, fr.coframe[k]);
            for (int p = 0; p < 4; ++p) v[p] = v[p] - proj * fr.coframe[k][p];
        }
        T nrm = sqrt(ip(v, v));
        for (int p = 0; p < 4; ++p) fr.coframe[i][p] = v[p] / nrm;
    }
    const auto& e = fr.coframe;
    auto add = [](const Mat4T<T>& x, const Mat4T<T>& y) {
        Mat4T<T> r;
        for (int p = 0; p < 4; ++p)
            for (int q = 0; q < 4; ++q) r[p][q] = x[p][q] + y[p][q];
        return r;
    };
    fr.omega[0] = add(wedge(e[0], e[1]), wedge(e[2], e[3]));
    fr.omega[1] = add(wedge(e[0], e[2]), wedge(e[3], e[1]));
    fr.omega[2] = add(wedge(e[0], e[3]), wedge(e[1], e[2]));
    return fr;
}

struct SDFrame {
    Mat4 coframe{};
    std::array<TwoForm, 3> omega{};
};

inline SDFrame make_frame(const Mat4& g) {
    FrameT<double> fr = make_frame_t(g);
    Mat4 ginv = mat4_inverse(g);
    SDFrame out;
    out.coframe = fr.coframe;
    for (int i = 0; i < 3; ++i) out.omega[i].c = fr.omega[i];
    // Orthonormality and orientation checks; these hold by construction up to
    // rounding, so failures indicate a degenerate input metric.
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            double s = 0;
            for (int p = 0; p < 4; ++p)
                for (int q = 0; q < 4; ++q) s += out.coframe[i][p] * ginv[p][q] * out.coframe[j][q];
            if (std::abs(s - (i == j ? 1.0 : 0.0)) > 1e-8)
                throw SdError("frame construction lost orthonormality; metric near-degenerate");
        }
    if (mat4_det(out.coframe) <= 0) throw SdError("frame construction lost orientation");
    return out;
}

inline SDFrame make_frame(const charts::MetricJet& jet) { return make_frame(jet.g); }

// Self-dual unit-norm form (|w| = sqrt(2)) to its almost-complex structure.
inline ACStructure form_to_acs(const TwoForm& w, const Mat4& g) {
    Mat4 ginv = mat4_inverse(g);
    double nrm = std::sqrt(std::max(0.0, inner(w, w, ginv)));
    if (std::abs(nrm - std::sqrt(2.0)) > 1e-8)
        throw SdError("form_to_acs: norm of w is " + std::to_string(nrm) +
                      ", expected sqrt(2)");
    if (asd_fraction(w, g) > 1e-8) throw SdError("form_to_acs: w is not self-dual");
    ACStructure acs;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            double s = 0;
            for (int c = 0; c < 4; ++c) s += ginv[a][c] * w.c[b][c];
            acs.j[a][b] = s;
        }
    return acs;
}

// Inverse of form_to_acs. Requires j to square to -I, preserve g, and induce
// the chosen orientation (equivalently: the resulting form is self-dual).
inline TwoForm acs_to_form(const ACStructure& acs, const Mat4& g) {
    Mat4 jj = mat4_mul(acs.j, acs.j);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            if (std::abs(jj[a][b] + (a == b ? 1.0 : 0.0)) > 1e-8)
                throw SdError("acs_to_form: j does not square to -identity");
    Mat4 jgj = mat4_mul(mat4_transpose(acs.j), mat4_mul(g, acs.j));
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            if (std::abs(jgj[a][b] - g[a][b]) > 1e-8)
                throw SdError("acs_to_form: j is not orthogonal for g");
    TwoForm w;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            double s = 0;
            for (int c = 0; c < 4; ++c) s += g[a][c] * acs.j[c][b];
            w.c[a][b] = -s;
        }
    if (asd_fraction(w, g) > 1e-8)
        throw SdError("acs_to_form: j is not compatible with the orientation");
    return w;
}

// Moves a self-dual form for g to a self-dual form for g2: project along the
// anti-self-dual space of g2, then correct by the inverse of the positive
// self-adjoint polar factor so that norms are preserved. Computed as the
// orthogonal polar factor (via SVD) of the 3x3 matrix of the projection in
// orthonormal self-dual frames of g and g2.
inline TwoForm transfer_sd(const Mat4& g, const Mat4& g2, const TwoForm& w) {
    Mat4 ginv = mat4_inverse(g);
    Mat4 g2inv = mat4_inverse(g2);
    if (asd_fraction(w, g) > 1e-8) throw SdError("transfer_sd: w is not self-dual for g");
    SDFrame fr = make_frame(g);
    SDFrame fr2 = make_frame(g2);
    auto [plus2, minus2] = sd_projectors(g2);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    Mat3 m{};
    for (int i = 0; i < 3; ++i) {
        Vec6 hat = form_to_six(fr.omega[i]);
        for (double& x : hat) x *= inv_sqrt2;
        TwoForm proj = six_to_form(mat6_apply(plus2, hat));
        for (int jj = 0; jj < 3; ++jj)
            m[jj][i] = inner(proj, fr2.omega[jj], g2inv) * inv_sqrt2;
    }
    Svd3 svd = svd3(m);
    if (!(svd.sigma[2] > 1e-8 * svd.sigma[0]))
        throw SdError("transfer_sd: projection is near-singular; metrics too far apart");
    Mat3 o = mat3_mul(svd.u, mat3_transpose(svd.v));
    Vec3 coords{};
    for (int i = 0; i < 3; ++i) coords[i] = inner(w, fr.omega[i], ginv) * inv_sqrt2;
    Vec3 out_coords = mat3_apply(o, coords);
    TwoForm out;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            double s = 0;
            for (int i = 0; i < 3; ++i) s += out_coords[i] * fr2.omega[i].c[a][b] * inv_sqrt2;
            out.c[a][b] = s;
        }
    return out;
}

}  // namespace twistorlab::sd
