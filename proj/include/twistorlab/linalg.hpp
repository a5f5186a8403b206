#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include <Eigen/Dense>

// Small fixed-size linear algebra used throughout the library. The tensor
// helpers are templated on the scalar so the same code runs on plain doubles
// and on dual numbers; decompositions (eigenvalues, SVD) are double-only and
// delegate to Eigen.
namespace twistorlab {

template <class T> using Vec4T = std::array<T, 4>;
template <class T> using Mat4T = std::array<std::array<T, 4>, 4>;

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;
using Vec4 = std::array<double, 4>;
using Vec6 = std::array<double, 6>;
using Mat2 = std::array<std::array<double, 2>, 2>;
using Mat3 = std::array<std::array<double, 3>, 3>;
using Mat4 = Mat4T<double>;
using Mat6 = std::array<std::array<double, 6>, 6>;
using Mat23 = std::array<std::array<double, 3>, 2>;
using Mat32 = std::array<std::array<double, 2>, 3>;
// t3[c][a][b], t4[d][c][a][b]
using Ten3 = std::array<Mat4, 4>;
using Ten4 = std::array<Ten3, 4>;

template <class T>
Mat4T<T> mat4_zero() {
    Mat4T<T> m{};
    for (auto& row : m)
        for (auto& x : row) x = T(0.0);
    return m;
}

template <class T>
Mat4T<T> mat4_identity() {
    Mat4T<T> m = mat4_zero<T>();
    for (int i = 0; i < 4; ++i) m[i][i] = T(1.0);
    return m;
}

template <class T>
Mat4T<T> mat4_mul(const Mat4T<T>& a, const Mat4T<T>& b) {
    Mat4T<T> r = mat4_zero<T>();
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k)
            for (int j = 0; j < 4; ++j) r[i][j] = r[i][j] + a[i][k] * b[k][j];
    return r;
}

template <class T>
Vec4T<T> mat4_apply(const Mat4T<T>& a, const Vec4T<T>& v) {
    Vec4T<T> r{};
    for (int i = 0; i < 4; ++i) {
        r[i] = T(0.0);
        for (int j = 0; j < 4; ++j) r[i] = r[i] + a[i][j] * v[j];
    }
    return r;
}

template <class T>
Mat4T<T> mat4_transpose(const Mat4T<T>& a) {
    Mat4T<T> r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r[i][j] = a[j][i];
    return r;
}

template <class T>
T det3_of(T a00, T a01, T a02, T a10, T a11, T a12, T a20, T a21, T a22) {
    return a00 * (a11 * a22 - a12 * a21) - a01 * (a10 * a22 - a12 * a20) +
           a02 * (a10 * a21 - a11 * a20);
}

template <class T>
T mat4_minor(const Mat4T<T>& m, int row, int col) {
    std::array<int, 3> r{}, c{};
    for (int i = 0, k = 0; i < 4; ++i)
        if (i != row) r[k++] = i;
    for (int j = 0, k = 0; j < 4; ++j)
        if (j != col) c[k++] = j;
    return det3_of(m[r[0]][c[0]], m[r[0]][c[1]], m[r[0]][c[2]],
                   m[r[1]][c[0]], m[r[1]][c[1]], m[r[1]][c[2]],
                   m[r[2]][c[0]], m[r[2]][c[1]], m[r[2]][c[2]]);
}

template <class T>
T mat4_det(const Mat4T<T>& m) {
    T d = T(0.0);
    double sign = 1.0;
    for (int j = 0; j < 4; ++j) {
        d = d + T(sign) * m[0][j] * mat4_minor(m, 0, j);
        sign = -sign;
    }
    return d;
}

// Adjugate-based inverse: branch-free, so it stays valid for dual scalars.
template <class T>
Mat4T<T> mat4_inverse(const Mat4T<T>& m) {
    T det = mat4_det(m);
    Mat4T<T> inv;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            inv[i][j] = T(sign) * mat4_minor(m, j, i) / det;
        }
    return inv;
}

inline Vec3 cross3(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

inline double norm3(const Vec3& a) { return std::sqrt(dot3(a, a)); }

inline Vec3 mat3_apply(const Mat3& m, const Vec3& v) {
    Vec3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r[i] += m[i][j] * v[j];
    return r;
}

inline Mat3 mat3_mul(const Mat3& a, const Mat3& b) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
            for (int j = 0; j < 3; ++j) r[i][j] += a[i][k] * b[k][j];
    return r;
}

inline Mat3 mat3_transpose(const Mat3& a) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r[i][j] = a[j][i];
    return r;
}

inline double frobenius3(const Mat3& m) {
    double s = 0;
    for (const auto& row : m)
        for (double x : row) s += x * x;
    return std::sqrt(s);
}

inline double max_abs3(const Mat3& m) {
    double s = 0;
    for (const auto& row : m)
        for (double x : row) s = std::max(s, std::abs(x));
    return s;
}

inline double max_abs4(const Mat4& m) {
    double s = 0;
    for (const auto& row : m)
        for (double x : row) s = std::max(s, std::abs(x));
    return s;
}

namespace detail {

template <int N>
Eigen::Matrix<double, N, N> to_eigen(const std::array<std::array<double, N>, N>& m) {
    Eigen::Matrix<double, N, N> e;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) e(i, j) = m[i][j];
    return e;
}

template <int N>
std::array<std::array<double, N>, N> from_eigen(const Eigen::Matrix<double, N, N>& e) {
    std::array<std::array<double, N>, N> m;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) m[i][j] = e(i, j);
    return m;
}

}  // namespace detail

// Eigenvalues of a symmetric matrix, ascending.
inline Vec3 sym_eigenvalues3(const Mat3& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(detail::to_eigen<3>(m),
                                                      Eigen::EigenvaluesOnly);
    Eigen::Vector3d v = es.eigenvalues();
    return {v(0), v(1), v(2)};
}

inline Vec4 sym_eigenvalues4(const Mat4& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(detail::to_eigen<4>(m),
                                                      Eigen::EigenvaluesOnly);
    Eigen::Vector4d v = es.eigenvalues();
    return {v(0), v(1), v(2), v(3)};
}

struct Svd3 {
    Mat3 u;
    Vec3 sigma;  // descending
    Mat3 v;
};

inline Svd3 svd3(const Mat3& m) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(detail::to_eigen<3>(m),
                                          Eigen::ComputeFullU | Eigen::ComputeFullV);
    Svd3 out;
    out.u = detail::from_eigen<3>(Eigen::Matrix3d(svd.matrixU()));
    out.v = detail::from_eigen<3>(Eigen::Matrix3d(svd.matrixV()));
    Eigen::Vector3d s = svd.singularValues();
    out.sigma = {s(0), s(1), s(2)};
    return out;
}

inline Vec6 singular_values6(const Mat6& m) {
    Eigen::Matrix<double, 6, 6> e;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) e(i, j) = m[i][j];
    Eigen::JacobiSVD<Eigen::Matrix<double, 6, 6>> svd(e);
    Vec6 out;
    for (int i = 0; i < 6; ++i) out[i] = svd.singularValues()(i);
    return out;
}

}  // namespace twistorlab
