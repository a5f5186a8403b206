#pragma once

#include <cmath>
#include <utility>

// Forward-mode dual numbers. One level differentiates once; nesting the
// template (Dual<Dual<double>>) yields exact mixed second derivatives, which
// is how metric jets are produced. No finite differences are involved here.
namespace twistorlab {

template <class T>
struct Dual {
    T a{};  // value
    T b{};  // derivative along the seeded direction

    Dual() = default;
    Dual(double v) : a(v), b() {}
    Dual(T v, T d) : a(std::move(v)), b(std::move(d)) {}
};

template <class T>
Dual<T> operator+(const Dual<T>& x, const Dual<T>& y) {
    return {x.a + y.a, x.b + y.b};
}
template <class T>
Dual<T> operator-(const Dual<T>& x, const Dual<T>& y) {
    return {x.a - y.a, x.b - y.b};
}
template <class T>
Dual<T> operator-(const Dual<T>& x) {
    return {-x.a, -x.b};
}
template <class T>
Dual<T> operator*(const Dual<T>& x, const Dual<T>& y) {
    return {x.a * y.a, x.b * y.a + x.a * y.b};
}
template <class T>
Dual<T> operator/(const Dual<T>& x, const Dual<T>& y) {
    return {x.a / y.a, (x.b * y.a - x.a * y.b) / (y.a * y.a)};
}

template <class T>
Dual<T> operator+(const Dual<T>& x, double c) {
    return x + Dual<T>(c);
}
template <class T>
Dual<T> operator+(double c, const Dual<T>& x) {
    return Dual<T>(c) + x;
}
template <class T>
Dual<T> operator-(const Dual<T>& x, double c) {
    return x - Dual<T>(c);
}
template <class T>
Dual<T> operator-(double c, const Dual<T>& x) {
    return Dual<T>(c) - x;
}
template <class T>
Dual<T> operator*(const Dual<T>& x, double c) {
    return x * Dual<T>(c);
}
template <class T>
Dual<T> operator*(double c, const Dual<T>& x) {
    return Dual<T>(c) * x;
}
template <class T>
Dual<T> operator/(const Dual<T>& x, double c) {
    return x / Dual<T>(c);
}
template <class T>
Dual<T> operator/(double c, const Dual<T>& x) {
    return Dual<T>(c) / x;
}

template <class T>
Dual<T> sin(const Dual<T>& x) {
    using std::cos;
    using std::sin;
    return {sin(x.a), cos(x.a) * x.b};
}
template <class T>
Dual<T> cos(const Dual<T>& x) {
    using std::cos;
    using std::sin;
    return {cos(x.a), -(sin(x.a) * x.b)};
}
template <class T>
Dual<T> exp(const Dual<T>& x) {
    using std::exp;
    T e = exp(x.a);
    return {e, e * x.b};
}
template <class T>
Dual<T> log(const Dual<T>& x) {
    using std::log;
    return {log(x.a), x.b / x.a};
}
template <class T>
Dual<T> sqrt(const Dual<T>& x) {
    using std::sqrt;
    T s = sqrt(x.a);
    return {s, x.b / (2.0 * s)};
}

// Integer power by repeated squaring; exact for dual scalars.
template <class T>
T ipow(T base, unsigned k) {
    T acc = T(1.0);
    while (k > 0) {
        if (k & 1u) acc = acc * base;
        base = base * base;
        k >>= 1u;
    }
    return acc;
}

inline double value_of(double x) { return x; }
template <class T>
double value_of(const Dual<T>& x) {
    return value_of(x.a);
}

}  // namespace twistorlab
