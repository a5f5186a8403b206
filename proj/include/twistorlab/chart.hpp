#pragma once

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "twistorlab/dual.hpp"
#include "twistorlab/expr.hpp"
#include "twistorlab/linalg.hpp"

// Metric charts: a named symmetric matrix of coordinate expressions together
// with a sampling domain. Jets (value, first and second derivatives of every
// component) come from nested dual-number evaluation and are exact up to
// rounding.
namespace twistorlab::charts {

// Point rejected: outside the chart's declared domain.
class DomainViolation : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Expression or metric data is unusable (non-finite values, bad parse input,
// positivity failure).
class ChartError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BoxDomain {
    Vec4 lo, hi;
};
struct BallDomain {
    double radius = 1.0;
};
using Domain = std::variant<BoxDomain, BallDomain>;

inline constexpr double kDomainMargin = 1e-3;

inline bool domain_contains(const Domain& d, const Vec4& p) {
    if (const auto* box = std::get_if<BoxDomain>(&d)) {
        for (int i = 0; i < 4; ++i)
            if (p[i] < box->lo[i] || p[i] > box->hi[i]) return false;
        return true;
    }
    const auto& ball = std::get<BallDomain>(d);
    double r2 = 0;
    for (double c : p) r2 += c * c;
    return r2 <= ball.radius * ball.radius;
}

// Uniform sample staying kDomainMargin away from the boundary.
inline Vec4 domain_sample(const Domain& d, std::mt19937_64& rng) {
    if (const auto* box = std::get_if<BoxDomain>(&d)) {
        Vec4 p;
        for (int i = 0; i < 4; ++i) {
            std::uniform_real_distribution<double> dist(box->lo[i] + kDomainMargin,
                                                        box->hi[i] - kDomainMargin);
            p[i] = dist(rng);
        }
        return p;
    }
    const auto& ball = std::get<BallDomain>(d);
    double rmax = ball.radius - kDomainMargin;
    std::uniform_real_distribution<double> dist(-rmax, rmax);
    for (;;) {
        Vec4 p = {dist(rng), dist(rng), dist(rng), dist(rng)};
        double r2 = 0;
        for (double c : p) r2 += c * c;
        if (r2 <= rmax * rmax) return p;
    }
}

struct MetricChart {
    std::string name;
    std::array<std::array<expr::Expr, 4>, 4> comp;  // symmetric, shared subtrees
    Domain domain;

    template <class T>
    Mat4T<T> eval(const std::array<T, 4>& x) const {
        Mat4T<T> g;
        for (int a = 0; a < 4; ++a)
            for (int b = a; b < 4; ++b) {
                g[a][b] = comp[a][b].template eval<T>(x);
                if (b != a) g[b][a] = g[a][b];
            }
        return g;
    }

    // Double evaluation with a finiteness check; domain is not consulted here.
    Mat4 eval_checked(const Vec4& p) const {
        Mat4 g = eval<double>(p);
        for (const auto& row : g)
            for (double v : row)
                if (!std::isfinite(v))
                    throw ChartError("metric evaluation produced a non-finite value in chart '" +
                                     name + "'");
        return g;
    }
};

// g, then ∂_c g_ab and ∂_d ∂_c g_ab at a point. dg[c][a][b], ddg[d][c][a][b].
struct MetricJet {
    Vec4 point{};
    Mat4 g{};
    Ten3 dg{};
    Ten4 ddg{};
};

inline MetricJet metric_jet(const MetricChart& chart, const Vec4& p) {
    if (!domain_contains(chart.domain, p))
        throw DomainViolation("point outside domain of chart '" + chart.name + "'");
    using D = Dual<double>;
    using DD = Dual<D>;
    MetricJet jet;
    jet.point = p;
    for (int a = 0; a < 4; ++a)
        for (int b = a; b < 4; ++b) {
            const expr::Expr& e = chart.comp[a][b];
            for (int c = 0; c < 4; ++c)
                for (int d = c; d < 4; ++d) {
                    std::array<DD, 4> x;
                    for (int k = 0; k < 4; ++k)
                        x[k] = DD(D(p[k], k == c ? 1.0 : 0.0), D(k == d ? 1.0 : 0.0, 0.0));
                    DD r = e.eval(x);
                    jet.g[a][b] = r.a.a;
                    jet.dg[c][a][b] = r.a.b;
                    jet.dg[d][a][b] = r.b.a;
                    jet.ddg[c][d][a][b] = r.b.b;
                    jet.ddg[d][c][a][b] = r.b.b;
                }
        }
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < a; ++b) {
            jet.g[a][b] = jet.g[b][a];
            for (int c = 0; c < 4; ++c) {
                jet.dg[c][a][b] = jet.dg[c][b][a];
                for (int d = 0; d < 4; ++d) jet.ddg[d][c][a][b] = jet.ddg[d][c][b][a];
            }
        }
    for (int c = 0; c < 4; ++c)
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                if (!std::isfinite(jet.g[a][b]) || !std::isfinite(jet.dg[c][a][b]))
                    throw ChartError("jet evaluation produced a non-finite value in chart '" +
                                     chart.name + "'");
                for (int d = 0; d < 4; ++d)
                    if (!std::isfinite(jet.ddg[d][c][a][b]))
                        throw ChartError("jet evaluation produced a non-finite value in chart '" +
                                         chart.name + "'");
            }
    return jet;
}

namespace detail {

// Probes 10 deterministic interior points; rejects charts that fail to be
// symmetric positive-definite there.
inline void validate_chart(const MetricChart& chart) {
    std::mt19937_64 rng(0);
    for (int probe = 0; probe < 10; ++probe) {
        Vec4 p = domain_sample(chart.domain, rng);
        Mat4 g = chart.eval_checked(p);
        Vec4 ev = sym_eigenvalues4(g);
        if (ev[0] <= 0)
            throw ChartError("metric of chart '" + chart.name +
                             "' is not positive-definite at a probe point");
    }
}

}  // namespace detail

// Pull the chart back through the coordinate swap x3 <-> x4. The coordinate
// orientation of the new chart corresponds to the opposite orientation of the
// underlying space.
inline MetricChart orientation_reversed(const MetricChart& chart) {
    static constexpr std::array<int, 4> kSwap = {0, 1, 3, 2};
    MetricChart out;
    out.name = chart.name + "_reversed";
    out.domain = chart.domain;
    if (auto* box = std::get_if<BoxDomain>(&out.domain)) {
        std::swap(box->lo[2], box->lo[3]);
        std::swap(box->hi[2], box->hi[3]);
    }
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            out.comp[a][b] = chart.comp[kSwap[a]][kSwap[b]].rename_coords(kSwap);
    return out;
}

inline MetricChart builtin_chart(std::string_view name, bool reversed = false) {
    using expr::Expr;
    const Expr x1 = Expr::coord(0), x2 = Expr::coord(1), x3 = Expr::coord(2), x4 = Expr::coord(3);
    const Expr zero = Expr::number(0.0), one = Expr::number(1.0);
    MetricChart chart;
    chart.name = std::string(name);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) chart.comp[a][b] = zero;

    if (name == "flat") {
        for (int a = 0; a < 4; ++a) chart.comp[a][a] = one;
        chart.domain = BoxDomain{{-10, -10, -10, -10}, {10, 10, 10, 10}};
    } else if (name == "s4_round") {
        // Stereographic chart of the unit round 4-sphere.
        Expr rho = one + Expr::pow(x1, 2) + Expr::pow(x2, 2) + Expr::pow(x3, 2) + Expr::pow(x4, 2);
        Expr conf = Expr::number(4.0) / Expr::pow(rho, 2);
        for (int a = 0; a < 4; ++a) chart.comp[a][a] = conf;
        chart.domain = BallDomain{2.0};
    } else if (name == "cp2_fubini_study") {
        // Affine chart z1 = x1 + i x2, z2 = x3 + i x4 of the Fubini-Study
        // metric; the coordinate orientation is the complex orientation.
        Expr rho = one + Expr::pow(x1, 2) + Expr::pow(x2, 2) + Expr::pow(x3, 2) + Expr::pow(x4, 2);
        Expr rho2 = Expr::pow(rho, 2);
        Expr a_comp = (one + Expr::pow(x3, 2) + Expr::pow(x4, 2)) / rho2;
        Expr b_comp = (one + Expr::pow(x1, 2) + Expr::pow(x2, 2)) / rho2;
        Expr p_comp = -((x1 * x3 + x2 * x4) / rho2);
        Expr q_comp = -((x1 * x4 - x2 * x3) / rho2);
        chart.comp[0][0] = chart.comp[1][1] = a_comp;
        chart.comp[2][2] = chart.comp[3][3] = b_comp;
        chart.comp[0][2] = chart.comp[2][0] = p_comp;
        chart.comp[1][3] = chart.comp[3][1] = p_comp;
        chart.comp[0][3] = chart.comp[3][0] = q_comp;
        chart.comp[1][2] = chart.comp[2][1] = -q_comp;
        chart.domain = BallDomain{2.0};
    } else if (name == "s2xs2") {
        // Product of two unit round 2-spheres, one stereographic chart each.
        Expr ra = one + Expr::pow(x1, 2) + Expr::pow(x2, 2);
        Expr rb = one + Expr::pow(x3, 2) + Expr::pow(x4, 2);
        Expr ca = Expr::number(4.0) / Expr::pow(ra, 2);
        Expr cb = Expr::number(4.0) / Expr::pow(rb, 2);
        chart.comp[0][0] = chart.comp[1][1] = ca;
        chart.comp[2][2] = chart.comp[3][3] = cb;
        chart.domain = BoxDomain{{-2, -2, -2, -2}, {2, 2, 2, 2}};
    } else {
        throw ChartError("unknown builtin chart '" + std::string(name) + "'");
    }
    detail::validate_chart(chart);
    return reversed ? orientation_reversed(chart) : chart;
}

// Multiply every component by e^{2f}.
inline MetricChart conformal_rescale(const MetricChart& chart, const expr::Expr& f) {
    using expr::Expr;
    Expr factor = Expr::call(expr::Func::Exp, Expr::number(2.0) * f);
    MetricChart out;
    out.name = chart.name + "_conformal";
    out.domain = chart.domain;
    for (int a = 0; a < 4; ++a)
        for (int b = a; b < 4; ++b) {
            out.comp[a][b] = chart.comp[a][b] * factor;
            if (b != a) out.comp[b][a] = out.comp[a][b];
        }
    return out;
}

// Text format: one assignment `gij=expr` per line; `;` also separates
// assignments; `#` starts a comment; whitespace is insignificant. Omitted
// off-diagonal components default to 0. Assigning both gij and gji requires
// structurally identical expressions.
inline MetricChart parse_metric(std::string_view text, std::string_view name = "user",
                                Domain domain = BoxDomain{{-2, -2, -2, -2}, {2, 2, 2, 2}}) {
    MetricChart chart;
    chart.name = std::string(name);
    chart.domain = domain;
    std::array<std::array<bool, 4>, 4> given{};
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) chart.comp[a][b] = expr::Expr::number(0.0);

    std::vector<std::string> statements;
    std::string current;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        char c = i < text.size() ? text[i] : '\n';
        if (c == '#') {
            while (i < text.size() && text[i] != '\n') ++i;
            c = '\n';
        }
        if (c == '\n' || c == ';') {
            statements.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }

    for (const std::string& stmt : statements) {
        std::string s;
        for (char c : stmt)
            if (!std::isspace(static_cast<unsigned char>(c))) s += c;
        if (s.empty()) continue;
        if (s.size() < 4 || s[0] != 'g' || s[1] < '1' || s[1] > '4' || s[2] < '1' || s[2] > '4' ||
            s[3] != '=')
            throw expr::ParseError("expected assignment of the form gij=expr", 0);
        int a = s[1] - '1';
        int b = s[2] - '1';
        expr::Expr e = expr::parse_expression(std::string_view(s).substr(4));
        if (given[a][b]) {
            if (!chart.comp[a][b].same_tree(e))
                throw ChartError("non-symmetric component assignment for g" +
                                 std::to_string(a + 1) + std::to_string(b + 1));
        } else {
            chart.comp[a][b] = e;
            chart.comp[b][a] = e;
            given[a][b] = given[b][a] = true;
        }
    }
    for (int a = 0; a < 4; ++a)
        if (!given[a][a])
            throw ChartError("missing diagonal component g" + std::to_string(a + 1) +
                             std::to_string(a + 1));
    detail::validate_chart(chart);
    return chart;
}

}  // namespace twistorlab::charts
