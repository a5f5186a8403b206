#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <future>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "twistorlab/chart.hpp"
#include "twistorlab/curvature.hpp"
#include "twistorlab/dual.hpp"
#include "twistorlab/linalg.hpp"
#include "twistorlab/sd_algebra.hpp"

// The sphere bundle of unit-norm self-dual forms (radius sqrt(2) in the form
// metric, coordinates u on the unit sphere in the frame omega_1..omega_3) and
// its tautological almost-complex structure J:
//   * horizontally, J lifts the almost-complex structure j determined by the
//     point of the fiber;
//   * vertically, J rotates the fiber tangent plane by +90 degrees for the
//     outward orientation, v -> u x v.
// J itself is computed exactly pointwise; only its first derivatives (for the
// Nijenhuis tensor) use central finite differences with one Richardson step.
namespace twistorlab::twistor {

// Fiber charts: stereographic projection away from one of the u3 poles.
// FromSouth covers u3 > -1 and is used when u3 >= 0, so |stereo| <= 1 at
// construction from a fiber direction; the opposite chart mirrors this.
enum class FiberChart { FromNorth, FromSouth };

inline Vec2 stereo_from_u(const Vec3& u, FiberChart chart) {
    double d = chart == FiberChart::FromSouth ? 1.0 + u[2] : 1.0 - u[2];
    return {u[0] / d, u[1] / d};
}

inline Vec3 u_from_stereo(const Vec2& s, FiberChart chart) {
    double n = s[0] * s[0] + s[1] * s[1];
    double d = 1.0 + n;
    double u3 = chart == FiberChart::FromSouth ? (1.0 - n) / d : (n - 1.0) / d;
    return {2.0 * s[0] / d, 2.0 * s[1] / d, u3};
}

// d(stereo)/d(u), restricted to tangent vectors of the sphere at u.
inline Mat23 stereo_jacobian(const Vec3& u, FiberChart chart) {
    double d = chart == FiberChart::FromSouth ? 1.0 + u[2] : 1.0 - u[2];
    double sign = chart == FiberChart::FromSouth ? -1.0 : 1.0;
    Mat23 m{};
    m[0][0] = 1.0 / d;
    m[0][2] = sign * u[0] / (d * d);
    m[1][1] = 1.0 / d;
    m[1][2] = sign * u[1] / (d * d);
    return m;
}

inline Mat32 stereo_jacobian_inv(const Vec2& s, FiberChart chart) {
    double n = s[0] * s[0] + s[1] * s[1];
    double d = 1.0 + n;
    double d2 = d * d;
    Mat32 m{};
    m[0][0] = 2.0 / d - 4.0 * s[0] * s[0] / d2;
    m[0][1] = -4.0 * s[0] * s[1] / d2;
    m[1][0] = -4.0 * s[0] * s[1] / d2;
    m[1][1] = 2.0 / d - 4.0 * s[1] * s[1] / d2;
    double sign = chart == FiberChart::FromSouth ? -1.0 : 1.0;
    m[2][0] = sign * 4.0 * s[0] / d2;
    m[2][1] = sign * 4.0 * s[1] / d2;
    return m;
}

inline Vec2 apply23(const Mat23& m, const Vec3& v) {
    return {m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2]};
}

inline Vec3 apply32(const Mat32& m, const Vec2& v) {
    return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1],
            m[2][0] * v[0] + m[2][1] * v[1]};
}

struct TwistorPoint {
    Vec4 base{};
    Vec3 u{};  // fiber direction in the frame omega_1..omega_3, |u| = 1
    FiberChart chart = FiberChart::FromSouth;
    Vec2 stereo{};

    static TwistorPoint from_u(const Vec4& base, const Vec3& u) {
        double n = norm3(u);
        if (std::abs(n - 1.0) > 1e-8)
            throw std::invalid_argument("fiber direction must be a unit vector");
        TwistorPoint tp;
        tp.base = base;
        for (int i = 0; i < 3; ++i) tp.u[i] = u[i] / n;
        tp.chart = tp.u[2] >= 0 ? FiberChart::FromSouth : FiberChart::FromNorth;
        tp.stereo = stereo_from_u(tp.u, tp.chart);
        return tp;
    }

    static TwistorPoint from_stereo(const Vec4& base, FiberChart chart, const Vec2& s) {
        if (std::abs(s[0]) > 2.0 || std::abs(s[1]) > 2.0)
            throw std::invalid_argument("stereographic coordinate outside |stereo| <= 2");
        TwistorPoint tp;
        tp.base = base;
        tp.chart = chart;
        tp.stereo = s;
        tp.u = u_from_stereo(s, chart);
        return tp;
    }
};

// Connection coefficients of the self-dual frame field:
//   nabla_a omega_i = sum_j (A_a)_{ji} omega_j,  A_a antisymmetric.
struct SDConnection {
    Vec4 point{};
    std::array<Mat3, 4> a{};
};

inline SDConnection sd_connection(const charts::MetricChart& chart, const Vec4& p) {
    using D = Dual<double>;
    charts::MetricJet jet = charts::metric_jet(chart, p);
    curvature::Connection conn = curvature::christoffel(jet);
    sd::FrameT<double> fr = sd::make_frame_t(jet.g);
    Mat4 ginv = mat4_inverse(jet.g);

    SDConnection out;
    out.point = p;
    for (int dir = 0; dir < 4; ++dir) {
        std::array<D, 4> x;
        for (int k = 0; k < 4; ++k) x[k] = D(p[k], k == dir ? 1.0 : 0.0);
        sd::FrameT<D> fd = sd::make_frame_t(chart.eval<D>(x));
        for (int i = 0; i < 3; ++i) {
            // (nabla_dir omega_i)_{bc}
            Mat4 cov{};
            for (int b = 0; b < 4; ++b)
                for (int c = 0; c < 4; ++c) {
                    double s = fd.omega[i][b][c].b;
                    for (int d = 0; d < 4; ++d)
                        s -= conn.gamma[d][dir][b] * fr.omega[i][d][c] +
                             conn.gamma[d][dir][c] * fr.omega[i][b][d];
                    cov[b][c] = s;
                }
            for (int j = 0; j < 3; ++j) {
                double s = 0;
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b)
                        for (int c = 0; c < 4; ++c)
                            for (int d = 0; d < 4; ++d)
                                s += cov[a][b] * ginv[a][c] * ginv[b][d] * fr.omega[j][c][d];
                out.a[dir][j][i] = 0.25 * s;  // (1/2) <cov, omega_j> / |omega_j|^2 * 2
            }
        }
    }
    return out;
}

// Horizontal lift of the base vector v at tp: the base part is v itself, the
// fiber part is the stereographic image of -sum_a v^a A_a u, projected to the
// tangent plane of the sphere at u.
inline Vec6 horizontal_lift(const SDConnection& conn, const TwistorPoint& tp, const Vec4& v) {
    Vec3 drift{};
    for (int a = 0; a < 4; ++a) {
        Vec3 au = mat3_apply(conn.a[a], tp.u);
        for (int i = 0; i < 3; ++i) drift[i] -= v[a] * au[i];
    }
    double radial = dot3(drift, tp.u);
    for (int i = 0; i < 3; ++i) drift[i] -= radial * tp.u[i];
    Vec2 ds = apply23(stereo_jacobian(tp.u, tp.chart), drift);
    return {v[0], v[1], v[2], v[3], ds[0], ds[1]};
}

struct TwistorJ {
    TwistorPoint point{};
    Mat6 m{};  // endomorphism in the basis (dx1..dx4, ds1, ds2)
};

namespace detail {

inline TwistorJ assemble_J(const TwistorPoint& tp, const sd::FrameT<double>& fr,
                           const SDConnection& conn, const Mat4& g) {
    // j of the fiber point: w(u) = sum_i u_i omega_i has norm sqrt(2).
    sd::TwoForm w;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            double s = 0;
            for (int i = 0; i < 3; ++i) s += tp.u[i] * fr.omega[i][a][b];
            w.c[a][b] = s;
        }
    sd::ACStructure acs = sd::form_to_acs(w, g);

    Mat23 dsdu = stereo_jacobian(tp.u, tp.chart);
    TwistorJ out;
    out.point = tp;
    for (auto& row : out.m) row.fill(0.0);

    for (int col = 0; col < 4; ++col) {
        // J(d/dx_col) = lift(j e_col) + vertical correction.
        for (int r = 0; r < 4; ++r) out.m[r][col] = acs.j[r][col];
        Vec3 fib{};
        // -A(j e_col) u
        for (int b = 0; b < 4; ++b) {
            Vec3 au = mat3_apply(conn.a[b], tp.u);
            for (int i = 0; i < 3; ++i) fib[i] -= acs.j[b][col] * au[i];
        }
        // + u x (A_col u)
        Vec3 acolu = mat3_apply(conn.a[col], tp.u);
        Vec3 rot = cross3(tp.u, acolu);
        for (int i = 0; i < 3; ++i) fib[i] += rot[i];
        Vec2 ds = apply23(dsdu, fib);
        out.m[4][col] = ds[0];
        out.m[5][col] = ds[1];
    }
    Mat32 duds = stereo_jacobian_inv(tp.stereo, tp.chart);
    for (int k = 0; k < 2; ++k) {
        Vec2 ek{};
        ek[k] = 1.0;
        Vec3 tangent = apply32(duds, ek);
        Vec2 ds = apply23(dsdu, cross3(tp.u, tangent));
        out.m[4][4 + k] = ds[0];
        out.m[5][4 + k] = ds[1];
    }
    return out;
}

}  // namespace detail

inline TwistorJ twistor_J(const charts::MetricChart& chart, const TwistorPoint& tp) {
    charts::MetricJet jet = charts::metric_jet(chart, tp.base);
    sd::FrameT<double> fr = sd::make_frame_t(jet.g);
    SDConnection conn = sd_connection(chart, tp.base);
    return detail::assemble_J(tp, fr, conn, jet.g);
}

struct NijenhuisResult {
    double max_abs = 0;
    std::array<std::array<std::array<double, 6>, 6>, 6> n{};  // n[k][i][j]
};

// N^k_{ij} = J^l_i d_l J^k_j - J^l_j d_l J^k_i - J^k_l (d_i J^l_j - d_j J^l_i),
// derivatives by central differences of step h with one Richardson pass.
inline NijenhuisResult nijenhuis(const charts::MetricChart& chart, const TwistorPoint& tp,
                                 double h = 1e-4) {
    auto field = [&chart, &tp](const Vec4& x, const Vec2& s) {
        return twistor_J(chart, TwistorPoint::from_stereo(x, tp.chart, s)).m;
    };
    auto shifted = [&tp](int l, double delta) {
        Vec4 x = tp.base;
        Vec2 s = tp.stereo;
        if (l < 4)
            x[l] += delta;
        else
            s[l - 4] += delta;
        return std::pair<Vec4, Vec2>(x, s);
    };
    for (int l = 0; l < 4; ++l) {
        Vec4 xp = tp.base, xm = tp.base;
        xp[l] += h;
        xm[l] -= h;
        if (!charts::domain_contains(chart.domain, xp) ||
            !charts::domain_contains(chart.domain, xm))
            throw charts::DomainViolation("finite-difference stencil leaves the chart domain");
    }

    std::array<Mat6, 6> dj{};
    for (int l = 0; l < 6; ++l) {
        auto diff_at = [&](double step) {
            auto [xp, sp] = shifted(l, step);
            auto [xm, sm] = shifted(l, -step);
            Mat6 jp = field(xp, sp);
            Mat6 jm = field(xm, sm);
            Mat6 d;
            for (int r = 0; r < 6; ++r)
                for (int c = 0; c < 6; ++c) d[r][c] = (jp[r][c] - jm[r][c]) / (2.0 * step);
            return d;
        };
        Mat6 dh = diff_at(h);
        Mat6 dh2 = diff_at(h / 2.0);
        for (int r = 0; r < 6; ++r)
            for (int c = 0; c < 6; ++c) dj[l][r][c] = (4.0 * dh2[r][c] - dh[r][c]) / 3.0;
    }

    Mat6 j0 = field(tp.base, tp.stereo);
    NijenhuisResult out;
    for (int k = 0; k < 6; ++k)
        for (int i = 0; i < 6; ++i)
            for (int jx = 0; jx < 6; ++jx) {
                double s = 0;
                for (int l = 0; l < 6; ++l) {
                    s += j0[l][i] * dj[l][k][jx] - j0[l][jx] * dj[l][k][i];
                    s -= j0[k][l] * (dj[i][l][jx] - dj[jx][l][i]);
                }
                out.n[k][i][jx] = s;
                out.max_abs = std::max(out.max_abs, std::abs(s));
            }
    return out;
}

struct IntegrabilityRow {
    int index = 0;
    Vec4 base{};
    Vec3 u{};
    double w_plus_norm = 0;
    double nijenhuis_max = 0;
};

struct IntegrabilityReport {
    std::vector<IntegrabilityRow> rows;
    double max_nijenhuis = 0;
    double max_w_plus = 0;
};

inline int worker_count() {
    const char* env = std::getenv("TWISTOR_THREADS");
    if (env == nullptr) return 1;
    int n = std::atoi(env);
    return n > 0 ? n : 1;
}

inline IntegrabilityReport integrability_report(const charts::MetricChart& chart, int samples,
                                                std::uint64_t seed, double h = 1e-4) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<TwistorPoint> points;
    points.reserve(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        Vec4 p = charts::domain_sample(chart.domain, rng);
        Vec3 u;
        do {
            u = {gauss(rng), gauss(rng), gauss(rng)};
        } while (norm3(u) < 1e-3);
        double n = norm3(u);
        for (double& c : u) c /= n;
        points.push_back(TwistorPoint::from_u(p, u));
    }

    auto eval_row = [&chart, h](int idx, const TwistorPoint& tp) {
        IntegrabilityRow row;
        row.index = idx;
        row.base = tp.base;
        row.u = tp.u;
        curvature::CurvatureTensors curv = curvature::curvature_at(chart, tp.base);
        sd::SDFrame frame = sd::make_frame(curv.g);
        curvature::WeylSplit split = curvature::weyl_split(curv, frame);
        row.w_plus_norm = frobenius3(split.w_plus);
        row.nijenhuis_max = nijenhuis(chart, tp, h).max_abs;
        return row;
    };

    IntegrabilityReport report;
    report.rows.resize(points.size());
    int threads = std::min<int>(worker_count(), static_cast<int>(points.size()));
    if (threads <= 1) {
        for (std::size_t i = 0; i < points.size(); ++i)
            report.rows[i] = eval_row(static_cast<int>(i), points[i]);
    } else {
        std::vector<std::future<void>> futs;
        std::size_t chunk = (points.size() + threads - 1) / static_cast<std::size_t>(threads);
        for (int t = 0; t < threads; ++t) {
            std::size_t lo = static_cast<std::size_t>(t) * chunk;
            std::size_t hi = std::min(points.size(), lo + chunk);
            if (lo >= hi) break;
            futs.push_back(std::async(std::launch::async, [&, lo, hi]() {
                for (std::size_t i = lo; i < hi; ++i)
                    report.rows[i] = eval_row(static_cast<int>(i), points[i]);
            }));
        }
        for (auto& f : futs) f.get();
    }

    std::sort(report.rows.begin(), report.rows.end(),
              [](const IntegrabilityRow& x, const IntegrabilityRow& y) {
                  if (x.base != y.base) return x.base < y.base;
                  return x.u < y.u;
              });
    for (const auto& row : report.rows) {
        report.max_nijenhuis = std::max(report.max_nijenhuis, row.nijenhuis_max);
        report.max_w_plus = std::max(report.max_w_plus, row.w_plus_norm);
    }
    return report;
}

// The twistor point of chart2 at the same base point that carries the same
// almost-complex structure as tp carries for chart1. Matching goes through
// the j-representation, so it is exactly the identification under which J is
// compared across conformally related metrics.
inline TwistorPoint match_by_acs(const charts::MetricChart& chart1, const TwistorPoint& tp,
                                 const charts::MetricChart& chart2) {
    Mat4 g1 = chart1.eval_checked(tp.base);
    Mat4 g2 = chart2.eval_checked(tp.base);
    sd::FrameT<double> fr1 = sd::make_frame_t(g1);
    sd::TwoForm w;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            double s = 0;
            for (int i = 0; i < 3; ++i) s += tp.u[i] * fr1.omega[i][a][b];
            w.c[a][b] = s;
        }
    sd::ACStructure acs = sd::form_to_acs(w, g1);
    sd::TwoForm w2 = sd::acs_to_form(acs, g2);
    sd::FrameT<double> fr2 = sd::make_frame_t(g2);
    Mat4 g2inv = mat4_inverse(g2);
    Vec3 u2{};
    for (int i = 0; i < 3; ++i) {
        sd::TwoForm om;
        om.c = fr2.omega[i];
        u2[i] = 0.5 * sd::inner(w2, om, g2inv);
    }
    double n = norm3(u2);
    for (double& c : u2) c /= n;
    return TwistorPoint::from_u(tp.base, u2);
}

// Basis of the horizontal subspace at tp (columns of the lift of dx1..dx4).
inline std::array<Vec6, 4> horizontal_frame(const charts::MetricChart& chart,
                                            const TwistorPoint& tp) {
    SDConnection conn = sd_connection(chart, tp.base);
    std::array<Vec6, 4> basis;
    for (int a = 0; a < 4; ++a) {
        Vec4 v{};
        v[a] = 1.0;
        basis[a] = horizontal_lift(conn, tp, v);
    }
    return basis;
}

}  // namespace twistorlab::twistor
