#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "twistorlab/chart.hpp"
#include "twistorlab/linalg.hpp"
#include "twistorlab/sd_algebra.hpp"

// Levi-Civita connection and curvature from a metric jet. Index and sign
// conventions:
//   Gamma^a_{bc} = (1/2) g^{ad} (d_b g_dc + d_c g_db - d_d g_bc)
//   R^a_{bcd}    = d_c Gamma^a_{db} - d_d Gamma^a_{cb}
//                  + Gamma^a_{ce} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{cb}
//   Ric_{bd}     = R^a_{bad},   scal = g^{bd} Ric_{bd}
// With these choices the unit round 4-sphere has R_{abcd} = g_ac g_bd - g_ad g_bc
// and scalar curvature 12.
namespace twistorlab::curvature {

struct Connection {
    // gamma[a][b][c] = Gamma^a_{bc}
    std::array<Mat4, 4> gamma{};
};

struct CurvatureTensors {
    Vec4 point{};
    Ten4 riemann{};      // riemann[a][b][c][d] = R^a_{bcd}
    Ten4 riemann_low{};  // R_{abcd}
    Mat4 ricci{};
    double scalar = 0;
    Ten4 weyl_low{};  // C_{abcd}
    Mat4 g{};
    Mat4 ginv{};
};

inline Connection christoffel(const charts::MetricJet& jet) {
    Mat4 ginv = mat4_inverse(jet.g);
    Connection conn;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c) {
                double s = 0;
                for (int d = 0; d < 4; ++d)
                    s += ginv[a][d] * (jet.dg[b][d][c] + jet.dg[c][d][b] - jet.dg[d][b][c]);
                conn.gamma[a][b][c] = 0.5 * s;
            }
    return conn;
}

inline CurvatureTensors curvature_from_jet(const charts::MetricJet& jet) {
    CurvatureTensors out;
    out.point = jet.point;
    out.g = jet.g;
    out.ginv = mat4_inverse(jet.g);
    const Mat4& g = out.g;
    const Mat4& ginv = out.ginv;

    Ten3 dginv{};  // dginv[c][a][b] = d_c g^{ab}
    for (int c = 0; c < 4; ++c)
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                double s = 0;
                for (int p = 0; p < 4; ++p)
                    for (int q = 0; q < 4; ++q) s += ginv[a][p] * jet.dg[c][p][q] * ginv[q][b];
                dginv[c][a][b] = -s;
            }

    Connection conn = christoffel(jet);
    // dgamma[c][a][d][b] = d_c Gamma^a_{db}
    std::array<std::array<Mat4, 4>, 4> dgamma{};
    for (int c = 0; c < 4; ++c)
        for (int a = 0; a < 4; ++a)
            for (int d = 0; d < 4; ++d)
                for (int b = 0; b < 4; ++b) {
                    double s = 0;
                    for (int e = 0; e < 4; ++e) {
                        s += dginv[c][a][e] * (jet.dg[d][e][b] + jet.dg[b][e][d] - jet.dg[e][d][b]);
                        s += ginv[a][e] *
                             (jet.ddg[c][d][e][b] + jet.ddg[c][b][e][d] - jet.ddg[c][e][d][b]);
                    }
                    dgamma[c][a][d][b] = 0.5 * s;
                }

    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d) {
                    double s = dgamma[c][a][d][b] - dgamma[d][a][c][b];
                    for (int e = 0; e < 4; ++e)
                        s += conn.gamma[a][c][e] * conn.gamma[e][d][b] -
                             conn.gamma[a][d][e] * conn.gamma[e][c][b];
                    out.riemann[a][b][c][d] = s;
                }

    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d) {
                    double s = 0;
                    for (int e = 0; e < 4; ++e) s += g[a][e] * out.riemann[e][b][c][d];
                    out.riemann_low[a][b][c][d] = s;
                }

    for (int b = 0; b < 4; ++b)
        for (int d = 0; d < 4; ++d) {
            double s = 0;
            for (int a = 0; a < 4; ++a) s += out.riemann[a][b][a][d];
            out.ricci[b][d] = s;
        }
    out.scalar = 0;
    for (int b = 0; b < 4; ++b)
        for (int d = 0; d < 4; ++d) out.scalar += ginv[b][d] * out.ricci[b][d];

    // Dimension-4 Weyl tensor.
    const Mat4& r = out.ricci;
    double sc = out.scalar;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d) {
                    double w = out.riemann_low[a][b][c][d];
                    w -= 0.5 * (g[a][c] * r[b][d] - g[a][d] * r[b][c] + g[b][d] * r[a][c] -
                                g[b][c] * r[a][d]);
                    w += (sc / 6.0) * (g[a][c] * g[b][d] - g[a][d] * g[b][c]);
                    out.weyl_low[a][b][c][d] = w;
                }
    return out;
}

inline CurvatureTensors curvature_at(const charts::MetricChart& chart, const Vec4& p) {
    return curvature_from_jet(charts::metric_jet(chart, p));
}

// Weyl curvature expressed on the self-dual and anti-self-dual frames:
//   w_plus[i][j]  = (1/4) C(omega_i, omega_j)
//   w_minus[i][j] = (1/4) C(eta_i, eta_j)
// with eta the anti-self-dual triple of the same coframe (sign flipped on the
// second wedge term). cross_max records the largest mixed pairing, which
// vanishes for the Weyl tensor.
struct WeylSplit {
    Mat3 w_plus{};
    Mat3 w_minus{};
    double cross_max = 0;
};

inline WeylSplit weyl_split(const CurvatureTensors& curv, const sd::SDFrame& frame) {
    const Mat4& ginv = curv.ginv;
    // Validate that the frame belongs to this metric.
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            double s = 0;
            for (int p = 0; p < 4; ++p)
                for (int q = 0; q < 4; ++q)
                    s += frame.coframe[i][p] * ginv[p][q] * frame.coframe[j][q];
            if (std::abs(s - (i == j ? 1.0 : 0.0)) > 1e-8)
                throw sd::SdError("weyl_split: frame is not orthonormal for this metric");
        }

    const auto& e = frame.coframe;
    std::array<Mat4, 3> eta;
    auto sub = [](const Mat4& x, const Mat4& y) {
        Mat4 r;
        for (int p = 0; p < 4; ++p)
            for (int q = 0; q < 4; ++q) r[p][q] = x[p][q] - y[p][q];
        return r;
    };
    Vec4 e0 = e[0], e1 = e[1], e2 = e[2], e3 = e[3];
    eta[0] = sub(sd::wedge(e0, e1), sd::wedge(e2, e3));
    eta[1] = sub(sd::wedge(e0, e2), sd::wedge(e3, e1));
    eta[2] = sub(sd::wedge(e0, e3), sd::wedge(e1, e2));

    auto raise = [&ginv](const Mat4& w) {
        Mat4 up{};
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                double s = 0;
                for (int c = 0; c < 4; ++c)
                    for (int d = 0; d < 4; ++d) s += ginv[a][c] * ginv[b][d] * w[c][d];
                up[a][b] = s;
            }
        return up;
    };
    std::array<Mat4, 3> omega_up, eta_up;
    for (int i = 0; i < 3; ++i) {
        omega_up[i] = raise(frame.omega[i].c);
        eta_up[i] = raise(eta[i]);
    }
    auto pair = [&curv](const Mat4& x, const Mat4& y) {
        double s = 0;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                for (int c = 0; c < 4; ++c)
                    for (int d = 0; d < 4; ++d) s += curv.weyl_low[a][b][c][d] * x[a][b] * y[c][d];
        return 0.25 * s;
    };
    WeylSplit out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            out.w_plus[i][j] = pair(omega_up[i], omega_up[j]);
            out.w_minus[i][j] = pair(eta_up[i], eta_up[j]);
            out.cross_max = std::max(out.cross_max, std::abs(pair(omega_up[i], eta_up[j])));
        }
    return out;
}

}  // namespace twistorlab::curvature
