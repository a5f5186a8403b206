#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "twistorlab/chart.hpp"
#include "twistorlab/curvature.hpp"
#include "twistorlab/homology.hpp"
#include "twistorlab/lattice.hpp"
#include "twistorlab/sd_algebra.hpp"
#include "twistorlab/twistor.hpp"

// The acceptance suite: eleven independent checks, each with its tolerance
// and (where stated) its wall-clock limit pinned in code. The table is what
// `selftest` prints and what the acceptance binary reruns.
namespace twistorlab::selftest {

struct CriterionResult {
    int number = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

inline Mat4 random_spd_metric(std::mt19937_64& rng) {
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

inline Vec3 random_unit3(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec3 u;
    double n = 0;
    do {
        u = {gauss(rng), gauss(rng), gauss(rng)};
        n = norm3(u);
    } while (n < 1e-3);
    for (double& c : u) c /= n;
    return u;
}

// Degree-2 polynomial in the coordinates with coefficients in (-amp, amp).
inline expr::Expr random_quadratic(std::mt19937_64& rng, double amp) {
    std::uniform_real_distribution<double> uni(-amp, amp);
    expr::Expr f = expr::Expr::number(uni(rng));
    for (int i = 0; i < 4; ++i)
        f = f + expr::Expr::number(uni(rng)) * expr::Expr::coord(i);
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j)
            f = f + expr::Expr::number(uni(rng)) * expr::Expr::coord(i) * expr::Expr::coord(j);
    return f;
}

// Frobenius distance of orthogonal projectors onto two 4-dim subspaces of R^6.
inline double subspace_distance(const std::array<Vec6, 4>& b1, const std::array<Vec6, 4>& b2) {
    auto projector = [](const std::array<Vec6, 4>& basis) {
        std::array<Vec6, 4> q = basis;
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < i; ++j) {
                double dot = 0;
                for (int k = 0; k < 6; ++k) dot += q[i][k] * q[j][k];
                for (int k = 0; k < 6; ++k) q[i][k] -= dot * q[j][k];
            }
            double n = 0;
            for (int k = 0; k < 6; ++k) n += q[i][k] * q[i][k];
            n = std::sqrt(n);
            for (int k = 0; k < 6; ++k) q[i][k] /= n;
        }
        Mat6 p{};
        for (int r = 0; r < 6; ++r)
            for (int c = 0; c < 6; ++c)
                for (int i = 0; i < 4; ++i) p[r][c] += q[i][r] * q[i][c];
        return p;
    };
    Mat6 p1 = projector(b1), p2 = projector(b2);
    double s = 0;
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c) s += (p1[r][c] - p2[r][c]) * (p1[r][c] - p2[r][c]);
    return std::sqrt(s);
}

inline std::string run_command(const std::string& cmd) {
    std::string out;
    FILE* pipe = ::popen((cmd + " 2>/dev/null").c_str(), "r");
    if (pipe == nullptr) return out;
    char buf[4096];
    std::size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    ::pclose(pipe);
    return out;
}

}  // namespace detail

// The endomorphism induced by the basic decomposable self-dual form on flat
// space, entry-exact.
inline CriterionResult criterion_1() {
    CriterionResult res{1, "acs-matrix", false, "", 0};
    Mat4 g = mat4_identity<double>();
    sd::TwoForm w{};
    w.c[0][1] = 1;
    w.c[1][0] = -1;
    w.c[2][3] = 1;
    w.c[3][2] = -1;
    auto t0 = std::chrono::steady_clock::now();
    sd::ACStructure acs = sd::form_to_acs(w, g);
    res.seconds = detail::seconds_since(t0);
    const Mat4 expected{{{0, -1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, -1}, {0, 0, 1, 0}}};
    bool exact = true;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) exact = exact && acs.j[i][j] == expected[i][j];
    res.pass = exact && res.seconds < 1e-3;
    res.detail = std::string(exact ? "entries exact" : "entry mismatch");
    return res;
}

inline CriterionResult criterion_2(std::uint64_t seed) {
    CriterionResult res{2, "hodge-algebra", false, "", 0};
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(seed + 2);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    double worst = 0;
    for (int iter = 0; iter < 100; ++iter) {
        Mat4 g = detail::random_spd_metric(rng);
        Mat6 star = sd::star_matrix(g);
        Mat6 star2{};
        for (int r = 0; r < 6; ++r)
            for (int c = 0; c < 6; ++c) {
                for (int k = 0; k < 6; ++k) star2[r][c] += star[r][k] * star[k][c];
                worst = std::max(worst, std::abs(star2[r][c] - (r == c ? 1.0 : 0.0)));
            }
        auto [pp, pm] = sd::sd_projectors(g);
        double tp = 0, tm = 0;
        for (int r = 0; r < 6; ++r) {
            tp += pp[r][r];
            tm += pm[r][r];
            for (int c = 0; c < 6; ++c) {
                double idem_p = -pp[r][c], idem_m = -pm[r][c], crossv = 0, sum = 0;
                for (int k = 0; k < 6; ++k) {
                    idem_p += pp[r][k] * pp[k][c];
                    idem_m += pm[r][k] * pm[k][c];
                    crossv += pp[r][k] * pm[k][c];
                }
                sum = pp[r][c] + pm[r][c] - (r == c ? 1.0 : 0.0);
                worst = std::max({worst, std::abs(idem_p), std::abs(idem_m), std::abs(crossv),
                                  std::abs(sum)});
            }
        }
        worst = std::max({worst, std::abs(tp - 3.0), std::abs(tm - 3.0)});

        sd::SDFrame fr = sd::make_frame(g);
        Vec3 u = detail::random_unit3(rng);
        sd::TwoForm w{};
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                w.c[a][b] = u[0] * fr.omega[0].c[a][b] + u[1] * fr.omega[1].c[a][b] +
                            u[2] * fr.omega[2].c[a][b];
        sd::ACStructure acs = sd::form_to_acs(w, g);
        sd::TwoForm back = sd::acs_to_form(acs, g);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) worst = std::max(worst, std::abs(back.c[a][b] - w.c[a][b]));
        sd::ACStructure acs2 = sd::form_to_acs(back, g);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) worst = std::max(worst, std::abs(acs2.j[a][b] - acs.j[a][b]));
    }
    res.seconds = detail::seconds_since(t0);
    res.pass = worst <= 1e-10 && res.seconds < 1.0;
    res.detail = "max_err=" + detail::fmt(worst);
    return res;
}

inline CriterionResult criterion_3(std::uint64_t seed) {
    CriterionResult res{3, "constant-curvature", false, "", 0};
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(seed + 3);
    charts::MetricChart chart = charts::builtin_chart("s4_round");
    double worst_riemann = 0, worst_scalar = 0, worst_weyl = 0;
    for (int iter = 0; iter < 50; ++iter) {
        Vec4 p = charts::domain_sample(chart.domain, rng);
        curvature::CurvatureTensors curv = curvature::curvature_at(chart, p);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                for (int c = 0; c < 4; ++c)
                    for (int d = 0; d < 4; ++d) {
                        double want =
                            curv.g[a][c] * curv.g[b][d] - curv.g[a][d] * curv.g[b][c];
                        worst_riemann = std::max(
                            worst_riemann, std::abs(curv.riemann_low[a][b][c][d] - want));
                        worst_weyl =
                            std::max(worst_weyl, std::abs(curv.weyl_low[a][b][c][d]));
                    }
        worst_scalar = std::max(worst_scalar, std::abs(curv.scalar - 12.0));
    }
    res.seconds = detail::seconds_since(t0);
    res.pass = worst_riemann <= 1e-8 && worst_scalar <= 1e-8 && worst_weyl <= 1e-8 &&
               res.seconds < 5.0;
    res.detail = "riemann=" + detail::fmt(worst_riemann) + " scalar=" +
                 detail::fmt(worst_scalar) + " weyl=" + detail::fmt(worst_weyl);
    return res;
}

inline CriterionResult criterion_4(std::uint64_t seed) {
    CriterionResult res{4, "conformal-weyl", false, "", 0};
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(seed + 4);
    double worst = 0;
    for (const char* name : {"flat", "s4_round", "cp2_fubini_study"}) {
        charts::MetricChart chart = charts::builtin_chart(name);
        for (int k = 0; k < 5; ++k) {
            expr::Expr f = detail::random_quadratic(rng, 0.25);
            charts::MetricChart scaled = charts::conformal_rescale(chart, f);
            for (int s = 0; s < 3; ++s) {
                Vec4 p = charts::domain_sample(chart.domain, rng);
                curvature::CurvatureTensors c1 = curvature::curvature_at(chart, p);
                curvature::CurvatureTensors c2 = curvature::curvature_at(scaled, p);
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b)
                        for (int c = 0; c < 4; ++c)
                            for (int d = 0; d < 4; ++d) {
                                double m1 = 0, m2 = 0;
                                for (int e = 0; e < 4; ++e) {
                                    m1 += c1.ginv[a][e] * c1.weyl_low[e][b][c][d];
                                    m2 += c2.ginv[a][e] * c2.weyl_low[e][b][c][d];
                                }
                                worst = std::max(worst, std::abs(m1 - m2));
                            }
            }
        }
    }
    res.seconds = detail::seconds_since(t0);
    res.pass = worst <= 1e-6;
    res.detail = "max_mixed_weyl_diff=" + detail::fmt(worst);
    return res;
}

inline CriterionResult criterion_5(std::uint64_t seed) {
    CriterionResult res{5, "integrability-dichotomy", false, "", 0};
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(seed + 5);
    auto max_nijenhuis = [&rng](const charts::MetricChart& chart) {
        double worst = 0;
        for (int i = 0; i < 20; ++i) {
            Vec4 p = charts::domain_sample(chart.domain, rng);
            twistor::TwistorPoint tp = twistor::TwistorPoint::from_u(p, detail::random_unit3(rng));
            worst = std::max(worst, twistor::nijenhuis(chart, tp).max_abs);
        }
        return worst;
    };
    double flat = max_nijenhuis(charts::builtin_chart("flat"));
    double round4 = max_nijenhuis(charts::builtin_chart("s4_round"));
    double cp2_rev = max_nijenhuis(charts::builtin_chart("cp2_fubini_study", true));
    double cp2 = max_nijenhuis(charts::builtin_chart("cp2_fubini_study"));
    double prod = max_nijenhuis(charts::builtin_chart("s2xs2"));
    res.seconds = detail::seconds_since(t0);
    bool integrable_ok = flat <= 1e-4 && round4 <= 1e-4 && cp2_rev <= 1e-4;
    bool obstruction_ok = cp2 >= 1e-2 && prod >= 1e-2;
    res.pass = integrable_ok && obstruction_ok && res.seconds < 60.0;
    res.detail = "flat=" + detail::fmt(flat) + " s4=" + detail::fmt(round4) + " cp2_rev=" +
                 detail::fmt(cp2_rev) + " cp2=" + detail::fmt(cp2) + " s2xs2=" +
                 detail::fmt(prod);
    return res;
}

inline CriterionResult criterion_6(std::uint64_t seed) {
    CriterionResult res{6, "conformal-twistor-j", false, "", 0};
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(seed + 6);
    double worst_j = 0;
    double least_horizontal_gap = 1e300;
    for (const char* name : {"flat", "s2xs2"}) {
        charts::MetricChart chart = charts::builtin_chart(name);
        expr::Expr f = expr::parse_expression("0.3*x1 - 0.2*x2*x4 + 0.1*x3^2");
        charts::MetricChart scaled = charts::conformal_rescale(chart, f);
        for (int i = 0; i < 5; ++i) {
            Vec4 p = charts::domain_sample(chart.domain, rng);
            twistor::TwistorPoint tp = twistor::TwistorPoint::from_u(p, detail::random_unit3(rng));
            twistor::TwistorPoint tp2 = twistor::match_by_acs(chart, tp, scaled);
            twistor::TwistorJ j1 = twistor::twistor_J(chart, tp);
            twistor::TwistorJ j2 = twistor::twistor_J(scaled, tp2);
            for (int r = 0; r < 6; ++r)
                for (int c = 0; c < 6; ++c)
                    worst_j = std::max(worst_j, std::abs(j1.m[r][c] - j2.m[r][c]));
            double gap = detail::subspace_distance(twistor::horizontal_frame(chart, tp),
                                                   twistor::horizontal_frame(scaled, tp2));
            least_horizontal_gap = std::min(least_horizontal_gap, gap);
        }
    }
    res.seconds = detail::seconds_since(t0);
    res.pass = worst_j <= 1e-6 && least_horizontal_gap >= 1e-3;
    res.detail = "max_j_diff=" + detail::fmt(worst_j) + " min_horizontal_gap=" +
                 detail::fmt(least_horizontal_gap);
    return res;
}

inline CriterionResult criterion_7(std::uint64_t seed) {
    CriterionResult res{7, "splitting-equivalence", false, "", 0};
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(seed + 7);
    int all_equal = 0;
    bool direction_ok = true;
    for (int i = 0; i < 200; ++i) {
        homology::ManifoldHomology m = homology::random_instance(rng);
        homology::SphereBundleHomology z = homology::bundle_homology(m);
        homology::SplittingCriteria crit = homology::splitting_criteria(m, z);
        if (crit.all_equal()) ++all_equal;
        direction_ok = direction_ok && crit.euler_class_zero == m.euler_class_zero;
    }

    using homology::AbelianGroup;
    using homology::BigInt;
    auto with_torsion = [](std::vector<BigInt> chain, bool e_zero, std::optional<int> witness) {
        homology::ManifoldHomology m;
        m.h[0] = homology::kZ;
        m.h[1] = AbelianGroup::free(0);
        m.h[2] = AbelianGroup{0, chain};
        m.h[3] = AbelianGroup{0, chain};
        m.h[4] = homology::kZ;
        m.euler_class_zero = e_zero;
        m.two_torsion_witness = witness;
        return m;
    };
    bool halving_ok =
        homology::bundle_torsion_h3(with_torsion({2}, false, 0)) == AbelianGroup::trivial() &&
        homology::bundle_torsion_h3(with_torsion({4}, false, 0)) ==
            (AbelianGroup{0, {BigInt(2)}}) &&
        homology::bundle_torsion_h3(with_torsion({2, 4}, false, 1)) ==
            (AbelianGroup{0, {BigInt(2), BigInt(2)}}) &&
        homology::bundle_torsion_h3(with_torsion({2, 4}, false, 0)) ==
            (AbelianGroup{0, {BigInt(4)}}) &&
        homology::bundle_torsion_h3(with_torsion({4}, true, std::nullopt)) ==
            (AbelianGroup{0, {BigInt(4)}});

    homology::SphereBundleHomology s4z =
        homology::gysin_split(homology::preset_homology("s4"));
    bool cp3_pattern = s4z.fiber_pairing_generator_exists;
    const std::array<int, 7> want_rank{1, 0, 1, 0, 1, 0, 1};
    for (int k = 0; k < 7; ++k)
        cp3_pattern = cp3_pattern &&
                      s4z.hz[static_cast<std::size_t>(k)].rank == want_rank[static_cast<std::size_t>(k)] &&
                      s4z.hz[static_cast<std::size_t>(k)].torsion.empty();

    res.seconds = detail::seconds_since(t0);
    res.pass = all_equal == 200 && direction_ok && halving_ok && cp3_pattern &&
               res.seconds < 1.0;
    res.detail = "all_equal=" + std::to_string(all_equal) + "/200 halving=" +
                 (halving_ok ? std::string("exact") : std::string("wrong")) + " s4_bundle=" +
                 (cp3_pattern ? std::string("cp3-pattern") : std::string("wrong"));
    return res;
}

inline CriterionResult criterion_8() {
    CriterionResult res{8, "todd-obstruction", false, "", 0};
    auto t0 = std::chrono::steady_clock::now();
    lattice::IntersectionLattice lat = lattice::preset_lattice("s4");
    lattice::TopInvariants inv = lattice::invariants(lat);
    lattice::WuSearchResult wu = lattice::wu_search(lat, 6);
    bool todd_half = inv.todd.numerator() == 1 && inv.todd.denominator() == 2 &&
                     !inv.todd_integral;
    bool search_empty = wu.solutions.empty() && wu.total_count == 0 && wu.conclusive;
    res.seconds = detail::seconds_since(t0);
    res.pass = todd_half && search_empty && wu.target == 4;
    res.detail = std::string("todd=1/2 non-integral: ") + (todd_half ? "yes" : "no") +
                 ", search conclusive-empty: " + (search_empty ? "yes" : "no") +
                 " -> no almost-complex structure";
    return res;
}

inline CriterionResult criterion_9() {
    CriterionResult res{9, "wu-positives", false, "", 0};
    auto t0 = std::chrono::steady_clock::now();

    lattice::IntersectionLattice cp2 = lattice::preset_lattice("cp2");
    lattice::WuSearchResult wu_cp2 = lattice::wu_search(cp2, 6);
    bool cp2_ok = wu_cp2.solutions ==
                      std::vector<std::vector<long long>>{{-3}, {3}} &&
                  lattice::index_c2(wu_cp2.solutions[0], cp2) == 0 &&
                  lattice::index_c2(wu_cp2.solutions[1], cp2) == 0;

    lattice::IntersectionLattice prod = lattice::preset_lattice("s2xs2");
    lattice::WuSearchResult wu_prod = lattice::wu_search(prod, 6);
    bool prod_ok =
        wu_prod.solutions == std::vector<std::vector<long long>>{{-2, -2}, {2, 2}};

    lattice::IntersectionLattice k3 = lattice::preset_lattice("k3");
    lattice::TopInvariants inv_k3 = lattice::invariants(k3);
    lattice::WuSearchResult wu_k3 = lattice::wu_search(k3, 6);
    bool k3_zero = !wu_k3.solutions.empty();
    if (k3_zero)
        for (long long v : wu_k3.solutions[0]) k3_zero = k3_zero && v == 0;
    bool k3_ok = k3_zero && inv_k3.todd.numerator() == 2 && inv_k3.todd.denominator() == 1 &&
                 inv_k3.todd_integral && lattice::is_spin(k3);

    res.seconds = detail::seconds_since(t0);
    res.pass = cp2_ok && prod_ok && k3_ok && res.seconds < 5.0;
    res.detail = std::string("cp2=") + (cp2_ok ? "ok" : "bad") + " s2xs2=" +
                 (prod_ok ? "ok" : "bad") + " k3=" + (k3_ok ? "ok" : "bad");
    return res;
}

inline CriterionResult criterion_10() {
    CriterionResult res{10, "van-der-blij", false, "", 0};
    auto t0 = std::chrono::steady_clock::now();
    struct Case {
        lattice::IntersectionLattice lat;
        int bound;
    };
    std::vector<Case> cases;
    cases.push_back({lattice::preset_lattice("s4"), 6});
    cases.push_back({lattice::preset_lattice("cp2"), 6});
    cases.push_back({lattice::preset_lattice("s2xs2"), 6});
    cases.push_back({lattice::preset_lattice("cp2_cp2bar"), 6});
    cases.push_back({lattice::preset_lattice("k3"), 1});
    cases.push_back(
        {lattice::IntersectionLattice::from_gram(lattice::presets::e8_minus(), 0), 2});
    cases.push_back(
        {lattice::IntersectionLattice::from_gram(lattice::presets::hyperbolic_plane(), 0), 6});

    long long checked = 0;
    bool ok = true;
    for (const Case& c : cases) {
        long long tau = lattice::signature_exact(c.lat.gram);
        for (const auto& v : lattice::characteristic_vectors(c.lat, c.bound)) {
            homology::BigInt diff = lattice::form_value(c.lat.gram, v) - tau;
            homology::BigInt rem = diff % 8;
            ok = ok && rem == 0;
            ++checked;
        }
    }
    res.seconds = detail::seconds_since(t0);
    res.pass = ok && res.seconds < 5.0;
    res.detail = "congruence held on " + std::to_string(checked) + " vectors";
    return res;
}

inline CriterionResult criterion_11(const std::string& cli_path) {
    CriterionResult res{11, "determinism", false, "", 0};
    auto t0 = std::chrono::steady_clock::now();
    if (cli_path.empty()) {
        res.detail = "cli binary path not provided";
        return res;
    }
    const std::string quoted = "'" + cli_path + "'";
    const std::array<std::string, 2> cmds{
        quoted + " selftest --criteria 1,2,7,8,9,10 --seed 0",
        quoted + " twistor-check --metric flat --samples 2 --seed 3"};
    bool identical = true;
    bool nonempty = true;
    for (const std::string& cmd : cmds) {
        std::string first = detail::run_command(cmd);
        std::string second = detail::run_command(cmd);
        identical = identical && first == second;
        nonempty = nonempty && !first.empty() && first.front() == '{';
    }
    res.seconds = detail::seconds_since(t0);
    res.pass = identical && nonempty;
    res.detail = std::string("byte-identical=") + (identical ? "yes" : "no") +
                 " valid-reports=" + (nonempty ? "yes" : "no");
    return res;
}

// Runs the selected criteria (all when `which` is empty). `cli_path` feeds
// the determinism check; pass the running binary's own path from the CLI.
inline std::vector<CriterionResult> run_all(const std::string& cli_path,
                                            std::uint64_t seed = 0,
                                            const std::set<int>& which = {}) {
    auto wanted = [&which](int k) { return which.empty() || which.count(k) > 0; };
    std::vector<CriterionResult> results;
    if (wanted(1)) results.push_back(criterion_1());
    if (wanted(2)) results.push_back(criterion_2(seed));
    if (wanted(3)) results.push_back(criterion_3(seed));
    if (wanted(4)) results.push_back(criterion_4(seed));
    if (wanted(5)) results.push_back(criterion_5(seed));
    if (wanted(6)) results.push_back(criterion_6(seed));
    if (wanted(7)) results.push_back(criterion_7(seed));
    if (wanted(8)) results.push_back(criterion_8());
    if (wanted(9)) results.push_back(criterion_9());
    if (wanted(10)) results.push_back(criterion_10());
    if (wanted(11)) results.push_back(criterion_11(cli_path));
    return results;
}

}  // namespace twistorlab::selftest
