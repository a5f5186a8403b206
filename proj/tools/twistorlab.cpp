#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "twistorlab/report.hpp"
#include "twistorlab/selftest.hpp"

namespace {

namespace tl = twistorlab;
using tl::report::Json;
using tl::report::Report;

struct BadInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadInput("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

tl::charts::MetricChart resolve_chart(const std::string& metric, const std::string& file,
                                      bool reversed) {
    tl::charts::MetricChart chart;
    if (!file.empty())
        chart = tl::charts::parse_metric(read_file(file),
                                         std::filesystem::path(file).stem().string());
    else
        chart = tl::charts::builtin_chart(metric);
    return reversed ? tl::charts::orientation_reversed(chart) : chart;
}

tl::Vec4 parse_point(const std::string& text) {
    tl::Vec4 p{};
    std::stringstream ss(text);
    std::string tok;
    int i = 0;
    while (std::getline(ss, tok, ',')) {
        if (i >= 4) throw BadInput("point needs exactly four comma-separated coordinates");
        std::size_t used = 0;
        p[static_cast<std::size_t>(i)] = std::stod(tok, &used);
        while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
        if (used != tok.size()) throw BadInput("bad coordinate: " + tok);
        ++i;
    }
    if (i != 4) throw BadInput("point needs exactly four comma-separated coordinates");
    return p;
}

void emit(const Report& rep, const std::string& output) {
    std::fputs(output == "csv" ? rep.to_csv().c_str() : rep.to_json_string().c_str(), stdout);
}

Json vec_json(const double* v, int n) {
    Json j = Json::array();
    for (int i = 0; i < n; ++i) j.push_back(v[i]);
    return j;
}

struct CurvatureOpts {
    std::string metric = "flat";
    std::string file;
    std::string point;
    bool reversed = false;
    int samples = 20;
    std::uint64_t seed = 0;
    std::string output = "json";
    bool quiet = false;
};

int run_curvature(const CurvatureOpts& o) {
    tl::charts::MetricChart chart = resolve_chart(o.metric, o.file, o.reversed);
    std::vector<tl::Vec4> points;
    if (!o.point.empty()) {
        points.push_back(parse_point(o.point));
    } else {
        std::mt19937_64 rng(o.seed);
        for (int i = 0; i < o.samples; ++i)
            points.push_back(tl::charts::domain_sample(chart.domain, rng));
    }

    Report rep;
    rep.command = "curvature";
    rep.seed = o.seed;
    rep.inputs["metric"] = chart.name;
    rep.inputs["reversed"] = o.reversed;
    rep.inputs["points"] = static_cast<int>(points.size());

    double max_einstein = 0, max_wp = 0, max_wm = 0;
    double scal_min = 0, scal_max = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        tl::curvature::CurvatureTensors curv = tl::curvature::curvature_at(chart, points[i]);
        tl::sd::SDFrame frame = tl::sd::make_frame(curv.g);
        tl::curvature::WeylSplit split = tl::curvature::weyl_split(curv, frame);

        double einstein = 0;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                for (int c = 0; c < 4; ++c)
                    for (int d = 0; d < 4; ++d) {
                        double ea = curv.ricci[a][b] - 0.25 * curv.scalar * curv.g[a][b];
                        double ec = curv.ricci[c][d] - 0.25 * curv.scalar * curv.g[c][d];
                        einstein += ea * ec * curv.ginv[a][c] * curv.ginv[b][d];
                    }
        einstein = std::sqrt(std::max(einstein, 0.0));
        double wp = tl::frobenius3(split.w_plus);
        double wm = tl::frobenius3(split.w_minus);

        Json row = Json::object();
        row["index"] = static_cast<int>(i);
        row["point"] = vec_json(points[i].data(), 4);
        row["scalar"] = curv.scalar;
        row["einstein_residual"] = einstein;
        row["w_plus_norm"] = wp;
        row["w_minus_norm"] = wm;
        rep.rows.push_back(std::move(row));

        max_einstein = std::max(max_einstein, einstein);
        max_wp = std::max(max_wp, wp);
        max_wm = std::max(max_wm, wm);
        scal_min = i == 0 ? curv.scalar : std::min(scal_min, curv.scalar);
        scal_max = i == 0 ? curv.scalar : std::max(scal_max, curv.scalar);
    }
    rep.summary["scalar_min"] = scal_min;
    rep.summary["scalar_max"] = scal_max;
    rep.summary["max_einstein_residual"] = max_einstein;
    rep.summary["max_w_plus_norm"] = max_wp;
    rep.summary["max_w_minus_norm"] = max_wm;
    if (!o.quiet) emit(rep, o.output);
    return 0;
}

struct TwistorOpts {
    std::string metric = "flat";
    std::string file;
    bool reversed = false;
    int samples = 20;
    std::uint64_t seed = 0;
    double fd_step = 1e-4;
    double tol = 1e-4;
    std::string output = "json";
    bool quiet = false;
};

int run_twistor_check(const TwistorOpts& o) {
    tl::charts::MetricChart chart = resolve_chart(o.metric, o.file, o.reversed);
    tl::twistor::IntegrabilityReport ir =
        tl::twistor::integrability_report(chart, o.samples, o.seed, o.fd_step);

    bool integrable = ir.max_nijenhuis <= o.tol;
    bool asd = ir.max_w_plus <= o.tol;
    bool consistent = integrable == asd;

    Report rep;
    rep.command = "twistor-check";
    rep.seed = o.seed;
    rep.inputs["metric"] = chart.name;
    rep.inputs["reversed"] = o.reversed;
    rep.inputs["samples"] = o.samples;
    rep.inputs["fd_step"] = o.fd_step;
    rep.inputs["tol"] = o.tol;
    for (const tl::twistor::IntegrabilityRow& r : ir.rows) {
        Json row = Json::object();
        row["index"] = r.index;
        row["base"] = vec_json(r.base.data(), 4);
        row["u"] = vec_json(r.u.data(), 3);
        row["w_plus_norm"] = r.w_plus_norm;
        row["nijenhuis_max"] = r.nijenhuis_max;
        rep.rows.push_back(std::move(row));
    }
    rep.summary["max_nijenhuis"] = ir.max_nijenhuis;
    rep.summary["max_w_plus"] = ir.max_w_plus;
    rep.summary["integrable"] = integrable;
    rep.summary["anti_self_dual"] = asd;
    rep.summary["consistent"] = consistent;
    rep.summary["verdict"] =
        std::string("integrable-consistent: ") + (integrable && consistent ? "yes" : "no");
    if (!o.quiet) emit(rep, o.output);
    return consistent ? 0 : 1;
}

struct GysinOpts {
    std::string preset;
    std::string input;
    int random = 0;
    std::uint64_t seed = 0;
    std::string output = "json";
    bool quiet = false;
};

void criteria_rows(const tl::homology::SplittingCriteria& crit, Report& rep) {
    const std::array<std::pair<const char*, bool>, 4> named{
        {{"euler-class-zero", crit.euler_class_zero},
         {"fiber-pairing-generator", crit.fiber_pairing},
         {"rank-torsion-pattern", crit.homology_splits},
         {"torsion-order-equality", crit.torsion_order_equal}}};
    for (const auto& [name, holds] : named) {
        Json row = Json::object();
        row["criterion"] = name;
        row["holds"] = holds;
        rep.rows.push_back(std::move(row));
    }
}

int run_gysin(const GysinOpts& o) {
    Report rep;
    rep.command = "gysin";
    rep.seed = o.seed;

    if (o.random > 0) {
        rep.inputs["random_instances"] = o.random;
        std::mt19937_64 rng(o.seed);
        bool all_agree = true;
        int agreed = 0;
        for (int i = 0; i < o.random; ++i) {
            tl::homology::ManifoldHomology m = tl::homology::random_instance(rng);
            tl::homology::SphereBundleHomology z = tl::homology::bundle_homology(m);
            tl::homology::SplittingCriteria crit = tl::homology::splitting_criteria(m, z);
            Json row = Json::object();
            row["index"] = i;
            row["euler_class_zero"] = crit.euler_class_zero;
            row["fiber_pairing_generator"] = crit.fiber_pairing;
            row["rank_torsion_pattern"] = crit.homology_splits;
            row["torsion_order_equality"] = crit.torsion_order_equal;
            row["agree"] = crit.all_equal();
            rep.rows.push_back(std::move(row));
            all_agree = all_agree && crit.all_equal();
            agreed += crit.all_equal() ? 1 : 0;
        }
        rep.summary["all_agree"] = all_agree;
        rep.summary["verdict"] = "equivalence held on " + std::to_string(agreed) + "/" +
                                 std::to_string(o.random);
        if (!o.quiet) emit(rep, o.output);
        return all_agree ? 0 : 1;
    }

    tl::homology::ManifoldHomology m;
    if (!o.input.empty())
        m = tl::report::manifold_from_json(Json::parse(read_file(o.input)));
    else
        m = tl::homology::preset_homology(o.preset);
    m.validate();

    tl::homology::SphereBundleHomology z = tl::homology::bundle_homology(m);
    tl::homology::SplittingCriteria crit = tl::homology::splitting_criteria(m, z);
    tl::homology::SpincTorsor torsor = tl::homology::spinc_torsor(m);

    rep.inputs["homology"] = tl::report::manifold_json(m);
    criteria_rows(crit, rep);
    rep.summary["bundle"] = tl::report::bundle_json(z);
    rep.summary["criteria_agree"] = crit.all_equal();
    rep.summary["splits_as_product"] = crit.euler_class_zero;
    rep.summary["spinc_torsor"] = tl::report::group_json(torsor.group);
    rep.summary["verdict"] = crit.euler_class_zero
                                 ? "bundle cohomology splits as base plus shifted base"
                                 : "bundle cohomology is twisted: torsion halves in degrees 3 and 4";
    if (!o.quiet) emit(rep, o.output);
    return crit.all_equal() ? 0 : 1;
}

struct LatticeOpts {
    std::string preset;
    std::string input;
    int bound = 6;
    std::uint64_t budget = tl::lattice::kDefaultBudget;
    std::size_t max_list = tl::lattice::kDefaultMaxList;
    std::string output = "json";
    bool quiet = false;
};

int run_lattice(const LatticeOpts& o) {
    tl::lattice::IntersectionLattice lat;
    if (!o.input.empty())
        lat = tl::report::lattice_from_json(Json::parse(read_file(o.input)));
    else
        lat = tl::lattice::preset_lattice(o.preset);
    lat.validate();

    tl::lattice::TopInvariants inv = tl::lattice::invariants(lat);
    tl::lattice::WuSearchResult wu = tl::lattice::wu_search(lat, o.bound, o.budget, o.max_list);

    Report rep;
    rep.command = "lattice";
    rep.inputs["lattice"] = tl::report::lattice_json(lat);
    rep.inputs["bound"] = o.bound;
    rep.inputs["budget"] = o.budget;
    rep.inputs["max_list"] = o.max_list;

    for (std::size_t i = 0; i < wu.solutions.size(); ++i) {
        const std::vector<long long>& c = wu.solutions[i];
        long long linf = 0;
        Json cj = Json::array();
        for (long long v : c) {
            cj.push_back(v);
            linf = std::max(linf, std::abs(v));
        }
        Json row = Json::object();
        row["index"] = static_cast<int>(i);
        row["c"] = cj;
        row["linf"] = linf;
        row["index_c2"] = tl::lattice::index_c2(c, lat);
        rep.rows.push_back(std::move(row));
    }

    rep.summary["chi"] = inv.chi;
    rep.summary["tau"] = inv.tau;
    rep.summary["todd"] = inv.todd.numerator().str() +
                          (inv.todd.denominator() == 1 ? "" : "/" + inv.todd.denominator().str());
    rep.summary["todd_integral"] = inv.todd_integral;
    rep.summary["spin"] = tl::lattice::is_spin(lat);
    if (tl::lattice::is_spin(lat))
        rep.summary["spin_structures"] = "H^1(M,Z_2) acts freely and transitively";
    rep.summary["wu_target"] = wu.target;
    rep.summary["total_count"] = wu.total_count.str();
    rep.summary["listed"] = static_cast<int>(wu.solutions.size());
    rep.summary["complete"] = wu.complete;
    rep.summary["conclusive"] = wu.conclusive;
    if (!wu.solutions.empty())
        rep.summary["verdict"] = "candidate first Chern classes found";
    else if (wu.conclusive)
        rep.summary["verdict"] = "no almost-complex structure compatible with either orientation";
    else
        rep.summary["verdict"] = "no candidates within bound (inconclusive)";
    if (!o.quiet) emit(rep, o.output);
    return 0;
}

struct SelftestOpts {
    std::string criteria;
    std::uint64_t seed = 0;
    std::string output = "json";
    bool quiet = false;
};

std::string own_binary_path(const char* argv0) {
    std::error_code ec;
    std::filesystem::path p = std::filesystem::read_symlink("/proc/self/exe", ec);
    if (!ec) return p.string();
    return std::filesystem::absolute(argv0).string();
}

int run_selftest(const SelftestOpts& o, const char* argv0) {
    std::set<int> which;
    if (!o.criteria.empty()) {
        std::stringstream ss(o.criteria);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            int k = 0;
            try {
                std::size_t used = 0;
                k = std::stoi(tok, &used);
                if (used != tok.size()) throw BadInput("");
            } catch (const std::exception&) {
                throw BadInput("bad criterion id: " + tok);
            }
            if (k < 1 || k > 11) throw BadInput("criterion id out of range: " + tok);
            which.insert(k);
        }
        if (which.empty()) throw BadInput("empty criteria list");
    }

    std::vector<tl::selftest::CriterionResult> results =
        tl::selftest::run_all(own_binary_path(argv0), o.seed, which);

    Report rep;
    rep.command = "selftest";
    rep.seed = o.seed;
    rep.inputs["criteria"] = o.criteria.empty() ? "all" : o.criteria;
    int passed = 0;
    for (const auto& r : results) {
        Json row = Json::object();
        row["number"] = r.number;
        row["name"] = r.name;
        row["pass"] = r.pass;
        row["detail"] = r.detail;
        rep.rows.push_back(std::move(row));
        if (r.pass) ++passed;
    }
    bool all = passed == static_cast<int>(results.size());
    rep.summary["passed"] = passed;
    rep.summary["total"] = static_cast<int>(results.size());
    rep.summary["all_pass"] = all;
    if (!o.quiet) emit(rep, o.output);

    if (!o.quiet) {
        for (const auto& r : results)
            std::fprintf(stderr, "[%s] %2d %-24s %8.3fs  %s\n", r.pass ? "PASS" : "FAIL",
                         r.number, r.name.c_str(), r.seconds, r.detail.c_str());
        std::fprintf(stderr, "%d/%zu criteria passed\n", passed, results.size());
    }
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale laboratory for curvature, twistor integrability, sphere-bundle "
                 "cohomology, and intersection-lattice arithmetic of oriented 4-manifolds"};
    app.require_subcommand(1);

    CurvatureOpts co;
    CLI::App* curvature = app.add_subcommand("curvature", "curvature diagnostics on a metric chart");
    curvature->add_option("--metric", co.metric, "builtin chart name");
    auto* co_file = curvature->add_option("--file", co.file, "metric component file");
    curvature->add_option("--point", co.point, "single point x1,x2,x3,x4");
    curvature->add_flag("--reversed", co.reversed, "reverse the orientation");
    curvature->add_option("--samples", co.samples, "random sample count")
        ->check(CLI::Range(1, 100000));
    curvature->add_option("--seed", co.seed, "rng seed");
    curvature->add_option("--output", co.output, "report format")
        ->check(CLI::IsMember({"json", "csv"}));
    curvature->add_flag("--quiet", co.quiet, "suppress the report, exit status only");

    TwistorOpts to;
    CLI::App* twistor = app.add_subcommand(
        "twistor-check", "integrability of the fiberwise complex structure vs self-dual Weyl");
    twistor->add_option("--metric", to.metric, "builtin chart name");
    auto* to_file = twistor->add_option("--file", to.file, "metric component file");
    twistor->add_flag("--reversed", to.reversed, "reverse the orientation");
    twistor->add_option("--samples", to.samples, "random sample count")
        ->check(CLI::Range(1, 100000));
    twistor->add_option("--seed", to.seed, "rng seed");
    twistor->add_option("--fd-step", to.fd_step, "finite-difference step")
        ->check(CLI::PositiveNumber);
    twistor->add_option("--tol", to.tol, "vanishing tolerance")->check(CLI::PositiveNumber);
    twistor->add_option("--output", to.output, "report format")
        ->check(CLI::IsMember({"json", "csv"}));
    twistor->add_flag("--quiet", to.quiet, "suppress the report, exit status only");

    GysinOpts go;
    CLI::App* gysin = app.add_subcommand(
        "gysin", "cohomology of the 2-sphere bundle and the product-splitting criteria");
    auto* go_preset = gysin->add_option("--preset", go.preset, "builtin homology preset");
    auto* go_input = gysin->add_option("--input", go.input, "homology JSON file");
    auto* go_random = gysin->add_option("--random", go.random, "random instance count")
                          ->check(CLI::Range(1, 100000));
    gysin->add_option("--seed", go.seed, "rng seed");
    gysin->add_option("--output", go.output, "report format")
        ->check(CLI::IsMember({"json", "csv"}));
    gysin->add_flag("--quiet", go.quiet, "suppress the report, exit status only");
    go_preset->excludes(go_input)->excludes(go_random);
    go_input->excludes(go_random);

    LatticeOpts lo;
    CLI::App* latt = app.add_subcommand(
        "lattice", "intersection-form invariants and the characteristic-vector search");
    auto* lo_preset = latt->add_option("--preset", lo.preset, "builtin lattice preset");
    auto* lo_input = latt->add_option("--input", lo.input, "lattice JSON file");
    latt->add_option("--bound", lo.bound, "coordinate box half-width")->check(CLI::Range(0, 64));
    latt->add_option("--budget", lo.budget, "enumeration budget");
    latt->add_option("--max-list", lo.max_list, "cap on listed solutions");
    latt->add_option("--output", lo.output, "report format")
        ->check(CLI::IsMember({"json", "csv"}));
    latt->add_flag("--quiet", lo.quiet, "suppress the report, exit status only");
    lo_preset->excludes(lo_input);

    SelftestOpts so;
    CLI::App* selftest = app.add_subcommand("selftest", "run the acceptance criteria");
    selftest->add_option("--criteria", so.criteria, "comma-separated criterion ids (default all)");
    selftest->add_option("--seed", so.seed, "base rng seed");
    selftest->add_option("--output", so.output, "report format")
        ->check(CLI::IsMember({"json", "csv"}));
    selftest->add_flag("--quiet", so.quiet, "suppress the report, exit status only");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (curvature->parsed()) {
            if (co_file->count() == 0 && co.metric.empty()) throw BadInput("need --metric or --file");
            return run_curvature(co);
        }
        if (twistor->parsed()) {
            if (to_file->count() == 0 && to.metric.empty()) throw BadInput("need --metric or --file");
            return run_twistor_check(to);
        }
        if (gysin->parsed()) {
            if (go_preset->count() + go_input->count() + go_random->count() == 0)
                throw BadInput("need --preset, --input, or --random");
            return run_gysin(go);
        }
        if (latt->parsed()) {
            if (lo_preset->count() + lo_input->count() == 0)
                throw BadInput("need --preset or --input");
            return run_lattice(lo);
        }
        if (selftest->parsed()) return run_selftest(so, argv[0]);
    } catch (const tl::charts::DomainViolation& e) {
        std::fprintf(stderr, "domain violation: %s\n", e.what());
        return 3;
    } catch (const tl::homology::HomologyError& e) {
        std::fprintf(stderr, "inconsistent homology: %s\n", e.what());
        return 4;
    } catch (const tl::lattice::BudgetExceeded& e) {
        std::fprintf(stderr, "budget exceeded: %s\n", e.what());
        return 5;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
