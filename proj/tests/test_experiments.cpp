#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ccshap/errors.hpp"
#include "ccshap/experiments.hpp"
#include "doctest.h"

using namespace ccshap;
namespace fs = std::filesystem;

namespace {

double normal_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("ccshap_test_" + name);
    fs::remove_all(dir);
    return dir;
}

/// Every regular file below dir, keyed by relative path.
std::map<std::string, std::string> tree(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
    return out;
}

}  // namespace

TEST_CASE("breakfast posterior matches Bayes' rule") {
    for (double c : {20.0, 60.0, 110.0})
        for (double g = 80.0; g <= 220.0; g += 7.0) {
            const double with = 0.15 * normal_pdf(g, 85.0 + 0.4 * c + 40.0, 10.0);
            const double without = 0.85 * normal_pdf(g, 85.0 + 0.4 * c, 10.0);
            REQUIRE(analytic_breakfast_posterior(g, c) == doctest::Approx(with / (with + without)).epsilon(1e-9));
        }
    CHECK(breakfast_offset(true) == 109.0);
    CHECK(std::abs(breakfast_offset(false) - 109.0) < 0.5);
}

TEST_CASE("built-in models have the documented structure") {
    const auto b = breakfast_scm();
    CHECK(b.graph().target() == "Y");
    CHECK(b.graph().parents("G") == std::vector<std::string>{"C", "Y"});
    const auto d = diabetes_risk_scm();
    CHECK(d.graph().features() == std::vector<std::string>{"B", "G", "H"});
    CHECK(sachs_graph().features().size() == 7);
    CHECK(sachs_graph(true).features().size() == 8);
    CHECK(synthetic_sachs_scm().graph().size() == 9);
    for (const auto& name : builtin_names()) CHECK_NOTHROW(builtin_scm(name));
    CHECK_THROWS_AS(builtin_scm("nope"), ArgumentError);
}

TEST_CASE("sweep summary counts only valid high-impact records") {
    std::vector<SweepRecord> records;
    auto add = [&](double b, double obs, double intv, std::optional<double> impact, std::string skipped = {}) {
        SweepRecord r;
        r.b_x1 = b;
        r.b_x1_given_x2 = obs;
        r.b_x1_do_x2 = intv;
        r.collider_impact = impact;
        r.skipped = std::move(skipped);
        records.push_back(r);
    };
    add(1.0, 0.2, 1.01, 0.95);
    add(-1.0, 0.5, -1.5, 1.0);
    add(0.0, 1.0, 0.04, 0.92);
    add(2.0, 0.0, 0.0, 0.5);             // low impact
    add(2.0, 0.0, 0.0, std::nullopt);    // no collider paths
    add(2.0, 0.0, 0.0, 1.0, "singular");  // skipped
    const auto s = summarize_sweep(records);
    CHECK(s.high_impact == 3);
    CHECK(s.fraction_do_close == doctest::Approx(2.0 / 3.0));
    CHECK(s.median_do == doctest::Approx(0.04));
    CHECK(s.median_obs == doctest::Approx(0.75));
    CHECK(summarize_sweep({}).high_impact == 0);
}

TEST_CASE("pearson correlation") {
    const std::vector<double> a{1, 2, 3, 4};
    const std::vector<double> b{2, 4, 6, 8};
    const std::vector<double> c{4, 3, 2, 1};
    CHECK(pearson(a, b) == doctest::Approx(1.0));
    CHECK(pearson(a, c) == doctest::Approx(-1.0));
}

TEST_CASE("tolerances widen for small fits") {
    ExperimentConfig c;
    CHECK(c.tolerance(0.03) == doctest::Approx(0.03));
    c.n_fit = 50000;
    CHECK(c.tolerance(0.03) == doctest::Approx(0.06));
    c.tolerance_scale = 1.5;
    CHECK(c.tolerance(0.02) == doctest::Approx(0.03));
}

TEST_CASE("small breakfast run writes its outputs and recomposes") {
    ExperimentConfig c;
    c.n_fit = 20000;
    c.n_eval = 300;
    c.out = scratch("breakfast");
    c.render = true;
    const auto report = run_experiment("breakfast", c);
    CHECK(report.check("recomposition").passed);
    CHECK(report.check("SAP phi_cc(C)").passed);
    for (const char* f : {"attributions.csv", "contexts.csv", "plan.txt", "grids/I_C_G.csv", "beeswarm_shapley.svg"})
        CHECK(fs::exists(*c.out / f));
    CHECK(report.to_string().find("PASS recomposition") != std::string::npos);
    CHECK_THROWS_AS(report.check("missing"), IdentifierError);
    c.n_fit = 100;
    CHECK_THROWS_AS(run_experiment("breakfast", c), ArgumentError);
    CHECK_THROWS_AS(run_experiment("unknown", c), ArgumentError);
}

TEST_CASE("experiment outputs are byte-identical on rerun") {
    ExperimentConfig c;
    c.n_fit = 10000;
    c.n_eval = 200;
    c.n_scms = 6;
    c.n_rows = 4000;
    for (const char* name : {"breakfast", "linear-sweep"}) {
        c.out = scratch(std::string(name) + "_a");
        run_experiment(name, c);
        const auto first = tree(*c.out);
        c.out = scratch(std::string(name) + "_b");
        run_experiment(name, c);
        const auto second = tree(*c.out);
        CHECK(first.size() > 1);
        CHECK(first == second);
    }
}
