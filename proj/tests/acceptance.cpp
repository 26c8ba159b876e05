#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ccshap/attribution.hpp"
#include "ccshap/experiments.hpp"
#include "ccshap/graph.hpp"
#include "ccshap/util.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace ccshap;

namespace {

struct Outcome {
    int id = 0;
    bool passed = false;
    std::string detail;
};

std::string num(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

std::map<std::string, std::string> csv_tree(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        out[fs::relative(e.path(), dir).string()] = s.str();
    }
    return out;
}

/// Brute-force Shapley over every truth table of up to 3 binary features
/// (random tables for 3) on uniformly weighted exact-table fit data.
Outcome exact_small_instances() {
    AttributionOptions options;
    options.spec = EstimatorSpec::discrete();
    std::size_t compared = 0;
    double worst = 0.0;
    double product_x1 = 0.0;
    Rng rng = make_rng(5);
    auto check_table = [&](std::size_t n, const std::vector<double>& f) {
        std::vector<std::vector<double>> cols(n + 1);
        std::vector<std::string> names;
        for (std::size_t k = 0; k < n; ++k) names.push_back("X" + std::to_string(k + 1));
        names.push_back("Y");
        for (unsigned c = 0; c < (1U << n); ++c) {
            for (std::size_t k = 0; k < n; ++k) cols[k].push_back(c >> k & 1U);
            cols[n].push_back(f[c]);
        }
        const Dataset d(names, cols);
        const auto r = shapley_values(d, "Y", d, options);
        for (unsigned x = 0; x < (1U << n); ++x) {
            const auto expected = oracle::shapley_by_permutation(n, [&](unsigned mask) {
                double sum = 0.0;
                double count = 0.0;
                for (unsigned c = 0; c < (1U << n); ++c)
                    if ((c & mask) == (x & mask)) {
                        sum += f[c];
                        count += 1.0;
                    }
                return sum / count;
            });
            for (std::size_t k = 0; k < n; ++k) {
                worst = std::max(worst, std::abs(r.phi[k][x] - expected[k]));
                ++compared;
            }
        }
        return r;
    };
    for (std::size_t n = 1; n <= 2; ++n)
        for (unsigned table = 0; table < (1U << (1U << n)); ++table) {
            std::vector<double> f(std::size_t{1} << n);
            for (unsigned c = 0; c < f.size(); ++c) f[c] = table >> c & 1U;
            check_table(n, f);
        }
    for (int trial = 0; trial < 64; ++trial) {
        std::vector<double> f(8);
        for (auto& v : f) v = static_cast<double>(rng() % 2);
        check_table(3, f);
    }
    const auto product = check_table(2, {0, 0, 0, 1});
    product_x1 = product.phi_of("X1")[3];
    Outcome o;
    o.passed = worst < 1e-9 && std::abs(product_x1 - 0.375) < 1e-12;
    o.detail = std::to_string(compared) + " values vs brute force, max error " + num(worst) + "; phi(X1) at (1,1) = " +
               format_double(product_x1);
    return o;
}

Outcome dsep_oracle() {
    Rng rng = make_rng(derive_seed(kDefaultSeed, "acceptance-dags"));
    std::size_t disagreements = 0;
    std::size_t queries = 0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 2 + static_cast<std::size_t>(t % 6);
        const auto g = oracle::random_dag(n, 0.45, rng);
        const auto& names = g.nodes();
        for (int q = 0; q < 8; ++q) {
            const auto a = names[static_cast<std::size_t>(rng() % n)];
            const auto b = names[static_cast<std::size_t>(rng() % n)];
            if (a == b) continue;
            NodeSet z;
            for (const auto& v : names)
                if (v != a && v != b && uniform01(rng) < 0.35) z.insert(v);
            ++queries;
            if (d_separated(g, {a}, {b}, z) != oracle::d_separated(g, {a}, {b}, z)) ++disagreements;
        }
    }
    return {0, disagreements == 0,
            std::to_string(disagreements) + " disagreements over " + std::to_string(queries) +
                " queries on 1000 random DAGs with 2-7 nodes"};
}

Outcome weight_sums() {
    std::size_t bad = 0;
    for (std::size_t n = 1; n <= 12; ++n) {
        Rational sum(0);
        for (unsigned s = 0; s < (1U << (n - 1)); ++s) sum += shapley_weight(std::popcount(s), n).exact;
        if (sum != Rational(1)) ++bad;
    }
    return {0, bad == 0, "exact rational sum equals 1 for " + std::to_string(12 - bad) + " of 12 feature counts"};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Runs the acceptance criteria and prints one PASS/FAIL line per criterion."};
    std::string out = (fs::temp_directory_path() / "ccshap-acceptance").string();
    std::vector<int> expect_fail;
    app.add_option("--out", out, "scratch directory for experiment outputs")->capture_default_str();
    app.add_option("--expect-fail", expect_fail,
                   "criteria known to fail; exit 0 only if exactly these fail")
        ->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    const fs::path root(out);
    fs::remove_all(root);
    std::vector<Outcome> outcomes;
    std::ostringstream report;
    auto record = [&](int id, bool passed, std::string detail) {
        outcomes.push_back({id, passed, std::move(detail)});
        std::ostringstream line;
        line << (passed ? "PASS" : "FAIL") << " criterion " << id << ": " << outcomes.back().detail << '\n';
        report << line.str();
        std::cout << line.str() << std::flush;
    };

    try {
        ExperimentConfig config;  // n_fit = 2e5, n_eval = 1e4, default seed
        config.out = root / "breakfast";
        const auto breakfast = run_breakfast(config);
        record(1, breakfast.mean_abs_phi_cc_c <= 0.02,
               "breakfast mean |phi_cc(C)| = " + num(breakfast.mean_abs_phi_cc_c) + " (<= 0.02)");
        record(2, breakfast.corr_c_phi_c <= -0.5,
               "breakfast corr(C, phi(C)) = " + num(breakfast.corr_c_phi_c) + " (<= -0.5)");
        record(3, breakfast.dense_cells > 0 && breakfast.grid_max_error <= 0.05,
               "analytic I_C(G) max error " + num(breakfast.grid_max_error) + " over " +
                   std::to_string(breakfast.dense_cells) + " cells with >= 50 points (<= 0.05)");
        record(4, breakfast.lemma2_gap <= 0.03 && breakfast.lemma1_gap <= 0.03,
               "breakfast |I_do(C)(G) - I_C(G)| = " + num(breakfast.lemma2_gap) + ", |I_do(G)(C) - I_0(C)| = " +
                   num(breakfast.lemma1_gap) + " (<= 0.03)");

        config.out = root / "diabetes-risk";
        const auto diabetes = run_diabetes_risk(config);
        record(5, diabetes.lemma1_all_contexts && diabetes.no_shortcut_gap <= 0.03,
               std::string("diabetes plan uses the context-free shortcut for every context of B: ") +
                   (diabetes.lemma1_all_contexts ? "yes" : "no") + "; Monte-Carlo path vs I_0(B) max gap " +
                   num(diabetes.no_shortcut_gap) + " (<= 0.03)");

        config.out = root / "linear-sweep";
        const auto sweep = run_linear_sweep(config);
        const auto& s = sweep.summary;
        record(6, s.high_impact > 0 && s.fraction_do_close >= 0.9 && s.median_do < s.median_obs,
               std::to_string(sweep.records.size()) + " SCMs, " + std::to_string(s.high_impact) +
                   " high-impact records, fraction close under do(X2) " + num(s.fraction_do_close) +
                   " (>= 0.9), median deviation do " + num(s.median_do) + " vs observational " + num(s.median_obs));

        const auto exact = exact_small_instances();
        record(7, exact.passed, exact.detail);
        const auto dsep = dsep_oracle();
        record(8, dsep.passed, dsep.detail);
        const auto weights = weight_sums();
        record(9, weights.passed, weights.detail);

        ExperimentConfig rerun;
        rerun.out = root / "breakfast-rerun";
        run_breakfast(rerun);
        rerun.out = root / "linear-sweep-rerun";
        run_linear_sweep(rerun);
        const auto b1 = csv_tree(root / "breakfast");
        const auto s1 = csv_tree(root / "linear-sweep");
        const bool same = b1 == csv_tree(root / "breakfast-rerun") && s1 == csv_tree(root / "linear-sweep-rerun");
        record(10, same && !b1.empty() && !s1.empty(),
               std::to_string(b1.size() + s1.size()) + " CSV files from breakfast and linear-sweep reruns " +
                   (same ? "byte-identical" : "differ"));

        config.out = root / "discrete";
        const auto discrete = run_discrete_pipeline(config);
        std::string entries;
        for (const auto& e : discrete.sap.checked)
            entries += (entries.empty() ? "" : ", ") + e.feature + " " + num(e.mean_abs_phi);
        record(11, !discrete.cc.phi.empty() && !discrete.sap.checked.empty() && discrete.sap.passed(),
               "discrete pipeline on " + std::to_string(discrete.data.rows()) + " rows; SAP mean |phi_cc| for " +
                   "features independent of the target: " + (entries.empty() ? "none" : entries) + " (<= " +
                   num(discrete.sap.tolerance) + ")");
    } catch (const std::exception& e) {
        std::cout << "error: " << e.what() << std::endl;
        return 1;
    }

    const std::set<int> expected(expect_fail.begin(), expect_fail.end());
    std::set<int> failed;
    for (const auto& o : outcomes)
        if (!o.passed) failed.insert(o.id);
    report << outcomes.size() - failed.size() << " of " << outcomes.size() << " criteria pass\n";
    std::ofstream(root / "acceptance.txt") << report.str();
    std::cout << outcomes.size() - failed.size() << " of " << outcomes.size() << " criteria pass" << std::endl;
    if (!expected.empty()) {
        std::cout << "expected failures: " << join([&] {
            std::vector<std::string> v;
            for (int id : expected) v.push_back(std::to_string(id));
            return v;
        }(), ",") << (failed == expected ? " (matched)" : " (not matched)") << std::endl;
    }
    return failed == expected ? 0 : 1;
}
