#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ccshap/attribution.hpp"
#include "ccshap/scm.hpp"

namespace ccshap {

// ---------------------------------------------------------------- built-in SCMs

/// C ~ N(60, sd 25), Y ~ Bernoulli(0.15), G = 85 + 0.4 C + 40 Y + U, U ~ N(0, sd 10).
Scm breakfast_scm();
/// B ~ N(25, sd 5), Y ~ Bernoulli(sigmoid(-2 + 0.1 (B - 25))),
/// H = 5 + 10 Y + 0.01 B^2 + U_H, G = 90 + 20 Y + 30 sigmoid(-0.5 (H - 5)) + B + U_G.
Scm diabetes_risk_scm();
/// X1, X2 ~ Bernoulli(1/2) independent, Y = X1 * X2.
Scm binary_product_scm();
/// Protein-signalling topology with target PKA; optionally with an isolated node Plcg.
CausalGraph sachs_graph(bool with_isolated = false);
/// Ordinal threshold mechanisms with values {0, 1, 2} over sachs_graph(with_isolated).
Scm synthetic_sachs_scm(bool with_isolated = true);

/// breakfast | diabetes-risk | binary-product | linear (random instance from seed) | sachs.
Scm builtin_scm(std::string_view name, std::uint64_t seed = kDefaultSeed);
std::vector<std::string> builtin_names();

/// Offset in the closed-form posterior: 105 + 2.5 ln(17/3), or 109 when rounded.
double breakfast_offset(bool rounded = false);
/// P(Y = 1 | G, C) = sigmoid(0.4 (g - 0.4 c - offset)).
double analytic_breakfast_posterior(double g_val, double c_val, bool rounded = false);

// ---------------------------------------------------------------- runs

struct ExperimentConfig {
    std::size_t n_fit = 200000;
    std::size_t n_eval = 10000;
    std::uint64_t seed = kDefaultSeed;
    std::optional<EstimatorSpec> estimator;
    std::optional<std::filesystem::path> out;
    bool render = false;

    std::size_t n_scms = 200;
    std::size_t n_vars = 9;
    double edge_prob = 0.8;
    std::size_t n_rows = 30000;

    std::optional<std::filesystem::path> data;
    std::string graph = "fig4b";
    std::string target = "PKA";

    /// Multiplier on every tolerance; 0 picks max(1, sqrt(2e5 / n_fit)).
    double tolerance_scale = 0.0;
    double tolerance(double base) const;
};

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ExperimentReport {
    std::string name;
    std::vector<Check> checks;
    std::vector<std::string> notes;

    void add(std::string name, bool passed, std::string detail);
    bool passed() const;
    const Check& check(std::string_view name) const;
    /// One `PASS|FAIL name: detail` line per check, then the notes.
    std::string to_string() const;
};

struct BreakfastRun {
    AttributionResult shapley;
    AttributionResult cc;
    double mean_abs_phi_cc_c = 0.0;
    double corr_c_phi_c = 0.0;
    double grid_max_error = 0.0;
    std::size_t dense_cells = 0;
    double lemma2_gap = 0.0;  // max |I_do(C)(G) - I_C(G)| over dense eval rows
    double lemma1_gap = 0.0;  // max |I_do(G)(C) - I_0(C)| over dense eval rows
    ExperimentReport report;
};
BreakfastRun run_breakfast(const ExperimentConfig& config);

struct DiabetesRun {
    AttributionResult shapley;
    AttributionResult cc;
    bool lemma1_all_contexts = false;
    double max_phi_cc_vs_i0 = 0.0;  // exact identity on the plan
    double no_shortcut_gap = 0.0;   // Monte-Carlo path vs I_0(B)
    double lemma2_gap = 0.0;        // I_do(B)(G) vs I_B(G)
    double corr_b_phi_b = 0.0;
    double corr_b_i0_b = 0.0;
    ExperimentReport report;
};
DiabetesRun run_diabetes_risk(const ExperimentConfig& config);

struct SweepRecord {
    std::uint64_t seed = 0;
    double b_x1 = 0.0;
    double b_x1_given_x2 = 0.0;
    double b_x1_do_x2 = 0.0;
    std::optional<double> collider_impact;
    std::string skipped;  // reason, empty when the record is valid
};

struct SweepSummary {
    std::size_t high_impact = 0;
    double fraction_do_close = 0.0;
    double median_do = 0.0;
    double median_obs = 0.0;
};
SweepSummary summarize_sweep(const std::vector<SweepRecord>& records, double impact_threshold = 0.9,
                             double closeness = 0.05);

struct SweepRun {
    std::vector<SweepRecord> records;
    SweepSummary summary;
    ExperimentReport report;
};
SweepRun run_linear_sweep(const ExperimentConfig& config);

struct DiscreteRun {
    Dataset data;
    AttributionResult shapley;
    AttributionResult cc;
    SapReport sap;
    /// Univariate I_0 for every feature at every observed value: (feature, value, I).
    std::vector<std::tuple<std::string, double, double>> univariate;
    ExperimentReport report;
};
DiscreteRun run_discrete_pipeline(const ExperimentConfig& config);

/// Runs the experiment by CLI name and writes its files when config.out is set.
ExperimentReport run_experiment(std::string_view name, const ExperimentConfig& config);
std::vector<std::string> experiment_names();

double pearson(std::span<const double> a, std::span<const double> b);

} // namespace ccshap
