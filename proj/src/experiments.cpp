#include "ccshap/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ccshap/errors.hpp"
#include "ccshap/parallel.hpp"
#include "ccshap/render.hpp"
#include "ccshap/scm_file.hpp"
#include "ccshap/util.hpp"

namespace ccshap {

// ---------------------------------------------------------------- builtins

namespace {

Mechanism deterministic(std::string_view expr, std::optional<NoiseSpec> noise = std::nullopt) {
    return mech::Deterministic{Expression::parse(expr), std::move(noise)};
}

Mechanism ordinal(std::string_view score) {
    return mech::Ordinal{Expression::parse(score), NoiseSpec::normal(0.0, 1.0), {-0.5, 0.5}};
}

} // namespace

Scm breakfast_scm() {
    CausalGraph g({"C", "G", "Y"}, {{"C", "G"}, {"Y", "G"}}, "Y");
    std::map<std::string, Mechanism, std::less<>> m;
    m.insert_or_assign("C", mech::Exogenous{NoiseSpec::normal(60.0, 625.0)});
    m.insert_or_assign("Y", mech::Bernoulli{Expression::parse("0.15")});
    m.insert_or_assign("G", deterministic("85 + 0.4 * C + 40 * Y + U", NoiseSpec::normal(0.0, 100.0)));
    return Scm(std::move(g), std::move(m));
}

Scm diabetes_risk_scm() {
    CausalGraph g({"B", "G", "H", "Y"},
                  {{"B", "Y"}, {"B", "H"}, {"B", "G"}, {"Y", "H"}, {"Y", "G"}, {"H", "G"}}, "Y");
    std::map<std::string, Mechanism, std::less<>> m;
    m.insert_or_assign("B", mech::Exogenous{NoiseSpec::normal(25.0, 25.0)});
    m.insert_or_assign("Y", mech::Bernoulli{Expression::parse("sigmoid(-2 + 0.1 * (B - 25))")});
    m.insert_or_assign("H", deterministic("5 + 10 * Y + 0.01 * square(B) + U", NoiseSpec::normal(0.0, 1.0)));
    m.insert_or_assign("G", deterministic("90 + 20 * Y + 30 * sigmoid(-0.5 * (H - 5)) + B + U",
                                          NoiseSpec::normal(0.0, 25.0)));
    return Scm(std::move(g), std::move(m));
}

Scm binary_product_scm() {
    CausalGraph g({"X1", "X2", "Y"}, {{"X1", "Y"}, {"X2", "Y"}}, "Y");
    std::map<std::string, Mechanism, std::less<>> m;
    m.insert_or_assign("X1", mech::Exogenous{NoiseSpec::bernoulli(0.5)});
    m.insert_or_assign("X2", mech::Exogenous{NoiseSpec::bernoulli(0.5)});
    m.insert_or_assign("Y", deterministic("X1 * X2"));
    return Scm(std::move(g), std::move(m));
}

CausalGraph sachs_graph(bool with_isolated) {
    std::vector<std::string> nodes{"PKC", "PKA", "P38", "Jnk", "Raf", "Mek", "Erk", "Akt"};
    if (with_isolated) nodes.push_back("Plcg");
    const std::vector<Edge> edges{{"PKC", "PKA"}, {"PKC", "P38"}, {"PKC", "Jnk"}, {"PKC", "Raf"}, {"PKC", "Mek"},
                                  {"PKA", "P38"}, {"PKA", "Jnk"}, {"PKA", "Raf"}, {"PKA", "Mek"}, {"PKA", "Erk"},
                                  {"PKA", "Akt"}, {"Raf", "Mek"}, {"Mek", "Erk"}, {"Erk", "Akt"}};
    return CausalGraph(nodes, edges, "PKA");
}

Scm synthetic_sachs_scm(bool with_isolated) {
    std::map<std::string, Mechanism, std::less<>> m;
    m.insert_or_assign("PKC", ordinal("0"));
    m.insert_or_assign("PKA", ordinal("0.9 * (PKC - 1)"));
    m.insert_or_assign("P38", ordinal("0.8 * (PKC - 1) + 0.8 * (PKA - 1)"));
    m.insert_or_assign("Jnk", ordinal("-0.6 * (PKC - 1) + 0.7 * (PKA - 1)"));
    m.insert_or_assign("Raf", ordinal("0.7 * (PKC - 1) - 0.8 * (PKA - 1)"));
    m.insert_or_assign("Mek", ordinal("0.5 * (PKC - 1) + 0.5 * (PKA - 1) + 0.9 * (Raf - 1)"));
    m.insert_or_assign("Erk", ordinal("0.8 * (PKA - 1) + 0.8 * (Mek - 1)"));
    m.insert_or_assign("Akt", ordinal("0.9 * (PKA - 1) + 0.7 * (Erk - 1)"));
    if (with_isolated) m.insert_or_assign("Plcg", ordinal("0"));
    return Scm(sachs_graph(with_isolated), std::move(m));
}

std::vector<std::string> builtin_names() { return {"breakfast", "diabetes-risk", "binary-product", "linear", "sachs"}; }

Scm builtin_scm(std::string_view name, std::uint64_t seed) {
    if (name == "breakfast") return breakfast_scm();
    if (name == "diabetes-risk") return diabetes_risk_scm();
    if (name == "binary-product") return binary_product_scm();
    if (name == "linear") return random_linear_scm(9, 0.8, NoiseSpec::laplace(0.0, 0.1), seed).scm;
    if (name == "sachs") return synthetic_sachs_scm(true);
    throw ArgumentError("unknown builtin '" + std::string(name) + "' (expected one of: " + join(builtin_names(), ", ") +
                        ")");
}

double breakfast_offset(bool rounded) { return rounded ? 109.0 : 105.0 + 2.5 * std::log(17.0 / 3.0); }

double analytic_breakfast_posterior(double g_val, double c_val, bool rounded) {
    return sigmoid(0.4 * (g_val - 0.4 * c_val - breakfast_offset(rounded)));
}

// ---------------------------------------------------------------- reports

double ExperimentConfig::tolerance(double base) const {
    const double scale =
        tolerance_scale > 0.0 ? tolerance_scale
                              : std::max(1.0, std::sqrt(200000.0 / static_cast<double>(std::max<std::size_t>(n_fit, 1))));
    return base * scale;
}

void ExperimentReport::add(std::string check_name, bool ok, std::string detail) {
    checks.push_back({std::move(check_name), ok, std::move(detail)});
}

bool ExperimentReport::passed() const {
    return std::ranges::all_of(checks, [](const Check& c) { return c.passed; });
}

const Check& ExperimentReport::check(std::string_view check_name) const {
    for (const auto& c : checks)
        if (c.name == check_name) return c;
    throw IdentifierError("no check named '" + std::string(check_name) + "'");
}

std::string ExperimentReport::to_string() const {
    std::ostringstream os;
    os << "experiment: " << name << '\n';
    for (const auto& c : checks) os << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    for (const auto& n : notes) os << n << '\n';
    return os.str();
}

double pearson(std::span<const double> a, std::span<const double> b) {
    const auto n = static_cast<double>(a.size());
    if (a.size() != b.size() || a.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sab / std::sqrt(saa * sbb);
}

namespace {

std::string num(double v) { return format_double(v); }

double mean_abs(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += std::abs(x);
    return acc / static_cast<double>(v.size());
}

/// Largest pointwise gap between two importance pairs over rows where each
/// pair's "with" model has at least kDenseCellCount training points.
double dense_gap(const ImportancePair& a, const ImportancePair& b, const Dataset& eval, std::size_t* used = nullptr) {
    const auto va = a.evaluate(eval);
    const auto vb = b.evaluate(eval);
    auto support = [&](const FittedModel& m, std::size_t r) {
        std::vector<double> x;
        for (const auto& in : m.inputs()) x.push_back(eval.at(r, eval.index_of(in)));
        return m.support(x);
    };
    double worst = 0.0;
    std::size_t count = 0;
    for (std::size_t r = 0; r < eval.rows(); ++r) {
        if (support(*a.model_with, r) < kDenseCellCount || support(*b.model_with, r) < kDenseCellCount) continue;
        worst = std::max(worst, std::abs(va[r] - vb[r]));
        ++count;
    }
    if (used) *used = count;
    return worst;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot write '" + path.string() + "'");
    out << text;
}

void write_results(const std::filesystem::path& dir, const std::vector<const AttributionResult*>& results,
                   bool per_row_contexts, bool render) {
    std::ostringstream attributions;
    write_attributions_csv(results, attributions);
    write_file(dir / "attributions.csv", attributions.str());
    std::ostringstream contexts;
    write_contexts_csv(results, contexts, per_row_contexts);
    write_file(dir / "contexts.csv", contexts.str());
    std::ostringstream plan;
    write_plan(results, plan);
    write_file(dir / "plan.txt", plan.str());
    if (render)
        for (const auto* r : results)
            write_file(dir / ("beeswarm_" + to_string(r->method) + ".svg"),
                       render_beeswarm_svg(*r, to_string(r->method) + " values, target " + r->target));
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::ranges::sort(v);
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

} // namespace

// ---------------------------------------------------------------- breakfast

BreakfastRun run_breakfast(const ExperimentConfig& config) {
    if (config.n_fit < 10000) throw ArgumentError("breakfast needs n_fit >= 10000");
    const Scm scm = breakfast_scm();
    AttributionOptions options;
    options.spec = config.estimator.value_or(EstimatorSpec::binned(40, 3));
    options.n_fit = config.n_fit;
    options.seed = config.seed;
    Attributor a(scm, options);
    const Dataset eval = scm.sample(config.n_eval, derive_seed(config.seed, "eval"));

    BreakfastRun run;
    run.report.name = "breakfast";
    run.shapley = a.shapley_values(eval);
    run.cc = a.cc_shapley_values(eval);

    // Fitted I_C(G) against the closed form on cells with enough training points.
    const auto ic_g = a.importance_obs("G", {"C"});
    std::ostringstream grid;
    grid << "C,G,count,fitted,analytic\n";
    for (const auto& cell : ic_g.model_with->cells()) {
        if (cell.count < kDenseCellCount) continue;
        const double c = cell.center[0];
        const double g = cell.center[1];
        const double fitted = ic_g.model_with->predict(cell.center) - ic_g.model_without->predict(std::vector{c});
        const double analytic = analytic_breakfast_posterior(g, c) - 0.15;
        run.grid_max_error = std::max(run.grid_max_error, std::abs(fitted - analytic));
        ++run.dense_cells;
        grid << num(c) << ',' << num(g) << ',' << cell.count << ',' << num(fitted) << ',' << num(analytic) << '\n';
    }
    run.report.add("analytic I_C(G)", run.grid_max_error <= config.tolerance(0.05),
                   "max error " + num(run.grid_max_error) + " over " + std::to_string(run.dense_cells) +
                       " cells with >= 50 points (tolerance " + num(config.tolerance(0.05)) + ")");

    if (eval.rows() == 0) {
        run.report.notes.push_back("no evaluation rows: attribution checks not evaluated");
    } else {
        const auto c_col = eval.column("C");
        const auto& phi_c = run.shapley.phi_of("C");
        const auto& phi_cc_c = run.cc.phi_of("C");
        run.mean_abs_phi_cc_c = mean_abs(phi_cc_c);
        run.corr_c_phi_c = pearson(c_col, phi_c);
        run.report.add("SAP phi_cc(C)", run.mean_abs_phi_cc_c <= config.tolerance(0.02),
                       "mean |phi_cc(C)| = " + num(run.mean_abs_phi_cc_c) + " (tolerance " +
                           num(config.tolerance(0.02)) + ")");
        run.report.add("suppressor correlation", run.corr_c_phi_c <= -0.5,
                       "corr(C, phi(C)) = " + num(run.corr_c_phi_c) + " (threshold -0.5)");
        std::vector<double> high;
        for (std::size_t r = 0; r < eval.rows(); ++r)
            if (c_col[r] > 70.0) high.push_back(phi_c[r]);
        const double high_abs = mean_abs(high);
        run.report.add("observational phi(C) on C > 70", high_abs > 0.03,
                       "mean |phi(C)| = " + num(high_abs) + " over " + std::to_string(high.size()) + " rows");

        std::size_t rows2 = 0;
        std::size_t rows1 = 0;
        run.lemma2_gap = dense_gap(a.importance_do("G", {"C"}), ic_g, eval, &rows2);
        run.lemma1_gap = dense_gap(a.importance_do("C", {"G"}), a.importance_obs("C", {}), eval, &rows1);
        run.report.add("I_do(C)(G) = I_C(G)", run.lemma2_gap <= config.tolerance(0.03),
                       "max gap " + num(run.lemma2_gap) + " over " + std::to_string(rows2) + " dense rows");
        run.report.add("I_do(G)(C) = I_0(C)", run.lemma1_gap <= config.tolerance(0.03),
                       "max gap " + num(run.lemma1_gap) + " over " + std::to_string(rows1) + " dense rows");
    }
    run.report.add("recomposition", std::max(run.shapley.recomposition_error(), run.cc.recomposition_error()) <= 1e-12,
                   "max |phi - sum(weight * I)| = " +
                       num(std::max(run.shapley.recomposition_error(), run.cc.recomposition_error())));

    if (config.out) {
        write_results(*config.out, {&run.shapley, &run.cc}, true, config.render);
        write_file(*config.out / "grids" / "I_C_G.csv", grid.str());
        write_file(*config.out / "summary.txt", run.report.to_string());
    }
    return run;
}

// ---------------------------------------------------------------- diabetes risk

DiabetesRun run_diabetes_risk(const ExperimentConfig& config) {
    if (config.n_fit < 10000) throw ArgumentError("diabetes-risk needs n_fit >= 10000");
    const Scm scm = diabetes_risk_scm();
    AttributionOptions options;
    options.spec = config.estimator.value_or(EstimatorSpec::binned(48, 6));
    options.n_fit = config.n_fit;
    options.seed = config.seed;
    Attributor a(scm, options);
    const Dataset eval = scm.sample(config.n_eval, derive_seed(config.seed, "eval"));

    DiabetesRun run;
    run.report.name = "diabetes-risk";
    run.shapley = a.shapley_values(eval);
    run.cc = a.cc_shapley_values(eval);

    // Plan: every non-empty context of B uses Lemma 1.
    run.lemma1_all_contexts = true;
    const std::vector<double>* i0 = nullptr;
    std::vector<std::string> weights;
    for (const auto* t : run.cc.terms_of("B")) {
        weights.push_back(to_string(t->weight.exact));
        if (t->context.empty())
            i0 = &t->values;
        else if (t->mode != ImportanceMode::ShortcutLemma1)
            run.lemma1_all_contexts = false;
    }
    const auto& phi_cc_b = run.cc.phi_of("B");
    for (std::size_t r = 0; r < phi_cc_b.size(); ++r)
        run.max_phi_cc_vs_i0 = std::max(run.max_phi_cc_vs_i0, std::abs(phi_cc_b[r] - (*i0)[r]));
    run.report.add("plan: Lemma 1 for all contexts of B", run.lemma1_all_contexts,
                   "weights " + join(weights, ", ") + "; max |phi_cc(B) - I_0(B)| = " + num(run.max_phi_cc_vs_i0));

    if (eval.rows() == 0) {
        run.report.notes.push_back("no evaluation rows: attribution checks not evaluated");
    } else {
        const auto i0_pair = a.importance_obs("B", {});
        for (const NodeSet& s : {NodeSet{"G"}, NodeSet{"H"}, NodeSet{"G", "H"}})
            run.no_shortcut_gap = std::max(run.no_shortcut_gap, dense_gap(a.importance_do("B", s), i0_pair, eval));
        run.report.add("Monte-Carlo I_do(S)(B) = I_0(B)", run.no_shortcut_gap <= config.tolerance(0.03),
                       "max gap " + num(run.no_shortcut_gap) + " over S = {G}, {H}, {G,H}");
        run.lemma2_gap = dense_gap(a.importance_do("G", {"B"}), a.importance_obs("G", {"B"}), eval);
        run.report.notes.push_back("I_do(B)(G) vs I_B(G): max gap " + num(run.lemma2_gap) + " over dense rows");
        const auto b_col = eval.column("B");
        run.corr_b_phi_b = pearson(b_col, run.shapley.phi_of("B"));
        run.corr_b_i0_b = pearson(b_col, *i0);
        run.report.add("B attributed negative relevance", run.corr_b_phi_b < 0.0 && run.corr_b_i0_b > 0.0,
                       "corr(B, phi(B)) = " + num(run.corr_b_phi_b) + ", corr(B, I_0(B)) = " + num(run.corr_b_i0_b));
    }

    // Heatmaps over the central 99% of each axis.
    struct Panel {
        std::string name;
        std::string xj;
        std::string ctx;
        bool interventional;
    };
    const std::vector<Panel> panels{{"I_G_B", "B", "G", false}, {"I_do_G_B", "B", "G", true},
                                    {"I_B_G", "G", "B", false}, {"I_do_B_G", "G", "B", true},
                                    {"I_H_B", "B", "H", false}, {"I_do_H_B", "B", "H", true}};
    const std::size_t cells = 40;
    const auto& fit_data = a.fit_data();
    std::map<std::string, std::string> grids;
    double min_obs = 0.0;
    double min_do = 0.0;
    // Smallest I_0(B) over the B axis: the floor any context-free importance of B reaches.
    double min_i0 = 0.0;
    const auto i0_model = a.importance_obs("B", {});
    for (const auto& p : panels) {
        const auto pair = p.interventional ? a.importance_do(p.xj, {p.ctx}) : a.importance_obs(p.xj, {p.ctx});
        std::vector<double> axis_x(cells);
        std::vector<double> axis_y(cells);
        const std::vector<double> xs(fit_data.column(p.xj).begin(), fit_data.column(p.xj).end());
        const std::vector<double> ys(fit_data.column(p.ctx).begin(), fit_data.column(p.ctx).end());
        const double x0 = quantile(xs, 0.005);
        const double x1 = quantile(xs, 0.995);
        const double y0 = quantile(ys, 0.005);
        const double y1 = quantile(ys, 0.995);
        std::vector<std::vector<double>> cols(fit_data.cols(), std::vector<double>(cells * cells, 0.0));
        for (std::size_t i = 0; i < cells; ++i) {
            axis_x[i] = x0 + (static_cast<double>(i) + 0.5) * (x1 - x0) / cells;
            axis_y[i] = y0 + (static_cast<double>(i) + 0.5) * (y1 - y0) / cells;
        }
        for (std::size_t i = 0; i < cells; ++i)
            for (std::size_t k = 0; k < cells; ++k) {
                cols[fit_data.index_of(p.xj)][i * cells + k] = axis_x[i];
                cols[fit_data.index_of(p.ctx)][i * cells + k] = axis_y[k];
            }
        const Dataset grid(fit_data.names(), std::move(cols));
        const auto values = pair.evaluate(grid);
        std::ostringstream os;
        os << p.xj << "\\" << p.ctx;
        for (double y : axis_y) os << ',' << num(y);
        os << '\n';
        for (std::size_t i = 0; i < cells; ++i) {
            os << num(axis_x[i]);
            for (std::size_t k = 0; k < cells; ++k) {
                const double v = values[i * cells + k];
                os << ',' << num(v);
                if (p.name == "I_G_B" && k == 0 && i0_model.model_with->support(std::vector{axis_x[i]}) >= kDenseCellCount)
                    min_i0 = std::min(min_i0, i0_model.model_with->predict(std::vector{axis_x[i]}) -
                                                  i0_model.model_without->predict(std::vector<double>{}));
                if (p.name == "I_G_B" || p.name == "I_do_G_B") {
                    std::vector<double> x;
                    for (const auto& in : pair.model_with->inputs())
                        x.push_back(in == p.xj ? axis_x[i] : axis_y[k]);
                    if (pair.model_with->support(x) < kDenseCellCount) continue;
                    (p.interventional ? min_do : min_obs) = std::min(p.interventional ? min_do : min_obs, v);
                }
            }
            os << '\n';
        }
        grids[p.name] = os.str();
    }
    run.report.add("do(G) removes the collider-induced negative region of I_G(B)",
                   min_obs < min_i0 - config.tolerance(0.05) && min_do >= min_i0 - config.tolerance(0.03),
                   "min I_G(B) = " + num(min_obs) + ", min I_do(G)(B) = " + num(min_do) + ", min I_0(B) = " +
                       num(min_i0) + " on dense grid cells");
    run.report.add("recomposition", std::max(run.shapley.recomposition_error(), run.cc.recomposition_error()) <= 1e-12,
                   "max |phi - sum(weight * I)| = " +
                       num(std::max(run.shapley.recomposition_error(), run.cc.recomposition_error())));

    if (config.out) {
        write_results(*config.out, {&run.shapley, &run.cc}, true, config.render);
        for (const auto& [name, text] : grids) write_file(*config.out / "grids" / (name + ".csv"), text);
        write_file(*config.out / "summary.txt", run.report.to_string());
    }
    return run;
}

// ---------------------------------------------------------------- linear sweep

SweepSummary summarize_sweep(const std::vector<SweepRecord>& records, double impact_threshold, double closeness) {
    SweepSummary s;
    std::vector<double> dev_do;
    std::vector<double> dev_obs;
    for (const auto& r : records) {
        if (!r.skipped.empty() || !r.collider_impact || *r.collider_impact <= impact_threshold) continue;
        dev_do.push_back(std::abs(r.b_x1_do_x2 - r.b_x1) / (1.0 + std::abs(r.b_x1)));
        dev_obs.push_back(std::abs(r.b_x1_given_x2 - r.b_x1) / (1.0 + std::abs(r.b_x1)));
    }
    s.high_impact = dev_do.size();
    if (dev_do.empty()) return s;
    s.fraction_do_close = static_cast<double>(std::ranges::count_if(dev_do, [&](double d) { return d <= closeness; })) /
                          static_cast<double>(dev_do.size());
    s.median_do = median(dev_do);
    s.median_obs = median(dev_obs);
    return s;
}

SweepRun run_linear_sweep(const ExperimentConfig& config) {
    if (config.n_scms == 0) throw ArgumentError("n_scms must be >= 1");
    SweepRun run;
    run.report.name = "linear-sweep";
    run.records.resize(config.n_scms);
    const auto noise = NoiseSpec::laplace(0.0, 0.1);
    parallel_for(config.n_scms, [&](std::size_t i) {
        auto& rec = run.records[i];
        rec.seed = derive_seed(config.seed, "sweep-scm", 0, i);
        const auto lin = random_linear_scm(config.n_vars, config.edge_prob, noise, rec.seed);
        rec.collider_impact = collider_impact(lin.weighted, "X1", "X2", "Y");
        try {
            AttributionOptions options;
            options.spec = config.estimator.value_or(EstimatorSpec::linear());
            options.n_fit = config.n_rows;
            options.seed = rec.seed;
            Attributor a(lin.scm, options);
            rec.b_x1 = a.importance_obs("X1", {}).model_with->coefficients().at(0);
            rec.b_x1_given_x2 = a.importance_obs("X1", {"X2"}).model_with->coefficients().at(0);
            rec.b_x1_do_x2 = a.importance_do("X1", {"X2"}).model_with->coefficients().at(0);
        } catch (const FitError& e) {
            rec.skipped = e.what();
        }
    });
    run.summary = summarize_sweep(run.records);
    const auto& s = run.summary;
    run.report.add("high-impact records close to b under do(X2)", s.high_impact > 0 && s.fraction_do_close >= 0.9,
                   std::to_string(s.high_impact) + " records with impact > 0.9, fraction within 0.05: " +
                       num(s.fraction_do_close));
    run.report.add("do median below observational median", s.high_impact > 0 && s.median_do < s.median_obs &&
                                                               s.median_do <= 0.05,
                   "median do " + num(s.median_do) + ", median observational " + num(s.median_obs));

    if (config.out) {
        std::ostringstream os;
        os << "seed,b_x1,b_x1_given_x2,b_x1_do_x2,collider_impact,skipped\n";
        for (const auto& r : run.records)
            os << r.seed << ',' << num(r.b_x1) << ',' << num(r.b_x1_given_x2) << ',' << num(r.b_x1_do_x2) << ','
               << (r.collider_impact ? num(*r.collider_impact) : std::string("undefined")) << ','
               << (r.skipped.empty() ? "" : "\"" + r.skipped + "\"") << '\n';
        write_file(*config.out / "sweep.csv", os.str());
        write_file(*config.out / "summary.txt", run.report.to_string());
    }
    return run;
}

// ---------------------------------------------------------------- discrete pipeline

DiscreteRun run_discrete_pipeline(const ExperimentConfig& config) {
    DiscreteRun run;
    run.report.name = "discrete";
    const bool synthetic = !config.data.has_value();

    CausalGraph graph;
    if (config.graph == "fig4b")
        graph = sachs_graph(synthetic);
    else
        graph = load_scm(config.graph).graph();
    if (config.target != graph.target()) graph = graph.with_target(config.target);

    if (synthetic) {
        // Observational rows plus a block of rows with Mek set uniformly at random.
        const Scm truth = synthetic_sachs_scm(true);
        const std::size_t n_int = config.n_rows / 10;
        Dataset obs = truth.sample(config.n_rows - n_int, derive_seed(config.seed, "discrete-data"));
        const Dataset levels({"Mek"}, std::vector<std::vector<double>>{{0.0, 1.0, 2.0}});
        const Scm intervened =
            truth.intervene_stochastic({"Mek"}, std::make_shared<IndependentMarginalSampler>(levels, std::vector<std::string>{"Mek"}));
        const Dataset inter = intervened.sample(n_int, derive_seed(config.seed, "discrete-data-int"));
        std::vector<std::vector<double>> cols;
        for (std::size_t c = 0; c < obs.cols(); ++c) {
            auto col = obs.column(c);
            const auto& extra = inter.column(inter.index_of(obs.names()[c]));
            col.insert(col.end(), extra.begin(), extra.end());
            cols.push_back(std::move(col));
        }
        run.data = Dataset(obs.names(), std::move(cols));
        std::vector<std::string> labels(obs.rows(), "");
        labels.resize(run.data.rows(), "Mek");
        run.data.set_interventions(std::move(labels));
    } else {
        run.data = read_csv(*config.data);
    }
    std::vector<std::string> missing;
    for (const auto& n : graph.nodes())
        if (!run.data.has(n)) missing.push_back(n);
    if (!missing.empty()) throw ArgumentError("data is missing columns: " + join(missing, ", "));

    AttributionOptions options;
    options.spec = config.estimator.value_or(EstimatorSpec::discrete());
    options.n_fit = config.n_fit;
    options.seed = config.seed;
    const Scm fitted = fit_scm_from_data(graph, run.data, options.spec);
    Attributor a(fitted, options);
    const Dataset eval = fitted.sample(config.n_eval, derive_seed(config.seed, "eval"));
    run.shapley = a.shapley_values(eval);
    run.cc = a.cc_shapley_values(eval);

    bool finite = true;
    for (const auto* res : {&run.shapley, &run.cc})
        for (const auto& p : res->phi)
            for (double v : p) finite = finite && std::isfinite(v);
    run.report.add("pipeline produced attributions", finite && run.data.rows() > 0,
                   std::to_string(run.data.rows()) + " data rows, " + std::to_string(eval.rows()) + " evaluation rows, " +
                       std::to_string(run.cc.features.size()) + " features");

    run.sap = sap_check(run.cc, graph, config.tolerance(0.03));
    std::vector<std::string> flagged;
    for (const auto& e : run.sap.checked) flagged.push_back(e.feature + " " + num(e.mean_abs_phi));
    run.report.add("SAP for features independent of the target", run.sap.passed(),
                   run.sap.checked.empty() ? std::string("no feature is d-separated from the target")
                                           : "mean |phi_cc|: " + join(flagged, ", ") + " (tolerance " +
                                                 num(config.tolerance(0.03)) + ")");

    // Univariate importance at every observed value.
    for (const auto& f : run.cc.features) {
        const auto pair = a.importance_obs(f, {});
        auto values = std::vector<double>(a.fit_data().column(f).begin(), a.fit_data().column(f).end());
        std::ranges::sort(values);
        values.erase(std::unique(values.begin(), values.end()), values.end());
        const Dataset pts({f}, std::vector<std::vector<double>>{values});
        const auto imp = pair.evaluate(pts);
        for (std::size_t i = 0; i < values.size(); ++i) run.univariate.emplace_back(f, values[i], imp[i]);
    }

    // Trend agreement, checked for features whose every target path is
    // collider-free and reported for the rest.
    if (eval.rows() > 1) {
        std::vector<std::string> checked;
        std::vector<std::string> reported;
        bool all_agree = true;
        for (const auto& f : run.cc.features) {
            const auto paths = enumerate_paths(graph, f, graph.target());
            const bool collider_free =
                !paths.empty() && std::ranges::none_of(paths, [](const Path& p) { return !p.colliders().empty(); });
            const auto col = eval.column(f);
            const auto i0 = a.importance_obs(f, {}).evaluate(eval);
            const double t_cc = pearson(col, run.cc.phi_of(f));
            const double t_0 = pearson(col, i0);
            const bool same = !(t_cc * t_0 < 0.0);
            const std::string line = f + (same ? " agrees" : " differs") + " (corr " + num(t_cc) + " vs " + num(t_0) + ")";
            if (collider_free) {
                all_agree = all_agree && same;
                checked.push_back(line);
            } else {
                reported.push_back(line);
            }
        }
        run.report.add("cc-Shapley trend matches I_0 for collider-free features", all_agree,
                       checked.empty() ? std::string("no feature has only collider-free target paths")
                                       : join(checked, ", "));
        if (!reported.empty()) run.report.notes.push_back("trend, features with collider paths: " + join(reported, ", "));
    }
    run.report.add("recomposition", std::max(run.shapley.recomposition_error(), run.cc.recomposition_error()) <= 1e-12,
                   "max |phi - sum(weight * I)| = " +
                       num(std::max(run.shapley.recomposition_error(), run.cc.recomposition_error())));

    if (config.out) {
        write_results(*config.out, {&run.shapley, &run.cc}, false, config.render);
        std::ostringstream os;
        os << "feature,value,importance\n";
        for (const auto& [f, v, i] : run.univariate) os << f << ',' << num(v) << ',' << num(i) << '\n';
        write_file(*config.out / "univariate.csv", os.str());
        if (synthetic) {
            std::ostringstream data;
            write_csv(run.data, data);
            write_file(*config.out / "data.csv", data.str());
        }
        write_file(*config.out / "summary.txt", run.report.to_string() + run.sap.to_string());
    }
    return run;
}

// ---------------------------------------------------------------- dispatch

std::vector<std::string> experiment_names() { return {"breakfast", "diabetes-risk", "linear-sweep", "discrete"}; }

ExperimentReport run_experiment(std::string_view name, const ExperimentConfig& config) {
    if (name == "breakfast") return run_breakfast(config).report;
    if (name == "diabetes-risk") return run_diabetes_risk(config).report;
    if (name == "linear-sweep") return run_linear_sweep(config).report;
    if (name == "discrete") return run_discrete_pipeline(config).report;
    throw ArgumentError("unknown experiment '" + std::string(name) + "' (expected one of: " +
                        join(experiment_names(), ", ") + ")");
}

} // namespace ccshap
