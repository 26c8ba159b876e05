#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ccshap/attribution.hpp"
#include "ccshap/errors.hpp"
#include "ccshap/experiments.hpp"
#include "ccshap/graph.hpp"
#include "ccshap/render.hpp"
#include "ccshap/scm_file.hpp"
#include "ccshap/util.hpp"

namespace fs = std::filesystem;
using namespace ccshap;

namespace {

struct Options {
    std::string scm;
    std::string builtin;
    std::string method = "both";
    std::uint64_t seed = kDefaultSeed;
    std::size_t n_fit = 200000;
    std::size_t n_eval = 10000;
    std::size_t n = 10000;
    std::string estimator;
    std::string out;
    bool render = false;
    std::size_t n_scms = 200;
    std::size_t n_rows = 30000;
    std::string data;
    std::string graph = "fig4b";
    std::string target = "PKA";
    std::string experiment;
    double tolerance_scale = 0.0;
};

fs::path output_dir(const Options& o, const std::string& name) {
    if (!o.out.empty()) return o.out;
    const char* root = std::getenv("CCSHAP_OUT");
    return fs::path(root && *root ? root : "ccshap-out") / name;
}

Scm load_model(const Options& o) {
    if (!o.scm.empty() && !o.builtin.empty()) throw ArgumentError("use either --scm or --builtin, not both");
    if (!o.scm.empty()) return load_scm(o.scm);
    if (!o.builtin.empty()) return builtin_scm(o.builtin, o.seed);
    throw ArgumentError("one of --scm or --builtin is required");
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot write '" + path.string() + "'");
    out << text;
}

int cmd_graph_check(const Options& o) {
    const Scm m = load_model(o);
    const auto& g = m.graph();
    std::cout << "target: " << g.target() << '\n';
    std::cout << "topological order: " << join(g.topological_order(), " ") << '\n';
    std::cout << "edges:\n" << to_adjacency_text(g);
    std::cout << "features:\n";
    const auto features = g.features();
    for (const auto& f : features) {
        const auto paths = enumerate_paths(g, f, g.target());
        std::size_t with_collider = 0;
        for (const auto& p : paths)
            if (!p.colliders().empty()) ++with_collider;
        std::cout << f << ": ";
        if (paths.empty())
            std::cout << "independent (no path to the target)";
        else if (with_collider == paths.size())
            std::cout << "suppressor (all target paths pass a collider)";
        else if (with_collider == 0)
            std::cout << "connected (no target path passes a collider)";
        else
            std::cout << "mixed (" << with_collider << " of " << paths.size() << " target paths pass a collider)";
        std::cout << '\n';
    }
    if (features.size() > 10) {
        std::cout << "shortcut matrix omitted (more than 10 features)\n";
        return 0;
    }
    std::cout << "shortcuts (feature; context) lemma1 lemma2:\n";
    for (const auto& xj : features) {
        std::vector<std::string> others;
        for (const auto& f : features)
            if (f != xj) others.push_back(f);
        for (std::size_t mask = 1; mask < (std::size_t{1} << others.size()); ++mask) {
            NodeSet s;
            for (std::size_t k = 0; k < others.size(); ++k)
                if (mask >> k & 1) s.insert(others[k]);
            const std::string ctx = join(std::vector<std::string>(s.begin(), s.end()), ",");
            std::cout << '(' << xj << "; {" << ctx << "}) lemma1=" << (lemma1_applies(g, xj, s) ? "true" : "false")
                      << " lemma2=" << (lemma2_applies(g, xj, s) ? "true" : "false") << '\n';
        }
    }
    return 0;
}

int cmd_sample(const Options& o) {
    const Scm m = load_model(o);
    const Dataset d = m.sample(o.n, derive_seed(o.seed, "cli-sample"));
    if (o.out.empty()) {
        write_csv(d, std::cout);
    } else {
        std::ostringstream os;
        write_csv(d, os);
        write_text(o.out, os.str());
    }
    return 0;
}

int cmd_attribute(const Options& o) {
    const bool want_shapley = o.method == "shapley" || o.method == "both";
    const bool want_cc = o.method == "cc-shapley" || o.method == "both";
    if (!want_shapley && !want_cc) throw ArgumentError("--method must be shapley, cc-shapley or both");

    Scm m = load_model(o);
    AttributionOptions options;
    options.spec = o.estimator.empty() ? EstimatorSpec::binned() : EstimatorSpec::parse(o.estimator);
    options.n_fit = o.n_fit;
    options.seed = o.seed;
    if (!o.data.empty()) m = fit_scm_from_data(m.graph(), read_csv(fs::path(o.data)), options.spec);
    Attributor a(m, options);
    const Dataset eval = m.sample(o.n_eval, derive_seed(o.seed, "eval"));

    std::vector<AttributionResult> results;
    if (want_shapley) results.push_back(a.shapley_values(eval));
    if (want_cc) results.push_back(a.cc_shapley_values(eval));
    std::vector<const AttributionResult*> ptrs;
    for (const auto& r : results) ptrs.push_back(&r);

    const fs::path dir = output_dir(o, "attribute");
    std::ostringstream attributions;
    write_attributions_csv(ptrs, attributions);
    write_text(dir / "attributions.csv", attributions.str());
    std::ostringstream contexts;
    write_contexts_csv(ptrs, contexts, true);
    write_text(dir / "contexts.csv", contexts.str());
    std::ostringstream plan;
    write_plan(ptrs, plan);
    write_text(dir / "plan.txt", plan.str());
    if (o.render)
        for (const auto* r : ptrs)
            write_text(dir / ("beeswarm_" + to_string(r->method) + ".svg"),
                       render_beeswarm_svg(*r, to_string(r->method) + " values, target " + r->target));
    std::cout << "wrote " << dir.string() << '\n';
    return 0;
}

int cmd_experiment(const Options& o) {
    ExperimentConfig c;
    c.n_fit = o.n_fit;
    c.n_eval = o.n_eval;
    c.seed = o.seed;
    if (!o.estimator.empty()) c.estimator = EstimatorSpec::parse(o.estimator);
    c.out = output_dir(o, o.experiment);
    c.render = o.render;
    c.n_scms = o.n_scms;
    c.n_rows = o.n_rows;
    if (!o.data.empty()) c.data = o.data;
    c.graph = o.graph;
    c.target = o.target;
    c.tolerance_scale = o.tolerance_scale;
    const auto report = run_experiment(o.experiment, c);
    std::cout << report.to_string();
    std::cout << "wrote " << c.out->string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shapley and cc-Shapley attribution on structural causal models.\n"
                 "Option precedence: command-line flags > --config file > built-in defaults.\n"
                 "The default seed is " +
                 std::to_string(kDefaultSeed) +
                 ". Outputs go to --out, else $CCSHAP_OUT/<command>, else ./ccshap-out/<command>.\n"
                 "Exit codes: 0 success, 1 computation failure, 2 input or usage error."};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML/INI file with option values");
    Options o;

    auto add_model = [&](CLI::App* sub) {
        sub->add_option("--scm", o.scm, "SCM file (JSON)");
        sub->add_option("--builtin", o.builtin, "built-in SCM: " + join(builtin_names(), ", "));
        sub->add_option("--seed", o.seed, "master seed")->capture_default_str();
    };

    auto* graph_check = app.add_subcommand("graph-check", "print topology, suppressor diagnosis and shortcut matrix");
    add_model(graph_check);

    auto* sample = app.add_subcommand("sample", "draw observational rows as CSV");
    add_model(sample);
    sample->add_option("--n", o.n, "number of rows")->capture_default_str();
    sample->add_option("--out", o.out, "output CSV file (default: stdout)");

    auto* attribute = app.add_subcommand("attribute", "compute Shapley and/or cc-Shapley values");
    add_model(attribute);
    attribute->add_option("--method", o.method, "shapley | cc-shapley | both")->capture_default_str();
    attribute->add_option("--n-fit", o.n_fit, "rows used to fit each model")->capture_default_str();
    attribute->add_option("--n-eval", o.n_eval, "rows to explain")->capture_default_str();
    attribute->add_option("--estimator", o.estimator, "linear[:ridge] | cpt | binned[:bins[:radius]]");
    attribute->add_option("--data", o.data, "CSV to refit the SCM's mechanisms from");
    attribute->add_option("--out", o.out, "output directory");
    attribute->add_flag("--render", o.render, "also write beeswarm SVGs");

    auto* experiment = app.add_subcommand("experiment", "run a built-in experiment and print its checks");
    experiment->add_option("name", o.experiment, "experiment: " + join(experiment_names(), ", "))->required();
    experiment->add_option("--seed", o.seed, "master seed")->capture_default_str();
    experiment->add_option("--n-fit", o.n_fit, "rows used to fit each model")->capture_default_str();
    experiment->add_option("--n-eval", o.n_eval, "rows to explain")->capture_default_str();
    experiment->add_option("--estimator", o.estimator, "linear[:ridge] | cpt | binned[:bins[:radius]]");
    experiment->add_option("--out", o.out, "output directory");
    experiment->add_flag("--render", o.render, "also write beeswarm SVGs");
    experiment->add_option("--n-scms", o.n_scms, "linear-sweep: number of random SCMs")->capture_default_str();
    experiment->add_option("--n-rows", o.n_rows, "linear-sweep rows per SCM; discrete synthetic data rows")
        ->capture_default_str();
    experiment->add_option("--data", o.data, "discrete: CSV data (default: synthetic)");
    experiment->add_option("--graph", o.graph, "discrete: fig4b or an SCM file providing the graph")
        ->capture_default_str();
    experiment->add_option("--target", o.target, "discrete: target node")->capture_default_str();
    experiment->add_option("--tolerance-scale", o.tolerance_scale,
                           "multiplier on check tolerances (0: max(1, sqrt(200000 / n-fit)))")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*graph_check) return cmd_graph_check(o);
        if (*sample) return cmd_sample(o);
        if (*attribute) return cmd_attribute(o);
        if (*experiment) return cmd_experiment(o);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
