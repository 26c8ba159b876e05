#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

/// Runs the CLI with `args`, capturing stdout and stderr.
Run cli(const std::string& args, const std::string& env = "") {
    const auto log = fs::temp_directory_path() / "ccshap_cli_output.txt";
    const std::string cmd = env + (env.empty() ? "" : " ") + "'" + CCSHAP_CLI + "' " + args + " > '" + log.string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::ostringstream s;
    s << in.rdbuf();
    r.out = s.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("ccshap_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

const std::string kData = CCSHAP_TEST_DATA;

}  // namespace

TEST_CASE("cli help and usage errors") {
    CHECK(cli("--help").code == 0);
    CHECK(cli("").code == 2);
    CHECK(cli("attribute --bogus").code == 2);
    CHECK(cli("graph-check").code == 2);
    CHECK(cli("graph-check --builtin nope").code == 2);
    CHECK(cli("experiment nope").code == 2);
}

TEST_CASE("cli graph-check diagnoses suppressors and shortcuts") {
    const auto breakfast = cli("graph-check --builtin breakfast");
    CHECK(breakfast.code == 0);
    CHECK(breakfast.out.find("C: suppressor (all target paths pass a collider)") != std::string::npos);
    CHECK(breakfast.out.find("G: connected") != std::string::npos);

    const auto diabetes = cli("graph-check --scm '" + std::string(CCSHAP_SCMS) + "/diabetes-risk.json'");
    CHECK(diabetes.code == 0);
    for (const char* ctx : {"{G}", "{H}", "{G,H}"})
        CHECK(diabetes.out.find(std::string("(B; ") + ctx + ") lemma1=true") != std::string::npos);
}

TEST_CASE("cli input and computation failures map to exit codes") {
    CHECK(cli("graph-check --scm '" + kData + "/cycle.json'").code == 2);
    CHECK(cli("graph-check --scm '" + kData + "/malformed.json'").code == 2);
    CHECK(cli("graph-check --scm /nonexistent.json").code == 2);
    const auto domain = cli("sample --scm '" + kData + "/log_domain.json' --n 100");
    CHECK(domain.code == 1);
    CHECK(domain.out.find("error:") != std::string::npos);
}

TEST_CASE("cli sample is reproducible") {
    const auto dir = scratch("sample");
    CHECK(cli("sample --builtin breakfast --n 500 --out '" + (dir / "a.csv").string() + "'").code == 0);
    CHECK(cli("sample --builtin breakfast --n 500 --out '" + (dir / "b.csv").string() + "'").code == 0);
    const auto a = slurp(dir / "a.csv");
    CHECK(a.rfind("C,G,Y\n", 0) == 0);
    CHECK(count(a, "\n") == 501);
    CHECK(a == slurp(dir / "b.csv"));
    const auto other = cli("sample --builtin breakfast --n 5 --seed 1");
    CHECK(other.code == 0);
    CHECK(count(other.out, "\n") == 6);
}

TEST_CASE("cli attribute with no evaluation rows writes header-only files") {
    const auto dir = scratch("empty");
    const auto r = cli("attribute --builtin breakfast --n-fit 10000 --n-eval 0 --out '" + dir.string() + "'");
    CHECK(r.code == 0);
    CHECK(slurp(dir / "attributions.csv") == "row_id,feature,mode,phi,feature_value\n");
    CHECK(count(slurp(dir / "contexts.csv"), "\n") == 1);
}

TEST_CASE("cli attribute is byte-identical on rerun and renders one marker per value") {
    const auto a = scratch("attr_a");
    const auto b = scratch("attr_b");
    const std::string args = "attribute --builtin breakfast --n-fit 10000 --n-eval 50 --render --out ";
    CHECK(cli(args + "'" + a.string() + "'").code == 0);
    CHECK(cli(args + "'" + b.string() + "'").code == 0);
    for (const char* f : {"attributions.csv", "contexts.csv", "plan.txt", "beeswarm_shapley.svg", "beeswarm_cc-shapley.svg"})
        CHECK(slurp(a / f) == slurp(b / f));
    const auto svg = slurp(a / "beeswarm_cc-shapley.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(count(svg, "<circle") == 100);
}

TEST_CASE("cli output directory falls back to CCSHAP_OUT") {
    const auto root = scratch("env");
    const auto r = cli("attribute --builtin binary-product --estimator cpt --n-fit 2000 --n-eval 10 --method shapley",
                       "CCSHAP_OUT='" + root.string() + "'");
    CHECK(r.code == 0);
    CHECK(fs::exists(root / "attribute" / "attributions.csv"));
}

TEST_CASE("cli reads options from a config file") {
    const auto dir = scratch("config");
    fs::create_directories(dir);
    std::ofstream(dir / "opts.toml") << "[attribute]\nbuiltin = \"binary-product\"\nestimator = \"cpt\"\nn-fit = 2000\n"
                                        "n-eval = 4\nmethod = \"cc-shapley\"\n";
    const auto r = cli("--config '" + (dir / "opts.toml").string() + "' attribute --out '" + (dir / "out").string() + "'");
    CHECK(r.code == 0);
    CHECK(count(slurp(dir / "out" / "attributions.csv"), "\n") == 1 + 4 * 2);
}
