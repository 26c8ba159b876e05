#include <cmath>
#include <filesystem>
#include <memory>

#include "ccshap/errors.hpp"
#include "ccshap/experiments.hpp"
#include "ccshap/parallel.hpp"
#include "ccshap/scm.hpp"
#include "ccshap/scm_file.hpp"
#include "doctest.h"

using namespace ccshap;

namespace {

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double covariance(std::span<const double> a, std::span<const double> b) {
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
    return s / static_cast<double>(a.size());
}

const char* const kChain = R"json({"target": "Y", "nodes": [
  {"name": "X", "parents": [], "mechanism": "exogenous normal(1, 4)"},
  {"name": "M", "parents": ["X"], "mechanism": "2 * X + U", "noise": "normal(0, 1)"},
  {"name": "Y", "parents": ["M"], "mechanism": "M - 1 + U", "noise": "normal(0, 1)"}]})json";

}  // namespace

TEST_CASE("scm documents parse into mechanisms with the declared moments") {
    const Scm m = parse_scm(kChain);
    CHECK(m.topological_order() == std::vector<std::string>{"X", "M", "Y"});
    const auto d = m.sample(100000, 5);
    CHECK(mean_of(d.column("X")) == doctest::Approx(1.0).epsilon(0.03));
    CHECK(mean_of(d.column("Y")) == doctest::Approx(1.0).epsilon(0.05));
    // Var(Y) = 4 * 4 + 1 + 1
    CHECK(covariance(d.column("Y"), d.column("Y")) == doctest::Approx(18.0).epsilon(0.03));
    CHECK(scm_to_json(parse_scm(scm_to_json(m))) == scm_to_json(m));
}

TEST_CASE("scm document errors") {
    CHECK_THROWS_AS(parse_scm("{\"target\": \"Y\", \"nodes\": ["), ParseError);
    CHECK_THROWS_AS(parse_scm(R"json({"target": "Y", "nodes": [
        {"name": "Y", "parents": [], "mechanism": "1 + U"}]})json"),
                    InputError);
    CHECK_THROWS_AS(parse_scm(R"json({"target": "Y", "nodes": [
        {"name": "X", "parents": [], "mechanism": "exogenous normal(0, 1)"},
        {"name": "Y", "parents": [], "mechanism": "X + 1"}]})json"),
                    IdentifierError);
    CHECK_THROWS_AS(parse_scm(R"json({"target": "Q", "nodes": [
        {"name": "X", "parents": [], "mechanism": "exogenous normal(0, 1)"}]})json"),
                    IdentifierError);
    CHECK_THROWS_AS(load_scm(std::filesystem::path(CCSHAP_TEST_DATA) / "cycle.json"), CycleError);
    CHECK_THROWS_AS(load_scm(std::filesystem::path(CCSHAP_TEST_DATA) / "malformed.json"), ParseError);
    CHECK_THROWS_AS(load_scm("/nonexistent/scm.json"), InputError);
}

TEST_CASE("sampling is deterministic and independent of the thread count") {
    const Scm m = breakfast_scm();
    const std::size_t n = 3 * kSampleBlock + 17;
    const auto a = m.sample(n, 99);
    const auto saved = thread_count();
    set_thread_count(1);
    const auto b = m.sample(n, 99);
    set_thread_count(saved);
    for (std::size_t c = 0; c < a.cols(); ++c)
        for (std::size_t r = 0; r < n; ++r) REQUIRE(a.at(r, c) == b.at(r, c));
    const auto other = m.sample(n, 100);
    CHECK(other.at(0, 0) != a.at(0, 0));
    // Blocks use their own seeds: the first block of a larger draw matches a smaller draw.
    const auto head = m.sample(kSampleBlock, 99);
    CHECK(head.at(kSampleBlock - 1, 0) == a.at(kSampleBlock - 1, 0));
}

TEST_CASE("sampling wraps domain failures") {
    const Scm m = load_scm(std::filesystem::path(CCSHAP_TEST_DATA) / "log_domain.json");
    CHECK_THROWS_AS(m.sample(1000, 1), SamplingError);
}

TEST_CASE("atomic intervention cuts incoming edges and fixes the value") {
    const Scm m = parse_scm(kChain);
    const Scm d = m.intervene_atomic({{"M", 3.0}});
    CHECK(d.graph().parents("M").empty());
    const auto s = d.sample(50000, 2);
    for (double v : s.column("M")) REQUIRE(v == 3.0);
    CHECK(mean_of(s.column("Y")) == doctest::Approx(2.0).epsilon(0.03));
    CHECK(std::abs(covariance(s.column("X"), s.column("Y"))) < 0.1);
    CHECK_THROWS_AS(m.intervene_atomic({{"Q", 1.0}}), IdentifierError);
    CHECK_THROWS_AS(m.intervene_atomic({{"M", NAN}}), ArgumentError);
}

TEST_CASE("stochastic intervention draws the set jointly from the sampler") {
    const Scm m = parse_scm(kChain);
    const NodeSet s{"M"};
    const auto q = marginal_sampler(m, s, 20000, 4);
    const Scm d = m.intervene_stochastic(s, q);
    const auto sample = d.sample(50000, 6);
    // M keeps its marginal (mean 2, variance 17) but loses its dependence on X.
    CHECK(mean_of(sample.column("M")) == doctest::Approx(2.0).epsilon(0.05));
    CHECK(covariance(sample.column("M"), sample.column("M")) == doctest::Approx(17.0).epsilon(0.05));
    CHECK(std::abs(covariance(sample.column("X"), sample.column("M"))) < 0.3);
    CHECK(covariance(sample.column("M"), sample.column("Y")) == doctest::Approx(17.0).epsilon(0.05));

    CHECK_THROWS_AS(m.intervene_stochastic(NodeSet{"X"}, q), ArgumentError);
    CHECK_THROWS_AS(m.intervene_stochastic(s, nullptr), ArgumentError);
    CHECK_THROWS_AS(marginal_sampler(m, NodeSet{"Y"}, 10, 1), ArgumentError);
    CHECK_THROWS_AS(marginal_sampler(m, s, 0, 1), ArgumentError);
}

TEST_CASE("joint marginal sampler keeps dependence, independent sampler removes it") {
    const Scm m = parse_scm(kChain);
    const NodeSet s{"X", "M"};
    const auto joint = m.intervene_stochastic(s, marginal_sampler(m, s, 20000, 1, MarginalKind::Joint)).sample(40000, 2);
    const auto indep =
        m.intervene_stochastic(s, marginal_sampler(m, s, 20000, 1, MarginalKind::Independent)).sample(40000, 2);
    CHECK(covariance(joint.column("X"), joint.column("M")) == doctest::Approx(8.0).epsilon(0.05));
    CHECK(std::abs(covariance(indep.column("X"), indep.column("M"))) < 0.3);
}

TEST_CASE("random linear scm sampling agrees with the matrix solve") {
    const auto lin = random_linear_scm(6, 0.8, NoiseSpec::laplace(0, 0.1), 11);
    CHECK(lin.scm.graph().target() == "Y");
    CHECK(lin.scm.graph().size() == 6);
    const auto draw = sample_linear(lin, 200, 3);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(6, 6);
    const Eigen::MatrixXd solved = ((id - lin.a).inverse() * draw.u.transpose()).transpose();
    CHECK((solved - draw.v).cwiseAbs().maxCoeff() < 1e-9);
    // The graph is acyclic: A is nilpotent.
    Eigen::MatrixXd p = lin.a;
    for (int k = 0; k < 6; ++k) p = p * lin.a;
    CHECK(p.cwiseAbs().maxCoeff() < 1e-12);
    // The expression-based mechanisms reproduce the same covariance.
    const auto s = lin.scm.sample(100000, 4);
    const auto big = sample_linear(lin, 100000, 4);
    const auto y = lin.scm.graph().index_of("Y");
    const Eigen::VectorXd ycol = big.v.col(static_cast<Eigen::Index>(y));
    const double var_matrix = (ycol.array() - ycol.mean()).square().mean();
    CHECK(covariance(s.column("Y"), s.column("Y")) == doctest::Approx(var_matrix).epsilon(0.05));
    CHECK_THROWS_AS(random_linear_scm(1, 0.5, NoiseSpec::laplace(0, 0.1), 1), ArgumentError);
    CHECK_THROWS_AS(random_linear_scm(3, 1.5, NoiseSpec::laplace(0, 0.1), 1), ArgumentError);
}

TEST_CASE("fitting from data excludes rows intervened on the node") {
    const CausalGraph g({"X", "Y"}, {{"X", "Y"}}, "Y");
    const std::size_t n = 4000;
    std::vector<double> x(n), y(n);
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = static_cast<double>(i % 2);
        y[i] = x[i];
        if (i % 4 == 3) {
            y[i] = 7.0;  // do(Y = 7): must not enter Y's mechanism
            labels[i] = "Y";
        }
    }
    Dataset d({"X", "Y"}, {x, y});
    d.set_interventions(labels);
    const Scm fitted = fit_scm_from_data(g, d, EstimatorSpec::discrete());
    const auto s = fitted.sample(20000, 1);
    for (double v : s.column("Y")) REQUIRE(v != 7.0);
    for (std::size_t r = 0; r < s.rows(); ++r) REQUIRE(s.at(r, 1) == s.at(r, 0));

    const Scm linear = fit_scm_from_data(g, d, EstimatorSpec::linear());
    CHECK(mean_of(linear.sample(20000, 1).column("Y")) == doctest::Approx(0.5).epsilon(0.05));

    CHECK_THROWS_AS(fit_scm_from_data(g, Dataset({"X"}, 3), EstimatorSpec::linear()), ArgumentError);
    Dataset all_y({"X", "Y"}, {x, y});
    all_y.set_interventions(std::vector<std::string>(n, "Y"));
    CHECK_THROWS_AS(fit_scm_from_data(g, all_y, EstimatorSpec::linear()), FitError);
}
