#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ccshap/dataset.hpp"
#include "ccshap/estimators.hpp"
#include "ccshap/expression.hpp"
#include "ccshap/graph.hpp"
#include "ccshap/noise.hpp"
#include "ccshap/rng.hpp"

namespace ccshap {

/// Generator of joint draws for a fixed list of nodes.
class Sampler {
public:
    virtual ~Sampler() = default;
    virtual const std::vector<std::string>& nodes() const = 0;
    /// Writes one joint draw, aligned with nodes().
    virtual void draw(Rng& rng, std::span<double> out) const = 0;
};

/// Resamples whole rows (with replacement) from a stored pool.
class EmpiricalJointSampler : public Sampler {
public:
    EmpiricalJointSampler(const Dataset& pool, std::vector<std::string> nodes);
    const std::vector<std::string>& nodes() const override { return nodes_; }
    void draw(Rng& rng, std::span<double> out) const override;
    std::size_t pool_size() const noexcept { return rows_; }

private:
    std::vector<std::string> nodes_;
    std::vector<double> values_;  // row-major
    std::size_t rows_ = 0;
};

/// Draws every node independently from its own pool column.
class IndependentMarginalSampler : public Sampler {
public:
    IndependentMarginalSampler(const Dataset& pool, std::vector<std::string> nodes);
    const std::vector<std::string>& nodes() const override { return nodes_; }
    void draw(Rng& rng, std::span<double> out) const override;

private:
    std::vector<std::string> nodes_;
    std::vector<std::vector<double>> columns_;
};

namespace mech {

struct Exogenous {
    NoiseSpec noise;
};
/// value = expr(parents, U) with U drawn from noise (U = 0 without noise).
struct Deterministic {
    Expression expr;
    std::optional<NoiseSpec> noise;
};
/// value ~ Bernoulli(prob(parents)).
struct Bernoulli {
    Expression prob;
};
/// value = number of cut points below score(parents) + U, i.e. 0..cuts.size().
struct Ordinal {
    Expression score;
    NoiseSpec noise;
    std::vector<double> cuts;
};
/// value drawn from a fitted conditional table over the parents.
struct Categorical {
    std::shared_ptr<const FittedModel> model;
};
/// value = model(parents) + a residual resampled from the training residuals.
struct Residual {
    std::shared_ptr<const FittedModel> model;
    std::shared_ptr<const std::vector<double>> residuals;
};
/// value resampled from stored observations.
struct Empirical {
    std::shared_ptr<const std::vector<double>> values;
};
struct Constant {
    double value = 0.0;
};
/// Component `component` of a joint draw shared by an intervened group.
struct Sampled {
    std::size_t group = 0;
    std::size_t component = 0;
};

} // namespace mech

using Mechanism = std::variant<mech::Exogenous, mech::Deterministic, mech::Bernoulli, mech::Ordinal, mech::Categorical,
                               mech::Residual, mech::Empirical, mech::Constant, mech::Sampled>;

std::string describe(const Mechanism& m);

class Scm {
public:
    Scm() = default;
    /// Every node of g needs a mechanism; expressions may only reference parents.
    Scm(CausalGraph graph, std::map<std::string, Mechanism, std::less<>> mechanisms);

    const CausalGraph& graph() const noexcept { return graph_; }
    const Mechanism& mechanism(std::string_view node) const;
    std::vector<std::string> topological_order() const { return graph_.topological_order(); }

    /// n i.i.d. rows by ancestral sampling. Rows are generated in fixed blocks
    /// with per-block seeds, so the result does not depend on the thread count.
    Dataset sample(std::size_t n, std::uint64_t seed) const;

    Scm intervene_atomic(const std::map<std::string, double, std::less<>>& assignments) const;
    Scm intervene_stochastic(const NodeSet& s, std::shared_ptr<const Sampler> q) const;

private:
    struct Compiled {
        std::vector<std::vector<std::size_t>> slots;  // expression variable -> node index
    };
    void compile();

    CausalGraph graph_;
    std::vector<Mechanism> mechanisms_;  // by node index
    std::vector<std::shared_ptr<const Sampler>> groups_;
    std::vector<std::vector<std::size_t>> group_nodes_;
    std::vector<std::size_t> order_;
    Compiled compiled_;
};

inline constexpr std::size_t kSampleBlock = 4096;
inline constexpr std::size_t kDefaultPool = 100000;

enum class MarginalKind { Joint, Independent };

std::shared_ptr<const Sampler> marginal_sampler(const Scm& m, const NodeSet& s, std::size_t n_pool,
                                                std::uint64_t seed, MarginalKind kind = MarginalKind::Joint);

/// Linear SCM V = A V + U with i.i.d. noise.
struct LinearScm {
    Scm scm;
    WeightedGraph weighted;
    /// A(i, j) is the weight of edge j -> i, indices in graph node order.
    Eigen::MatrixXd a;
    NoiseSpec noise;
};

/// Nodes are Y, X1, ..., X(n_vars-1). A random ordering (uniform permutation)
/// is drawn, each forward pair gets an edge with probability edge_prob and a
/// standard-normal weight.
LinearScm random_linear_scm(std::size_t n_vars, double edge_prob, const NoiseSpec& noise, std::uint64_t seed);

struct LinearDraw {
    Eigen::MatrixXd v;  // n x n_vars
    Eigen::MatrixXd u;
};

/// Draws U and solves V = (I - A)^{-1} U by forward substitution in topological order.
LinearDraw sample_linear(const LinearScm& m, std::size_t n, std::uint64_t seed);

/// Fits every node from data given the graph. Rows labelled as intervened on a
/// node are excluded from that node's fit. Root nodes get empirical marginals;
/// other nodes get categorical mechanisms for the cpt estimator and
/// residual-noise mechanisms otherwise.
Scm fit_scm_from_data(const CausalGraph& g, const Dataset& d, const EstimatorSpec& spec);

} // namespace ccshap
