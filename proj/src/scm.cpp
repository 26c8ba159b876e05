#include "ccshap/scm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ccshap/errors.hpp"
#include "ccshap/parallel.hpp"
#include "ccshap/util.hpp"

namespace ccshap {

namespace {

std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
}

std::vector<std::string> checked_nodes(const Dataset& pool, std::vector<std::string> nodes) {
    for (const auto& n : nodes) pool.index_of(n);
    return nodes;
}

constexpr std::size_t kRetired = static_cast<std::size_t>(-1);

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

} // namespace

// ---------------------------------------------------------------- samplers

EmpiricalJointSampler::EmpiricalJointSampler(const Dataset& pool, std::vector<std::string> nodes)
    : nodes_(checked_nodes(pool, std::move(nodes))), rows_(pool.rows()) {
    if (rows_ == 0) throw ArgumentError("marginal sampler needs a non-empty pool");
    values_.resize(rows_ * nodes_.size());
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
        const auto& col = pool.column(pool.index_of(nodes_[k]));
        for (std::size_t r = 0; r < rows_; ++r) values_[r * nodes_.size() + k] = col[r];
    }
}

void EmpiricalJointSampler::draw(Rng& rng, std::span<double> out) const {
    const auto r = uniform_index(rng, rows_);
    std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(r * nodes_.size()), nodes_.size(), out.begin());
}

IndependentMarginalSampler::IndependentMarginalSampler(const Dataset& pool, std::vector<std::string> nodes)
    : nodes_(checked_nodes(pool, std::move(nodes))) {
    if (pool.rows() == 0) throw ArgumentError("marginal sampler needs a non-empty pool");
    for (const auto& n : nodes_) columns_.push_back(pool.column(pool.index_of(n)));
}

void IndependentMarginalSampler::draw(Rng& rng, std::span<double> out) const {
    for (std::size_t k = 0; k < columns_.size(); ++k) out[k] = columns_[k][uniform_index(rng, columns_[k].size())];
}

// ---------------------------------------------------------------- mechanisms

std::string describe(const Mechanism& m) {
    return std::visit(overloaded{
                          [](const mech::Exogenous& e) { return "exogenous " + e.noise.to_string(); },
                          [](const mech::Deterministic& e) {
                              return e.expr.text() + (e.noise ? ", U ~ " + e.noise->to_string() : std::string());
                          },
                          [](const mech::Bernoulli& e) { return "bernoulli(" + e.prob.text() + ")"; },
                          [](const mech::Ordinal& e) {
                              std::vector<std::string> cuts;
                              for (double c : e.cuts) cuts.push_back(format_double(c));
                              return "ordinal(" + e.score.text() + " + U; cuts " + join(cuts, ", ") +
                                     "), U ~ " + e.noise.to_string();
                          },
                          [](const mech::Categorical& e) {
                              return "categorical table over (" + join(e.model->inputs(), ", ") + ")";
                          },
                          [](const mech::Residual& e) {
                              return e.model->spec().to_string() + " regression on (" +
                                     join(e.model->inputs(), ", ") + ") + resampled residual";
                          },
                          [](const mech::Empirical& e) {
                              return "empirical marginal (" + std::to_string(e.values->size()) + " values)";
                          },
                          [](const mech::Constant& e) { return "constant " + format_double(e.value); },
                          [](const mech::Sampled& e) { return "joint draw group " + std::to_string(e.group); },
                      },
                      m);
}

// ---------------------------------------------------------------- Scm

Scm::Scm(CausalGraph graph, std::map<std::string, Mechanism, std::less<>> mechanisms) : graph_(std::move(graph)) {
    for (const auto& [name, m] : mechanisms) {
        if (!graph_.contains(name)) throw IdentifierError("mechanism given for unknown node '" + name + "'");
        if (std::holds_alternative<mech::Sampled>(m))
            throw ArgumentError("node '" + name + "': joint-draw mechanisms come from intervene_stochastic");
    }
    mechanisms_.reserve(graph_.size());
    for (const auto& name : graph_.nodes()) {
        const auto it = mechanisms.find(name);
        if (it == mechanisms.end()) throw ArgumentError("node '" + name + "' has no mechanism");
        mechanisms_.push_back(it->second);
    }
    compile();
}

void Scm::compile() {
    order_.clear();
    for (const auto& n : graph_.topological_order()) order_.push_back(graph_.index_of(n));
    compiled_.slots.assign(graph_.size(), {});
    for (std::size_t i = 0; i < graph_.size(); ++i) {
        std::vector<std::string> refs;
        std::visit(overloaded{
                       [&](const mech::Deterministic& e) { refs = e.expr.variables(); },
                       [&](const mech::Bernoulli& e) { refs = e.prob.variables(); },
                       [&](const mech::Ordinal& e) { refs = e.score.variables(); },
                       [&](const mech::Categorical& e) { refs = e.model->inputs(); },
                       [&](const mech::Residual& e) { refs = e.model->inputs(); },
                       [](const auto&) {},
                   },
                   mechanisms_[i]);
        for (const auto& r : refs) {
            if (!graph_.contains(r) || !graph_.has_edge(r, graph_.name(i)))
                throw IdentifierError("mechanism of '" + graph_.name(i) + "' references '" + r +
                                      "', which is not one of its parents");
            compiled_.slots[i].push_back(graph_.index_of(r));
        }
        if (const auto* b = std::get_if<mech::Bernoulli>(&mechanisms_[i]); b && b->prob.uses_noise())
            throw ArgumentError("bernoulli probability of '" + graph_.name(i) + "' may not use the noise term");
    }
}

const Mechanism& Scm::mechanism(std::string_view node) const { return mechanisms_.at(graph_.index_of(node)); }

Dataset Scm::sample(std::size_t n, std::uint64_t seed) const {
    const std::size_t width = graph_.size();
    std::vector<std::vector<double>> columns(width, std::vector<double>(n));
    const std::size_t blocks = (n + kSampleBlock - 1) / kSampleBlock;

    parallel_for(blocks, [&](std::size_t b) {
        Rng rng = make_rng(derive_seed(seed, "sample", 0, b));
        std::vector<double> row(width, 0.0);
        std::vector<double> args;
        std::vector<double> joint;
        const std::size_t end = std::min(n, (b + 1) * kSampleBlock);
        for (std::size_t r = b * kSampleBlock; r < end; ++r) {
            for (std::size_t g = 0; g < groups_.size(); ++g) {
                joint.resize(group_nodes_[g].size());
                groups_[g]->draw(rng, joint);
                for (std::size_t k = 0; k < joint.size(); ++k)
                    if (group_nodes_[g][k] != kRetired) row[group_nodes_[g][k]] = joint[k];
            }
            for (const auto i : order_) {
                args.clear();
                for (const auto s : compiled_.slots[i]) args.push_back(row[s]);
                try {
                    row[i] = std::visit(
                        overloaded{
                            [&](const mech::Exogenous& e) { return e.noise.draw(rng); },
                            [&](const mech::Deterministic& e) {
                                const double u = e.noise ? e.noise->draw(rng) : 0.0;
                                return e.expr.evaluate(args, u);
                            },
                            [&](const mech::Bernoulli& e) {
                                const double p = e.prob.evaluate(args);
                                if (!(p >= -1e-12 && p <= 1.0 + 1e-12))
                                    throw DomainError("bernoulli probability " + format_double(p) + " outside [0, 1]");
                                return uniform01(rng) < p ? 1.0 : 0.0;
                            },
                            [&](const mech::Ordinal& e) {
                                const double z = e.score.evaluate(args) + e.noise.draw(rng);
                                return static_cast<double>(std::ranges::count_if(e.cuts, [&](double c) { return c < z; }));
                            },
                            [&](const mech::Categorical& e) {
                                const auto dist = e.model->distribution(args);
                                const double u = uniform01(rng);
                                double acc = 0.0;
                                for (const auto& [value, prob] : dist) {
                                    acc += prob;
                                    if (u < acc) return value;
                                }
                                return dist.back().first;
                            },
                            [&](const mech::Residual& e) {
                                const auto& res = *e.residuals;
                                return e.model->predict(args) + res[uniform_index(rng, res.size())];
                            },
                            [&](const mech::Empirical& e) {
                                return (*e.values)[uniform_index(rng, e.values->size())];
                            },
                            [](const mech::Constant& e) { return e.value; },
                            [&](const mech::Sampled&) { return row[i]; },
                        },
                        mechanisms_[i]);
                } catch (const DomainError& e) {
                    throw SamplingError("sampling node '" + graph_.name(i) + "' failed at row " + std::to_string(r) +
                                        ": " + e.what());
                }
            }
            for (std::size_t c = 0; c < width; ++c) columns[c][r] = row[c];
        }
    });
    return Dataset(graph_.nodes(), std::move(columns));
}

Scm Scm::intervene_atomic(const std::map<std::string, double, std::less<>>& assignments) const {
    NodeSet s;
    for (const auto& [name, value] : assignments) {
        graph_.index_of(name);
        if (!std::isfinite(value)) throw ArgumentError("intervention value for '" + name + "' is not finite");
        s.insert(name);
    }
    if (s.empty()) return *this;
    Scm out = *this;
    out.graph_ = do_surgery(graph_, s);
    for (const auto& [name, value] : assignments) out.mechanisms_[graph_.index_of(name)] = mech::Constant{value};
    out.compile();
    return out;
}

Scm Scm::intervene_stochastic(const NodeSet& s, std::shared_ptr<const Sampler> q) const {
    if (!q) throw ArgumentError("intervene_stochastic needs a sampler");
    const NodeSet provided(q->nodes().begin(), q->nodes().end());
    if (provided != s || provided.size() != q->nodes().size())
        throw ArgumentError("sampler draws {" + join(q->nodes(), ", ") + "} but the intervened set differs");
    if (s.empty()) return *this;
    Scm out = *this;
    out.graph_ = do_surgery(graph_, s);
    const std::size_t group = out.groups_.size();
    std::vector<std::size_t> nodes;
    for (std::size_t k = 0; k < q->nodes().size(); ++k) {
        const auto i = graph_.index_of(q->nodes()[k]);
        nodes.push_back(i);
        out.mechanisms_[i] = mech::Sampled{group, k};
    }
    // A node redrawn by a newer group must not be overwritten by an older one.
    for (auto& members : out.group_nodes_)
        for (auto& i : members)
            if (std::ranges::find(nodes, i) != nodes.end()) i = kRetired;
    out.groups_.push_back(std::move(q));
    out.group_nodes_.push_back(std::move(nodes));
    out.compile();
    return out;
}

std::shared_ptr<const Sampler> marginal_sampler(const Scm& m, const NodeSet& s, std::size_t n_pool,
                                                std::uint64_t seed, MarginalKind kind) {
    for (const auto& n : s)
        if (n == m.graph().target()) throw ArgumentError("marginal sampler set contains the target");
    if (n_pool == 0) throw ArgumentError("marginal sampler pool must be non-empty");
    const Dataset pool = m.sample(n_pool, derive_seed(seed, "marginal-pool"));
    std::vector<std::string> nodes(s.begin(), s.end());
    if (kind == MarginalKind::Independent) return std::make_shared<IndependentMarginalSampler>(pool, std::move(nodes));
    return std::make_shared<EmpiricalJointSampler>(pool, std::move(nodes));
}

// ---------------------------------------------------------------- linear SCMs

LinearScm random_linear_scm(std::size_t n_vars, double edge_prob, const NoiseSpec& noise, std::uint64_t seed) {
    if (n_vars < 2) throw ArgumentError("a linear SCM needs at least 2 variables");
    if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) throw ArgumentError("edge probability must lie in [0, 1]");
    Rng rng = make_rng(derive_seed(seed, "linear-scm"));

    std::vector<std::string> names{"Y"};
    for (std::size_t i = 1; i < n_vars; ++i) names.push_back("X" + std::to_string(i));

    std::vector<std::size_t> perm(n_vars);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n_vars - 1; i > 0; --i) std::swap(perm[i], perm[uniform_index(rng, i + 1)]);

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_vars, n_vars);
    std::vector<Edge> edges;
    std::map<Edge, double> weights;
    for (std::size_t p = 0; p < n_vars; ++p) {
        for (std::size_t c = p + 1; c < n_vars; ++c) {
            if (!(uniform01(rng) < edge_prob)) continue;
            const double w = standard_normal(rng);
            const auto from = perm[p];
            const auto to = perm[c];
            a(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from)) = w;
            Edge e{names[from], names[to]};
            edges.push_back(e);
            weights[e] = w;
        }
    }
    CausalGraph g(names, edges, "Y");

    std::map<std::string, Mechanism, std::less<>> mechanisms;
    for (std::size_t i = 0; i < n_vars; ++i) {
        std::string text;
        for (std::size_t j = 0; j < n_vars; ++j) {
            const double w = a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (w == 0.0) continue;
            text += "(" + format_double(w) + ") * " + names[j] + " + ";
        }
        if (text.empty())
            mechanisms.insert_or_assign(names[i], mech::Exogenous{noise});
        else
            mechanisms.insert_or_assign(names[i], mech::Deterministic{Expression::parse(text + "U"), noise});
    }
    WeightedGraph wg(g, std::move(weights));
    return LinearScm{Scm(g, std::move(mechanisms)), std::move(wg), std::move(a), noise};
}

LinearDraw sample_linear(const LinearScm& m, std::size_t n, std::uint64_t seed) {
    const auto& g = m.scm.graph();
    const auto width = static_cast<Eigen::Index>(g.size());
    std::vector<std::size_t> order;
    for (const auto& name : g.topological_order()) order.push_back(g.index_of(name));

    LinearDraw out{Eigen::MatrixXd(n, width), Eigen::MatrixXd(n, width)};
    Rng rng = make_rng(derive_seed(seed, "linear-sample"));
    for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(n); ++r) {
        for (Eigen::Index c = 0; c < width; ++c) out.u(r, c) = m.noise.draw(rng);
        for (const auto i : order) {
            const auto ii = static_cast<Eigen::Index>(i);
            double v = out.u(r, ii);
            for (Eigen::Index j = 0; j < width; ++j)
                if (m.a(ii, j) != 0.0) v += m.a(ii, j) * out.v(r, j);
            out.v(r, ii) = v;
        }
    }
    return out;
}

// ---------------------------------------------------------------- fitting

Scm fit_scm_from_data(const CausalGraph& g, const Dataset& d, const EstimatorSpec& spec) {
    std::vector<std::string> missing;
    for (const auto& n : g.nodes())
        if (!d.has(n)) missing.push_back(n);
    if (!missing.empty()) throw ArgumentError("dataset is missing columns: " + join(missing, ", "));

    std::map<std::string, Mechanism, std::less<>> mechanisms;
    for (const auto& node : g.nodes()) {
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < d.rows(); ++r)
            if (!d.has_interventions() || d.interventions()[r] != node) rows.push_back(r);
        if (rows.empty()) throw FitError("node '" + node + "' has no usable (non-intervened) rows");

        const auto parents = g.parents(node);
        const auto& col = d.column(d.index_of(node));
        if (parents.empty()) {
            auto values = std::make_shared<std::vector<double>>();
            values->reserve(rows.size());
            for (auto r : rows) values->push_back(col[r]);
            mechanisms.insert_or_assign(node, mech::Empirical{std::move(values)});
            continue;
        }
        auto model = std::make_shared<const FittedModel>(fit(spec, d, parents, node, rows, true));
        if (spec.kind == EstimatorKind::DiscreteCpt) {
            mechanisms.insert_or_assign(node, mech::Categorical{std::move(model)});
            continue;
        }
        auto residuals = std::make_shared<std::vector<double>>();
        residuals->reserve(rows.size());
        std::vector<std::size_t> parent_cols;
        for (const auto& p : parents) parent_cols.push_back(d.index_of(p));
        std::vector<double> x(parents.size());
        for (auto r : rows) {
            for (std::size_t k = 0; k < parents.size(); ++k) x[k] = d.at(r, parent_cols[k]);
            residuals->push_back(col[r] - model->predict(x));
        }
        mechanisms.insert_or_assign(node, mech::Residual{std::move(model), std::move(residuals)});
    }
    return Scm(g, std::move(mechanisms));
}

} // namespace ccshap
