#include "ccshap/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <sstream>

#include "ccshap/errors.hpp"
#include "ccshap/util.hpp"

namespace ccshap {

namespace {

std::vector<std::size_t> indices_of(const CausalGraph& g, const NodeSet& s) {
    std::vector<std::size_t> out;
    out.reserve(s.size());
    for (const auto& n : s) out.push_back(g.index_of(n));
    return out;
}

NodeSet names_of(const CausalGraph& g, const std::vector<char>& mask) {
    NodeSet out;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) out.insert(g.name(i));
    return out;
}

// Nodes reachable from `start` following parent (up) or child (down) links.
std::vector<char> reach(const CausalGraph& g, const std::vector<std::size_t>& start, bool up) {
    std::vector<char> seen(g.size(), 0);
    std::vector<std::size_t> stack;
    for (auto s : start) {
        const auto& next = up ? g.parent_indices(s) : g.child_indices(s);
        stack.insert(stack.end(), next.begin(), next.end());
    }
    while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        if (seen[v]) continue;
        seen[v] = 1;
        const auto& next = up ? g.parent_indices(v) : g.child_indices(v);
        stack.insert(stack.end(), next.begin(), next.end());
    }
    return seen;
}

void require_disjoint(const NodeSet& a, const NodeSet& b, std::string_view what) {
    for (const auto& n : a)
        if (b.count(n)) throw ArgumentError(std::string(what) + ": node '" + n + "' appears in two sets");
}

void require_feature(const CausalGraph& g, std::string_view xj) {
    g.index_of(xj);
    if (xj == g.target()) throw ArgumentError("'" + std::string(xj) + "' is the target, not a feature");
}

void require_context(const CausalGraph& g, std::string_view xj, const NodeSet& s) {
    require_feature(g, xj);
    for (const auto& n : s) {
        require_feature(g, n);
        if (n == xj) throw ArgumentError("context contains the feature '" + n + "' itself");
    }
}

} // namespace

// ---------------------------------------------------------------- CausalGraph

CausalGraph::CausalGraph(std::vector<std::string> nodes, const std::vector<Edge>& edges, std::string target)
    : names_(std::move(nodes)) {
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i].empty()) throw IdentifierError("node names must be non-empty");
        if (!index_.emplace(names_[i], i).second) throw IdentifierError("duplicate node '" + names_[i] + "'");
    }
    parents_.assign(names_.size(), {});
    children_.assign(names_.size(), {});
    for (const auto& e : edges) {
        const auto p = index_of(e.parent);
        const auto c = index_of(e.child);
        if (p == c) throw CycleError("self loop on '" + e.parent + "'");
        if (std::find(children_[p].begin(), children_[p].end(), c) != children_[p].end())
            throw ArgumentError("duplicate edge " + e.parent + " -> " + e.child);
        children_[p].push_back(c);
        parents_[c].push_back(p);
    }
    for (auto& v : parents_) std::sort(v.begin(), v.end());
    for (auto& v : children_) std::sort(v.begin(), v.end());
    target_ = index_of(target);

    // Cycle check with an explicit DFS so the offending cycle can be reported.
    std::vector<int> color(names_.size(), 0);
    std::vector<std::size_t> stack_path;
    std::function<void(std::size_t)> visit = [&](std::size_t v) {
        color[v] = 1;
        stack_path.push_back(v);
        for (auto c : children_[v]) {
            if (color[c] == 1) {
                auto it = std::find(stack_path.begin(), stack_path.end(), c);
                std::vector<std::string> cyc;
                for (; it != stack_path.end(); ++it) cyc.push_back(names_[*it]);
                cyc.push_back(names_[c]);
                throw CycleError("cycle detected: " + join(cyc, " -> "));
            }
            if (color[c] == 0) visit(c);
        }
        stack_path.pop_back();
        color[v] = 2;
    };
    for (std::size_t v = 0; v < names_.size(); ++v)
        if (color[v] == 0) visit(v);
}

std::vector<std::string> CausalGraph::features() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (i != target_) out.push_back(names_[i]);
    return out;
}

bool CausalGraph::contains(std::string_view name) const { return index_.find(name) != index_.end(); }

std::size_t CausalGraph::index_of(std::string_view name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw IdentifierError("unknown node '" + std::string(name) + "'");
    return it->second;
}

std::vector<std::string> CausalGraph::parents(std::string_view name) const {
    std::vector<std::string> out;
    for (auto p : parents_[index_of(name)]) out.push_back(names_[p]);
    return out;
}

std::vector<std::string> CausalGraph::children(std::string_view name) const {
    std::vector<std::string> out;
    for (auto c : children_[index_of(name)]) out.push_back(names_[c]);
    return out;
}

bool CausalGraph::has_edge(std::string_view parent, std::string_view child) const {
    const auto& ch = children_[index_of(parent)];
    return std::binary_search(ch.begin(), ch.end(), index_of(child));
}

std::vector<Edge> CausalGraph::edges() const {
    std::vector<Edge> out;
    for (std::size_t p = 0; p < names_.size(); ++p)
        for (auto c : children_[p]) out.push_back({names_[p], names_[c]});
    return out;
}

std::size_t CausalGraph::edge_count() const {
    std::size_t n = 0;
    for (const auto& c : children_) n += c.size();
    return n;
}

std::vector<std::string> CausalGraph::topological_order() const {
    std::vector<std::size_t> indegree(names_.size());
    auto by_name = [this](std::size_t a, std::size_t b) { return names_[a] > names_[b]; };
    std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(by_name)> ready(by_name);
    for (std::size_t v = 0; v < names_.size(); ++v) {
        indegree[v] = parents_[v].size();
        if (indegree[v] == 0) ready.push(v);
    }
    std::vector<std::string> order;
    order.reserve(names_.size());
    while (!ready.empty()) {
        const auto v = ready.top();
        ready.pop();
        order.push_back(names_[v]);
        for (auto c : children_[v])
            if (--indegree[c] == 0) ready.push(c);
    }
    return order;
}

CausalGraph CausalGraph::with_target(std::string target) const { return CausalGraph(names_, edges(), std::move(target)); }

// -------------------------------------------------------------- WeightedGraph

WeightedGraph::WeightedGraph(CausalGraph graph, std::map<Edge, double> weights)
    : graph_(std::move(graph)), weights_(std::move(weights)) {
    if (weights_.size() != graph_.edge_count())
        throw ArgumentError("weighted graph needs exactly one weight per edge");
    for (const auto& [e, w] : weights_) {
        if (!graph_.has_edge(e.parent, e.child))
            throw ArgumentError("weight given for missing edge " + e.parent + " -> " + e.child);
        if (!std::isfinite(w)) throw ArgumentError("non-finite weight on " + e.parent + " -> " + e.child);
    }
}

double WeightedGraph::weight(std::string_view parent, std::string_view child) const {
    auto it = weights_.find(Edge{std::string(parent), std::string(child)});
    if (it == weights_.end())
        throw IdentifierError("no edge " + std::string(parent) + " -> " + std::string(child));
    return it->second;
}

// ----------------------------------------------------------------------- Path

bool Path::contains(std::string_view node) const { return position(node).has_value(); }

std::optional<std::size_t> Path::position(std::string_view node) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i] == node) return i;
    return std::nullopt;
}

bool Path::is_collider(std::size_t i) const {
    if (i == 0 || i + 1 >= nodes.size()) return false;
    return steps[i - 1] == Step::Forward && steps[i] == Step::Backward;
}

std::vector<std::string> Path::colliders() const {
    std::vector<std::string> out;
    for (std::size_t i = 1; i + 1 < nodes.size(); ++i)
        if (is_collider(i)) out.push_back(nodes[i]);
    return out;
}

std::string Path::to_string() const {
    std::string out = nodes.empty() ? std::string() : nodes.front();
    for (std::size_t i = 0; i < steps.size(); ++i) {
        out += steps[i] == Step::Forward ? " -> " : " <- ";
        out += nodes[i + 1];
    }
    return out;
}

// ------------------------------------------------------------ structural ops

NodeSet ancestors(const CausalGraph& g, const NodeSet& s) {
    const auto start = indices_of(g, s);
    auto mask = reach(g, start, true);
    for (auto v : start) mask[v] = 0;
    return names_of(g, mask);
}

NodeSet descendants(const CausalGraph& g, const NodeSet& s) {
    const auto start = indices_of(g, s);
    auto mask = reach(g, start, false);
    for (auto v : start) mask[v] = 0;
    return names_of(g, mask);
}

std::vector<Path> enumerate_paths(const CausalGraph& g, std::string_view a, std::string_view b, std::size_t limit) {
    const auto ia = g.index_of(a);
    const auto ib = g.index_of(b);
    if (ia == ib) throw ArgumentError("path endpoints must differ");

    // Undirected neighbours sorted by name, so DFS yields lexicographic order.
    std::vector<std::vector<std::pair<std::size_t, Step>>> nbrs(g.size());
    for (std::size_t v = 0; v < g.size(); ++v) {
        for (auto c : g.child_indices(v)) nbrs[v].emplace_back(c, Step::Forward);
        for (auto p : g.parent_indices(v)) nbrs[v].emplace_back(p, Step::Backward);
        std::sort(nbrs[v].begin(), nbrs[v].end(),
                  [&](const auto& x, const auto& y) { return g.name(x.first) < g.name(y.first); });
    }

    std::vector<Path> out;
    std::vector<char> on_path(g.size(), 0);
    std::vector<std::size_t> node_stack{ia};
    std::vector<Step> step_stack;
    on_path[ia] = 1;

    std::function<void(std::size_t)> dfs = [&](std::size_t v) {
        for (const auto& [w, step] : nbrs[v]) {
            if (on_path[w]) continue;
            node_stack.push_back(w);
            step_stack.push_back(step);
            if (w == ib) {
                if (out.size() >= limit)
                    throw ResourceError("more than " + std::to_string(limit) + " paths between '" + std::string(a) +
                                        "' and '" + std::string(b) + "'");
                Path p;
                for (auto n : node_stack) p.nodes.push_back(g.name(n));
                p.steps = step_stack;
                out.push_back(std::move(p));
            } else {
                on_path[w] = 1;
                dfs(w);
                on_path[w] = 0;
            }
            node_stack.pop_back();
            step_stack.pop_back();
        }
    };
    dfs(ia);
    return out;
}

void validate_path(const CausalGraph& g, const Path& p) {
    if (p.nodes.size() < 2 || p.steps.size() + 1 != p.nodes.size())
        throw ArgumentError("malformed path '" + p.to_string() + "'");
    NodeSet seen;
    for (const auto& n : p.nodes) {
        g.index_of(n);
        if (!seen.insert(n).second) throw ArgumentError("path repeats node '" + n + "'");
    }
    for (std::size_t i = 0; i < p.steps.size(); ++i) {
        const bool ok = p.steps[i] == Step::Forward ? g.has_edge(p.nodes[i], p.nodes[i + 1])
                                                    : g.has_edge(p.nodes[i + 1], p.nodes[i]);
        if (!ok) throw ArgumentError("path step " + std::to_string(i) + " of '" + p.to_string() + "' is not an edge");
    }
}

bool is_blocked(const CausalGraph& g, const Path& p, const NodeSet& z) {
    validate_path(g, p);
    if (z.count(p.front()) || z.count(p.back())) throw ArgumentError("path endpoints must not be conditioned on");
    NodeSet opened = ancestors(g, z);
    opened.insert(z.begin(), z.end());
    for (std::size_t i = 1; i + 1 < p.nodes.size(); ++i) {
        if (p.is_collider(i)) {
            if (!opened.count(p.nodes[i])) return true;
        } else if (z.count(p.nodes[i])) {
            return true;
        }
    }
    return false;
}

bool d_separated(const CausalGraph& g, const NodeSet& s1, const NodeSet& s2, const NodeSet& z) {
    require_disjoint(s1, s2, "d_separated");
    require_disjoint(s1, z, "d_separated");
    require_disjoint(s2, z, "d_separated");
    const auto i1 = indices_of(g, s1);
    const auto i2 = indices_of(g, s2);
    const auto iz = indices_of(g, z);
    if (i1.empty() || i2.empty()) return true;

    std::vector<std::size_t> all = i1;
    all.insert(all.end(), i2.begin(), i2.end());
    all.insert(all.end(), iz.begin(), iz.end());
    auto relevant = reach(g, all, true);
    for (auto v : all) relevant[v] = 1;

    // Moral graph of the ancestral subgraph.
    std::vector<std::vector<std::size_t>> adj(g.size());
    for (std::size_t v = 0; v < g.size(); ++v) {
        if (!relevant[v]) continue;
        const auto& ps = g.parent_indices(v);
        for (std::size_t a = 0; a < ps.size(); ++a) {
            adj[v].push_back(ps[a]);
            adj[ps[a]].push_back(v);
            for (std::size_t b = a + 1; b < ps.size(); ++b) {
                adj[ps[a]].push_back(ps[b]);
                adj[ps[b]].push_back(ps[a]);
            }
        }
    }

    std::vector<char> blocked(g.size(), 0);
    for (auto v : iz) blocked[v] = 1;
    std::vector<char> target(g.size(), 0);
    for (auto v : i2) target[v] = 1;
    std::vector<char> seen(g.size(), 0);
    std::deque<std::size_t> queue(i1.begin(), i1.end());
    for (auto v : i1) seen[v] = 1;
    while (!queue.empty()) {
        const auto v = queue.front();
        queue.pop_front();
        if (target[v]) return false;
        for (auto w : adj[v]) {
            if (seen[w] || blocked[w]) continue;
            seen[w] = 1;
            queue.push_back(w);
        }
    }
    return true;
}

std::vector<Path> backdoor_paths(const CausalGraph& g, const NodeSet& s, const NodeSet& b, std::size_t limit) {
    require_disjoint(s, b, "backdoor_paths");
    std::vector<Path> out;
    for (const auto& from : s) {
        if (g.parent_indices(g.index_of(from)).empty()) continue;
        for (const auto& to : b) {
            for (auto& p : enumerate_paths(g, from, to, limit))
                if (p.steps.front() == Step::Backward) out.push_back(std::move(p));
        }
    }
    return out;
}

CausalGraph do_surgery(const CausalGraph& g, const NodeSet& s) {
    for (const auto& n : s) {
        g.index_of(n);
        if (n == g.target()) throw ArgumentError("cannot intervene on the target '" + n + "'");
    }
    std::vector<Edge> kept;
    for (auto& e : g.edges())
        if (!s.count(e.child)) kept.push_back(std::move(e));
    return CausalGraph(g.nodes(), kept, g.target());
}

PathContextEffect classify_path_context(const CausalGraph& g, const Path& p, std::string_view k) {
    validate_path(g, p);
    g.index_of(k);
    if (p.front() == k || p.back() == k) throw ArgumentError("context node '" + std::string(k) + "' is a path endpoint");
    const bool ends_at_target = p.front() == g.target() || p.back() == g.target();
    if (!ends_at_target) throw ArgumentError("path '" + p.to_string() + "' does not connect a feature with the target");

    std::vector<PathContextRow> matches;
    if (auto pos = p.position(k)) {
        const auto in = p.steps[*pos - 1];
        const auto out = p.steps[*pos];
        if (in == out) matches.push_back(PathContextRow::ChainThroughK);
        if (in == Step::Backward && out == Step::Forward) matches.push_back(PathContextRow::ForkAtK);
        if (p.is_collider(*pos)) matches.push_back(PathContextRow::ColliderAtK);
    } else {
        const auto an_k = ancestors(g, NodeSet{std::string(k)});
        for (const auto& c : p.colliders()) {
            if (an_k.count(c)) {
                matches.push_back(PathContextRow::ColliderAncestorOfK);
                break;
            }
        }
    }
    if (matches.empty()) matches.push_back(PathContextRow::Unaffected);

    PathContextEffect eff{matches.front(), matches, {}, {}};
    switch (eff.row) {
    case PathContextRow::ChainThroughK:
    case PathContextRow::ForkAtK:
        eff.conditioning = {BlockState::PotentiallyUnblocked, BlockState::Blocked};
        eff.intervention = {BlockState::PotentiallyUnblocked, BlockState::Blocked};
        break;
    case PathContextRow::ColliderAtK:
    case PathContextRow::ColliderAncestorOfK:
        eff.conditioning = {BlockState::Blocked, BlockState::PotentiallyUnblocked};
        eff.intervention = {BlockState::Blocked, BlockState::Blocked};
        break;
    case PathContextRow::Unaffected:
        eff.conditioning = {BlockState::Unchanged, BlockState::Unchanged};
        eff.intervention = {BlockState::Unchanged, BlockState::Unchanged};
        break;
    }
    return eff;
}

std::string to_string(PathContextRow row) {
    switch (row) {
    case PathContextRow::ChainThroughK: return "chain-through-k";
    case PathContextRow::ForkAtK: return "fork-at-k";
    case PathContextRow::ColliderAtK: return "collider-at-k";
    case PathContextRow::ColliderAncestorOfK: return "collider-ancestor-of-k";
    case PathContextRow::Unaffected: return "unaffected";
    }
    return "?";
}

std::string to_string(BlockState state) {
    switch (state) {
    case BlockState::Blocked: return "blocked";
    case BlockState::Unblocked: return "unblocked";
    case BlockState::PotentiallyUnblocked: return "potentially-unblocked";
    case BlockState::Unchanged: return "no-effect";
    }
    return "?";
}

std::optional<double> collider_impact(const WeightedGraph& wg, std::string_view x1, std::string_view x2,
                                      std::string_view y) {
    const auto& g = wg.graph();
    if (x1 == x2 || x1 == y || x2 == y) throw ArgumentError("collider_impact needs three distinct nodes");
    g.index_of(x2);
    double cp = 0.0;
    double up = 0.0;
    for (const auto& p : enumerate_paths(g, x1, y)) {
        if (!p.contains(x2)) continue;
        double prod = 1.0;
        for (std::size_t i = 0; i < p.steps.size(); ++i) {
            prod *= p.steps[i] == Step::Forward ? wg.weight(p.nodes[i], p.nodes[i + 1])
                                                : wg.weight(p.nodes[i + 1], p.nodes[i]);
        }
        const auto cols = p.colliders();
        if (cols.empty())
            up += prod;
        else if (cols.size() == 1 && cols.front() == x2)
            cp += prod;
    }
    const double denom = std::abs(cp) + std::abs(up);
    if (denom == 0.0) return std::nullopt;
    return std::abs(cp) / denom;
}

bool lemma1_applies(const CausalGraph& g, std::string_view xj, const NodeSet& s) {
    require_context(g, xj, s);
    const auto desc = descendants(g, s);
    return !desc.count(g.target()) && !desc.count(xj);
}

bool lemma2_applies(const CausalGraph& g, std::string_view xj, const NodeSet& s) {
    require_context(g, xj, s);
    if (s.empty()) return true;

    const NodeSet ends{std::string(xj), g.target()};
    bool open_backdoor = false;
    for (const auto& p : backdoor_paths(g, s, ends)) {
        if (!is_blocked(g, p, {})) {
            open_backdoor = true;
            break;
        }
    }
    if (!open_backdoor) return true;

    // Purely causal setup.
    NodeSet guarded = s;
    guarded.insert(std::string(xj));
    const auto desc_y = descendants(g, NodeSet{g.target()});
    for (const auto& n : guarded)
        if (desc_y.count(n)) return false;

    // Ancestors of the target along directed paths that avoid xj and s.
    std::vector<char> reaches_y(g.size(), 0);
    std::vector<std::size_t> stack{g.target_index()};
    while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        for (auto p : g.parent_indices(v)) {
            if (reaches_y[p] || guarded.count(g.name(p))) continue;
            reaches_y[p] = 1;
            stack.push_back(p);
        }
    }
    const auto an_guarded = ancestors(g, guarded);
    for (const auto& h : an_guarded) {
        if (guarded.count(h) || h == g.target()) continue;
        if (reaches_y[g.index_of(h)]) return false;
    }
    return true;
}

std::string to_adjacency_text(const CausalGraph& g) {
    std::ostringstream os;
    for (const auto& e : g.edges()) os << e.parent << " -> " << e.child << '\n';
    return os.str();
}

std::string to_adjacency_text(const WeightedGraph& wg) {
    std::ostringstream os;
    for (const auto& e : wg.graph().edges())
        os << e.parent << " -> " << e.child << ' ' << format_double(wg.weight(e.parent, e.child)) << '\n';
    return os.str();
}

} // namespace ccshap
