#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ccshap/graph.hpp"
#include "ccshap/rng.hpp"

namespace oracle {

// Adjacency-matrix view of a graph, independent of the library's traversal code.
struct Dag {
    std::vector<std::string> names;
    std::vector<std::vector<bool>> edge;  // edge[a][b]: a -> b

    explicit Dag(const ccshap::CausalGraph& g) : names(g.nodes()), edge(g.size(), std::vector<bool>(g.size())) {
        for (const auto& e : g.edges()) edge[g.index_of(e.parent)][g.index_of(e.child)] = true;
    }
    std::size_t idx(const std::string& n) const { return std::ranges::find(names, n) - names.begin(); }
    std::size_t size() const { return names.size(); }
};

// reach[a][b]: a directed path of length >= 1 leads from a to b (Warshall).
inline std::vector<std::vector<bool>> transitive_closure(const Dag& d) {
    auto r = d.edge;
    const auto n = d.size();
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (r[i][k] && r[k][j]) r[i][j] = true;
    return r;
}

// Every simple path a..b as node index sequences (undirected walk over the skeleton).
inline void paths_from(const Dag& d, std::size_t cur, std::size_t b, std::vector<std::size_t>& stack,
                       std::vector<bool>& on, std::vector<std::vector<std::size_t>>& out) {
    if (cur == b) {
        out.push_back(stack);
        return;
    }
    for (std::size_t nx = 0; nx < d.size(); ++nx) {
        if (on[nx] || !(d.edge[cur][nx] || d.edge[nx][cur])) continue;
        on[nx] = true;
        stack.push_back(nx);
        paths_from(d, nx, b, stack, on, out);
        stack.pop_back();
        on[nx] = false;
    }
}

inline std::vector<std::vector<std::size_t>> all_paths(const Dag& d, std::size_t a, std::size_t b) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> stack{a};
    std::vector<bool> on(d.size());
    on[a] = true;
    paths_from(d, a, b, stack, on, out);
    return out;
}

// Classical blocking rule: a non-collider in z blocks; a collider blocks
// unless it or one of its descendants is in z.
inline bool blocked(const Dag& d, const std::vector<std::vector<bool>>& reach, const std::vector<std::size_t>& p,
                    const std::set<std::size_t>& z) {
    for (std::size_t i = 1; i + 1 < p.size(); ++i) {
        const bool collider = d.edge[p[i - 1]][p[i]] && d.edge[p[i + 1]][p[i]];
        if (collider) {
            bool opened = z.contains(p[i]);
            for (auto q : z) opened = opened || reach[p[i]][q];
            if (!opened) return true;
        } else if (z.contains(p[i])) {
            return true;
        }
    }
    return false;
}

inline bool d_separated(const ccshap::CausalGraph& g, const ccshap::NodeSet& a, const ccshap::NodeSet& b,
                        const ccshap::NodeSet& z) {
    const Dag d(g);
    const auto reach = transitive_closure(d);
    std::set<std::size_t> zi;
    for (const auto& n : z) zi.insert(d.idx(n));
    for (const auto& x : a)
        for (const auto& y : b) {
            if (x == y) return false;
            for (const auto& p : all_paths(d, d.idx(x), d.idx(y)))
                if (!blocked(d, reach, p, zi)) return false;
        }
    return true;
}

// Random DAG over n nodes named V0..V{n-1}: edges only from lower to higher
// position of a random permutation.
inline ccshap::CausalGraph random_dag(std::size_t n, double p, ccshap::Rng& rng) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("V" + std::to_string(i));
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<ccshap::Edge> edges;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            if (ccshap::uniform01(rng) < p) edges.push_back({names[perm[a]], names[perm[b]]});
    return ccshap::CausalGraph(names, edges, names[0]);
}

// Exact Shapley values by averaging marginal contributions over all feature
// orderings. `value(mask)` is the characteristic function.
template <typename F>
std::vector<double> shapley_by_permutation(std::size_t n, F value) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::vector<double> phi(n, 0.0);
    std::size_t count = 0;
    do {
        unsigned mask = 0;
        for (auto j : order) {
            const double before = value(mask);
            mask |= 1U << j;
            phi[j] += value(mask) - before;
        }
        ++count;
    } while (std::next_permutation(order.begin(), order.end()));
    for (auto& v : phi) v /= static_cast<double>(count);
    return phi;
}

}  // namespace oracle
