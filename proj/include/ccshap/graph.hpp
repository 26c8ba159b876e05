#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ccshap {

using NodeSet = std::set<std::string, std::less<>>;

struct Edge {
    std::string parent;
    std::string child;

    auto operator<=>(const Edge&) const = default;
};

/// A directed acyclic graph over named nodes with one designated target.
/// Immutable after construction; every query is const.
class CausalGraph {
public:
    CausalGraph() = default;

    /// Throws IdentifierError for empty, duplicate or unknown names and
    /// CycleError (message contains the cycle) when the edges are cyclic.
    CausalGraph(std::vector<std::string> nodes, const std::vector<Edge>& edges, std::string target);

    const std::vector<std::string>& nodes() const noexcept { return names_; }
    const std::string& target() const { return names_.at(target_); }
    std::size_t target_index() const noexcept { return target_; }

    /// All nodes except the target, in declaration order.
    std::vector<std::string> features() const;

    std::size_t size() const noexcept { return names_.size(); }
    bool contains(std::string_view name) const;
    std::size_t index_of(std::string_view name) const;
    const std::string& name(std::size_t index) const { return names_.at(index); }

    const std::vector<std::size_t>& parent_indices(std::size_t index) const { return parents_.at(index); }
    const std::vector<std::size_t>& child_indices(std::size_t index) const { return children_.at(index); }
    std::vector<std::string> parents(std::string_view name) const;
    std::vector<std::string> children(std::string_view name) const;
    bool has_edge(std::string_view parent, std::string_view child) const;

    /// Edges ordered by (parent position, child position).
    std::vector<Edge> edges() const;
    std::size_t edge_count() const;

    /// Parents before children; ties broken by node name.
    std::vector<std::string> topological_order() const;

    CausalGraph with_target(std::string target) const;

private:
    std::vector<std::string> names_;
    std::map<std::string, std::size_t, std::less<>> index_;
    std::vector<std::vector<std::size_t>> parents_;
    std::vector<std::vector<std::size_t>> children_;
    std::size_t target_ = 0;
};

/// Graph plus a real coefficient on every edge.
class WeightedGraph {
public:
    WeightedGraph() = default;
    WeightedGraph(CausalGraph graph, std::map<Edge, double> weights);

    const CausalGraph& graph() const noexcept { return graph_; }
    double weight(std::string_view parent, std::string_view child) const;
    const std::map<Edge, double>& weights() const noexcept { return weights_; }

private:
    CausalGraph graph_;
    std::map<Edge, double> weights_;
};

enum class Step { Forward, Backward };

/// A simple path. steps[i] describes the edge between nodes[i] and
/// nodes[i+1]: Forward means nodes[i] -> nodes[i+1].
struct Path {
    std::vector<std::string> nodes;
    std::vector<Step> steps;

    const std::string& front() const { return nodes.front(); }
    const std::string& back() const { return nodes.back(); }
    std::size_t length() const noexcept { return steps.size(); }
    bool contains(std::string_view node) const;
    /// Position of node on the path, if present.
    std::optional<std::size_t> position(std::string_view node) const;
    /// True when interior position i has two arrowheads pointing into it.
    bool is_collider(std::size_t i) const;
    std::vector<std::string> colliders() const;
    std::string to_string() const;

    bool operator==(const Path&) const = default;
};

inline constexpr std::size_t kDefaultPathLimit = 10000;

NodeSet ancestors(const CausalGraph& g, const NodeSet& s);
NodeSet descendants(const CausalGraph& g, const NodeSet& s);

/// Every simple path between a and b, in lexicographic order of node
/// sequences. Throws ResourceError when more than `limit` paths exist.
std::vector<Path> enumerate_paths(const CausalGraph& g, std::string_view a, std::string_view b,
                                  std::size_t limit = kDefaultPathLimit);

/// Throws ArgumentError if the path is not a valid path of g or an endpoint is in z.
void validate_path(const CausalGraph& g, const Path& p);
bool is_blocked(const CausalGraph& g, const Path& p, const NodeSet& z);

/// d-separation via the moralized ancestral graph.
bool d_separated(const CausalGraph& g, const NodeSet& s1, const NodeSet& s2, const NodeSet& z);

/// Paths from a member of s to a member of b whose first edge points into s.
std::vector<Path> backdoor_paths(const CausalGraph& g, const NodeSet& s, const NodeSet& b,
                                 std::size_t limit = kDefaultPathLimit);

/// Remove every edge into a member of s.
CausalGraph do_surgery(const CausalGraph& g, const NodeSet& s);

enum class PathContextRow { ChainThroughK, ForkAtK, ColliderAtK, ColliderAncestorOfK, Unaffected };

enum class BlockState { Blocked, Unblocked, PotentiallyUnblocked, Unchanged };

struct BlockTransition {
    BlockState before;
    BlockState after;
};

struct PathContextEffect {
    PathContextRow row;
    /// Every row whose condition holds, in table order; row == matches.front().
    std::vector<PathContextRow> matches;
    BlockTransition conditioning;
    BlockTransition intervention;
};

PathContextEffect classify_path_context(const CausalGraph& g, const Path& p, std::string_view k);

std::string to_string(PathContextRow row);
std::string to_string(BlockState state);

/// |CP| / (|CP| + |UP|) over x1-y paths through x2; nullopt when both sums vanish.
std::optional<double> collider_impact(const WeightedGraph& wg, std::string_view x1, std::string_view x2,
                                      std::string_view y);

/// No directed path from any member of s to the target or to xj.
bool lemma1_applies(const CausalGraph& g, std::string_view xj, const NodeSet& s);

/// Either no unblocked backdoor paths from s to xj or the target, or a purely
/// causal setup (target not an ancestor of xj or s, no confounder of xj or s
/// with the target).
bool lemma2_applies(const CausalGraph& g, std::string_view xj, const NodeSet& s);

/// One `parent -> child` line per edge, in edges() order.
std::string to_adjacency_text(const CausalGraph& g);
/// One `parent -> child weight` line per edge.
std::string to_adjacency_text(const WeightedGraph& wg);

} // namespace ccshap
