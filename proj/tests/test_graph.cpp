#include <algorithm>

#include "ccshap/errors.hpp"
#include "ccshap/graph.hpp"
#include "ccshap/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace ccshap;

namespace {

CausalGraph breakfast_graph() { return CausalGraph({"C", "G", "Y"}, {{"C", "G"}, {"Y", "G"}}, "Y"); }

CausalGraph diabetes_graph() {
    return CausalGraph({"B", "G", "H", "Y"}, {{"B", "Y"}, {"B", "H"}, {"B", "G"}, {"Y", "H"}, {"Y", "G"}, {"H", "G"}},
                       "Y");
}

Path path_of(const CausalGraph& g, std::vector<std::string> nodes) {
    Path p;
    p.nodes = std::move(nodes);
    for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i)
        p.steps.push_back(g.has_edge(p.nodes[i], p.nodes[i + 1]) ? Step::Forward : Step::Backward);
    return p;
}

NodeSet subset(const std::vector<std::string>& names, unsigned mask) {
    NodeSet s;
    for (std::size_t i = 0; i < names.size(); ++i)
        if (mask >> i & 1U) s.insert(names[i]);
    return s;
}

}  // namespace

TEST_CASE("graph construction validates names and acyclicity") {
    CHECK_THROWS_AS(CausalGraph({"A", "A"}, {}, "A"), IdentifierError);
    CHECK_THROWS_AS(CausalGraph({"A", "B"}, {{"A", "Z"}}, "A"), IdentifierError);
    CHECK_THROWS_AS(CausalGraph({"A", "B"}, {}, "Q"), IdentifierError);
    CHECK_THROWS_AS(CausalGraph({""}, {}, ""), IdentifierError);
    try {
        CausalGraph({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}, {"C", "A"}}, "A");
        FAIL("expected a cycle error");
    } catch (const CycleError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("A") != std::string::npos);
        CHECK(msg.find("C") != std::string::npos);
    }
}

TEST_CASE("topological order puts parents first with name tie-breaks") {
    const auto g = diabetes_graph();
    CHECK(g.topological_order() == std::vector<std::string>{"B", "Y", "H", "G"});
    const auto b = breakfast_graph();
    CHECK(b.topological_order() == std::vector<std::string>{"C", "Y", "G"});
    CHECK(ancestors(b, {"G"}) == NodeSet{"C", "Y"});
    CHECK(ancestors(b, {}).empty());
    CHECK(b.features() == std::vector<std::string>{"C", "G"});
    CHECK(to_adjacency_text(b) == "C -> G\nY -> G\n");
}

TEST_CASE("ancestors and descendants agree with the transitive closure") {
    Rng rng = make_rng(11);
    for (int t = 0; t < 200; ++t) {
        const auto g = oracle::random_dag(1 + t % 8, 0.4, rng);
        const oracle::Dag d(g);
        const auto reach = oracle::transitive_closure(d);
        for (std::size_t v = 0; v < d.size(); ++v) {
            NodeSet an;
            NodeSet de;
            for (std::size_t u = 0; u < d.size(); ++u) {
                if (reach[u][v]) an.insert(d.names[u]);
                if (reach[v][u]) de.insert(d.names[u]);
            }
            CHECK(ancestors(g, {d.names[v]}) == an);
            CHECK(descendants(g, {d.names[v]}) == de);
        }
    }
}

TEST_CASE("path enumeration finds every simple path and marks colliders") {
    const auto g = diabetes_graph();
    const auto paths = enumerate_paths(g, "B", "Y");
    const oracle::Dag d(g);
    CHECK(paths.size() == oracle::all_paths(d, d.idx("B"), d.idx("Y")).size());
    CHECK(paths.size() == 5);
    CHECK(std::ranges::is_sorted(paths, {}, &Path::nodes));

    const auto b = breakfast_graph();
    const auto cy = enumerate_paths(b, "C", "Y");
    REQUIRE(cy.size() == 1);
    CHECK(cy[0].to_string() == "C -> G <- Y");
    CHECK(cy[0].colliders() == std::vector<std::string>{"G"});
    CHECK(is_blocked(b, cy[0], {}));
    CHECK_FALSE(is_blocked(b, cy[0], {"G"}));
    CHECK_THROWS_AS(is_blocked(b, cy[0], {"C"}), ArgumentError);
}

TEST_CASE("path enumeration stops at the limit") {
    std::vector<std::string> names;
    std::vector<Edge> edges;
    for (int i = 0; i < 12; ++i) names.push_back("N" + std::to_string(i));
    for (int a = 0; a < 12; ++a)
        for (int b = a + 1; b < 12; ++b) edges.push_back({names[a], names[b]});
    const CausalGraph g(names, edges, "N11");
    CHECK_THROWS_AS(enumerate_paths(g, "N0", "N11", 100), ResourceError);
}

TEST_CASE("d-separation matches the path-enumeration oracle on random DAGs") {
    Rng rng = make_rng(2024);
    std::size_t disagreements = 0;
    for (int t = 0; t < 300; ++t) {
        const std::size_t n = 2 + t % 6;
        const auto g = oracle::random_dag(n, 0.45, rng);
        const auto& names = g.nodes();
        for (int q = 0; q < 5; ++q) {
            const auto a = names[static_cast<std::size_t>(rng() % n)];
            auto b = names[static_cast<std::size_t>(rng() % n)];
            if (a == b) continue;
            NodeSet z;
            for (const auto& v : names)
                if (v != a && v != b && uniform01(rng) < 0.35) z.insert(v);
            if (d_separated(g, {a}, {b}, z) != oracle::d_separated(g, {a}, {b}, z)) ++disagreements;
        }
    }
    CHECK(disagreements == 0);
}

TEST_CASE("classic d-separation cases") {
    const auto b = breakfast_graph();
    CHECK(d_separated(b, {"C"}, {"Y"}, {}));
    CHECK_FALSE(d_separated(b, {"C"}, {"Y"}, {"G"}));
    const CausalGraph chain({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}}, "C");
    CHECK_FALSE(d_separated(chain, {"A"}, {"C"}, {}));
    CHECK(d_separated(chain, {"A"}, {"C"}, {"B"}));
    const CausalGraph descendant({"A", "B", "K", "D"}, {{"A", "K"}, {"B", "K"}, {"K", "D"}}, "B");
    CHECK_FALSE(d_separated(descendant, {"A"}, {"B"}, {"D"}));
}

TEST_CASE("backdoor paths leave the set through an incoming edge") {
    const CausalGraph g({"Z", "X", "Y"}, {{"Z", "X"}, {"Z", "Y"}, {"X", "Y"}}, "Y");
    const auto bd = backdoor_paths(g, {"X"}, {"Y"});
    REQUIRE(bd.size() == 1);
    CHECK(bd[0].to_string() == "X <- Z -> Y");
    CHECK(backdoor_paths(g, {"Z"}, {"Y"}).empty());
}

TEST_CASE("do surgery removes exactly the incoming edges") {
    const auto g = diabetes_graph();
    const auto cut = do_surgery(g, {"H"});
    CHECK_FALSE(cut.has_edge("B", "H"));
    CHECK_FALSE(cut.has_edge("Y", "H"));
    CHECK(cut.has_edge("H", "G"));
    CHECK(cut.edge_count() == g.edge_count() - 2);
    CHECK(cut.target() == "Y");
}

TEST_CASE("path-context classification follows the table rows") {
    // Chain and fork through K, collider at K, collider that is an ancestor of K.
    const CausalGraph g({"X", "K", "Y", "F", "C", "D", "W"},
                        {{"X", "K"}, {"K", "Y"}, {"F", "X"}, {"F", "Y"}, {"X", "C"}, {"Y", "C"}, {"C", "D"}, {"W", "Y"}},
                        "Y");
    const auto chain = classify_path_context(g, path_of(g, {"X", "K", "Y"}), "K");
    CHECK(chain.row == PathContextRow::ChainThroughK);
    CHECK(chain.conditioning.after == BlockState::Blocked);
    CHECK(chain.intervention.after == BlockState::Blocked);

    const auto fork = classify_path_context(g, path_of(g, {"X", "F", "Y"}), "F");
    CHECK(fork.row == PathContextRow::ForkAtK);

    const auto at = classify_path_context(g, path_of(g, {"X", "C", "Y"}), "C");
    CHECK(at.row == PathContextRow::ColliderAtK);
    CHECK(at.conditioning.before == BlockState::Blocked);
    CHECK(at.conditioning.after == BlockState::PotentiallyUnblocked);
    CHECK(at.intervention.after == BlockState::Blocked);

    const auto anc = classify_path_context(g, path_of(g, {"X", "C", "Y"}), "D");
    CHECK(anc.row == PathContextRow::ColliderAncestorOfK);
    CHECK(anc.conditioning.after == BlockState::PotentiallyUnblocked);
    CHECK(anc.intervention.after == BlockState::Blocked);

    const auto none = classify_path_context(g, path_of(g, {"X", "K", "Y"}), "W");
    CHECK(none.row == PathContextRow::Unaffected);
    CHECK(to_string(none.row) == "unaffected");

    CHECK_THROWS_AS(classify_path_context(g, path_of(g, {"X", "K", "Y"}), "X"), ArgumentError);
}

TEST_CASE("table rows never overlap on random graphs") {
    Rng rng = make_rng(5);
    for (int t = 0; t < 100; ++t) {
        const auto g = oracle::random_dag(6, 0.5, rng);
        for (const auto& f : g.features())
            for (const auto& p : enumerate_paths(g, f, g.target()))
                for (const auto& k : g.nodes()) {
                    if (k == p.front() || k == p.back()) continue;
                    CHECK(classify_path_context(g, p, k).matches.size() == 1);
                }
    }
}

TEST_CASE("collider impact on a hand-computed graph") {
    // Paths X1 -> X2 -> Y (0.5 * 2), X1 -> Y (3, no X2), X1 -> X2 <- Z -> Y (0.5 * 4 * 1).
    const CausalGraph g({"X1", "X2", "Z", "Y"}, {{"X1", "X2"}, {"X2", "Y"}, {"X1", "Y"}, {"Z", "X2"}, {"Z", "Y"}}, "Y");
    const WeightedGraph wg(g, {{{"X1", "X2"}, 0.5}, {{"X2", "Y"}, 2.0}, {{"X1", "Y"}, 3.0}, {{"Z", "X2"}, 4.0},
                               {{"Z", "Y"}, 1.0}});
    const auto impact = collider_impact(wg, "X1", "X2", "Y");
    REQUIRE(impact.has_value());
    CHECK(*impact == doctest::Approx(2.0 / 3.0));
    const CausalGraph iso({"X1", "X2", "Y"}, {{"X1", "Y"}}, "Y");
    CHECK_FALSE(collider_impact(WeightedGraph(iso, {{{"X1", "Y"}, 1.0}}), "X1", "X2", "Y").has_value());
    CHECK_THROWS_AS(collider_impact(wg, "X1", "X1", "Y"), ArgumentError);
}

TEST_CASE("shortcut applicability on the breakfast and diabetes graphs") {
    const auto b = breakfast_graph();
    CHECK(lemma1_applies(b, "C", {"G"}));
    CHECK_FALSE(lemma1_applies(b, "G", {"C"}));
    CHECK(lemma2_applies(b, "G", {"C"}));

    const auto d = diabetes_graph();
    for (const auto& s : {NodeSet{"G"}, NodeSet{"H"}, NodeSet{"G", "H"}}) CHECK(lemma1_applies(d, "B", s));
    CHECK_FALSE(lemma1_applies(d, "G", {"B"}));
    CHECK(lemma2_applies(d, "G", {"B"}));
    CHECK_THROWS_AS(lemma1_applies(d, "B", {"B"}), ArgumentError);
}

TEST_CASE("lemma 1 premise matches the closure oracle") {
    Rng rng = make_rng(77);
    for (int t = 0; t < 100; ++t) {
        const auto g = oracle::random_dag(5, 0.5, rng);
        const oracle::Dag d(g);
        const auto reach = oracle::transitive_closure(d);
        const auto features = g.features();
        for (const auto& xj : features) {
            std::vector<std::string> others;
            for (const auto& f : features)
                if (f != xj) others.push_back(f);
            for (unsigned m = 1; m < (1U << others.size()); ++m) {
                const auto s = subset(others, m);
                bool reaches = false;
                for (const auto& v : s)
                    reaches = reaches || reach[d.idx(v)][d.idx(g.target())] || reach[d.idx(v)][d.idx(xj)];
                CHECK(lemma1_applies(g, xj, s) == !reaches);
            }
        }
    }
}
