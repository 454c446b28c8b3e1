#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mpa/graph.hpp"
#include "test_support.hpp"

using namespace mpa;
using mpa::testing::load_graph;

TEST_CASE("minimal well-formed graph") {
    auto g = parse_graph("dag { X -> Z X -> Yz } roles { treatment Z outcome Yz confounder X full }");
    CHECK(g.node_count() == 3);
    CHECK(g.edge_count() == 2);
    CHECK(g.provenance() == Provenance::raw);
    CHECK(g.treatment() == "Z");
    CHECK(g.outcome() == "Yz");
    CHECK(g.node("X").role.kind == RoleKind::confounder);
}

TEST_CASE("fig1 dagitty source") {
    auto g = parse_graph(R"(dag { z -> Yz  Z <- X -> Yz  R <- U_Z -> Z  R <- U_Y -> Yz }
        roles { treatment Z intervened z of Z potential Yz confounder X partial
                missing R of X latent U_Z latent U_Y })");
    CHECK(g.node_count() == 7);
    // Four clauses, two of them chained: z->Yz, X->Z, X->Yz, U_Z->R, U_Z->Z, U_Y->R, U_Y->Yz.
    CHECK(g.edge_count() == 7);
    CHECK(g.node("U_Z").role.kind == RoleKind::latent);
    CHECK(g.node("U_Y").role.kind == RoleKind::latent);
    CHECK(g.has_edge("X", "Z"));
    CHECK(g.has_edge("U_Z", "R"));
    CHECK(g.provenance() == Provenance::swit);
    CHECK(g == load_graph("fig1_swit.dag"));
}

TEST_CASE("undeclared nodes default to auxiliary") {
    auto g = parse_graph("dag { A -> B C }");
    CHECK(g.node_count() == 3);
    CHECK(g.node("C").role.kind == RoleKind::auxiliary);
}

TEST_CASE("cycle is reported with its members") {
    try {
        parse_graph("dag { A -> B B -> A }");
        FAIL("expected cycle error");
    } catch (const CycleError& e) {
        std::string msg = e.what();
        CHECK(msg.find("A") != std::string::npos);
        CHECK(msg.find("B") != std::string::npos);
        CHECK(e.cycle().size() == 3);
    }
    CHECK_THROWS_AS(parse_graph("dag { A -> B -> C -> A }"), CycleError);
}

TEST_CASE("syntax errors carry position and token") {
    try {
        parse_graph("dag {\n  A -> B\n  B -> }");
        FAIL("expected parse error");
    } catch (const ParseError& e) {
        CHECK(e.pos().line == 3);
        CHECK(e.pos().column == 8);
        CHECK(e.token() == "}");
    }
    CHECK_THROWS_AS(parse_graph("dag { A <-> B }"), ParseError);
    CHECK_THROWS_AS(parse_graph("dag { A -> B [pos=\"1,2\"] }"), ParseError);
    CHECK_THROWS_AS(parse_graph("graph { A -> B }"), ParseError);
    CHECK_THROWS_AS(parse_graph("dag { A -> B "), ParseError);
    CHECK_THROWS_AS(parse_graph("dag { A -> A }"), ParseError);
    CHECK_THROWS_AS(parse_graph("dag { A -> B A -> B }"), ParseError);
    CHECK_THROWS_AS(parse_graph("dag { 1A -> B }"), ParseError);
    CHECK_THROWS_AS(parse_graph("dag { A -> B } extra"), ParseError);
}

TEST_CASE("role conflicts and dangling indicators") {
    CHECK_THROWS_AS(parse_graph("dag { A -> B } roles { treatment A treatment B }"), ParseError);
    CHECK_THROWS_AS(parse_graph("dag { A -> B } roles { outcome A outcome B }"), ParseError);
    CHECK_THROWS_AS(parse_graph("dag { A -> B } roles { treatment A latent A }"), ParseError);
    CHECK_THROWS_AS(parse_graph("dag { A -> B R } roles { missing R of A }"), ParseError);
    CHECK_THROWS_AS(parse_graph("dag { A -> B R } roles { confounder A full missing R of A }"),
                    ParseError);
    CHECK_THROWS_AS(parse_graph("dag { A -> B } roles { latent Q }"), ParseError);
    // partial confounder without indicator
    CHECK_THROWS_AS(parse_graph("dag { A -> B } roles { confounder A partial }"), GraphError);
    CHECK_THROWS_AS(parse_graph("dag { A -> B } roles { confounder A sometimes }"), ParseError);
}

TEST_CASE("separate roles block") {
    auto g = parse_graph("dag { X -> Z -> Y X -> Y }", "roles { treatment Z\n outcome Y\n confounder X full }");
    CHECK(g.treatment() == "Z");
    CHECK(g.confounders() == std::vector<std::string>{"X"});
}

TEST_CASE("comments are ignored") {
    auto g = parse_graph("# header\ndag { A -> B # trailing\n B -> C }\n# footer\n");
    CHECK(g.edge_count() == 2);
}

TEST_CASE("ancestors") {
    auto fig1 = load_graph("fig1.dag");
    CHECK(ancestors(fig1, "R") == std::set<std::string>{"U_Y", "U_Z"});
    CHECK(ancestors(fig1, "X").empty());
    auto chain = parse_graph("dag { A -> B -> C }");
    CHECK(ancestors(chain, "C") == std::set<std::string>{"A", "B"});
    CHECK_THROWS_AS(ancestors(chain, "Q"), GraphError);
}

TEST_CASE("ancestors and descendants are converse relations") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 200; ++rep) {
        auto g = mpa::testing::random_dag(rng, 8, 0.3);
        for (const auto& v : g.nodes()) {
            auto anc = ancestors(g, v.name);
            CHECK_FALSE(anc.count(v.name));
            for (const auto& u : g.nodes()) {
                CHECK(anc.count(u.name) == descendants(g, u.name).count(v.name));
            }
        }
    }
}

TEST_CASE("serialize then parse round-trips") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 200; ++rep) {
        auto g = mpa::testing::random_dag(rng, 9, 0.3);
        auto back = parse_graph(serialize(g));
        CHECK(back == g);
    }
    for (const char* file : {"fig1.dag", "fig1_swit.dag", "fig6.dag", "motivating.dag"}) {
        auto g = load_graph(file);
        auto back = parse_graph(serialize(g));
        CHECK(back.nodes() == g.nodes());
        CHECK(back.edges() == g.edges());
    }
}

TEST_CASE("canonical serialization") {
    auto g = parse_graph("dag { b -> a  c } roles { latent c }");
    CHECK(serialize(g) == "# provenance: raw\ndag {\n  c\n  b -> a\n}\nroles {\n  latent c\n}\n");
}

TEST_CASE("bundled fixtures parse") {
    for (const char* file : {"fig1.dag", "fig1_swit.dag", "fig6.dag", "motivating.dag", "motivating_g2.dag"}) {
        CAPTURE(file);
        CHECK_NOTHROW(load_graph(file));
    }
    auto m = load_graph("motivating.dag");
    CHECK(m.node_count() == 17);
    CHECK(m.confounders(Observability::partial) == std::vector<std::string>{"Ckd", "Eth"});
    CHECK(m.missingness_indicators() == std::vector<std::string>{"Rckd", "Reth"});
}

TEST_CASE("topological order respects edges") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        auto g = mpa::testing::random_dag(rng, 10, 0.3);
        auto order = g.topological_order();
        REQUIRE(order.size() == g.node_count());
        std::map<std::string, std::size_t> pos;
        for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
        for (const auto& [a, b] : g.edges()) CHECK(pos[a] < pos[b]);
    }
}
