#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mpa/assumptions.hpp"
#include "mpa/catalog.hpp"
#include "test_support.hpp"

using namespace mpa;
using mpa::testing::data_path;
using mpa::testing::load_graph;
using mpa::testing::read_file;

namespace {

AssumptionSpec fig1_spec(std::vector<PatternModification> mods = {}, std::set<std::string> extra = {}) {
    return AssumptionSpec{load_graph("fig1.dag"), std::move(mods), std::move(extra)};
}

AssumptionSpec fig2_spec() {
    return fig1_spec(parse_pattern_mods(read_file(data_path("fig1_mods.json"))));
}

AssumptionSpec motivating_spec() {
    return AssumptionSpec{load_graph("motivating.dag"),
                          parse_pattern_mods(read_file(data_path("motivating_mods.json"))), {}};
}

const QueryVerdict& for_pattern(const std::vector<QueryVerdict>& vs, const std::string& id) {
    for (const auto& v : vs) {
        if (v.pattern == id) return v;
    }
    throw std::runtime_error("no verdict for " + id);
}

bool any_witness(const QueryVerdict& v, const std::string& rendered) {
    return std::any_of(v.witnesses.begin(), v.witnesses.end(),
                       [&](const PathReport& p) { return p.render() == rendered; });
}

}  // namespace

TEST_CASE("fig1: mSITA violated through the collider R") {
    auto v = check_msita(fig1_spec());
    CHECK_FALSE(v.holds);
    CHECK(v.assumption == Assumption::msita);
    CHECK(any_witness(v, "Z <- U_Z -> R <- U_Y -> Y_z [open]"));
    CHECK(v.statement == "Z ⊥ Y_z | R, X, z");
    CHECK_FALSE(v.caution);
}

TEST_CASE("fig1: measuring either unobserved cause of R repairs mSITA") {
    CHECK(check_msita(fig1_spec({}, {"U_Z"})).holds);
    CHECK(check_msita(fig1_spec({}, {"U_Y"})).holds);
    CHECK(check_msita(fig1_spec({}, {"U_Z"})).statement == "Z ⊥ Y_z | R, X, U_Z, z");
}

TEST_CASE("fig2: CIT holds and CIO fails on the direct arrow") {
    auto spec = fig2_spec();
    auto cit = check_cit(spec);
    auto cio = check_cio(spec);
    REQUIRE(cit.size() == 2);
    CHECK(for_pattern(cit, "R=0").holds);
    CHECK(for_pattern(cit, "R=0").statement == "Z ⊥ X | R=0, z");
    CHECK_FALSE(for_pattern(cio, "R=0").holds);
    CHECK(any_witness(for_pattern(cio, "R=0"), "Y_z <- X [open]"));
    CHECK(for_pattern(cit, "R=1").trivially_true);
    CHECK(for_pattern(cio, "R=1").trivially_true);
}

TEST_CASE("the dagitty listing of fig1 gives the same verdicts") {
    AssumptionSpec spec{load_graph("fig1_swit.dag"),
                        parse_pattern_mods(read_file(data_path("fig1_mods.json"))), {}};
    CHECK_FALSE(check_msita(spec).holds);
    CHECK(for_pattern(check_cit(spec), "R=0").holds);
    CHECK_FALSE(for_pattern(check_cio(spec), "R=0").holds);
}

TEST_CASE("motivating example: mSITA and every CIT statement hold, CIO does not") {
    auto spec = motivating_spec();
    auto m = check_msita(spec);
    CHECK(m.holds);
    CHECK(m.statement == "Ace ⊥ Aki | Rckd, Reth, Ckd, Eth, Age, Arr, Car, Diab, Hyp, Ihd, Sex, ace");
    auto cit = check_cit(spec);
    REQUIRE(cit.size() == 4);
    for (const auto& v : cit) {
        CAPTURE(*v.pattern);
        CHECK(v.holds);
        CHECK_FALSE(v.unassessed);
    }
    CHECK(for_pattern(cit, "Rckd=0,Reth=0").statement ==
          "Ace ⊥ Ckd, Eth | Rckd=0, Reth=0, Age, Arr, Car, Diab, Hyp, Ihd, Sex, ace");
    CHECK(for_pattern(cit, "Rckd=0,Reth=1").statement ==
          "Ace ⊥ Ckd | Rckd=0, Reth=1, Eth, Age, Arr, Car, Diab, Hyp, Ihd, Sex, ace");
    CHECK(for_pattern(cit, "Rckd=1,Reth=1").trivially_true);
    auto cio = check_cio(spec);
    CHECK_FALSE(for_pattern(cio, "Rckd=0,Reth=0").holds);
    CHECK_FALSE(for_pattern(cio, "Rckd=1,Reth=0").holds);
}

TEST_CASE("motivating example: CIT queries agree with the moralization oracle") {
    auto spec = motivating_spec();
    auto g = analysis_graph(spec);
    for (const auto& mod : spec.pattern_mods) {
        auto r = restrict_to_pattern(g, mod);
        std::vector<bool> cond(r.node_count(), false);
        for (const auto& c : {"Age", "Sex", "Hyp", "Diab", "Arr", "Car", "Ihd", "ace", "Rckd", "Reth"}) {
            cond[r.index_of(c)] = true;
        }
        for (const auto& [c, observed] : mod.pattern) {
            if (observed) cond[r.index_of(c)] = true;
        }
        for (const auto& [c, observed] : mod.pattern) {
            if (!observed) CHECK(mpa::testing::moral_dsep_oracle(r, r.index_of("Ace"), r.index_of(c), cond));
        }
    }
}

TEST_CASE("fig6: outcome-caused missingness is flagged on the twin network") {
    AssumptionSpec spec{load_graph("fig6.dag"), {}, {}};
    auto v = check_msita(spec);
    CHECK_FALSE(v.holds);
    CHECK(v.caution == Caution::incomplete_twin_dsep);
    CHECK(any_witness(v, "Z -> Y <- e_Y -> Y_z [open]"));
    CHECK(analysis_graph(spec).provenance() == Provenance::twin);
}

TEST_CASE("dust-mite structure: CIO holds and CIT fails") {
    // X -> Y absent when X is missing, X -> Z kept.
    auto g = parse_graph(R"(dag { X -> Z X -> Y Z -> Y R }
        roles { treatment Z outcome Y confounder X partial missing R of X })");
    AssumptionSpec spec{g, {PatternModification{{{"X", false}}, {{"X", "Y"}}}}, {}};
    auto cit = for_pattern(check_cit(spec), "R=0");
    auto cio = for_pattern(check_cio(spec), "R=0");
    CHECK_FALSE(cit.holds);
    CHECK(cio.holds);
    // Oracle on the restricted graph.
    auto r = restrict_to_pattern(analysis_graph(spec), spec.pattern_mods[0]);
    std::vector<bool> cond(r.node_count(), false);
    cond[r.index_of("R")] = cond[r.index_of("z")] = true;
    CHECK_FALSE(mpa::testing::moral_dsep_oracle(r, r.index_of("Z"), r.index_of("X"), cond));
    CHECK(mpa::testing::moral_dsep_oracle(r, r.index_of("Y_z"), r.index_of("X"), cond));
    auto rep = run_framework(spec);
    CHECK(rep.admissible);
    CHECK(rep.route == "CIO");
}

TEST_CASE("framework: motivating bundle is admissible via CIT") {
    auto rep = run_framework(motivating_spec());
    CHECK(rep.admissible);
    CHECK(rep.route == "CIT");
    CHECK_FALSE(rep.failed_step);
    CHECK(rep.scenario_flags.empty());
    CHECK_FALSE(rep.twin_network);
    auto text = narrative(rep);
    CHECK(text.substr(text.size() - std::string("admissible via CIT\n").size()) == "admissible via CIT\n");
}

TEST_CASE("framework: fig1 without modifications fails at mSITA") {
    auto rep = run_framework(fig1_spec());
    CHECK_FALSE(rep.admissible);
    CHECK(rep.failed_step == 3);
    REQUIRE(rep.scenario_flags.size() == 1);
    CHECK(rep.scenario_flags[0].scenario == Scenario::II);
    CHECK_FALSE(rep.scenario_flags[0].decisive);
    CHECK(rep.patterns.at(0).unassessed);
    auto text = narrative(rep);
    CHECK(text.find("open path: Z <- U_Z -> R <- U_Y -> Y_z [open]") != std::string::npos);
    CHECK(text.find("inadmissible at step 3") != std::string::npos);
}

TEST_CASE("framework: outcome causing missingness fails at the scenario screen") {
    auto rep = run_framework(AssumptionSpec{load_graph("fig6.dag"), {}, {}});
    CHECK_FALSE(rep.admissible);
    CHECK(rep.failed_step == 2);
    REQUIRE_FALSE(rep.scenario_flags.empty());
    CHECK(rep.scenario_flags[0].scenario == Scenario::I);
    CHECK(rep.scenario_flags[0].decisive);
    CHECK(rep.twin_network);
}

TEST_CASE("framework: scenario III is flagged in both variants") {
    auto direct = parse_graph(R"(dag { X -> Z X -> Y Z -> Y X -> R Z -> R }
        roles { treatment Z outcome Y confounder X partial missing R of X })");
    auto rep = run_framework(AssumptionSpec{direct, {PatternModification{{{"X", false}}, {{"X", "Z"}}}}, {}});
    REQUIRE(rep.scenario_flags.size() == 1);
    CHECK(rep.scenario_flags[0].scenario == Scenario::III);
    CHECK_FALSE(rep.admissible);

    auto latent = parse_graph(R"(dag { X -> Z Z -> Y X -> R Z -> R U -> X U -> Y }
        roles { treatment Z outcome Y confounder X partial missing R of X latent U })");
    rep = run_framework(AssumptionSpec{latent, {PatternModification{{{"X", false}}, {{"X", "Z"}}}}, {}});
    REQUIRE(rep.scenario_flags.size() == 1);
    CHECK(rep.scenario_flags[0].detail.find("latent common cause U") != std::string::npos);

    // Removing the only association in the missing subgroup clears the flag.
    auto cleared = parse_graph(R"(dag { X -> Z X -> Y Z -> Y X -> R Z -> R }
        roles { treatment Z outcome Y confounder X partial missing R of X })");
    rep = run_framework(
        AssumptionSpec{cleared, {PatternModification{{{"X", false}}, {{"X", "Z"}, {"X", "Y"}}}}, {}});
    CHECK(rep.scenario_flags.empty());
}

TEST_CASE("patterns without a modification are checked unmodified and tagged") {
    auto spec = motivating_spec();
    spec.pattern_mods.pop_back();  // drop the (Ckd observed, Eth missing) claim
    auto cit = check_cit(spec);
    auto& v = for_pattern(cit, "Rckd=1,Reth=0");
    CHECK(v.unassessed);
    CHECK_FALSE(v.holds);  // Eth -> Ace stays in the graph
    CHECK_FALSE(run_framework(spec).admissible);
}

TEST_CASE("checker argument errors") {
    auto spec = fig2_spec();
    auto restricted = restrict_to_pattern(to_swit(load_graph("fig1.dag")), spec.pattern_mods[0]);
    CHECK_THROWS_AS(check_msita(AssumptionSpec{restricted, {}, {}}), GraphError);
    CHECK_THROWS_AS(check_msita(fig1_spec({}, {"Nope"})), GraphError);
    CHECK_THROWS_AS(check_msita(fig1_spec({}, {"Z"})), GraphError);
    auto dup = spec;
    dup.pattern_mods.push_back(dup.pattern_mods[0]);
    CHECK_THROWS_AS(check_cit(dup), GraphError);
    CHECK_THROWS_AS(parse_pattern_mods("{\"patterns\": [{\"pattern\": {\"X\": 2}}]}"), GraphError);
    CHECK_THROWS_AS(parse_pattern_mods("[1, 2]"), GraphError);
    CHECK_THROWS_AS(check_cit(fig1_spec({PatternModification{{{"Q", false}}, {}}})), GraphError);
}

TEST_CASE("report serialization carries the verdict fields") {
    auto j = to_json(run_framework(fig2_spec()));
    CHECK(j["admissible"] == false);
    CHECK(j["failed_step"] == 3);
    REQUIRE(j["verdicts"].size() == 5);
    CHECK(j["verdicts"][0]["assumption"] == "mSITA");
    CHECK(j["verdicts"][0]["witnesses"][0]["status"] == "open");
    CHECK(j["verdicts"][1]["assumption"] == "CIT");
    CHECK(j["verdicts"][1]["pattern"] == "R=0");
    CHECK(j["scenario_flags"][0]["scenario"] == "II");
    CHECK(j.contains("patterns"));
    CHECK(j["verdicts"][0]["caution"].is_null());
    CHECK(parse_pattern_mods(pattern_mods_to_json(fig2_spec().pattern_mods).dump()).at(0).removed_edges ==
          fig2_spec().pattern_mods[0].removed_edges);
}

TEST_CASE("catalog: every structure violates its named assumption") {
    const auto& cat = violation_catalog();
    int msita = 0, cit_cio = 0, twin = 0;
    for (const auto& e : cat) {
        CAPTURE(e.id);
        AssumptionSpec spec{e.graph(), {e.mod}, {}};
        if (e.violated == Assumption::msita) {
            CHECK_FALSE(check_msita(spec).holds);
        } else {
            auto vs = e.violated == Assumption::cit ? check_cit(spec) : check_cio(spec);
            CHECK_FALSE(for_pattern(vs, "R=0").holds);
        }
        (e.family == "msita" ? msita : e.family == "twin" ? twin : cit_cio)++;
    }
    CHECK(msita == 14);
    CHECK(cit_cio == 12);
    CHECK(twin == 5);
}

TEST_CASE("catalog: each grid piece alone leaves mSITA intact") {
    for (const auto* pieces : {&z_to_r_pieces(), &r_to_y_pieces()}) {
        for (const auto& p : *pieces) {
            CAPTURE(p.id);
            CHECK(check_msita(AssumptionSpec{parse_graph(catalog_dsl(p.edges)), {}, {}}).holds);
        }
    }
}

TEST_CASE("catalog: group B violations are repaired by measuring the named cause of R") {
    int repaired = 0, unrepairable = 0;
    for (const auto& e : violation_catalog()) {
        CAPTURE(e.id);
        if (e.fix) {
            AssumptionSpec spec{e.graph(), {e.mod}, {*e.fix}};
            auto vs = e.violated == Assumption::cit ? check_cit(spec) : check_cio(spec);
            CHECK(for_pattern(vs, "R=0").holds);
            ++repaired;
        }
        if (e.no_fix) {
            auto g = e.graph();
            auto latents = g.latents();
            AssumptionSpec spec{g, {e.mod}, {latents.begin(), latents.end()}};
            bool holds = e.violated == Assumption::msita ? check_msita(spec).holds
                         : e.violated == Assumption::cit ? for_pattern(check_cit(spec), "R=0").holds
                                                          : for_pattern(check_cio(spec), "R=0").holds;
            CHECK_FALSE(holds);
            ++unrepairable;
        }
    }
    CHECK(repaired == 7);
    CHECK(unrepairable == 4);
}

TEST_CASE("catalog: twin rows are analysed on twin networks") {
    for (const auto& e : violation_catalog()) {
        if (e.family != "twin") continue;
        CAPTURE(e.id);
        CHECK(analysis_graph(AssumptionSpec{e.graph(), {e.mod}, {}}).provenance() == Provenance::twin);
    }
}

TEST_CASE("verdicts are monotone under edge deletion") {
    // Random diagrams over a fixed causal order; deleting any non-skeleton
    // edge never turns a holding assumption into a violated one.
    const std::vector<std::string> order{"U1", "U2", "C", "X", "R", "Z", "Y"};
    std::mt19937_64 rng(99);
    std::bernoulli_distribution coin(0.45);
    int compared = 0;
    for (int rep = 0; rep < 150; ++rep) {
        std::vector<Edge> edges{{"Z", "Y"}};
        for (std::size_t i = 0; i < order.size(); ++i) {
            for (std::size_t j = i + 1; j < order.size(); ++j) {
                if (order[i] == "Z" && order[j] == "Y") continue;
                if (order[j] == "U1" || order[j] == "U2") continue;
                if (coin(rng)) edges.emplace_back(order[i], order[j]);
            }
        }
        auto build = [&](const std::vector<Edge>& es) {
            std::string dsl = "dag { U1 U2 C X R Z Y ";
            for (const auto& [a, b] : es) dsl += a + " -> " + b + " ";
            dsl += "} roles { treatment Z outcome Y confounder X partial missing R of X confounder C full "
                   "latent U1 latent U2 }";
            return parse_graph(dsl);
        };
        auto verdicts = [&](const CausalGraph& g) {
            std::vector<Edge> removable;
            if (g.has_edge("X", "Z")) removable.emplace_back("X", "Z");
            AssumptionSpec spec{g, {PatternModification{{{"X", false}}, removable}}, {}};
            return std::array<bool, 3>{check_msita(spec).holds, for_pattern(check_cit(spec), "R=0").holds,
                                       for_pattern(check_cio(spec), "R=0").holds};
        };
        const auto before = verdicts(build(edges));
        for (std::size_t k = 1; k < edges.size(); ++k) {
            auto fewer = edges;
            fewer.erase(fewer.begin() + static_cast<long>(k));
            const auto after = verdicts(build(fewer));
            for (int a = 0; a < 3; ++a) CHECK((!before[a] || after[a]));
            ++compared;
        }
    }
    CHECK(compared > 500);
}
