#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mpa/assumptions.hpp"
#include "mpa/catalog.hpp"
#include "mpa/simulator.hpp"
#include "test_support.hpp"

#include <cmath>
#include <set>

using namespace mpa;
using mpa::testing::load_graph;

namespace {

// Hajek IPTW minus the sample ATE, with its influence-function SE.
std::pair<double, double> oracle_error(const SimOutput& out) {
    const auto& z = out.data.z();
    const auto& y = out.data.y();
    const std::size_t n = out.n;
    double s1 = 0, s0 = 0, w1 = 0, w0 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = out.propensity[i];
        if (z[i]) {
            w1 += 1 / e;
            s1 += y[i] / e;
        } else {
            w0 += 1 / (1 - e);
            s0 += y[i] / (1 - e);
        }
    }
    const double m1 = s1 / w1, m0 = s0 / w0;
    const double err = m1 - m0 - out.true_ate;
    const double nn = static_cast<double>(n);
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = out.propensity[i];
        double f = z[i] ? (y[i] - m1) / e * nn / w1 : -(y[i] - m0) / (1 - e) * nn / w0;
        f -= (out.y1[i] - out.y0[i]) - out.true_ate;
        ss += f * f;
    }
    return {err, std::sqrt(ss / nn) / std::sqrt(nn)};
}

const char* kSmall = R"({
  "name": "small",
  "graph": "dag { X -> Z X -> Y Z -> Y R } roles { treatment Z outcome Y confounder X partial missing R of X }",
  "mechanisms": {
    "X": {"intercept": 0.0},
    "R": {"intercept": 0.5},
    "Z": {"intercept": -0.2, "coef": {"X": 0.8}, "when_missing": [{"parent": "X", "indicator": "R", "coef": 0.0}]},
    "Y": {"intercept": -1.0, "coef": {"X": 0.5, "Z": 0.6}}
  }
})";

}  // namespace

TEST_CASE("consistency holds on every row and outputs are seed-deterministic") {
    for (const auto* name : {"fig1", "fig2", "violation_I", "motivating", "mind_vs_mpa"}) {
        const auto& s = find_scenario(name);
        const auto a = generate(s, 2000, 11);
        for (std::size_t i = 0; i < a.n; ++i) {
            REQUIRE(a.data.y()[i] == (a.data.z()[i] ? a.y1[i] : a.y0[i]));
        }
        const auto b = generate(s, 2000, 11);
        CHECK(a.data.y() == b.data.y());
        CHECK(a.data.z() == b.data.z());
        CHECK(a.y0 == b.y0);
        CHECK(a.y1 == b.y1);
        CHECK(a.propensity == b.propensity);
        CHECK(write_csv(a.data) == write_csv(b.data));
        CHECK(a.population_ate == b.population_ate);
        const auto c = generate(s, 2000, 12);
        CHECK(write_csv(a.data) != write_csv(c.data));
    }
}

TEST_CASE("library covers the named scenarios and every catalog row") {
    const auto& lib = scenario_library();
    CHECK(lib.size() >= 20);
    std::set<std::string> names;
    for (const auto& s : lib) {
        names.insert(s.name);
        CHECK(s.synthetic);
    }
    CHECK(names.size() == lib.size());
    for (const auto* n : {"null", "fig1", "fig2", "dust_mite", "violation_I", "violation_II", "violation_III",
                          "motivating"}) {
        CHECK_MESSAGE(names.count(n), n);
    }
    for (const auto& e : violation_catalog()) CHECK_MESSAGE(names.count("catalog/" + e.id), e.id);
    CHECK_THROWS_WITH_AS(find_scenario("nope"), doctest::Contains("fig2"), ScenarioError);
}

TEST_CASE("shipped scenarios keep true propensities inside [0.02, 0.98]") {
    for (const auto& s : scenario_library()) {
        const auto out = generate(s, 100000, 3, {.population_truth = false});
        CHECK_MESSAGE(out.warnings.empty(), s.name);
    }
    auto j = nlohmann::json::parse(kSmall);
    j["mechanisms"]["Z"]["intercept"] = 6.0;
    const auto out = generate(scenario_from_json(j), 1000, 1, {.population_truth = false});
    REQUIRE(out.warnings.size() == 1);
    CHECK(out.warnings[0].find("outside [0.02, 0.98]") != std::string::npos);
}

TEST_CASE("motivating scenario is the bundled diagram with factual names") {
    const auto& s = find_scenario("motivating");
    const CausalGraph swit = load_graph("motivating.dag");
    CHECK(s.graph == unsplit(swit));
    CHECK(to_swit(s.graph) == to_swit(unsplit(swit)));
    const auto out = generate(s, 100000, 5, {.population_truth = false});
    std::set<std::uint32_t> patterns;
    for (std::size_t i = 0; i < out.n; ++i) patterns.insert(out.data.pattern(i));
    CHECK(patterns.size() == 4);
}

TEST_CASE("violation_I is flagged as outcome-driven missingness") {
    const auto& s = find_scenario("violation_I");
    const auto report = run_framework({s.graph, s.mods, {}});
    CHECK_FALSE(report.admissible);
    bool flagged = false;
    for (const auto& f : report.scenario_flags) flagged |= f.scenario == Scenario::I && f.decisive;
    CHECK(flagged);
}

TEST_CASE("oracle propensities recover the sample effect in every scenario") {
    for (const auto& s : scenario_library()) {
        const auto out = generate(s, 100000, 21, {.population_truth = false});
        const auto [err, se] = oracle_error(out);
        CHECK_MESSAGE(std::abs(err) < 3 * se, s.name << " err " << err << " se " << se);
        CHECK(iptw_ate(out.data.y(), out.data.z(), out.propensity) - out.true_ate == doctest::Approx(err).epsilon(1e-9));
    }
}

TEST_CASE("null scenario truth is the analytic logistic contrast") {
    const auto& s = find_scenario("null");
    const auto& y = s.mechanisms.at("Y");
    const double expect = 1 / (1 + std::exp(-(y.intercept + y.coef.at("Z")))) - 1 / (1 + std::exp(-y.intercept));
    CHECK(population_ate(s, 0, 1) == doctest::Approx(expect).epsilon(1e-15));
    const auto out = generate(s, 200000, 4);
    CHECK(*out.population_ate == doctest::Approx(expect).epsilon(1e-15));
    CHECK(std::abs(out.true_ate - expect) < 0.01);
}

TEST_CASE("fig2 MPA estimate is close to the truth at n = 100000") {
    const auto& s = find_scenario("fig2");
    const auto out = generate(s, 100000, 9);
    const auto r = estimate_ate(out.data, out.config);
    CHECK(std::abs(r.estimate - *out.population_ate) < 0.01);
    CHECK(r.models.size() == 2);
}

TEST_CASE("validate rejects broken mechanisms") {
    const auto base = nlohmann::json::parse(kSmall);
    CHECK_NOTHROW(scenario_from_json(base));

    auto j = base;
    j["mechanisms"].erase("R");
    CHECK_THROWS_WITH_AS(scenario_from_json(j), doctest::Contains("R"), ScenarioError);

    j = base;
    j["mechanisms"]["X"]["coef"] = {{"Y", 1.0}};
    CHECK_THROWS_WITH_AS(scenario_from_json(j), doctest::Contains("parent"), ScenarioError);

    // Z -> R plus an R-dependent coefficient on Z is a cycle.
    j = base;
    j["graph"] = "dag { X -> Z X -> Y Z -> Y Z -> R } roles { treatment Z outcome Y confounder X partial missing R of X }";
    j["mechanisms"]["R"]["coef"] = {{"Z", 1.0}};
    CHECK_THROWS_AS(scenario_from_json(j), ScenarioError);

    j = base;
    j["mechanisms"]["Z"]["type"] = "continuous";
    CHECK_THROWS_AS(scenario_from_json(j), ScenarioError);
}

TEST_CASE("scenario JSON round trips") {
    for (const auto& s : scenario_library()) {
        const auto back = scenario_from_json(to_json(s));
        CHECK(back.graph == s.graph);
        CHECK(to_json(back) == to_json(s));
        const auto a = generate(s, 300, 2, {.population_truth = false});
        const auto b = generate(back, 300, 2, {.population_truth = false});
        CHECK(write_csv(a.data) == write_csv(b.data));
    }
}

TEST_CASE("oracle sidecar lists potential outcomes per row") {
    const auto out = generate(find_scenario("fig2"), 3, 1, {.population_truth = false});
    const auto text = oracle_csv(out);
    CHECK(text.rfind("row,Y0,Y1,propensity\n1,", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}
