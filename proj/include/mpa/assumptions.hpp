#pragma once

#include "mpa/dsep.hpp"
#include "mpa/graph.hpp"
#include "mpa/transforms.hpp"

#include <json.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace mpa {

/// Everything the checker needs: the analyst's diagram, the per-pattern
/// "confounder only when observed" claims, and any former latents the
/// analyst now measures.
struct AssumptionSpec {
    CausalGraph graph;
    std::vector<PatternModification> pattern_mods;
    std::set<std::string> extra_conditioning;
};

/// Reads `{"patterns": [{"pattern": {"X": 0}, "removed_edges": [["X","Z"]]}]}`.
std::vector<PatternModification> parse_pattern_mods(const std::string& json_text);
nlohmann::json pattern_mods_to_json(const std::vector<PatternModification>& mods);

/// The SWIT or twin network the checks run on, after lifting
/// `extra_conditioning` nodes from latent to measured.
CausalGraph analysis_graph(const AssumptionSpec& spec);

QueryVerdict check_msita(const AssumptionSpec& spec);
/// One verdict per missingness pattern, all-observed pattern last.
std::vector<QueryVerdict> check_cit(const AssumptionSpec& spec);
std::vector<QueryVerdict> check_cio(const AssumptionSpec& spec);

enum class Scenario { I, II, III };
std::string_view to_string(Scenario s);

struct ScenarioFlag {
    Scenario scenario;
    // Matched structure, e.g. {"Y", "R"} for an outcome -> indicator edge.
    std::vector<std::string> nodes;
    std::string detail;
    // Scenario I fails the framework outright; II and III defer to d-separation.
    bool decisive = false;
};

struct PatternOutcome {
    std::string pattern;
    bool cit = false;
    bool cio = false;
    bool trivially_true = false;
    bool unassessed = false;
    bool ok() const { return cit || cio; }
};

struct FrameworkReport {
    std::vector<PatternModification> assertions;
    std::set<std::string> extra_conditioning;
    std::vector<ScenarioFlag> scenario_flags;
    bool twin_network = false;
    QueryVerdict msita;
    std::vector<QueryVerdict> cit;
    std::vector<QueryVerdict> cio;
    std::vector<PatternOutcome> patterns;
    bool admissible = false;
    // 2: key-scenario screen, 3: mSITA, 4: CIT/CIO; empty when admissible.
    std::optional<int> failed_step;
    // "CIT", "CIO", "CIT and CIO", "mixed" or "" when inadmissible.
    std::string route;
};

/// Screens, mSITA, then CIT/CIO per pattern; admissible iff no decisive
/// scenario flag, mSITA holds, and every pattern satisfies CIT or CIO.
FrameworkReport run_framework(const AssumptionSpec& spec);

std::vector<ScenarioFlag> screen_scenarios(const AssumptionSpec& spec);

nlohmann::json to_json(const QueryVerdict& v);
nlohmann::json to_json(const FrameworkReport& report);
std::string narrative(const FrameworkReport& report);

}  // namespace mpa
