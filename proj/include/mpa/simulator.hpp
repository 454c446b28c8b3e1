#pragma once

#include "mpa/dataset.hpp"
#include "mpa/estimators.hpp"
#include "mpa/graph.hpp"
#include "mpa/transforms.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpa {

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class NodeType { binary, continuous };

/// Replaces the coefficient on `parent` while `indicator` is 0 (unobserved).
struct PatternCoefficient {
    std::string parent;
    std::string indicator;
    double coefficient = 0.0;
};

/// Linear predictor over parents; binary nodes pass it through the logistic
/// link, continuous nodes add N(0, noise_sd^2).
struct Mechanism {
    NodeType type = NodeType::binary;
    double intercept = 0.0;
    std::map<std::string, double> coef;
    std::vector<PatternCoefficient> when_missing;
    double noise_sd = 1.0;
};

enum class TruthMode { analytic, monte_carlo };

struct ScenarioSpec {
    std::string name;
    std::string description;
    CausalGraph graph;  // raw
    std::map<std::string, Mechanism> mechanisms;  // every non-latent node
    // The analyst-facing claim matching the pattern-specific coefficients.
    std::vector<PatternModification> mods;
    TruthMode truth = TruthMode::monte_carlo;
    // Whether MPA is expected to be consistent; informational.
    std::optional<bool> mpa_consistent;
    // Coefficients are illustrative, not estimates from real data.
    bool synthetic = true;
};

/// Throws ScenarioError on a missing mechanism, a coefficient on a
/// non-parent, a non-binary treatment/outcome/indicator, or a cycle created
/// by the pattern-specific wiring.
void validate(const ScenarioSpec& spec);

struct SimOptions {
    // Also estimate the population ATE from an independent 10 x n draw.
    bool population_truth = true;
};

struct SimOutput {
    Dataset data;  // observed view: partial confounders masked where R = 0
    std::vector<int> y0, y1;
    std::vector<double> propensity;  // P(Z = 1 | generating parents of Z)
    double true_ate = 0;             // mean(Y1 - Y0) on this sample
    std::optional<double> population_ate;
    std::uint64_t seed = 0;
    std::size_t n = 0;
    std::vector<std::string> warnings;
    ModelSpec config;  // data roles plus an MPA model over the confounders
};

SimOutput generate(const ScenarioSpec& spec, std::size_t n, std::uint64_t seed, const SimOptions& opts = {});

/// Population ATE: closed form for analytic scenarios (outcome depends on
/// treatment only), otherwise the mean outcome-probability contrast over
/// `draws` fresh rows.
double population_ate(const ScenarioSpec& spec, std::size_t draws, std::uint64_t seed);

const std::vector<ScenarioSpec>& scenario_library();
/// Throws ScenarioError listing the available names.
const ScenarioSpec& find_scenario(const std::string& name);

ScenarioSpec scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioSpec& spec);

/// Merges the intervened node back into the treatment and turns potential
/// nodes factual, so a SWIT can drive the simulator.
CausalGraph unsplit(const CausalGraph& swit);

/// Oracle sidecar as delimited text: row, Y0, Y1, propensity.
std::string oracle_csv(const SimOutput& out);

}  // namespace mpa
