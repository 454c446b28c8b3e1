#pragma once

#include "mpa/graph.hpp"

#include <map>
#include <string>
#include <vector>

namespace mpa {

/// The analyst's structural claim for one missingness pattern: which arrows
/// out of the unobserved confounders are absent in that subgroup.
struct PatternModification {
    // partial confounder -> observed (true) / missing (false)
    std::map<std::string, bool> pattern;
    // Edges named as in the raw graph.
    std::vector<Edge> removed_edges;
};

/// "Rckd=0,Reth=1" style identifier; keys ordered by confounder name.
std::string pattern_id(const CausalGraph& graph, const std::map<std::string, bool>& pattern);

/// All 2^k patterns over the graph's partial confounders, all-observed last.
std::vector<std::map<std::string, bool>> enumerate_patterns(const CausalGraph& graph);

/// Name of the intervened node the SWIT/twin transforms create for `treatment`.
std::string intervened_name(const CausalGraph& graph, const std::string& treatment);

/// Single world intervention template: split the treatment, relabel its
/// descendants as potential variables.
CausalGraph to_swit(const CausalGraph& graph);

/// Factual graph plus counterfactual copies of the treatment's descendants,
/// joined pairwise through latent error nodes `e_<name>`.
CausalGraph to_twin_network(const CausalGraph& graph);

/// Deletes the pattern's removed edges (in every world) and fixes the
/// pattern's missingness indicators as conditioned-by-restriction.
CausalGraph restrict_to_pattern(const CausalGraph& graph, const PatternModification& mod);

/// Name in a transformed graph of the counterpart of raw node `name` in the
/// counterfactual world (itself when not a descendant of treatment).
std::string counterfactual_name(const CausalGraph& transformed, const std::string& name);

}  // namespace mpa
