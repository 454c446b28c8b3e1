#pragma once

#include "mpa/graph.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace mpa {

enum class BlockReason { non_collider_conditioned, collider_unconditioned };
enum class OpenVia { in_set, descendant_in_set };
enum class Caution { incomplete_twin_dsep };
enum class Assumption { msita, cit, cio };

std::string_view to_string(BlockReason r);
std::string_view to_string(OpenVia v);
std::string_view to_string(Caution c);
std::string_view to_string(Assumption a);

/// One simple path between the query endpoints and why it is open or blocked.
struct PathReport {
    std::vector<std::string> nodes;
    // forward[i] is true for nodes[i] -> nodes[i+1], false for nodes[i] <- nodes[i+1]
    std::vector<bool> forward;
    bool open = false;
    std::vector<std::pair<std::string, BlockReason>> blocking_nodes;
    std::vector<std::pair<std::string, OpenVia>> opening_colliders;

    /// "Z <- X -> Y_z [blocked @X]" / "... [open]"
    std::string render() const;
};

struct QueryVerdict {
    std::optional<Assumption> assumption;
    std::optional<std::string> pattern;
    bool holds = false;
    std::vector<PathReport> witnesses;
    bool witnesses_truncated = false;
    std::optional<Caution> caution;
    std::string statement;
    bool trivially_true = false;
    // Pattern checked with no analyst-supplied modification.
    bool unassessed = false;
};

class PathLimitError : public GraphError {
public:
    using GraphError::GraphError;
};

inline constexpr std::size_t kMaxEnumeratedPaths = 100000;

/// Bayes-ball reachability on node indices; `conditioned` has one flag per
/// node. No argument validation: callers own that.
bool d_separated_indices(const CausalGraph& graph, std::size_t a, std::size_t b,
                         const std::vector<bool>& conditioned);

/// Full query: validates arguments, adds restriction indicators of a
/// pattern-restricted graph to the conditioning set, attaches open-path
/// witnesses when the endpoints are connected.
QueryVerdict d_separated(const CausalGraph& graph, const std::string& a, const std::string& b,
                         const std::set<std::string>& cond);

/// Every simple path between a and b, in lexicographic order of node
/// sequences, with open/blocked status. Throws PathLimitError past
/// kMaxEnumeratedPaths.
std::vector<PathReport> list_paths(const CausalGraph& graph, const std::string& a,
                                   const std::string& b, const std::set<std::string>& cond);

/// The conditioning set a query actually uses (user set + restriction indicators).
std::set<std::string> effective_conditioning(const CausalGraph& graph, const std::string& a,
                                             const std::string& b, const std::set<std::string>& cond);

bool is_twin_derived(const CausalGraph& graph);

}  // namespace mpa
