#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mpa {

enum class RoleKind {
    treatment,
    intervened_treatment,
    outcome,
    potential_outcome,
    confounder,
    missingness_indicator,
    latent,
    auxiliary,
};

enum class Observability { full, partial };

enum class Provenance { raw, swit, twin, pattern_restricted };

std::string_view to_string(RoleKind kind);
std::string_view to_string(Provenance p);

struct NodeRole {
    RoleKind kind = RoleKind::auxiliary;
    // missingness_indicator: the partial confounder it indexes
    std::string target;
    // confounder only
    Observability observability = Observability::full;
    // Set on counterfactual copies created by the SWIT / twin transforms.
    bool potential = false;
    // For potential copies and the intervened node: the factual node name.
    std::string factual;

    bool operator==(const NodeRole&) const = default;
};

struct Node {
    std::string name;
    NodeRole role;

    bool operator==(const Node&) const = default;
};

using Edge = std::pair<std::string, std::string>;

/// Position inside DSL source, 1-based.
struct SourcePos {
    int line = 1;
    int column = 1;
};

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public GraphError {
public:
    ParseError(SourcePos pos, std::string token, const std::string& message);

    SourcePos pos() const { return m_pos; }
    const std::string& token() const { return m_token; }

private:
    SourcePos m_pos;
    std::string m_token;
};

class CycleError : public GraphError {
public:
    explicit CycleError(std::vector<std::string> cycle);
    const std::vector<std::string>& cycle() const { return m_cycle; }

private:
    std::vector<std::string> m_cycle;
};

/// Restriction of a transformed graph to one missingness pattern. Indicators
/// listed here are conditioned on implicitly by every query on the graph.
struct PatternRestriction {
    // partial confounder name -> observed (true) / missing (false)
    std::map<std::string, bool> pattern;
    std::vector<Edge> removed_edges;
    std::string pattern_id;

    bool operator==(const PatternRestriction&) const = default;
};

/// Immutable annotated DAG. Nodes are kept sorted by name; node indices are
/// stable for the lifetime of the value.
class CausalGraph {
public:
    CausalGraph() = default;

    /// Validates structure and roles; throws GraphError / CycleError.
    CausalGraph(std::vector<Node> nodes, std::vector<Edge> edges,
                Provenance provenance = Provenance::raw);

    std::size_t node_count() const { return m_nodes.size(); }
    std::size_t edge_count() const { return m_edges.size(); }

    const std::vector<Node>& nodes() const { return m_nodes; }
    const std::vector<Edge>& edges() const { return m_edges; }
    Provenance provenance() const { return m_provenance; }

    /// Provenance of the SWIT/twin this graph was restricted from.
    Provenance base_provenance() const { return m_base_provenance; }
    const std::optional<PatternRestriction>& restriction() const { return m_restriction; }
    bool requires_twin_network() const { return m_requires_twin; }

    bool contains(std::string_view name) const;
    std::size_t index_of(std::string_view name) const;
    const Node& node(std::string_view name) const;
    const Node& node(std::size_t index) const { return m_nodes[index]; }
    bool has_edge(std::string_view from, std::string_view to) const;

    const std::vector<std::size_t>& parents(std::size_t v) const { return m_parents[v]; }
    const std::vector<std::size_t>& children(std::size_t v) const { return m_children[v]; }

    std::vector<std::string> parents(std::string_view name) const;
    std::vector<std::string> children(std::string_view name) const;

    /// Node names in a topological order (ties broken by name).
    std::vector<std::string> topological_order() const;

    // Role lookups. Each returns nullopt when the role is not assigned.
    std::optional<std::string> treatment() const;
    std::optional<std::string> intervened_treatment() const;
    /// Factual outcome (role outcome, not potential).
    std::optional<std::string> outcome() const;
    /// Outcome-family node used in counterfactual queries: the potential
    /// outcome when present, otherwise the outcome.
    std::optional<std::string> query_outcome() const;

    std::vector<std::string> confounders(std::optional<Observability> obs = std::nullopt) const;
    /// Factual missingness indicators, sorted by name.
    std::vector<std::string> missingness_indicators() const;
    std::optional<std::string> indicator_for(std::string_view confounder) const;
    std::vector<std::string> latents() const;

    /// Returns a copy with the given extra annotation fields set. Used by the
    /// transforms; structure and roles are revalidated.
    CausalGraph with_annotations(Provenance provenance, Provenance base,
                                 std::optional<PatternRestriction> restriction,
                                 bool requires_twin) const;

    bool operator==(const CausalGraph& other) const;

private:
    void build_index();
    void validate() const;

    std::vector<Node> m_nodes;
    std::vector<Edge> m_edges;
    std::map<std::string, std::size_t, std::less<>> m_index;
    std::vector<std::vector<std::size_t>> m_parents;
    std::vector<std::vector<std::size_t>> m_children;
    Provenance m_provenance = Provenance::raw;
    Provenance m_base_provenance = Provenance::raw;
    std::optional<PatternRestriction> m_restriction;
    bool m_requires_twin = false;
};

/// Parses a `dag { ... }` block followed by an optional `roles { ... }` block.
CausalGraph parse_graph(std::string_view text);

/// Parses `text` and applies additional role lines from `roles_text`, which
/// holds a standalone `roles { ... }` block.
CausalGraph parse_graph(std::string_view text, std::string_view roles_text);

/// Canonical DSL rendering: sorted nodes, one edge per line, roles block.
std::string serialize(const CausalGraph& graph);

std::set<std::string> ancestors(const CausalGraph& graph, std::string_view node);
std::set<std::string> descendants(const CausalGraph& graph, std::string_view node);

bool is_valid_node_name(std::string_view name);

}  // namespace mpa
