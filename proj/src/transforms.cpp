#include "mpa/transforms.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace mpa {

std::string pattern_id(const CausalGraph& graph, const std::map<std::string, bool>& pattern) {
    std::string id;
    for (const auto& [confounder, observed] : pattern) {
        if (!id.empty()) id += ",";
        auto indicator = graph.indicator_for(confounder);
        id += (indicator ? *indicator : "R_" + confounder) + "=" + (observed ? "1" : "0");
    }
    return id;
}

std::vector<std::map<std::string, bool>> enumerate_patterns(const CausalGraph& graph) {
    const auto partial = graph.confounders(Observability::partial);
    const std::size_t k = partial.size();
    std::vector<std::map<std::string, bool>> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
        std::map<std::string, bool> p;
        for (std::size_t i = 0; i < k; ++i) p[partial[i]] = (mask >> (k - 1 - i)) & 1U;
        out.push_back(std::move(p));
    }
    return out;
}

namespace {

void require_transformable(const CausalGraph& graph, const char* what) {
    if (graph.provenance() != Provenance::raw) {
        throw GraphError(std::string(what) + ": graph already transformed (provenance " +
                         std::string(to_string(graph.provenance())) + ")");
    }
    auto z = graph.treatment();
    auto y = graph.outcome();
    if (!z) throw GraphError(std::string(what) + ": missing role assignment: no treatment node");
    if (!y) throw GraphError(std::string(what) + ": missing role assignment: no outcome node");
    if (descendants(graph, *y).count(*z)) {
        throw GraphError(std::string(what) + ": treatment '" + *z +
                         "' is a descendant of outcome '" + *y + "'");
    }
}

NodeRole potential_copy(const NodeRole& role, const std::string& factual) {
    NodeRole r = role;
    r.potential = true;
    r.factual = factual;
    if (r.kind == RoleKind::outcome) r.kind = RoleKind::potential_outcome;
    return r;
}

bool indicator_among(const CausalGraph& graph, const std::set<std::string>& names) {
    for (const auto& r : graph.missingness_indicators()) {
        if (names.count(r)) return true;
    }
    return false;
}

}  // namespace

std::string intervened_name(const CausalGraph& graph, const std::string& treatment) {
    std::string lower = treatment;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == treatment || graph.contains(lower)) lower = treatment + "_do";
    if (graph.contains(lower)) {
        throw GraphError("cannot name intervened node for '" + treatment + "': '" + lower +
                         "' already exists");
    }
    return lower;
}

CausalGraph to_swit(const CausalGraph& graph) {
    require_transformable(graph, "to_swit");
    const std::string z = *graph.treatment();
    const std::string zi = intervened_name(graph, z);
    const auto desc = descendants(graph, z);

    auto rename = [&](const std::string& v) {
        return desc.count(v) ? v + "_" + zi : v;
    };

    std::vector<Node> nodes;
    for (const Node& n : graph.nodes()) {
        if (desc.count(n.name)) {
            std::string name = rename(n.name);
            if (graph.contains(name)) throw GraphError("potential node name '" + name + "' collides");
            nodes.push_back(Node{name, potential_copy(n.role, n.name)});
        } else {
            nodes.push_back(n);
        }
    }
    NodeRole intervened;
    intervened.kind = RoleKind::intervened_treatment;
    intervened.factual = z;
    nodes.push_back(Node{zi, intervened});

    std::vector<Edge> edges;
    for (const auto& [from, to] : graph.edges()) {
        std::string f = from == z ? zi : rename(from);
        edges.emplace_back(f, rename(to));
    }
    CausalGraph swit(std::move(nodes), std::move(edges), Provenance::swit);
    return swit.with_annotations(Provenance::swit, Provenance::swit, std::nullopt,
                                 indicator_among(graph, desc));
}

CausalGraph to_twin_network(const CausalGraph& graph) {
    require_transformable(graph, "to_twin_network");
    const std::string z = *graph.treatment();
    const std::string zi = intervened_name(graph, z);
    const auto desc = descendants(graph, z);

    auto cf = [&](const std::string& v) {
        if (v == z) return zi;
        return desc.count(v) ? v + "_" + zi : v;
    };

    std::vector<Node> nodes = graph.nodes();
    NodeRole intervened;
    intervened.kind = RoleKind::intervened_treatment;
    intervened.factual = z;
    nodes.push_back(Node{zi, intervened});

    std::vector<Edge> edges = graph.edges();
    NodeRole error_role;
    error_role.kind = RoleKind::latent;
    for (const std::string& v : desc) {
        const std::string copy = cf(v);
        const std::string err = "e_" + v;
        if (graph.contains(copy)) throw GraphError("potential node name '" + copy + "' collides");
        if (graph.contains(err)) throw GraphError("error node name '" + err + "' collides");
        nodes.push_back(Node{copy, potential_copy(graph.node(v).role, v)});
        nodes.push_back(Node{err, error_role});
        edges.emplace_back(err, v);
        edges.emplace_back(err, copy);
    }
    for (const auto& [from, to] : graph.edges()) {
        if (desc.count(to)) edges.emplace_back(cf(from), cf(to));
    }
    CausalGraph twin(std::move(nodes), std::move(edges), Provenance::twin);
    return twin.with_annotations(Provenance::twin, Provenance::twin, std::nullopt, false);
}

namespace {

std::string factual_of(const Node& n) {
    if ((n.role.potential || n.role.kind == RoleKind::intervened_treatment) && !n.role.factual.empty()) {
        return n.role.factual;
    }
    return n.name;
}

}  // namespace

CausalGraph restrict_to_pattern(const CausalGraph& graph, const PatternModification& mod) {
    const Provenance prov = graph.provenance();
    if (prov == Provenance::pattern_restricted) {
        const auto& r = *graph.restriction();
        if (r.pattern == mod.pattern && r.removed_edges == mod.removed_edges) return graph;
        throw GraphError("restrict_to_pattern: graph is already restricted to pattern " + r.pattern_id);
    }
    if (prov != Provenance::swit && prov != Provenance::twin) {
        throw GraphError("restrict_to_pattern: expected a SWIT or twin network, got provenance " +
                         std::string(to_string(prov)));
    }

    const auto partial = graph.confounders(Observability::partial);
    if (mod.pattern.size() != partial.size()) {
        throw GraphError("pattern dimension mismatch: graph has " + std::to_string(partial.size()) +
                         " partial confounders, pattern has " + std::to_string(mod.pattern.size()));
    }
    for (const auto& name : partial) {
        if (!mod.pattern.count(name)) {
            throw GraphError("pattern dimension mismatch: no entry for partial confounder '" + name + "'");
        }
    }

    std::set<Edge> drop;
    for (const auto& [from, to] : mod.removed_edges) {
        if (!graph.contains(from) || graph.node(from).role.kind != RoleKind::confounder ||
            graph.node(from).role.observability != Observability::partial) {
            throw GraphError("removed edge " + from + " -> " + to +
                             " must leave a partial confounder");
        }
        if (mod.pattern.at(from)) {
            throw GraphError("removed edge " + from + " -> " + to + ": '" + from +
                             "' is observed in this pattern");
        }
        bool found = false;
        for (const auto& [a, b] : graph.edges()) {
            if (factual_of(graph.node(a)) == from && factual_of(graph.node(b)) == to) {
                drop.emplace(a, b);
                found = true;
            }
        }
        if (!found) throw GraphError("removed edge not present: " + from + " -> " + to);
    }

    std::vector<Edge> edges;
    for (const auto& e : graph.edges()) {
        if (!drop.count(e)) edges.push_back(e);
    }
    PatternRestriction restriction{mod.pattern, mod.removed_edges, pattern_id(graph, mod.pattern)};
    CausalGraph restricted(graph.nodes(), std::move(edges), Provenance::pattern_restricted);
    return restricted.with_annotations(Provenance::pattern_restricted, prov, std::move(restriction),
                                       graph.requires_twin_network());
}

std::string counterfactual_name(const CausalGraph& transformed, const std::string& name) {
    for (const Node& n : transformed.nodes()) {
        if (n.role.potential && n.role.factual == name) return n.name;
    }
    return name;
}

}  // namespace mpa
