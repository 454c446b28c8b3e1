#include "mpa/dsep.hpp"

#include <algorithm>
#include <array>
#include <deque>

namespace mpa {

std::string_view to_string(BlockReason r) {
    return r == BlockReason::non_collider_conditioned ? "non-collider-conditioned"
                                                      : "collider-unconditioned";
}

std::string_view to_string(OpenVia v) {
    return v == OpenVia::in_set ? "in-set" : "descendant-in-set";
}

std::string_view to_string(Caution) { return "incomplete_twin_dsep"; }

std::string_view to_string(Assumption a) {
    switch (a) {
        case Assumption::msita: return "mSITA";
        case Assumption::cit: return "CIT";
        case Assumption::cio: return "CIO";
    }
    return "?";
}

std::string PathReport::render() const {
    std::string out;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (i) out += forward[i - 1] ? " -> " : " <- ";
        out += nodes[i];
    }
    if (open) {
        out += " [open]";
    } else {
        out += " [blocked @";
        for (std::size_t i = 0; i < blocking_nodes.size(); ++i) {
            if (i) out += ",";
            out += blocking_nodes[i].first;
        }
        out += "]";
    }
    return out;
}

bool is_twin_derived(const CausalGraph& graph) {
    return graph.provenance() == Provenance::twin ||
           (graph.provenance() == Provenance::pattern_restricted &&
            graph.base_provenance() == Provenance::twin);
}

namespace {

// Nodes that are in the conditioning set or have a descendant in it.
std::vector<bool> conditioned_or_ancestor(const CausalGraph& g, const std::vector<bool>& cond) {
    std::vector<bool> out(g.node_count(), false);
    std::vector<std::size_t> stack;
    for (std::size_t v = 0; v < cond.size(); ++v) {
        if (cond[v]) {
            out[v] = true;
            stack.push_back(v);
        }
    }
    while (!stack.empty()) {
        std::size_t v = stack.back();
        stack.pop_back();
        for (std::size_t p : g.parents(v)) {
            if (!out[p]) {
                out[p] = true;
                stack.push_back(p);
            }
        }
    }
    return out;
}

std::vector<std::vector<std::size_t>> neighbours(const CausalGraph& g) {
    std::vector<std::vector<std::size_t>> nb(g.node_count());
    for (std::size_t v = 0; v < g.node_count(); ++v) {
        nb[v] = g.parents(v);
        nb[v].insert(nb[v].end(), g.children(v).begin(), g.children(v).end());
        std::sort(nb[v].begin(), nb[v].end());
    }
    return nb;
}

struct Resolved {
    std::size_t a, b;
    std::vector<bool> cond;
};

Resolved resolve(const CausalGraph& g, const std::string& a, const std::string& b,
                 const std::set<std::string>& cond) {
    if (a == b) throw GraphError("d-separation query endpoints must differ ('" + a + "')");
    Resolved r{g.index_of(a), g.index_of(b), std::vector<bool>(g.node_count(), false)};
    for (const auto& c : cond) {
        if (c == a || c == b) {
            throw GraphError("query endpoint '" + c + "' cannot be in the conditioning set");
        }
        std::size_t i = g.index_of(c);
        if (g.node(i).role.kind == RoleKind::latent) {
            throw GraphError("latent node '" + c + "' cannot be conditioned on");
        }
        r.cond[i] = true;
    }
    for (const auto& c : effective_conditioning(g, a, b, {})) r.cond[g.index_of(c)] = true;
    return r;
}

PathReport make_report(const CausalGraph& g, const std::vector<std::size_t>& path,
                       const std::vector<bool>& cond, const std::vector<bool>& anc) {
    PathReport rep;
    for (std::size_t v : path) rep.nodes.push_back(g.node(v).name);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        rep.forward.push_back(g.has_edge(rep.nodes[i], rep.nodes[i + 1]));
    }
    for (std::size_t i = 1; i + 1 < path.size(); ++i) {
        const bool collider = rep.forward[i - 1] && !rep.forward[i];
        const std::size_t v = path[i];
        if (collider) {
            if (cond[v]) {
                rep.opening_colliders.emplace_back(rep.nodes[i], OpenVia::in_set);
            } else if (anc[v]) {
                rep.opening_colliders.emplace_back(rep.nodes[i], OpenVia::descendant_in_set);
            } else {
                rep.blocking_nodes.emplace_back(rep.nodes[i], BlockReason::collider_unconditioned);
            }
        } else if (cond[v]) {
            rep.blocking_nodes.emplace_back(rep.nodes[i], BlockReason::non_collider_conditioned);
        }
    }
    rep.open = rep.blocking_nodes.empty();
    return rep;
}

// Depth-first enumeration of simple paths in lexicographic order. With
// `only_open` set, prefixes that are already blocked are pruned.
class PathEnumerator {
public:
    PathEnumerator(const CausalGraph& g, const Resolved& r, bool only_open, std::size_t limit)
        : m_g(g), m_r(r), m_only_open(only_open), m_limit(limit),
          m_anc(conditioned_or_ancestor(g, r.cond)), m_nb(neighbours(g)),
          m_on_path(g.node_count(), false) {}

    std::vector<PathReport> run() {
        m_path.push_back(m_r.a);
        m_on_path[m_r.a] = true;
        extend();
        return std::move(m_out);
    }

    bool truncated() const { return m_truncated; }

private:
    bool edge(std::size_t from, std::size_t to) const {
        const auto& ch = m_g.children(from);
        return std::find(ch.begin(), ch.end(), to) != ch.end();
    }

    bool passes(std::size_t prev, std::size_t v, std::size_t next) const {
        const bool collider = edge(prev, v) && edge(next, v);
        return collider ? m_anc[v] : !m_r.cond[v];
    }

    void extend() {
        if (m_stop) return;
        const std::size_t v = m_path.back();
        for (std::size_t w : m_nb[v]) {
            if (m_on_path[w]) continue;
            if (m_only_open && m_path.size() >= 2 && !passes(m_path[m_path.size() - 2], v, w)) continue;
            m_path.push_back(w);
            if (w == m_r.b) {
                if (m_out.size() >= m_limit) {
                    m_truncated = true;
                    m_stop = true;
                } else {
                    m_out.push_back(make_report(m_g, m_path, m_r.cond, m_anc));
                }
            } else {
                m_on_path[w] = true;
                extend();
                m_on_path[w] = false;
            }
            m_path.pop_back();
            if (m_stop) return;
        }
    }

    const CausalGraph& m_g;
    const Resolved& m_r;
    bool m_only_open;
    std::size_t m_limit;
    std::vector<bool> m_anc;
    std::vector<std::vector<std::size_t>> m_nb;
    std::vector<bool> m_on_path;
    std::vector<std::size_t> m_path;
    std::vector<PathReport> m_out;
    bool m_truncated = false;
    bool m_stop = false;
};

}  // namespace

std::set<std::string> effective_conditioning(const CausalGraph& graph, const std::string& a,
                                             const std::string& b, const std::set<std::string>& cond) {
    std::set<std::string> out = cond;
    if (const auto& r = graph.restriction()) {
        for (const auto& [confounder, observed] : r->pattern) {
            (void)observed;
            if (auto ind = graph.indicator_for(confounder); ind && *ind != a && *ind != b) {
                out.insert(*ind);
            }
        }
    }
    return out;
}

bool d_separated_indices(const CausalGraph& g, std::size_t a, std::size_t b,
                         const std::vector<bool>& cond) {
    const std::vector<bool> anc = conditioned_or_ancestor(g, cond);
    // visited[v][0]: arrived travelling up (from a child); [1]: down (from a parent)
    std::vector<std::array<bool, 2>> visited(g.node_count(), {false, false});
    std::deque<std::pair<std::size_t, int>> queue{{a, 0}};
    while (!queue.empty()) {
        auto [v, dir] = queue.front();
        queue.pop_front();
        if (visited[v][dir]) continue;
        visited[v][dir] = true;
        if (v == b && !cond[v]) return false;
        if (dir == 0 && !cond[v]) {
            for (std::size_t p : g.parents(v)) queue.emplace_back(p, 0);
            for (std::size_t c : g.children(v)) queue.emplace_back(c, 1);
        } else if (dir == 1) {
            if (!cond[v]) {
                for (std::size_t c : g.children(v)) queue.emplace_back(c, 1);
            }
            if (anc[v]) {
                for (std::size_t p : g.parents(v)) queue.emplace_back(p, 0);
            }
        }
    }
    return true;
}

QueryVerdict d_separated(const CausalGraph& graph, const std::string& a, const std::string& b,
                         const std::set<std::string>& cond) {
    const Resolved r = resolve(graph, a, b, cond);
    QueryVerdict verdict;
    verdict.holds = d_separated_indices(graph, r.a, r.b, r.cond);
    if (!verdict.holds) {
        PathEnumerator e(graph, r, /*only_open=*/true, kMaxEnumeratedPaths);
        verdict.witnesses = e.run();
        verdict.witnesses_truncated = e.truncated();
        if (is_twin_derived(graph)) verdict.caution = Caution::incomplete_twin_dsep;
    }
    return verdict;
}

std::vector<PathReport> list_paths(const CausalGraph& graph, const std::string& a,
                                   const std::string& b, const std::set<std::string>& cond) {
    const Resolved r = resolve(graph, a, b, cond);
    PathEnumerator e(graph, r, /*only_open=*/false, kMaxEnumeratedPaths);
    auto out = e.run();
    if (e.truncated()) {
        throw PathLimitError("path enumeration between '" + a + "' and '" + b + "' exceeded " +
                             std::to_string(kMaxEnumeratedPaths) + " simple paths");
    }
    return out;
}

}  // namespace mpa
