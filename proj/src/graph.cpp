#include "mpa/graph.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <functional>
#include <sstream>

namespace mpa {

std::string_view to_string(RoleKind kind) {
    switch (kind) {
        case RoleKind::treatment: return "treatment";
        case RoleKind::intervened_treatment: return "intervened_treatment";
        case RoleKind::outcome: return "outcome";
        case RoleKind::potential_outcome: return "potential_outcome";
        case RoleKind::confounder: return "confounder";
        case RoleKind::missingness_indicator: return "missingness_indicator";
        case RoleKind::latent: return "latent";
        case RoleKind::auxiliary: return "auxiliary";
    }
    return "?";
}

std::string_view to_string(Provenance p) {
    switch (p) {
        case Provenance::raw: return "raw";
        case Provenance::swit: return "swit";
        case Provenance::twin: return "twin";
        case Provenance::pattern_restricted: return "pattern_restricted";
    }
    return "?";
}

namespace {

std::string format_pos(SourcePos pos) {
    return std::to_string(pos.line) + ":" + std::to_string(pos.column);
}

}  // namespace

ParseError::ParseError(SourcePos pos, std::string token, const std::string& message)
    : GraphError("parse error at " + format_pos(pos) +
                 (token.empty() ? std::string() : " near '" + token + "'") + ": " + message),
      m_pos(pos),
      m_token(std::move(token)) {}

namespace {

std::string join_cycle(const std::vector<std::string>& cycle) {
    std::string out;
    for (std::size_t i = 0; i < cycle.size(); ++i) {
        if (i) out += " -> ";
        out += cycle[i];
    }
    return out;
}

}  // namespace

CycleError::CycleError(std::vector<std::string> cycle)
    : GraphError("cycle detected: " + join_cycle(cycle)), m_cycle(std::move(cycle)) {}

bool is_valid_node_name(std::string_view name) {
    if (name.empty() || !std::isalpha(static_cast<unsigned char>(name[0]))) return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

// ---------------------------------------------------------------------------
// CausalGraph

CausalGraph::CausalGraph(std::vector<Node> nodes, std::vector<Edge> edges, Provenance provenance)
    : m_nodes(std::move(nodes)), m_edges(std::move(edges)), m_provenance(provenance),
      m_base_provenance(provenance) {
    std::sort(m_nodes.begin(), m_nodes.end(),
              [](const Node& a, const Node& b) { return a.name < b.name; });
    std::sort(m_edges.begin(), m_edges.end());
    build_index();
    validate();
}

void CausalGraph::build_index() {
    m_index.clear();
    for (std::size_t i = 0; i < m_nodes.size(); ++i) {
        if (!is_valid_node_name(m_nodes[i].name)) {
            throw GraphError("invalid node name '" + m_nodes[i].name + "'");
        }
        if (!m_index.emplace(m_nodes[i].name, i).second) {
            throw GraphError("duplicate node '" + m_nodes[i].name + "'");
        }
    }
    m_parents.assign(m_nodes.size(), {});
    m_children.assign(m_nodes.size(), {});
    for (std::size_t e = 0; e < m_edges.size(); ++e) {
        const auto& [from, to] = m_edges[e];
        if (e > 0 && m_edges[e - 1] == m_edges[e]) {
            throw GraphError("duplicate edge " + from + " -> " + to);
        }
        auto f = m_index.find(from);
        auto t = m_index.find(to);
        if (f == m_index.end()) throw GraphError("edge references undeclared node '" + from + "'");
        if (t == m_index.end()) throw GraphError("edge references undeclared node '" + to + "'");
        if (f->second == t->second) throw GraphError("self-loop on '" + from + "'");
        m_children[f->second].push_back(t->second);
        m_parents[t->second].push_back(f->second);
    }
}

void CausalGraph::validate() const {
    // Acyclicity via DFS colouring; report the first cycle found.
    const std::size_t n = m_nodes.size();
    std::vector<int> colour(n, 0);
    std::vector<std::size_t> stack;
    std::function<void(std::size_t)> visit = [&](std::size_t v) {
        colour[v] = 1;
        stack.push_back(v);
        for (std::size_t c : m_children[v]) {
            if (colour[c] == 1) {
                std::vector<std::string> cycle;
                auto it = std::find(stack.begin(), stack.end(), c);
                for (; it != stack.end(); ++it) cycle.push_back(m_nodes[*it].name);
                cycle.push_back(m_nodes[c].name);
                throw CycleError(std::move(cycle));
            }
            if (colour[c] == 0) visit(c);
        }
        stack.pop_back();
        colour[v] = 2;
    };
    for (std::size_t v = 0; v < n; ++v) {
        if (colour[v] == 0) visit(v);
    }

    int treatments = 0, intervened = 0, outcomes = 0, potential_outcomes = 0;
    for (std::size_t v = 0; v < n; ++v) {
        const Node& node = m_nodes[v];
        switch (node.role.kind) {
            case RoleKind::treatment: ++treatments; break;
            case RoleKind::intervened_treatment:
                ++intervened;
                if (!m_parents[v].empty()) {
                    throw GraphError("intervened treatment '" + node.name + "' has incoming edges");
                }
                break;
            case RoleKind::outcome: ++outcomes; break;
            case RoleKind::potential_outcome: ++potential_outcomes; break;
            default: break;
        }
    }
    if (treatments > 1) throw GraphError("role conflict: more than one treatment node");
    if (intervened > 1) throw GraphError("role conflict: more than one intervened treatment node");
    if (outcomes > 1) throw GraphError("role conflict: more than one outcome node");
    if (potential_outcomes > 1) throw GraphError("role conflict: more than one potential outcome node");
    const bool twin_like = m_provenance == Provenance::twin ||
                           m_provenance == Provenance::pattern_restricted;
    if (outcomes == 1 && potential_outcomes == 1 && !twin_like) {
        throw GraphError("role conflict: both an outcome and a potential outcome outside a twin network");
    }

    // Missingness indicators <-> partial confounders: at most one factual and one
    // potential indicator each, and at least one of the two (a SWIT keeps only the
    // potential copy when the indicator descends from the treatment).
    std::map<std::string, std::array<int, 2>> indicator_count;
    for (const Node& node : m_nodes) {
        if (node.role.kind == RoleKind::confounder &&
            node.role.observability == Observability::partial && !node.role.potential) {
            indicator_count.emplace(node.name, std::array<int, 2>{0, 0});
        }
    }
    for (const Node& node : m_nodes) {
        if (node.role.kind != RoleKind::missingness_indicator) continue;
        auto it = indicator_count.find(node.role.target);
        if (it == indicator_count.end()) {
            throw GraphError("dangling missingness indicator '" + node.name +
                             "': target '" + node.role.target + "' is not a partial confounder");
        }
        if (++it->second[node.role.potential ? 1 : 0] > 1) {
            throw GraphError("partial confounder '" + node.role.target +
                             "' has more than one missingness indicator");
        }
    }
    for (const auto& [name, count] : indicator_count) {
        if (count[0] + count[1] == 0) {
            throw GraphError("partial confounder '" + name + "' has no missingness indicator");
        }
    }
}

bool CausalGraph::contains(std::string_view name) const {
    return m_index.find(name) != m_index.end();
}

std::size_t CausalGraph::index_of(std::string_view name) const {
    auto it = m_index.find(name);
    if (it == m_index.end()) throw GraphError("unknown node '" + std::string(name) + "'");
    return it->second;
}

const Node& CausalGraph::node(std::string_view name) const { return m_nodes[index_of(name)]; }

bool CausalGraph::has_edge(std::string_view from, std::string_view to) const {
    auto f = m_index.find(from);
    auto t = m_index.find(to);
    if (f == m_index.end() || t == m_index.end()) return false;
    const auto& ch = m_children[f->second];
    return std::find(ch.begin(), ch.end(), t->second) != ch.end();
}

std::vector<std::string> CausalGraph::parents(std::string_view name) const {
    std::vector<std::string> out;
    for (std::size_t p : m_parents[index_of(name)]) out.push_back(m_nodes[p].name);
    return out;
}

std::vector<std::string> CausalGraph::children(std::string_view name) const {
    std::vector<std::string> out;
    for (std::size_t c : m_children[index_of(name)]) out.push_back(m_nodes[c].name);
    return out;
}

std::vector<std::string> CausalGraph::topological_order() const {
    // Kahn's algorithm over the name-sorted node list gives a deterministic order.
    std::vector<std::size_t> indegree(m_nodes.size());
    std::set<std::size_t> ready;
    for (std::size_t v = 0; v < m_nodes.size(); ++v) {
        indegree[v] = m_parents[v].size();
        if (indegree[v] == 0) ready.insert(v);
    }
    std::vector<std::string> order;
    while (!ready.empty()) {
        std::size_t v = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(m_nodes[v].name);
        for (std::size_t c : m_children[v]) {
            if (--indegree[c] == 0) ready.insert(c);
        }
    }
    return order;
}

namespace {

std::optional<std::string> find_role(const std::vector<Node>& nodes, RoleKind kind) {
    for (const Node& n : nodes) {
        if (n.role.kind == kind) return n.name;
    }
    return std::nullopt;
}

}  // namespace

std::optional<std::string> CausalGraph::treatment() const {
    return find_role(m_nodes, RoleKind::treatment);
}

std::optional<std::string> CausalGraph::intervened_treatment() const {
    return find_role(m_nodes, RoleKind::intervened_treatment);
}

std::optional<std::string> CausalGraph::outcome() const {
    return find_role(m_nodes, RoleKind::outcome);
}

std::optional<std::string> CausalGraph::query_outcome() const {
    if (auto p = find_role(m_nodes, RoleKind::potential_outcome)) return p;
    return outcome();
}

std::vector<std::string> CausalGraph::confounders(std::optional<Observability> obs) const {
    std::vector<std::string> out;
    for (const Node& n : m_nodes) {
        if (n.role.kind != RoleKind::confounder || n.role.potential) continue;
        if (obs && n.role.observability != *obs) continue;
        out.push_back(n.name);
    }
    return out;
}

std::vector<std::string> CausalGraph::missingness_indicators() const {
    std::vector<std::string> out;
    for (const Node& n : m_nodes) {
        if (n.role.kind == RoleKind::missingness_indicator && !n.role.potential) out.push_back(n.name);
    }
    // Indicators that only exist as potential copies stand in for the factual one.
    for (const Node& n : m_nodes) {
        if (n.role.kind == RoleKind::missingness_indicator && n.role.potential &&
            indicator_for(n.role.target) == n.name) {
            out.push_back(n.name);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<std::string> CausalGraph::indicator_for(std::string_view confounder) const {
    std::optional<std::string> potential;
    for (const Node& n : m_nodes) {
        if (n.role.kind != RoleKind::missingness_indicator || n.role.target != confounder) continue;
        if (!n.role.potential) return n.name;
        potential = n.name;
    }
    return potential;
}

std::vector<std::string> CausalGraph::latents() const {
    std::vector<std::string> out;
    for (const Node& n : m_nodes) {
        if (n.role.kind == RoleKind::latent) out.push_back(n.name);
    }
    return out;
}

CausalGraph CausalGraph::with_annotations(Provenance provenance, Provenance base,
                                          std::optional<PatternRestriction> restriction,
                                          bool requires_twin) const {
    CausalGraph g = *this;
    g.m_provenance = provenance;
    g.m_base_provenance = base;
    g.m_restriction = std::move(restriction);
    g.m_requires_twin = requires_twin;
    g.validate();
    return g;
}

bool CausalGraph::operator==(const CausalGraph& other) const {
    return m_nodes == other.m_nodes && m_edges == other.m_edges &&
           m_provenance == other.m_provenance && m_restriction == other.m_restriction;
}

std::set<std::string> ancestors(const CausalGraph& graph, std::string_view node) {
    const std::size_t start = graph.index_of(node);
    std::vector<bool> seen(graph.node_count(), false);
    std::vector<std::size_t> frontier{start};
    std::set<std::string> out;
    while (!frontier.empty()) {
        std::size_t v = frontier.back();
        frontier.pop_back();
        for (std::size_t p : graph.parents(v)) {
            if (seen[p]) continue;
            seen[p] = true;
            out.insert(graph.node(p).name);
            frontier.push_back(p);
        }
    }
    return out;
}

std::set<std::string> descendants(const CausalGraph& graph, std::string_view node) {
    const std::size_t start = graph.index_of(node);
    std::vector<bool> seen(graph.node_count(), false);
    std::vector<std::size_t> frontier{start};
    std::set<std::string> out;
    while (!frontier.empty()) {
        std::size_t v = frontier.back();
        frontier.pop_back();
        for (std::size_t c : graph.children(v)) {
            if (seen[c]) continue;
            seen[c] = true;
            out.insert(graph.node(c).name);
            frontier.push_back(c);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// DSL

namespace {

enum class Tok { ident, arrow_right, arrow_left, lbrace, rbrace, end };

struct Token {
    Tok kind;
    std::string text;
    SourcePos pos;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : m_src(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_space();
            SourcePos pos = m_pos;
            if (m_i >= m_src.size()) {
                out.push_back({Tok::end, "", pos});
                return out;
            }
            char c = m_src[m_i];
            if (std::isalpha(static_cast<unsigned char>(c))) {
                std::string id;
                while (m_i < m_src.size() && (std::isalnum(static_cast<unsigned char>(m_src[m_i])) ||
                                              m_src[m_i] == '_')) {
                    id += m_src[m_i];
                    advance();
                }
                out.push_back({Tok::ident, id, pos});
            } else if (starts_with("<->")) {
                throw ParseError(pos, "<->",
                                 "bidirected edges are not supported; model unobserved common "
                                 "causes as explicit latent nodes");
            } else if (starts_with("->")) {
                advance(2);
                out.push_back({Tok::arrow_right, "->", pos});
            } else if (starts_with("<-")) {
                advance(2);
                out.push_back({Tok::arrow_left, "<-", pos});
            } else if (starts_with("--")) {
                throw ParseError(pos, "--", "undirected edges are not supported");
            } else if (c == '{') {
                advance();
                out.push_back({Tok::lbrace, "{", pos});
            } else if (c == '}') {
                advance();
                out.push_back({Tok::rbrace, "}", pos});
            } else if (c == '[') {
                throw ParseError(pos, "[",
                                 "node/edge attributes (coordinates, pos, ...) are not supported");
            } else {
                throw ParseError(pos, std::string(1, c), "unexpected character");
            }
        }
    }

private:
    bool starts_with(std::string_view s) const { return m_src.substr(m_i, s.size()) == s; }

    void advance(std::size_t k = 1) {
        for (std::size_t j = 0; j < k && m_i < m_src.size(); ++j) {
            if (m_src[m_i] == '\n') {
                ++m_pos.line;
                m_pos.column = 1;
            } else {
                ++m_pos.column;
            }
            ++m_i;
        }
    }

    void skip_space() {
        while (m_i < m_src.size()) {
            char c = m_src[m_i];
            if (c == '#') {
                while (m_i < m_src.size() && m_src[m_i] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    std::string_view m_src;
    std::size_t m_i = 0;
    SourcePos m_pos;
};

struct RoleLine {
    std::string keyword;
    std::string node;
    std::string arg;  // partial/full, target confounder, or factual name
    SourcePos pos;
};

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : m_toks(std::move(toks)) {}

    void parse_dag() {
        expect_keyword("dag");
        expect(Tok::lbrace, "'{' after 'dag'");
        while (peek().kind != Tok::rbrace) {
            if (peek().kind == Tok::end) throw error(peek(), "unterminated dag block");
            const Token& first = expect(Tok::ident, "node name");
            declare(first.text);
            std::string prev = first.text;
            while (peek().kind == Tok::arrow_right || peek().kind == Tok::arrow_left) {
                Token arrow = next();
                const Token& rhs = expect(Tok::ident, "node name after arrow");
                declare(rhs.text);
                Edge e = arrow.kind == Tok::arrow_right ? Edge{prev, rhs.text} : Edge{rhs.text, prev};
                if (e.first == e.second) throw error(arrow, "self-loop on '" + e.first + "'");
                if (!m_edge_set.insert(e).second) {
                    throw error(arrow, "duplicate edge " + e.first + " -> " + e.second);
                }
                m_edges.push_back(e);
                prev = rhs.text;
            }
        }
        next();
    }

    bool at_roles() const { return peek().kind == Tok::ident && peek().text == "roles"; }

    void parse_roles() {
        expect_keyword("roles");
        expect(Tok::lbrace, "'{' after 'roles'");
        while (peek().kind != Tok::rbrace) {
            if (peek().kind == Tok::end) throw error(peek(), "unterminated roles block");
            const Token& kw = expect(Tok::ident, "role keyword");
            RoleLine line{kw.text, "", "", kw.pos};
            const std::string& k = kw.text;
            if (k == "treatment" || k == "outcome" || k == "latent" || k == "auxiliary") {
                line.node = expect(Tok::ident, "node name").text;
            } else if (k == "intervened" || k == "potential") {
                line.node = expect(Tok::ident, "node name").text;
                if (peek().kind == Tok::ident && peek().text == "of") {
                    next();
                    line.arg = expect(Tok::ident, "factual node name").text;
                }
            } else if (k == "confounder") {
                line.node = expect(Tok::ident, "node name").text;
                const Token& obs = expect(Tok::ident, "'partial' or 'full'");
                if (obs.text != "partial" && obs.text != "full") {
                    throw error(obs, "expected 'partial' or 'full'");
                }
                line.arg = obs.text;
            } else if (k == "missing") {
                line.node = expect(Tok::ident, "indicator name").text;
                expect_keyword("of");
                line.arg = expect(Tok::ident, "confounder name").text;
            } else {
                throw error(kw, "unknown role keyword");
            }
            m_roles.push_back(std::move(line));
        }
        next();
    }

    void expect_end() {
        if (peek().kind != Tok::end) throw error(peek(), "unexpected trailing input");
    }

    std::vector<Node> build_nodes() const {
        std::map<std::string, NodeRole> roles;
        for (const auto& name : m_order) roles.emplace(name, NodeRole{});
        std::map<std::string, SourcePos> assigned;
        int treatments = 0, outcomes = 0;
        std::vector<const RoleLine*> potentials;
        for (const RoleLine& line : m_roles) {
            auto it = roles.find(line.node);
            if (it == roles.end()) {
                throw ParseError(line.pos, line.node, "role for undeclared node '" + line.node + "'");
            }
            if (!assigned.emplace(line.node, line.pos).second) {
                throw ParseError(line.pos, line.node,
                                 "role conflict: '" + line.node + "' already has a role");
            }
            NodeRole& r = it->second;
            if (line.keyword == "treatment") {
                if (++treatments > 1) {
                    throw ParseError(line.pos, line.node, "role conflict: two treatment nodes");
                }
                r.kind = RoleKind::treatment;
            } else if (line.keyword == "outcome") {
                if (++outcomes > 1) {
                    throw ParseError(line.pos, line.node, "role conflict: two outcome nodes");
                }
                r.kind = RoleKind::outcome;
            } else if (line.keyword == "latent") {
                r.kind = RoleKind::latent;
            } else if (line.keyword == "auxiliary") {
                r.kind = RoleKind::auxiliary;
            } else if (line.keyword == "intervened") {
                r.kind = RoleKind::intervened_treatment;
                r.factual = line.arg;
            } else if (line.keyword == "potential") {
                potentials.push_back(&line);
            } else if (line.keyword == "confounder") {
                r.kind = RoleKind::confounder;
                r.observability = line.arg == "partial" ? Observability::partial : Observability::full;
            } else if (line.keyword == "missing") {
                r.kind = RoleKind::missingness_indicator;
                r.target = line.arg;
            }
        }
        for (const RoleLine* line : potentials) {
            NodeRole& r = roles.at(line->node);
            if (line->arg.empty()) {
                r.kind = RoleKind::potential_outcome;
                r.potential = true;
                continue;
            }
            auto f = roles.find(line->arg);
            if (f == roles.end()) {
                throw ParseError(line->pos, line->arg, "potential copy of undeclared node");
            }
            r = f->second;
            r.potential = true;
            r.factual = line->arg;
            if (r.kind == RoleKind::outcome) r.kind = RoleKind::potential_outcome;
        }
        for (const auto& [name, r] : roles) {
            if (r.kind == RoleKind::missingness_indicator && !r.potential) {
                auto t = roles.find(r.target);
                if (t == roles.end() || t->second.kind != RoleKind::confounder ||
                    t->second.observability != Observability::partial) {
                    const RoleLine* src = nullptr;
                    for (const RoleLine& l : m_roles) {
                        if (l.node == name) src = &l;
                    }
                    throw ParseError(src ? src->pos : SourcePos{}, name,
                                     "dangling missingness indicator: '" + r.target +
                                         "' is not a declared partial confounder");
                }
            }
        }
        std::vector<Node> nodes;
        for (const auto& name : m_order) nodes.push_back(Node{name, roles.at(name)});
        return nodes;
    }

    std::vector<Edge> edges() const { return m_edges; }

    void take_roles_from(Parser& other) {
        for (auto& r : other.m_roles) m_roles.push_back(std::move(r));
    }

private:
    const Token& peek() const { return m_toks[m_i]; }
    Token next() { return m_toks[m_i < m_toks.size() - 1 ? m_i++ : m_i]; }

    const Token& expect(Tok kind, const std::string& what) {
        const Token& t = m_toks[m_i];
        if (t.kind != kind) throw error(t, "expected " + what);
        if (m_i < m_toks.size() - 1) ++m_i;
        return t;
    }

    void expect_keyword(const std::string& kw) {
        const Token& t = peek();
        if (t.kind != Tok::ident || t.text != kw) throw error(t, "expected '" + kw + "'");
        next();
    }

    static ParseError error(const Token& t, const std::string& msg) {
        return ParseError(t.pos, t.kind == Tok::end ? "<end of input>" : t.text, msg);
    }

    void declare(const std::string& name) {
        if (m_declared.insert(name).second) m_order.push_back(name);
    }

    std::vector<Token> m_toks;
    std::size_t m_i = 0;
    std::vector<std::string> m_order;
    std::set<std::string> m_declared;
    std::vector<Edge> m_edges;
    std::set<Edge> m_edge_set;
    std::vector<RoleLine> m_roles;
};

Provenance detect_provenance(const std::vector<Node>& nodes) {
    for (const Node& n : nodes) {
        if (n.role.kind == RoleKind::intervened_treatment) return Provenance::swit;
    }
    return Provenance::raw;
}

CausalGraph build(Parser& parser) {
    auto nodes = parser.build_nodes();
    Provenance prov = detect_provenance(nodes);
    return CausalGraph(std::move(nodes), parser.edges(), prov);
}

}  // namespace

CausalGraph parse_graph(std::string_view text) {
    Parser parser(Lexer(text).run());
    parser.parse_dag();
    if (parser.at_roles()) parser.parse_roles();
    parser.expect_end();
    return build(parser);
}

CausalGraph parse_graph(std::string_view text, std::string_view roles_text) {
    Parser parser(Lexer(text).run());
    parser.parse_dag();
    if (parser.at_roles()) parser.parse_roles();
    parser.expect_end();
    Parser roles(Lexer(roles_text).run());
    roles.parse_roles();
    roles.expect_end();
    parser.take_roles_from(roles);
    return build(parser);
}

std::string serialize(const CausalGraph& graph) {
    std::ostringstream out;
    out << "# provenance: " << to_string(graph.provenance());
    if (const auto& r = graph.restriction()) out << " " << r->pattern_id;
    out << "\n";
    out << "dag {\n";
    std::set<std::string> touched;
    for (const auto& [from, to] : graph.edges()) {
        touched.insert(from);
        touched.insert(to);
    }
    for (const Node& n : graph.nodes()) {
        if (!touched.count(n.name)) out << "  " << n.name << "\n";
    }
    for (const auto& [from, to] : graph.edges()) out << "  " << from << " -> " << to << "\n";
    out << "}\n";

    std::ostringstream roles;
    for (const Node& n : graph.nodes()) {
        const NodeRole& r = n.role;
        if (r.potential && !r.factual.empty()) {
            roles << "  potential " << n.name << " of " << r.factual << "\n";
            continue;
        }
        switch (r.kind) {
            case RoleKind::treatment: roles << "  treatment " << n.name << "\n"; break;
            case RoleKind::intervened_treatment:
                roles << "  intervened " << n.name;
                if (!r.factual.empty()) roles << " of " << r.factual;
                roles << "\n";
                break;
            case RoleKind::outcome: roles << "  outcome " << n.name << "\n"; break;
            case RoleKind::potential_outcome: roles << "  potential " << n.name << "\n"; break;
            case RoleKind::confounder:
                roles << "  confounder " << n.name << " "
                      << (r.observability == Observability::partial ? "partial" : "full") << "\n";
                break;
            case RoleKind::missingness_indicator:
                roles << "  missing " << n.name << " of " << r.target << "\n";
                break;
            case RoleKind::latent: roles << "  latent " << n.name << "\n"; break;
            case RoleKind::auxiliary: break;
        }
    }
    if (!roles.str().empty()) out << "roles {\n" << roles.str() << "}\n";
    return out.str();
}

}  // namespace mpa
