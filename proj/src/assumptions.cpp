#include "mpa/assumptions.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

namespace mpa {

using nlohmann::json;

std::string_view to_string(Scenario s) {
    switch (s) {
        case Scenario::I: return "I";
        case Scenario::II: return "II";
        case Scenario::III: return "III";
    }
    return "?";
}

std::vector<PatternModification> parse_pattern_mods(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw GraphError(std::string("pattern modifications: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("patterns") || !doc["patterns"].is_array()) {
        throw GraphError("pattern modifications: expected an object with a \"patterns\" array");
    }
    std::vector<PatternModification> out;
    for (const auto& entry : doc["patterns"]) {
        PatternModification mod;
        if (!entry.contains("pattern") || !entry["pattern"].is_object()) {
            throw GraphError("pattern modifications: each entry needs a \"pattern\" object");
        }
        for (const auto& [name, value] : entry["pattern"].items()) {
            if (value.is_boolean()) {
                mod.pattern[name] = value.get<bool>();
            } else if (value.is_number_integer() && (value == 0 || value == 1)) {
                mod.pattern[name] = value.get<int>() == 1;
            } else {
                throw GraphError("pattern modifications: value for '" + name + "' must be 0 or 1");
            }
        }
        if (entry.contains("removed_edges")) {
            for (const auto& e : entry["removed_edges"]) {
                if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
                    throw GraphError("pattern modifications: removed edges are [from, to] pairs");
                }
                mod.removed_edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
            }
        }
        out.push_back(std::move(mod));
    }
    return out;
}

json pattern_mods_to_json(const std::vector<PatternModification>& mods) {
    json arr = json::array();
    for (const auto& m : mods) {
        json pattern = json::object();
        for (const auto& [k, v] : m.pattern) pattern[k] = v ? 1 : 0;
        json edges = json::array();
        for (const auto& [a, b] : m.removed_edges) edges.push_back({a, b});
        arr.push_back({{"pattern", pattern}, {"removed_edges", edges}});
    }
    return json{{"patterns", arr}};
}

namespace {

CausalGraph lift_extras(const CausalGraph& g, const std::set<std::string>& extras) {
    if (extras.empty()) return g;
    std::vector<Node> nodes = g.nodes();
    for (const auto& name : extras) {
        const Node& n = g.node(name);  // throws on unknown
        switch (n.role.kind) {
            case RoleKind::treatment:
            case RoleKind::intervened_treatment:
            case RoleKind::outcome:
            case RoleKind::potential_outcome:
                throw GraphError("extra conditioning node '" + name + "' is the treatment or outcome");
            default: break;
        }
        for (auto& m : nodes) {
            if (m.name == name && m.role.kind == RoleKind::latent) m.role.kind = RoleKind::auxiliary;
        }
    }
    CausalGraph lifted(std::move(nodes), g.edges(), g.provenance());
    return lifted.with_annotations(g.provenance(), g.base_provenance(), g.restriction(),
                                   g.requires_twin_network());
}

bool indicator_descends_from_treatment(const CausalGraph& raw) {
    const auto desc = descendants(raw, *raw.treatment());
    for (const auto& r : raw.missingness_indicators()) {
        if (desc.count(r)) return true;
    }
    return false;
}

struct Names {
    std::string z, zi, y;
    std::vector<std::string> indicators, partial, full;
};

Names names_of(const CausalGraph& g) {
    Names n;
    if (!g.treatment()) throw GraphError("no treatment node declared");
    if (!g.intervened_treatment()) throw GraphError("analysis graph has no intervened treatment node");
    if (!g.query_outcome()) throw GraphError("no outcome node declared");
    n.z = *g.treatment();
    n.zi = *g.intervened_treatment();
    n.y = *g.query_outcome();
    n.indicators = g.missingness_indicators();
    for (const auto& c : g.confounders(Observability::partial)) {
        if (!g.node(c).role.potential) n.partial.push_back(c);
    }
    for (const auto& c : g.confounders(Observability::full)) {
        if (!g.node(c).role.potential) n.full.push_back(c);
    }
    return n;
}

std::string join(const std::vector<std::string>& items, const char* sep = ", ") {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += sep;
        out += s;
    }
    return out;
}

std::string statement(const std::string& a, const std::vector<std::string>& b,
                      const std::vector<std::string>& given) {
    std::string s = a + " ⊥ " + join(b);
    if (!given.empty()) s += " | " + join(given);
    return s;
}

const PatternModification* find_mod(const AssumptionSpec& spec, const std::map<std::string, bool>& p) {
    const PatternModification* found = nullptr;
    for (const auto& m : spec.pattern_mods) {
        if (m.pattern == p) {
            if (found) throw GraphError("more than one modification supplied for the same pattern");
            found = &m;
        }
    }
    return found;
}

void validate_mods(const AssumptionSpec& spec, const CausalGraph& g) {
    const auto partial = g.confounders(Observability::partial);
    for (const auto& m : spec.pattern_mods) {
        for (const auto& [name, observed] : m.pattern) {
            (void)observed;
            if (std::find(partial.begin(), partial.end(), name) == partial.end()) {
                throw GraphError("pattern modification names '" + name +
                                 "', which is not a partial confounder");
            }
        }
        find_mod(spec, m.pattern);
    }
}

std::vector<QueryVerdict> check_patterns(const AssumptionSpec& spec, Assumption which) {
    const CausalGraph g = analysis_graph(spec);
    validate_mods(spec, g);
    const Names n = names_of(g);
    const std::string& endpoint = which == Assumption::cit ? n.z : n.y;

    std::vector<QueryVerdict> out;
    for (const auto& pattern : enumerate_patterns(g)) {
        QueryVerdict v;
        v.assumption = which;
        v.pattern = pattern_id(g, pattern);

        std::vector<std::string> missing, given;
        for (const auto& [c, observed] : pattern) {
            given.push_back(*g.indicator_for(c) + "=" + (observed ? "1" : "0"));
        }
        std::set<std::string> cond;
        for (const auto& [c, observed] : pattern) {
            if (observed) {
                cond.insert(c);
                given.push_back(c);
            } else {
                missing.push_back(c);
            }
        }
        for (const auto& c : n.full) {
            cond.insert(c);
            given.push_back(c);
        }
        for (const auto& c : spec.extra_conditioning) {
            cond.insert(c);
            given.push_back(c);
        }
        cond.insert(n.zi);
        given.push_back(n.zi);

        if (missing.empty()) {
            v.holds = true;
            v.trivially_true = true;
            v.statement = endpoint + " ⊥ ∅ | " + join(given) + " (trivially true: nothing missing)";
            out.push_back(std::move(v));
            continue;
        }

        const PatternModification* supplied = find_mod(spec, pattern);
        PatternModification mod = supplied ? *supplied : PatternModification{pattern, {}};
        v.unassessed = supplied == nullptr;
        const CausalGraph restricted = restrict_to_pattern(g, mod);

        v.holds = true;
        for (const auto& w : missing) {
            QueryVerdict q = d_separated(restricted, endpoint, w, cond);
            v.holds = v.holds && q.holds;
            for (auto& p : q.witnesses) v.witnesses.push_back(std::move(p));
            v.witnesses_truncated = v.witnesses_truncated || q.witnesses_truncated;
            if (q.caution) v.caution = q.caution;
        }
        v.statement = statement(endpoint, missing, given);
        out.push_back(std::move(v));
    }
    return out;
}

// Factual view used by the structural screens: potential copies and the
// intervened node fold back onto their factual names; twin error terms drop out.
struct FactualView {
    std::map<std::string, std::set<std::string>> children;
    std::set<std::string> latents;
};

std::string factual_name(const Node& n) {
    if ((n.role.potential || n.role.kind == RoleKind::intervened_treatment) && !n.role.factual.empty()) {
        return n.role.factual;
    }
    return n.name;
}

FactualView factual_view(const CausalGraph& g) {
    FactualView view;
    std::set<std::string> error_terms;
    for (const Node& n : g.nodes()) {
        if (n.role.kind != RoleKind::latent) continue;
        std::set<std::string> targets;
        for (const auto& c : g.children(n.name)) targets.insert(factual_name(g.node(c)));
        if (g.children(n.name).size() == 2 && targets.size() == 1) {
            error_terms.insert(n.name);
        } else {
            view.latents.insert(n.name);
        }
    }
    for (const auto& [a, b] : g.edges()) {
        if (error_terms.count(a)) continue;
        view.children[factual_name(g.node(a))].insert(factual_name(g.node(b)));
    }
    return view;
}

// Directed path src -> ... -> target whose intermediate nodes avoid `avoid`.
bool reaches(const FactualView& view, const std::string& src, const std::string& target,
             const std::set<std::string>& avoid) {
    std::set<std::string> seen{src};
    std::deque<std::string> queue{src};
    while (!queue.empty()) {
        std::string v = queue.front();
        queue.pop_front();
        auto it = view.children.find(v);
        if (it == view.children.end()) continue;
        for (const auto& c : it->second) {
            if (c == target) return true;
            if (avoid.count(c) || seen.count(c)) continue;
            seen.insert(c);
            queue.push_back(c);
        }
    }
    return false;
}

bool has_edge(const FactualView& view, const std::string& a, const std::string& b) {
    auto it = view.children.find(a);
    return it != view.children.end() && it->second.count(b);
}

}  // namespace

CausalGraph analysis_graph(const AssumptionSpec& spec) {
    const CausalGraph g = lift_extras(spec.graph, spec.extra_conditioning);
    switch (g.provenance()) {
        case Provenance::raw:
            if (!g.treatment() || !g.outcome()) {
                throw GraphError("missing role assignment: treatment and outcome are required");
            }
            return indicator_descends_from_treatment(g) ? to_twin_network(g) : to_swit(g);
        case Provenance::swit:
            for (const Node& n : g.nodes()) {
                if (n.role.kind == RoleKind::missingness_indicator && n.role.potential) {
                    throw GraphError("SWIT input contains potential missingness indicator '" + n.name +
                                     "'; supply the raw diagram so a twin network can be built");
                }
            }
            return g;
        case Provenance::twin:
            return g;
        case Provenance::pattern_restricted:
            break;
    }
    throw GraphError("assumption checks need a raw diagram, SWIT or twin network, not a "
                     "pattern-restricted graph");
}

QueryVerdict check_msita(const AssumptionSpec& spec) {
    const CausalGraph g = analysis_graph(spec);
    const Names n = names_of(g);
    std::vector<std::string> given;
    for (const auto* group : {&n.indicators, &n.partial, &n.full}) {
        given.insert(given.end(), group->begin(), group->end());
    }
    given.insert(given.end(), spec.extra_conditioning.begin(), spec.extra_conditioning.end());
    given.push_back(n.zi);
    std::set<std::string> cond(given.begin(), given.end());
    QueryVerdict v = d_separated(g, n.z, n.y, cond);
    v.assumption = Assumption::msita;
    v.statement = statement(n.z, {n.y}, given);
    return v;
}

std::vector<QueryVerdict> check_cit(const AssumptionSpec& spec) {
    return check_patterns(spec, Assumption::cit);
}

std::vector<QueryVerdict> check_cio(const AssumptionSpec& spec) {
    return check_patterns(spec, Assumption::cio);
}

std::vector<ScenarioFlag> screen_scenarios(const AssumptionSpec& spec) {
    const CausalGraph g = lift_extras(spec.graph, spec.extra_conditioning);
    const FactualView view = factual_view(g);
    if (!g.treatment() || !g.query_outcome()) throw GraphError("treatment and outcome are required");
    const std::string z = *g.treatment();
    const std::string y = factual_name(g.node(*g.query_outcome()));

    std::set<std::string> conditioned(spec.extra_conditioning.begin(), spec.extra_conditioning.end());
    std::map<std::string, std::string> indicator_of;  // indicator -> confounder (factual names)
    for (const Node& n : g.nodes()) {
        if (n.role.kind == RoleKind::confounder) conditioned.insert(factual_name(n));
        if (n.role.kind == RoleKind::missingness_indicator) {
            indicator_of[factual_name(n)] = n.role.target;
            conditioned.insert(factual_name(n));
        }
    }
    auto avoid = [&](std::initializer_list<std::string> extra) {
        std::set<std::string> s = conditioned;
        s.insert(extra.begin(), extra.end());
        return s;
    };
    std::set<std::string> all_nodes;
    for (const auto& [a, cs] : view.children) {
        all_nodes.insert(a);
        all_nodes.insert(cs.begin(), cs.end());
    }

    std::vector<ScenarioFlag> flags;
    for (const auto& [r, x] : indicator_of) {
        if (has_edge(view, y, r)) {
            flags.push_back({Scenario::I, {y, r},
                             "outcome " + y + " causes missingness indicator " + r, true});
        }

        std::vector<std::string> y_side, z_side;
        for (const auto& l : view.latents) {
            if (reaches(view, l, r, avoid({z, y})) && reaches(view, l, y, avoid({z, r}))) {
                y_side.push_back(l);
            }
        }
        for (const auto& w : all_nodes) {
            if (conditioned.count(w) || w == z || w == y || w == r) continue;
            if (reaches(view, w, z, avoid({r, y})) && reaches(view, w, r, avoid({z, y}))) {
                z_side.push_back(w);
            }
        }
        if (!y_side.empty() && !z_side.empty()) {
            std::vector<std::string> nodes = y_side;
            nodes.insert(nodes.end(), z_side.begin(), z_side.end());
            nodes.push_back(r);
            flags.push_back({Scenario::II, nodes,
                             "unmeasured " + join(y_side) + " cause(s) both " + r + " and " + y +
                                 ", and " + join(z_side) + " cause(s) both " + r + " and " + z +
                                 " outside the conditioning set",
                             false});
        }

        if (has_edge(view, x, r) && has_edge(view, z, r)) {
            std::vector<std::string> variants;
            for (const auto& pattern : enumerate_patterns(g)) {
                if (pattern.at(x)) continue;
                const PatternModification* mod = nullptr;
                for (const auto& m : spec.pattern_mods) {
                    if (m.pattern == pattern) mod = &m;
                }
                bool removed = mod && std::find(mod->removed_edges.begin(), mod->removed_edges.end(),
                                                Edge{x, y}) != mod->removed_edges.end();
                const std::string id = pattern_id(g, pattern);
                if (has_edge(view, x, y) && !removed) variants.push_back("direct " + x + " -> " + y + " in " + id);
                for (const auto& l : view.latents) {
                    if (has_edge(view, l, x) && reaches(view, l, y, avoid({z}))) {
                        variants.push_back("latent common cause " + l + " of " + x + " and " + y + " in " + id);
                    }
                }
            }
            if (!variants.empty()) {
                flags.push_back({Scenario::III, {x, z, r, y},
                                 x + " and " + z + " both cause " + r + ", and " + x +
                                     " stays associated with " + y + " when missing (" + join(variants, "; ") +
                                     "); whether a latent association counts is ambiguous, both are flagged",
                                 false});
            }
        }
    }
    return flags;
}

FrameworkReport run_framework(const AssumptionSpec& spec) {
    FrameworkReport rep;
    rep.assertions = spec.pattern_mods;
    rep.extra_conditioning = spec.extra_conditioning;
    rep.scenario_flags = screen_scenarios(spec);
    const CausalGraph g = analysis_graph(spec);
    rep.twin_network = g.provenance() == Provenance::twin;
    rep.msita = check_msita(spec);
    rep.cit = check_cit(spec);
    rep.cio = check_cio(spec);

    bool all_cit = true, all_cio = true, all_ok = true;
    for (std::size_t i = 0; i < rep.cit.size(); ++i) {
        PatternOutcome p{*rep.cit[i].pattern, rep.cit[i].holds, rep.cio[i].holds,
                         rep.cit[i].trivially_true, rep.cit[i].unassessed};
        all_cit = all_cit && p.cit;
        all_cio = all_cio && p.cio;
        all_ok = all_ok && p.ok();
        rep.patterns.push_back(p);
    }

    const bool decisive = std::any_of(rep.scenario_flags.begin(), rep.scenario_flags.end(),
                                      [](const ScenarioFlag& f) { return f.decisive; });
    if (decisive) {
        rep.failed_step = 2;
    } else if (!rep.msita.holds) {
        rep.failed_step = 3;
    } else if (!all_ok) {
        rep.failed_step = 4;
    }
    rep.admissible = !rep.failed_step;
    if (rep.admissible) {
        rep.route = all_cit && all_cio ? "CIT and CIO" : all_cit ? "CIT" : all_cio ? "CIO" : "mixed";
    }
    return rep;
}

namespace {

constexpr std::size_t kMaxReportedWitnesses = 200;

json path_json(const PathReport& p) {
    json blocking = json::array();
    for (const auto& [n, reason] : p.blocking_nodes) {
        blocking.push_back({{"node", n}, {"reason", std::string(to_string(reason))}});
    }
    json opening = json::array();
    for (const auto& [n, via] : p.opening_colliders) {
        opening.push_back({{"node", n}, {"via", std::string(to_string(via))}});
    }
    return {{"path", p.render()},
            {"nodes", p.nodes},
            {"status", p.open ? "open" : "blocked"},
            {"blocking_nodes", blocking},
            {"opening_colliders", opening}};
}

}  // namespace

json to_json(const QueryVerdict& v) {
    json witnesses = json::array();
    for (std::size_t i = 0; i < v.witnesses.size() && i < kMaxReportedWitnesses; ++i) {
        witnesses.push_back(path_json(v.witnesses[i]));
    }
    json out{{"assumption", v.assumption ? json(std::string(to_string(*v.assumption))) : json()},
             {"pattern", v.pattern ? json(*v.pattern) : json()},
             {"holds", v.holds},
             {"statement", v.statement},
             {"trivially_true", v.trivially_true},
             {"unassessed", v.unassessed},
             {"caution", v.caution ? json(std::string(to_string(*v.caution))) : json()},
             {"witness_count", v.witnesses.size()},
             {"witnesses_truncated", v.witnesses_truncated || v.witnesses.size() > kMaxReportedWitnesses},
             {"witnesses", witnesses}};
    return out;
}

json to_json(const FrameworkReport& r) {
    json flags = json::array();
    for (const auto& f : r.scenario_flags) {
        flags.push_back({{"scenario", std::string(to_string(f.scenario))},
                         {"nodes", f.nodes},
                         {"detail", f.detail},
                         {"decisive", f.decisive}});
    }
    json verdicts = json::array();
    verdicts.push_back(to_json(r.msita));
    for (const auto& v : r.cit) verdicts.push_back(to_json(v));
    for (const auto& v : r.cio) verdicts.push_back(to_json(v));
    json patterns = json::array();
    for (const auto& p : r.patterns) {
        patterns.push_back({{"pattern", p.pattern},
                            {"cit", p.cit},
                            {"cio", p.cio},
                            {"trivially_true", p.trivially_true},
                            {"unassessed", p.unassessed}});
    }
    return {{"admissible", r.admissible},
            {"failed_step", r.failed_step ? json(*r.failed_step) : json()},
            {"route", r.route},
            {"twin_network", r.twin_network},
            {"assertions", pattern_mods_to_json(r.assertions)["patterns"]},
            {"extra_conditioning", r.extra_conditioning},
            {"scenario_flags", flags},
            {"verdicts", verdicts},
            {"patterns", patterns}};
}

namespace {

void write_verdict(std::ostream& os, const std::string& label, const QueryVerdict& v) {
    os << "  " << label << ": " << (v.holds ? "holds" : "violated");
    if (v.trivially_true) os << " (trivially)";
    if (v.unassessed) os << " [unassessed: no modification supplied]";
    os << "\n    " << v.statement << "\n";
    constexpr std::size_t shown = 10;
    for (std::size_t i = 0; i < v.witnesses.size() && i < shown; ++i) {
        os << "    open path: " << v.witnesses[i].render() << "\n";
    }
    if (v.witnesses.size() > shown) os << "    ... " << v.witnesses.size() - shown << " more open paths\n";
    if (v.caution) {
        os << "    caution: d-separation is not complete on twin networks; treat this "
              "non-separation as suspect rather than proven\n";
    }
}

}  // namespace

std::string narrative(const FrameworkReport& r) {
    std::ostringstream os;
    os << "Step 1: confounder-only-when-observed assertions\n";
    if (r.assertions.empty()) os << "  none supplied\n";
    for (const auto& m : r.assertions) {
        os << "  pattern";
        for (const auto& [c, obs] : m.pattern) os << " " << c << (obs ? "=observed" : "=missing");
        os << ": ";
        if (m.removed_edges.empty()) os << "no arrows removed";
        for (std::size_t i = 0; i < m.removed_edges.size(); ++i) {
            os << (i ? ", " : "removed ") << m.removed_edges[i].first << " -> " << m.removed_edges[i].second;
        }
        os << "\n";
    }
    if (!r.extra_conditioning.empty()) {
        std::vector<std::string> extra(r.extra_conditioning.begin(), r.extra_conditioning.end());
        os << "  additionally conditioning on: " << join(extra) << "\n";
    }

    os << "Step 2: key scenarios\n";
    if (r.scenario_flags.empty()) os << "  none matched\n";
    for (const auto& f : r.scenario_flags) {
        os << "  scenario " << to_string(f.scenario) << (f.decisive ? " (fails the framework)" : " (flag)")
           << ": " << f.detail << "\n";
    }

    os << "Step 3: mSITA on the " << (r.twin_network ? "twin network" : "SWIT") << "\n";
    write_verdict(os, "mSITA", r.msita);

    os << "Step 4: CIT / CIO by missingness pattern\n";
    for (std::size_t i = 0; i < r.cit.size(); ++i) {
        write_verdict(os, "CIT [" + *r.cit[i].pattern + "]", r.cit[i]);
        write_verdict(os, "CIO [" + *r.cio[i].pattern + "]", r.cio[i]);
    }

    os << "Conclusion: ";
    if (r.admissible) {
        os << "admissible via " << r.route;
    } else {
        static const char* reasons[] = {"", "", "key scenario I present", "mSITA violated",
                                        "a pattern satisfies neither CIT nor CIO"};
        os << "inadmissible at step " << *r.failed_step << " (" << reasons[*r.failed_step] << ")";
    }
    os << "\n";
    return os.str();
}

}  // namespace mpa
