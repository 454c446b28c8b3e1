#include "mpa/simulator.hpp"

#include "mpa/assumptions.hpp"
#include "mpa/bundled.hpp"
#include "mpa/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace mpa {

using nlohmann::json;

namespace {

double logistic(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

struct Term {
    std::size_t parent;
    double coef;
    long indicator = -1;  // pattern-specific coefficient applies while this node is 0
    double alt = 0.0;
};

struct CNode {
    enum Kind { latent, binary, continuous } kind = latent;
    double intercept = 0, sd = 1;
    std::vector<Term> terms;
    bool z_descendant = false;
};

// Scenario lowered to index form for the per-row loop.
struct Compiled {
    std::vector<CNode> nodes;
    std::vector<std::size_t> order;
    std::size_t z = 0, y = 0;
    std::vector<std::size_t> exported;
    std::vector<long> mask;  // indicator node per exported column, -1 when full
    DataSpec spec;
    std::vector<std::string> confounders;
};

double linear(const CNode& node, const std::vector<double>& v) {
    double eta = node.intercept;
    for (const auto& t : node.terms) {
        const bool use_alt = t.indicator >= 0 && v[static_cast<std::size_t>(t.indicator)] == 0.0;
        eta += (use_alt ? t.alt : t.coef) * v[t.parent];
    }
    return eta;
}

Compiled compile(const ScenarioSpec& spec) {
    const CausalGraph& g = spec.graph;
    if (g.provenance() != Provenance::raw) throw ScenarioError(spec.name + ": scenario graphs must be raw diagrams");
    const auto z = g.treatment();
    const auto y = g.outcome();
    if (!z || !y) throw ScenarioError(spec.name + ": graph needs a treatment and an outcome");

    Compiled c;
    c.z = g.index_of(*z);
    c.y = g.index_of(*y);
    c.nodes.resize(g.node_count());
    std::vector<std::vector<std::size_t>> order_parents(g.node_count());

    for (std::size_t v = 0; v < g.node_count(); ++v) {
        const Node& node = g.node(v);
        CNode& out = c.nodes[v];
        order_parents[v] = g.parents(v);
        auto it = spec.mechanisms.find(node.name);
        if (node.role.kind == RoleKind::latent) {
            if (it != spec.mechanisms.end()) {
                throw ScenarioError(spec.name + ": latent node '" + node.name + "' is exogenous N(0,1); remove its mechanism");
            }
            if (!g.parents(v).empty()) throw ScenarioError(spec.name + ": latent node '" + node.name + "' has parents");
            continue;
        }
        if (it == spec.mechanisms.end()) throw ScenarioError(spec.name + ": no mechanism for node '" + node.name + "'");
        const Mechanism& m = it->second;
        const bool must_be_binary = v == c.z || v == c.y || node.role.kind == RoleKind::missingness_indicator;
        if (must_be_binary && m.type != NodeType::binary) {
            throw ScenarioError(spec.name + ": node '" + node.name + "' must be binary");
        }
        out.kind = m.type == NodeType::binary ? CNode::binary : CNode::continuous;
        out.intercept = m.intercept;
        out.sd = m.noise_sd;
        if (!std::isfinite(m.intercept) || !(m.noise_sd > 0) || !std::isfinite(m.noise_sd)) {
            throw ScenarioError(spec.name + ": node '" + node.name + "' has a non-finite intercept or noise");
        }
        const auto parents = g.parents(node.name);
        for (const auto& p : parents) {
            if (!m.coef.count(p)) {
                throw ScenarioError(spec.name + ": edge " + p + " -> " + node.name + " has no coefficient");
            }
        }
        for (const auto& [p, b] : m.coef) {
            if (std::find(parents.begin(), parents.end(), p) == parents.end()) {
                throw ScenarioError(spec.name + ": mechanism of '" + node.name + "' references non-parent '" + p + "'");
            }
            if (!std::isfinite(b)) throw ScenarioError(spec.name + ": non-finite coefficient on " + p + " -> " + node.name);
            out.terms.push_back(Term{g.index_of(p), b});
        }
        for (const auto& pc : m.when_missing) {
            auto term = std::find_if(out.terms.begin(), out.terms.end(),
                                     [&](const Term& t) { return g.node(t.parent).name == pc.parent; });
            if (term == out.terms.end()) {
                throw ScenarioError(spec.name + ": pattern coefficient on non-parent '" + pc.parent + "' of '" +
                                    node.name + "'");
            }
            if (!g.contains(pc.indicator) ||
                g.node(pc.indicator).role.kind != RoleKind::missingness_indicator) {
                throw ScenarioError(spec.name + ": '" + pc.indicator + "' is not a missingness indicator");
            }
            if (term->indicator >= 0) {
                throw ScenarioError(spec.name + ": two pattern coefficients on " + pc.parent + " -> " + node.name);
            }
            term->indicator = static_cast<long>(g.index_of(pc.indicator));
            term->alt = pc.coefficient;
            order_parents[v].push_back(g.index_of(pc.indicator));
        }
    }
    for (const auto& [name, m] : spec.mechanisms) {
        if (!g.contains(name)) throw ScenarioError(spec.name + ": mechanism for unknown node '" + name + "'");
    }

    // Generation order over the graph edges plus indicator -> child wiring.
    std::vector<int> indeg(g.node_count(), 0);
    std::vector<std::vector<std::size_t>> kids(g.node_count());
    for (std::size_t v = 0; v < g.node_count(); ++v) {
        std::set<std::size_t> uniq(order_parents[v].begin(), order_parents[v].end());
        indeg[v] = static_cast<int>(uniq.size());
        for (auto p : uniq) kids[p].push_back(v);
    }
    std::vector<std::size_t> ready;
    for (std::size_t v = 0; v < g.node_count(); ++v) {
        if (indeg[v] == 0) ready.push_back(v);
    }
    while (!ready.empty()) {
        std::sort(ready.begin(), ready.end(), std::greater<>());
        const auto v = ready.back();
        ready.pop_back();
        c.order.push_back(v);
        for (auto k : kids[v]) {
            if (--indeg[k] == 0) ready.push_back(k);
        }
    }
    if (c.order.size() != g.node_count()) {
        std::string stuck;
        for (std::size_t v = 0; v < g.node_count(); ++v) {
            if (indeg[v] > 0) stuck += (stuck.empty() ? "" : ", ") + g.node(v).name;
        }
        throw ScenarioError(spec.name + ": pattern-specific coefficients need an indicator generated before its "
                                        "consumers, but the wiring creates a cycle through " + stuck);
    }

    // Treatment descendants over the generation graph (wiring included) are
    // evaluated separately in each intervened world.
    for (auto v : c.order) {
        for (auto p : order_parents[v]) {
            if (p == c.z || c.nodes[p].z_descendant) c.nodes[v].z_descendant = true;
        }
    }

    c.spec.treatment = *z;
    c.spec.outcome = *y;
    for (std::size_t v = 0; v < g.node_count(); ++v) {
        const Node& node = g.node(v);
        if (v == c.z || v == c.y || node.role.kind == RoleKind::latent ||
            node.role.kind == RoleKind::missingness_indicator) {
            continue;
        }
        CovariateSpec cov;
        cov.name = node.name;
        cov.type = c.nodes[v].kind == CNode::binary ? CovariateType::binary : CovariateType::continuous;
        cov.partial = node.role.kind == RoleKind::confounder && node.role.observability == Observability::partial;
        long ind = -1;
        if (cov.partial) {
            const auto r = g.indicator_for(node.name);
            if (!r) throw ScenarioError(spec.name + ": partial confounder '" + node.name + "' has no indicator");
            ind = static_cast<long>(g.index_of(*r));
        }
        if (node.role.kind == RoleKind::confounder) c.confounders.push_back(node.name);
        c.exported.push_back(v);
        c.mask.push_back(ind);
        c.spec.covariates.push_back(std::move(cov));
    }
    return c;
}

struct RowState {
    std::vector<double> f, w0, w1;
    double propensity = 0, py0 = 0, py1 = 0;
};

// One row in the factual world and both intervened worlds, sharing every
// exogenous draw.
void draw_row(const Compiled& c, std::mt19937_64& rng, RowState& s) {
    std::normal_distribution<double> norm;
    std::uniform_real_distribution<double> unif;
    for (auto v : c.order) {
        const CNode& node = c.nodes[v];
        if (node.kind == CNode::latent) {
            s.f[v] = s.w0[v] = s.w1[v] = norm(rng);
            continue;
        }
        if (v == c.z) {
            s.propensity = logistic(linear(node, s.f));
            s.f[v] = unif(rng) < s.propensity ? 1.0 : 0.0;
            s.w0[v] = 0.0;
            s.w1[v] = 1.0;
            continue;
        }
        const double noise = node.kind == CNode::binary ? unif(rng) : node.sd * norm(rng);
        auto eval = [&](const std::vector<double>& vals) {
            const double eta = linear(node, vals);
            return node.kind == CNode::binary ? (noise < logistic(eta) ? 1.0 : 0.0) : eta + noise;
        };
        if (v == c.y) {
            s.py0 = logistic(linear(node, s.w0));
            s.py1 = logistic(linear(node, s.w1));
        }
        if (!node.z_descendant) {
            s.f[v] = s.w0[v] = s.w1[v] = eval(s.f);
        } else {
            s.f[v] = eval(s.f);
            s.w0[v] = eval(s.w0);
            s.w1[v] = eval(s.w1);
        }
    }
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
    return std::mt19937_64(seq);
}

}  // namespace

void validate(const ScenarioSpec& spec) { (void)compile(spec); }

double population_ate(const ScenarioSpec& spec, std::size_t draws, std::uint64_t seed) {
    const Compiled c = compile(spec);
    if (spec.truth == TruthMode::analytic) {
        const CNode& y = c.nodes[c.y];
        double b = 0;
        for (const auto& t : y.terms) {
            if (t.parent != c.z || t.indicator >= 0) {
                throw ScenarioError(spec.name + ": analytic truth needs an outcome that depends on treatment only");
            }
            b = t.coef;
        }
        return logistic(y.intercept + b) - logistic(y.intercept);
    }
    auto rng = make_rng(seed, 0x7f4a7c15U);
    RowState s{std::vector<double>(c.nodes.size()), std::vector<double>(c.nodes.size()),
               std::vector<double>(c.nodes.size())};
    double sum = 0;
    for (std::size_t i = 0; i < draws; ++i) {
        draw_row(c, rng, s);
        sum += s.py1 - s.py0;
    }
    return sum / static_cast<double>(draws);
}

SimOutput generate(const ScenarioSpec& spec, std::size_t n, std::uint64_t seed, const SimOptions& opts) {
    const Compiled c = compile(spec);
    auto rng = make_rng(seed, 0);
    RowState s{std::vector<double>(c.nodes.size()), std::vector<double>(c.nodes.size()),
               std::vector<double>(c.nodes.size())};
    SimOutput out;
    out.seed = seed;
    out.n = n;
    std::vector<int> z(n), y(n);
    std::vector<std::vector<double>> cols(c.exported.size(), std::vector<double>(n));
    out.y0.resize(n);
    out.y1.resize(n);
    out.propensity.resize(n);
    double effect = 0;
    std::size_t outside = 0;
    for (std::size_t i = 0; i < n; ++i) {
        draw_row(c, rng, s);
        z[i] = static_cast<int>(s.f[c.z]);
        y[i] = static_cast<int>(s.f[c.y]);
        out.y0[i] = static_cast<int>(s.w0[c.y]);
        out.y1[i] = static_cast<int>(s.w1[c.y]);
        out.propensity[i] = s.propensity;
        effect += out.y1[i] - out.y0[i];
        if (s.propensity < 0.02 || s.propensity > 0.98) ++outside;
        for (std::size_t k = 0; k < c.exported.size(); ++k) {
            const bool masked = c.mask[k] >= 0 && s.f[static_cast<std::size_t>(c.mask[k])] == 0.0;
            cols[k][i] = masked ? kMissing : s.f[c.exported[k]];
        }
    }
    out.true_ate = n ? effect / static_cast<double>(n) : 0.0;
    if (outside) {
        out.warnings.push_back(std::to_string(outside) + " rows have a true propensity outside [0.02, 0.98]");
    }
    out.data = Dataset(c.spec, std::move(z), std::move(y), std::move(cols));
    if (opts.population_truth) {
        out.population_ate = population_ate(spec, spec.truth == TruthMode::analytic ? 0 : 10 * n, seed);
    }
    out.config.data = c.spec;
    out.config.terms = c.confounders;
    out.config.method = Method::mpa;
    return out;
}

std::string oracle_csv(const SimOutput& out) {
    std::ostringstream ss;
    ss.precision(17);
    ss << "row,Y0,Y1,propensity\n";
    for (std::size_t i = 0; i < out.n; ++i) {
        ss << i + 1 << "," << out.y0[i] << "," << out.y1[i] << "," << out.propensity[i] << "\n";
    }
    return ss.str();
}

CausalGraph unsplit(const CausalGraph& swit) {
    const auto treatment = swit.treatment();
    const auto intervened = swit.intervened_treatment();
    if (!treatment || !intervened) throw ScenarioError("unsplit: graph has no intervened treatment node");
    std::map<std::string, std::string> rename;
    std::vector<Node> nodes;
    for (const auto& n : swit.nodes()) {
        if (n.name == *intervened) continue;
        Node copy = n;
        if (copy.role.potential) {
            if (!copy.role.factual.empty()) rename[n.name] = copy.role.factual;
            copy.name = copy.role.factual.empty() ? n.name : copy.role.factual;
            if (copy.role.kind == RoleKind::potential_outcome) copy.role.kind = RoleKind::outcome;
            copy.role.potential = false;
            copy.role.factual.clear();
        }
        nodes.push_back(std::move(copy));
    }
    rename[*intervened] = *treatment;
    auto name = [&](const std::string& s) {
        auto it = rename.find(s);
        return it == rename.end() ? s : it->second;
    };
    for (auto& n : nodes) {
        if (n.role.kind == RoleKind::missingness_indicator) n.role.target = name(n.role.target);
    }
    std::vector<Edge> edges;
    for (const auto& [a, b] : swit.edges()) edges.emplace_back(name(a), name(b));
    return CausalGraph(std::move(nodes), std::move(edges), Provenance::raw);
}

namespace {

struct Defaults {
    double observed = 0.6;
    double latent = 0.4;
    double into_indicator = 1.0;
    double effect = 0.6;  // treatment -> outcome
    double treatment_intercept = -0.3;
    double outcome_intercept = -0.8;
    double indicator_intercept = 0.8;
    double other_intercept = -0.3;
};

using EdgeCoef = std::map<Edge, double>;

// Mechanisms from defaults plus overrides; edges a mod removes from a
// missing confounder get coefficient 0 in that pattern.
ScenarioSpec build(std::string name, std::string description, const CausalGraph& g,
                   std::vector<PatternModification> mods, const Defaults& d, const EdgeCoef& overrides = {},
                   const std::map<std::string, double>& intercepts = {},
                   const std::map<std::string, NodeType>& types = {}) {
    ScenarioSpec s;
    s.name = std::move(name);
    s.description = std::move(description);
    s.graph = g;
    s.mods = std::move(mods);
    const auto z = *g.treatment();
    const auto y = *g.outcome();
    for (const auto& node : g.nodes()) {
        if (node.role.kind == RoleKind::latent) continue;
        Mechanism m;
        if (auto t = types.find(node.name); t != types.end()) m.type = t->second;
        const bool indicator = node.role.kind == RoleKind::missingness_indicator;
        m.intercept = node.name == z   ? d.treatment_intercept
                      : node.name == y ? d.outcome_intercept
                      : indicator      ? d.indicator_intercept
                      : m.type == NodeType::continuous ? 0.0
                                                       : d.other_intercept;
        if (auto it = intercepts.find(node.name); it != intercepts.end()) m.intercept = it->second;
        for (const auto& p : g.parents(node.name)) {
            double b = indicator                               ? d.into_indicator
                       : p == z && node.name == y              ? d.effect
                       : g.node(p).role.kind == RoleKind::latent ? d.latent
                                                                 : d.observed;
            if (auto it = overrides.find({p, node.name}); it != overrides.end()) b = it->second;
            m.coef[p] = b;
        }
        s.mechanisms[node.name] = std::move(m);
    }
    for (const auto& mod : s.mods) {
        for (const auto& [a, b] : mod.removed_edges) {
            auto it = mod.pattern.find(a);
            if (it == mod.pattern.end() || it->second) {
                throw ScenarioError(s.name + ": removed edge " + a + " -> " + b +
                                    " must leave a confounder that is missing in the pattern");
            }
            auto& wm = s.mechanisms.at(b).when_missing;
            const auto ind = *g.indicator_for(a);
            const bool dup = std::any_of(wm.begin(), wm.end(), [&](const auto& pc) { return pc.parent == a; });
            if (!dup) wm.push_back({a, ind, 0.0});
        }
    }
    return s;
}

CausalGraph dsl(const std::string& text) { return parse_graph(text); }

const char* kRoles = " roles { treatment Z outcome Y confounder X partial missing R of X ";

std::vector<ScenarioSpec> make_library() {
    std::vector<ScenarioSpec> lib;
    const std::vector<PatternModification> no_xz{PatternModification{{{"X", false}}, {{"X", "Z"}}}};

    {
        auto s = build("null", "no confounding: X and R are unrelated to treatment and outcome",
                       dsl(std::string("dag { Z -> Y X R }") + kRoles + "}"), {}, Defaults{},
                       {{{"Z", "Y"}, 0.7}}, {{"Y", -0.5}});
        s.truth = TruthMode::analytic;
        s.mpa_consistent = true;
        lib.push_back(std::move(s));
    }
    const std::string fig1 = "dag { X -> Z X -> Y Z -> Y R <- U_Z -> Z R <- U_Y -> Y }";
    const EdgeCoef fig1_coef{{{"U_Z", "R"}, 1.2}, {{"U_Y", "R"}, 1.2}, {{"U_Z", "Z"}, 0.6},
                             {{"X", "Z"}, 0.8},   {{"X", "Y"}, 0.8},   {{"U_Y", "Y"}, 0.8}};
    {
        // X -> Y negative so the omitted-X and collider biases do not cancel.
        EdgeCoef coef = fig1_coef;
        coef[{"X", "Y"}] = -0.8;
        auto s = build("fig1", "X -> Z kept when X is missing; R shares latent causes with Z (U_Z) and Y (U_Y)",
                       dsl(fig1 + kRoles + "latent U_Z latent U_Y }"), {}, Defaults{}, coef,
                       {{"Y", -1.0}, {"X", -0.3}, {"R", 0.7}});
        s.mpa_consistent = false;
        lib.push_back(std::move(s));
    }
    {
        auto s = build("fig2", "X -> Z absent when X is missing; R shares a latent cause with Y only (CIT holds, CIO fails)",
                       dsl(std::string("dag { X -> Z X -> Y Z -> Y R <- U_Y -> Y }") + kRoles + "latent U_Y }"),
                       no_xz, Defaults{},
                       {{{"X", "Z"}, 1.0}, {{"U_Y", "R"}, 1.2}, {{"X", "Y"}, 0.8}, {{"U_Y", "Y"}, 0.8}},
                       {{"Z", -0.4}, {"Y", -1.0}, {"X", -0.3}, {"R", 0.7}});
        s.mpa_consistent = true;
        lib.push_back(std::move(s));
    }
    {
        auto s = build("dust_mite", "X affects the outcome only when measured (X -> Y absent when missing): CIO holds, CIT fails",
                       dsl(std::string("dag { X -> Z X -> Y Z -> Y R }") + kRoles + "}"),
                       {PatternModification{{{"X", false}}, {{"X", "Y"}}}}, Defaults{},
                       {{{"X", "Z"}, 1.0}, {{"X", "Y"}, 1.0}});
        s.mpa_consistent = true;
        lib.push_back(std::move(s));
    }
    {
        auto s = build("violation_I", "the outcome causes missingness (Y -> R)",
                       dsl(std::string("dag { X -> Z X -> Y Z -> Y Y -> R }") + kRoles + "}"), {}, Defaults{},
                       {{{"Y", "R"}, 2.0}, {{"X", "Z"}, 0.8}, {{"X", "Y"}, 0.8}}, {{"R", 0.0}, {"Y", -1.0}});
        s.mpa_consistent = false;
        lib.push_back(std::move(s));
    }
    {
        auto s = build("violation_II", "latent causes of treatment (U_Z) and outcome (U_Y) both cause missingness",
                       dsl(fig1 + kRoles + "latent U_Z latent U_Y }"), no_xz, Defaults{}, fig1_coef,
                       {{"Y", -1.0}, {"X", -0.3}, {"R", 0.7}});
        s.mpa_consistent = false;
        lib.push_back(std::move(s));
    }
    {
        auto s = build("violation_III", "X and Z both cause missingness while X -> Y is retained",
                       dsl(std::string("dag { X -> Z X -> Y Z -> Y X -> R Z -> R }") + kRoles + "}"), {}, Defaults{},
                       {{{"X", "R"}, 1.2}, {{"Z", "R"}, -1.2}, {{"X", "Z"}, 0.9}, {{"X", "Y"}, 1.0}},
                       {{"R", 0.5}, {"Y", -1.0}});
        s.mpa_consistent = false;
        lib.push_back(std::move(s));
    }
    {
        Defaults d;
        d.observed = 0.4;
        d.latent = 0.5;
        d.into_indicator = 0.6;
        d.effect = 0.5;
        d.treatment_intercept = -0.8;
        d.outcome_intercept = -2.0;
        d.indicator_intercept = 0.3;
        d.other_intercept = -0.5;
        auto s = build("motivating",
                       "ACE inhibitor prescription and AKI with partially observed CKD and ethnicity; "
                       "each missing confounder has no arrow into treatment in its pattern",
                       unsplit(parse_graph(bundled::motivating_dag)), parse_pattern_mods(bundled::motivating_mods), d,
                       {}, {}, {{"Age", NodeType::continuous}});
        s.mpa_consistent = true;
        lib.push_back(std::move(s));
    }
    {
        auto s = build("mind_vs_mpa",
                       "fully observed C whose effect on treatment differs by the missingness of X (gamma_1 != gamma_0)",
                       dsl(std::string("dag { X -> Z X -> Y Z -> Y C -> Z C -> Y R }") + kRoles + "confounder C full }"),
                       no_xz, Defaults{},
                       {{{"X", "Z"}, 1.0}, {{"C", "Z"}, -0.5}, {{"C", "Y"}, 0.0}, {{"X", "Y"}, 0.8}},
                       {{"Z", -0.3}, {"Y", -1.2}, {"R", 0.0}});
        // C matters more for treatment and outcome where X is missing; a pooled
        // C coefficient cannot represent that.
        s.mechanisms.at("Z").when_missing.push_back({"C", "R", 2.0});
        s.mechanisms.at("Y").when_missing.push_back({"C", "R", 2.0});
        s.mpa_consistent = true;
        lib.push_back(std::move(s));
    }
    {
        auto s = build("single_partial", "one continuous partial confounder missing at random given itself",
                       dsl(std::string("dag { X -> Z X -> Y Z -> Y X -> R }") + kRoles + "}"), no_xz, Defaults{},
                       {{{"X", "Z"}, 0.5}, {{"X", "Y"}, 0.5}, {{"X", "R"}, 0.5}}, {{"R", 0.5}},
                       {{"X", NodeType::continuous}});
        // R depends on X, and X -> Z is absent when missing: MPA valid via CIT.
        s.mpa_consistent = true;
        lib.push_back(std::move(s));
    }

    for (const auto& entry : violation_catalog()) {
        const CausalGraph g = entry.graph();
        Defaults d;
        auto s = build("catalog/" + entry.id, entry.description, g, {entry.mod}, d);
        try {
            validate(s);
        } catch (const ScenarioError&) {
            // R is generated after the edge's target: the subgroup-specific
            // coefficient cannot be realised, so every arrow stays active.
            s = build("catalog/" + entry.id,
                      entry.description + " (the " + entry.mod.removed_edges[0].first + " -> " +
                          entry.mod.removed_edges[0].second + " removal is not realisable: R follows it)",
                      g, {}, d);
        }
        s.mpa_consistent = false;
        lib.push_back(std::move(s));
    }
    for (const auto& s : lib) validate(s);
    return lib;
}

json mechanism_to_json(const Mechanism& m) {
    json wm = json::array();
    for (const auto& pc : m.when_missing) {
        wm.push_back({{"parent", pc.parent}, {"indicator", pc.indicator}, {"coef", pc.coefficient}});
    }
    json j{{"type", m.type == NodeType::binary ? "binary" : "continuous"},
           {"intercept", m.intercept},
           {"coef", m.coef},
           {"when_missing", wm}};
    if (m.type == NodeType::continuous) j["noise_sd"] = m.noise_sd;
    return j;
}

}  // namespace

const std::vector<ScenarioSpec>& scenario_library() {
    static const std::vector<ScenarioSpec> lib = make_library();
    return lib;
}

const ScenarioSpec& find_scenario(const std::string& name) {
    for (const auto& s : scenario_library()) {
        if (s.name == name) return s;
    }
    std::string names;
    for (const auto& s : scenario_library()) names += "\n  " + s.name;
    throw ScenarioError("unknown scenario '" + name + "'; available:" + names);
}

json to_json(const ScenarioSpec& spec) {
    json mech = json::object();
    for (const auto& [name, m] : spec.mechanisms) mech[name] = mechanism_to_json(m);
    json j{{"name", spec.name},
           {"description", spec.description},
           {"graph", serialize(spec.graph)},
           {"mechanisms", mech},
           {"mods", pattern_mods_to_json(spec.mods)},
           {"truth", spec.truth == TruthMode::analytic ? "analytic" : "monte_carlo"}};
    j["mpa_consistent"] = spec.mpa_consistent ? json(*spec.mpa_consistent) : json(nullptr);
    j["synthetic"] = spec.synthetic;
    return j;
}

ScenarioSpec scenario_from_json(const json& j) {
    ScenarioSpec s;
    try {
        s.name = j.at("name").get<std::string>();
        s.description = j.value("description", "");
        s.graph = parse_graph(j.at("graph").get<std::string>());
        if (s.graph.intervened_treatment()) s.graph = unsplit(s.graph);
        for (const auto& [name, mj] : j.at("mechanisms").items()) {
            Mechanism m;
            const auto type = mj.value("type", std::string("binary"));
            if (type != "binary" && type != "continuous") {
                throw ScenarioError("node '" + name + "': type must be binary or continuous");
            }
            m.type = type == "binary" ? NodeType::binary : NodeType::continuous;
            m.intercept = mj.value("intercept", 0.0);
            m.noise_sd = mj.value("noise_sd", 1.0);
            if (mj.contains("coef")) m.coef = mj.at("coef").get<std::map<std::string, double>>();
            if (mj.contains("when_missing")) {
                for (const auto& pc : mj.at("when_missing")) {
                    m.when_missing.push_back(
                        {pc.at("parent").get<std::string>(), pc.at("indicator").get<std::string>(),
                         pc.value("coef", 0.0)});
                }
            }
            s.mechanisms[name] = std::move(m);
        }
        s.synthetic = j.value("synthetic", true);
        if (j.contains("mods")) s.mods = parse_pattern_mods(j.at("mods").dump());
        const auto truth = j.value("truth", std::string("monte_carlo"));
        if (truth != "analytic" && truth != "monte_carlo") throw ScenarioError("truth must be analytic or monte_carlo");
        s.truth = truth == "analytic" ? TruthMode::analytic : TruthMode::monte_carlo;
        if (j.contains("mpa_consistent") && !j.at("mpa_consistent").is_null()) {
            s.mpa_consistent = j.at("mpa_consistent").get<bool>();
        }
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("scenario file: ") + e.what());
    }
    validate(s);
    return s;
}

}  // namespace mpa
