#include "manifest.hpp"

#include "mpa/assumptions.hpp"
#include "mpa/catalog.hpp"
#include "mpa/dataset.hpp"
#include "mpa/dsep.hpp"
#include "mpa/estimators.hpp"
#include "mpa/graph.hpp"
#include "mpa/simulator.hpp"
#include "mpa/transforms.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kInadmissible = 2;

// Operational failure with a message ready for stderr.
struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Failure("cannot write '" + path + "'");
    out << text;
    if (!out) throw Failure("error writing '" + path + "'");
}

mpa::cli::RunManifest manifest(const std::string& command) {
    mpa::cli::RunManifest m;
    m.command = command;
    m.version = MPA_VERSION;
    m.timestamp = mpa::cli::utc_timestamp();
    return m;
}

// Writes the payload to stdout, or to `out` with the manifest embedded.
void emit(const std::string& format, const json& payload, const std::string& text, const std::string& key,
          const mpa::cli::RunManifest& m, const std::string& out) {
    if (out.empty()) {
        std::cout << (format == "json" ? payload.dump(2) + "\n" : text);
        return;
    }
    if (format == "json") {
        write_file(out, json{{key, payload}, {"manifest", to_json(m)}}.dump(2) + "\n");
    } else {
        write_file(out, text + "\n# manifest " + to_json(m).dump() + "\n");
    }
}

struct GraphInputs {
    std::string graph_path;
    std::string roles;  // file path or inline role lines
};

mpa::CausalGraph load_graph(const GraphInputs& in, mpa::cli::RunManifest& m) {
    const std::string text = read_file(in.graph_path);
    m.add_input(in.graph_path, text);
    try {
        if (in.roles.empty()) return mpa::parse_graph(text);
        std::string roles;
        if (fs::is_regular_file(in.roles)) {
            roles = read_file(in.roles);
            m.add_input(in.roles, roles);
        } else {
            roles = in.roles;
            for (char& c : roles) {
                if (c == ';' || c == ',') c = ' ';
            }
            if (roles.find("roles") == std::string::npos) roles = "roles { " + roles + " }";
            m.settings["roles"] = roles;
        }
        return mpa::parse_graph(text, roles);
    } catch (const mpa::GraphError& e) {
        throw Failure(in.graph_path + ": " + e.what());
    }
}

void add_graph_options(CLI::App* cmd, GraphInputs& in) {
    cmd->add_option("--graph", in.graph_path, "Diagram in the dagitty-style DSL")->required();
    cmd->add_option("--roles", in.roles, "Roles block: a file, or inline lines separated by ';'");
}

// ---------------------------------------------------------------- check

struct CheckArgs {
    GraphInputs graph;
    std::string mods;
    std::vector<std::string> condition_on;
    std::string format = "text";
    std::string out;
};

int cmd_check(const CheckArgs& a) {
    auto m = manifest("check");
    mpa::AssumptionSpec spec;
    spec.graph = load_graph(a.graph, m);
    if (!a.mods.empty()) {
        const std::string text = read_file(a.mods);
        m.add_input(a.mods, text);
        try {
            spec.pattern_mods = mpa::parse_pattern_mods(text);
        } catch (const std::exception& e) {
            throw Failure(a.mods + ": " + e.what());
        }
    }
    spec.extra_conditioning = {a.condition_on.begin(), a.condition_on.end()};
    m.settings["condition_on"] = spec.extra_conditioning;
    const auto report = mpa::run_framework(spec);
    json payload = to_json(report);
    payload["narrative"] = mpa::narrative(report);
    emit(a.format, payload, mpa::narrative(report), "report", m, a.out);
    return report.admissible ? kOk : kInadmissible;
}

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
    std::string data, config, method, format = "text", out;
    std::optional<int> bootstrap;
    std::optional<std::uint64_t> seed;
};

int cmd_estimate(const EstimateArgs& a) {
    auto m = manifest("estimate");
    const std::string config_text = read_file(a.config);
    m.add_input(a.config, config_text);
    m.config_sha256 = mpa::cli::sha256_hex(config_text);
    mpa::ModelSpec spec;
    try {
        spec = mpa::model_spec_from_json(json::parse(config_text));
    } catch (const std::exception& e) {
        throw Failure(a.config + ": " + e.what());
    }
    if (!a.method.empty()) spec.method = mpa::parse_method(a.method);
    if (a.bootstrap) spec.bootstrap = *a.bootstrap;
    if (a.seed) spec.seed = *a.seed;
    const std::string data_text = read_file(a.data);
    m.add_input(a.data, data_text);
    mpa::Dataset data;
    try {
        data = mpa::read_csv(data_text, spec.data);
    } catch (const std::exception& e) {
        throw Failure(a.data + ": " + e.what());
    }
    m.seeds = {spec.seed};
    m.settings = {{"method", std::string(mpa::to_string(spec.method))}, {"bootstrap", spec.bootstrap}};
    const auto result = mpa::estimate_ate(data, spec);
    emit(a.format, to_json(result), mpa::render_text(result), "result", m, a.out);
    return kOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string scenario, out = "sim", format = "text";
    std::size_t n = 1000;
    std::uint64_t seed = 1;
    bool list = false;
};

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << std::fixed << v;
    return ss.str();
}

int cmd_simulate(const SimulateArgs& a) {
    if (a.list || a.scenario.empty()) {
        if (!a.list) throw Failure("simulate: a scenario name or file is required (--list shows the library)");
        for (const auto& s : mpa::scenario_library()) std::cout << s.name << "  " << s.description << "\n";
        return kOk;
    }
    auto m = manifest("simulate");
    mpa::ScenarioSpec spec;
    if (fs::is_regular_file(a.scenario)) {
        const std::string text = read_file(a.scenario);
        m.add_input(a.scenario, text);
        try {
            spec = mpa::scenario_from_json(json::parse(text));
        } catch (const std::exception& e) {
            throw Failure(a.scenario + ": " + e.what());
        }
    } else {
        spec = mpa::find_scenario(a.scenario);
    }
    const std::string scenario_json = to_json(spec).dump();
    m.config_sha256 = mpa::cli::sha256_hex(scenario_json);
    m.seeds = {a.seed};
    m.settings = {{"scenario", spec.name}, {"n", a.n}};

    const auto out = mpa::generate(spec, a.n, a.seed);
    std::set<std::uint32_t> occupied;
    for (std::size_t i = 0; i < out.n; ++i) occupied.insert(out.data.pattern(i));

    const std::string csv = mpa::write_csv(out.data);
    const std::string oracle = mpa::oracle_csv(out);
    const std::string config = to_json(out.config).dump(2) + "\n";
    json summary{{"scenario", spec.name},
                 {"n", out.n},
                 {"seed", out.seed},
                 {"true_ate", out.true_ate},
                 {"population_ate", out.population_ate ? json(*out.population_ate) : json(nullptr)},
                 {"occupied_patterns", occupied.size()},
                 {"warnings", out.warnings},
                 {"files",
                  {{"data", a.out + ".csv"}, {"oracle", a.out + ".oracle.csv"}, {"config", a.out + ".config.json"}}},
                 {"sha256",
                  {{"data", mpa::cli::sha256_hex(csv)},
                   {"oracle", mpa::cli::sha256_hex(oracle)},
                   {"config", mpa::cli::sha256_hex(config)}}}};
    write_file(a.out + ".csv", csv);
    write_file(a.out + ".oracle.csv", oracle);
    write_file(a.out + ".config.json", config);
    write_file(a.out + ".manifest.json", json{{"simulation", summary}, {"scenario", json::parse(scenario_json)},
                                              {"manifest", to_json(m)}}
                                                 .dump(2) + "\n");
    for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
    if (a.format == "json") {
        std::cout << summary.dump(2) << "\n";
    } else {
        std::cout << "scenario " << spec.name << ": n=" << out.n << " seed=" << out.seed << "\n"
                  << "sample ATE " << fmt(out.true_ate) << ", population ATE "
                  << (out.population_ate ? fmt(*out.population_ate) : std::string("n/a")) << "\n"
                  << occupied.size() << " missingness pattern(s) occupied\n"
                  << "wrote " << a.out << ".{csv,oracle.csv,config.json,manifest.json}\n";
    }
    return kOk;
}

// ---------------------------------------------------------------- paths

struct PathsArgs {
    GraphInputs graph;
    std::string from, to, format = "text";
    std::vector<std::string> given;
};

int cmd_paths(const PathsArgs& a) {
    auto m = manifest("paths");
    mpa::CausalGraph g = load_graph(a.graph, m);
    std::set<std::string> given(a.given.begin(), a.given.end());
    auto has_all = [&](const mpa::CausalGraph& h) {
        if (!h.contains(a.from) || !h.contains(a.to)) return false;
        return std::all_of(given.begin(), given.end(), [&](const std::string& s) { return h.contains(s); });
    };
    std::string on = "graph";
    if (!has_all(g) && g.treatment() && !g.intervened_treatment()) {
        // Potential-outcome names such as Y_z only exist on the SWIT.
        auto swit = mpa::to_swit(g);
        if (has_all(swit)) {
            g = std::move(swit);
            on = "SWIT";
        }
    }
    for (const auto& name : std::vector<std::string>{a.from, a.to}) {
        if (!g.contains(name)) throw Failure("unknown node '" + name + "'");
    }
    for (const auto& name : given) {
        if (!g.contains(name)) throw Failure("unknown node '" + name + "' in --given");
    }
    const auto paths = mpa::list_paths(g, a.from, a.to, given);
    json payload{{"from", a.from}, {"to", a.to}, {"given", given}, {"on", on}, {"paths", json::array()}};
    std::ostringstream text;
    text << "paths " << a.from << " ~ " << a.to << " given {";
    bool first = true;
    for (const auto& s : given) {
        text << (first ? "" : ", ") << s;
        first = false;
    }
    text << "} on the " << on << "\n";
    if (paths.empty()) text << "no paths\n";
    for (const auto& p : paths) {
        text << "  " << p.render() << "\n";
        payload["paths"].push_back({{"nodes", p.nodes}, {"open", p.open}, {"rendered", p.render()}});
    }
    emit(a.format, payload, text.str(), "paths", m, "");
    return kOk;
}

// ---------------------------------------------------------------- catalog

struct CatalogArgs {
    std::string format = "text", export_dir;
};

int cmd_catalog(const CatalogArgs& a) {
    json rows = json::array();
    std::ostringstream text;
    for (const auto& e : mpa::violation_catalog()) {
        json row{{"id", e.id},
                 {"family", e.family},
                 {"group", e.group},
                 {"violated", std::string(mpa::to_string(e.violated))},
                 {"fix", e.fix ? json(*e.fix) : json(nullptr)},
                 {"no_fix", e.no_fix},
                 {"description", e.description}};
        text << e.id << "  [" << e.family << (e.group.empty() ? "" : "/" + e.group) << "]  "
             << mpa::to_string(e.violated) << " violated" << (e.fix ? "; fixed by measuring " + *e.fix : "")
             << (e.no_fix ? "; no fix" : "") << "\n    " << e.description << "\n";
        if (!a.export_dir.empty()) {
            fs::create_directories(a.export_dir);
            const fs::path base_path = fs::path(a.export_dir) / e.id;
            fs::create_directories(base_path.parent_path());
            const std::string base = base_path.string();
            write_file(base + ".dag", mpa::serialize(e.graph()));
            write_file(base + ".mods.json", mpa::pattern_mods_to_json({e.mod}).dump(2) + "\n");
            row["graph_file"] = e.id + ".dag";
            row["mods_file"] = e.id + ".mods.json";
        }
        rows.push_back(std::move(row));
    }
    if (!a.export_dir.empty()) {
        write_file((fs::path(a.export_dir) / "index.json").string(), rows.dump(2) + "\n");
    }
    std::cout << (a.format == "json" ? rows.dump(2) + "\n" : text.str());
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal-graph checks and missingness-pattern estimation"};
    app.set_version_flag("--version", std::string(MPA_VERSION));
    app.require_subcommand(1);
    auto formats = CLI::IsMember({"text", "json"});

    CheckArgs check;
    auto* c = app.add_subcommand("check", "Assess mSITA and CIT/CIO for a diagram; exit 2 when inadmissible");
    add_graph_options(c, check.graph);
    c->add_option("--mods", check.mods, "Per-pattern edge removals (JSON)");
    c->add_option("--condition-on", check.condition_on, "Latent nodes now measured")->delimiter(',');
    c->add_option("--format", check.format)->check(formats);
    c->add_option("--out", check.out, "Report path (embeds the run manifest)");

    EstimateArgs est;
    auto* e = app.add_subcommand("estimate", "IPTW risk difference with balance diagnostics");
    e->add_option("--data", est.data, "Delimited data file")->required();
    e->add_option("--config", est.config, "Model configuration (JSON)")->required();
    e->add_option("--method", est.method, "crude, cra, mpa or mind")
        ->check(CLI::IsMember({"crude", "cra", "complete_records", "mpa", "mind", "missing_indicator"}));
    e->add_option("--bootstrap", est.bootstrap, "Bootstrap replicates")->check(CLI::NonNegativeNumber);
    e->add_option("--seed", est.seed);
    e->add_option("--format", est.format)->check(formats);
    e->add_option("--out", est.out, "Result path (embeds the run manifest)");

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Generate a dataset with oracle potential outcomes");
    s->add_option("scenario", sim.scenario, "Library name or scenario JSON file");
    s->add_option("--n", sim.n)->check(CLI::PositiveNumber);
    s->add_option("--seed", sim.seed);
    s->add_option("--out", sim.out, "Output prefix");
    s->add_option("--format", sim.format)->check(formats);
    s->add_flag("--list", sim.list, "List the scenario library");

    PathsArgs paths;
    auto* p = app.add_subcommand("paths", "List simple paths with open/blocked status");
    add_graph_options(p, paths.graph);
    p->add_option("--from", paths.from)->required();
    p->add_option("--to", paths.to)->required();
    p->add_option("--given", paths.given, "Conditioning set")->delimiter(',');
    p->add_option("--format", paths.format)->check(formats);

    CatalogArgs cat;
    auto* k = app.add_subcommand("catalog", "Print the violation catalog");
    k->add_option("--format", cat.format)->check(formats);
    k->add_option("--export", cat.export_dir, "Write <id>.dag, <id>.mods.json and index.json here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        return app.exit(err) == 0 ? kOk : kError;
    }
    try {
        if (*c) return cmd_check(check);
        if (*e) return cmd_estimate(est);
        if (*s) return cmd_simulate(sim);
        if (*p) return cmd_paths(paths);
        if (*k) return cmd_catalog(cat);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kError;
    }
    return kError;
}
