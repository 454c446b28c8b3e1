#include "mpa/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace mpa {

using nlohmann::json;

std::string_view to_string(Method m) {
    switch (m) {
        case Method::crude: return "crude";
        case Method::complete_records: return "complete_records";
        case Method::mpa: return "mpa";
        case Method::missing_indicator: return "missing_indicator";
    }
    return "?";
}

Method parse_method(const std::string& s) {
    if (s == "crude") return Method::crude;
    if (s == "complete_records" || s == "cra") return Method::complete_records;
    if (s == "mpa") return Method::mpa;
    if (s == "missing_indicator" || s == "mind") return Method::missing_indicator;
    throw EstimationError("unknown method '" + s + "' (expected crude, cra, mpa or mind)");
}

ModelSpec model_spec_from_json(const json& j) {
    ModelSpec spec;
    try {
        spec.data = data_spec_from_json(j.at("data"));
        std::set<std::string> declared;
        for (const auto& c : spec.data.covariates) declared.insert(c.name);
        auto check = [&](const std::string& name) {
            if (!declared.count(name)) throw EstimationError("model term '" + name + "' is not a declared covariate");
        };
        if (j.contains("model")) {
            const auto& m = j.at("model");
            if (m.contains("terms")) {
                spec.terms = m.at("terms").get<std::vector<std::string>>();
                for (const auto& t : spec.terms) check(t);
                if (std::set<std::string>(spec.terms.begin(), spec.terms.end()).size() != spec.terms.size()) {
                    throw EstimationError("model terms repeat a covariate");
                }
            }
            if (m.contains("interactions")) {
                std::set<std::pair<std::string, std::string>> seen;
                for (const auto& pair : m.at("interactions")) {
                    auto v = pair.get<std::vector<std::string>>();
                    if (v.size() != 2 || v[0] == v[1]) {
                        throw EstimationError("an interaction names two different covariates");
                    }
                    check(v[0]);
                    check(v[1]);
                    if (!seen.insert(std::minmax(v[0], v[1])).second) {
                        throw EstimationError("interaction " + v[0] + ":" + v[1] + " listed twice");
                    }
                    spec.interactions.emplace_back(v[0], v[1]);
                }
            }
        }
        if (j.contains("method")) spec.method = parse_method(j.at("method").get<std::string>());
        if (j.contains("bootstrap")) {
            const auto& b = j.at("bootstrap");
            spec.bootstrap = b.value("replicates", 0);
            spec.seed = b.value("seed", std::uint64_t{1});
            const auto ci = b.value("ci", std::string("normal"));
            if (ci != "normal" && ci != "percentile") throw EstimationError("bootstrap ci must be normal or percentile");
            spec.percentile_ci = ci == "percentile";
        }
        if (j.contains("options")) {
            const auto& o = j.at("options");
            spec.min_pattern_size = o.value("min_pattern_size", spec.min_pattern_size);
            spec.logistic.max_iterations = o.value("max_iterations", spec.logistic.max_iterations);
            spec.logistic.tolerance = o.value("tolerance", spec.logistic.tolerance);
            if (o.contains("weight_cap") && !o.at("weight_cap").is_null()) {
                spec.weight_cap = o.at("weight_cap").get<double>();
                if (!(*spec.weight_cap > 1.0)) throw EstimationError("weight_cap must exceed 1");
            }
        }
    } catch (const json::exception& e) {
        throw EstimationError(std::string("config: ") + e.what());
    }
    if (spec.bootstrap < 0) throw EstimationError("bootstrap replicates must be >= 0");
    if (spec.min_pattern_size < 1) throw EstimationError("min_pattern_size must be >= 1");
    if (spec.logistic.max_iterations < 1 || !(spec.logistic.tolerance > 0)) {
        throw EstimationError("max_iterations and tolerance must be positive");
    }
    return spec;
}

json to_json(const ModelSpec& spec) {
    json inter = json::array();
    for (const auto& [a, b] : spec.interactions) inter.push_back({a, b});
    json j{{"data", to_json(spec.data)},
           {"model", {{"interactions", inter}}},
           {"method", std::string(to_string(spec.method))},
           {"bootstrap",
            {{"replicates", spec.bootstrap},
             {"seed", spec.seed},
             {"ci", spec.percentile_ci ? "percentile" : "normal"}}},
           {"options",
            {{"min_pattern_size", spec.min_pattern_size},
             {"max_iterations", spec.logistic.max_iterations},
             {"tolerance", spec.logistic.tolerance},
             {"weight_cap", spec.weight_cap ? json(*spec.weight_cap) : json(nullptr)}}}};
    if (!spec.terms.empty()) j["model"]["terms"] = spec.terms;
    return j;
}

CellTable compress(const Dataset& data) {
    CellTable t;
    t.spec = data.spec();
    t.row_cell.resize(data.n());
    const std::size_t k = data.covariates().size();
    // NaN does not order; missing cells are keyed as -inf (values are finite).
    std::map<std::vector<double>, std::size_t> index;
    std::vector<double> key(k);
    for (std::size_t i = 0; i < data.n(); ++i) {
        for (std::size_t c = 0; c < k; ++c) {
            const double v = data.column(c)[i];
            key[c] = std::isnan(v) ? -HUGE_VAL : v;
        }
        auto [it, fresh] = index.emplace(key, 0);
        if (fresh) {
            it->second = t.cells.size();
            Cell cell;
            cell.pattern = data.pattern(i);
            for (std::size_t c = 0; c < k; ++c) cell.values.push_back(data.column(c)[i]);
            t.cells.push_back(std::move(cell));
        }
        t.row_cell[i] = it->second;
        t.cells[it->second].count[2 * data.z()[i] + data.y()[i]] += 1;
    }
    return t;
}

namespace {

using Counts = std::vector<std::array<double, 4>>;

// Lists the partial confounders whose bit is in `shown`.
std::string pattern_label(const DataSpec& spec, std::uint32_t mask, std::uint32_t shown) {
    std::string out;
    std::size_t k = 0;
    for (const auto& c : spec.covariates) {
        if (!c.partial) continue;
        if ((shown >> k) & 1U) {
            if (!out.empty()) out += ",";
            out += c.name + "=" + (((mask >> k) & 1U) ? "1" : "0");
        }
        ++k;
    }
    return out.empty() ? "(none)" : out;
}

// One factor of a design column; a column is the product of its factors.
struct Factor {
    enum Kind { value, level, missing } kind = value;
    std::size_t cov = 0;
    int lvl = 0;
    double centre = 0, scale = 1;

    double operator()(const std::vector<double>& v) const {
        const double x = v[cov];
        switch (kind) {
            case value: return std::isnan(x) ? 0.0 : (x - centre) / scale;
            case level: return (!std::isnan(x) && x == lvl) ? 1.0 : 0.0;
            case missing: return std::isnan(x) ? 1.0 : 0.0;
        }
        return 0.0;
    }
};

struct Column {
    std::string name;
    std::vector<Factor> factors;
};

struct Group {
    std::uint32_t pattern = 0;
    std::string label;
    std::vector<std::size_t> cells;
    Eigen::MatrixXd design;
    std::vector<std::string> columns;
    // patterns pooled into this group (several for the missing-indicator fit)
    std::set<std::uint32_t> patterns;
};

struct Output {
    double estimate = 0;
    double n_used = 0;
    std::vector<double> e;  // per cell, NaN where unused
    std::vector<PatternFit> fits;
};

class Pipeline {
public:
    Pipeline(const CellTable& table, const ModelSpec& spec) : m_table(table), m_spec(spec) {
        const auto& covs = table.spec.covariates;
        std::vector<std::string> terms = spec.terms;
        if (terms.empty()) {
            for (const auto& c : covs) terms.push_back(c.name);
        }
        for (const auto& t : terms) m_terms.push_back(index_of(t));
        for (const auto& [a, b] : spec.interactions) m_interactions.emplace_back(index_of(a), index_of(b));
        for (std::size_t c = 0; c < covs.size(); ++c) {
            if (covs[c].partial) m_bit[c] = static_cast<int>(m_bit.size());
        }
        // Patterns are formed over the partial confounders the model uses.
        auto use = [&](std::size_t c) {
            if (covs[c].partial) m_model_mask |= std::uint32_t{1} << m_bit.at(c);
        };
        for (auto c : m_terms) use(c);
        for (auto [a, b] : m_interactions) {
            use(a);
            use(b);
        }

        // Continuous columns are centred and scaled on the observed rows; the
        // fitted scores are invariant to this, the coefficients are not.
        m_centre.assign(covs.size(), 0.0);
        m_scale.assign(covs.size(), 1.0);
        for (std::size_t c = 0; c < covs.size(); ++c) {
            if (covs[c].type != CovariateType::continuous) continue;
            double w = 0, s = 0, ss = 0;
            for (const auto& cell : table.cells) {
                if (std::isnan(cell.values[c])) continue;
                w += cell.total();
                s += cell.total() * cell.values[c];
            }
            if (w == 0) continue;
            m_centre[c] = s / w;
            for (const auto& cell : table.cells) {
                if (!std::isnan(cell.values[c])) ss += cell.total() * std::pow(cell.values[c] - m_centre[c], 2);
            }
            const double sd = std::sqrt(ss / w);
            if (sd > 0) m_scale[c] = sd;
        }

        const std::uint32_t complete = m_model_mask;
        switch (spec.method) {
            case Method::crude: break;
            case Method::mpa: {
                std::set<std::uint32_t, std::greater<>> patterns;
                for (const auto& cell : table.cells) patterns.insert(pattern_of(cell));
                for (auto p : patterns) {
                    Group g;
                    g.pattern = p;
                    g.patterns = {p};
                    for (std::size_t i = 0; i < table.cells.size(); ++i) {
                        if (pattern_of(table.cells[i]) == p) g.cells.push_back(i);
                    }
                    build(g, [&](std::size_t c) { return !covs[c].partial || ((p >> m_bit.at(c)) & 1U); }, false);
                    m_groups.push_back(std::move(g));
                }
                break;
            }
            case Method::complete_records: {
                Group g;
                g.pattern = complete;
                g.patterns = {complete};
                for (std::size_t i = 0; i < table.cells.size(); ++i) {
                    if (pattern_of(table.cells[i]) == complete) g.cells.push_back(i);
                }
                if (g.cells.empty()) throw EstimationError("complete records: no row has every confounder observed");
                build(g, [](std::size_t) { return true; }, false);
                m_groups.push_back(std::move(g));
                break;
            }
            case Method::missing_indicator: {
                Group g;
                g.pattern = complete;
                for (std::size_t i = 0; i < table.cells.size(); ++i) {
                    g.cells.push_back(i);
                    g.patterns.insert(pattern_of(table.cells[i]));
                }
                build(g, [](std::size_t) { return true; }, true);
                g.label = "pooled";
                m_groups.push_back(std::move(g));
                break;
            }
        }
    }

    Output run(const Counts& counts, const std::vector<std::size_t>* row_cell) const {
        Output out;
        const std::size_t nc = m_table.cells.size();
        if (m_spec.method == Method::crude) {
            double t = 0, ty = 0, c = 0, cy = 0;
            for (const auto& k : counts) {
                c += k[0] + k[1];
                cy += k[1];
                t += k[2] + k[3];
                ty += k[3];
            }
            if (t == 0 || c == 0) throw EstimationError("crude: one treatment arm is empty");
            out.estimate = ty / t - cy / c;
            out.n_used = t + c;
            return out;
        }

        out.e.assign(nc, std::nan(""));
        for (const auto& g : m_groups) {
            // Size and arm checks are per missingness pattern, pooled or not.
            std::map<std::uint32_t, std::array<double, 2>> per_pattern;
            for (auto p : g.patterns) per_pattern[p] = {0, 0};
            for (auto i : g.cells) {
                auto& pp = per_pattern[pattern_of(m_table.cells[i])];
                pp[0] += counts[i][0] + counts[i][1] + counts[i][2] + counts[i][3];
                pp[1] += counts[i][2] + counts[i][3];
            }
            for (auto it = per_pattern.rbegin(); it != per_pattern.rend(); ++it) {
                const auto [rows, treated] = it->second;
                const std::string label = pattern_label(m_table.spec, it->first, m_model_mask);
                if (rows < m_spec.min_pattern_size) {
                    throw EstimationError("pattern " + label + " has " + std::to_string(static_cast<long long>(rows)) +
                                          " rows (minimum " + std::to_string(m_spec.min_pattern_size) + ")");
                }
                if (treated == 0 || treated == rows) {
                    throw EstimationError("pattern " + label + " contains only " +
                                          (treated == 0 ? "control" : "treated") + " rows");
                }
            }

            const auto m = static_cast<Eigen::Index>(g.cells.size());
            Eigen::VectorXd succ(m), trials(m);
            for (Eigen::Index r = 0; r < m; ++r) {
                const auto& k = counts[g.cells[r]];
                succ[r] = k[2] + k[3];
                trials[r] = k[0] + k[1] + k[2] + k[3];
            }
            LogisticFit fit;
            try {
                fit = fit_logistic(g.design, succ, trials, m_spec.logistic);
            } catch (const LogisticError& e) {
                throw EstimationError("pattern " + g.label + ": " + e.what());
            }
            const Eigen::VectorXd e = predict_logistic(g.design, fit.beta);
            for (Eigen::Index r = 0; r < m; ++r) out.e[g.cells[r]] = e[r];
            if (row_cell) {
                PatternFit pf;
                pf.pattern = g.pattern;
                pf.label = g.label;
                pf.rows = trials.sum();
                pf.treated = succ.sum();
                pf.columns = g.columns;
                pf.beta.assign(fit.beta.data(), fit.beta.data() + fit.beta.size());
                for (int d : fit.dropped_columns) pf.dropped.push_back(g.columns[d]);
                pf.iterations = fit.iterations;
                pf.deviance = fit.deviance;
                pf.separation = fit.separation;
                out.fits.push_back(std::move(pf));
            }
        }

        double num1 = 0, den1 = 0, num0 = 0, den0 = 0;
        std::vector<std::size_t> bad;
        for (std::size_t i = 0; i < nc; ++i) {
            const double e = out.e[i];
            if (std::isnan(e)) continue;
            const auto& k = counts[i];
            if (k[0] + k[1] + k[2] + k[3] == 0) continue;
            if (!(e > 0.0 && e < 1.0)) {
                bad.push_back(i);
                continue;
            }
            double w1 = 1.0 / e, w0 = 1.0 / (1.0 - e);
            if (m_spec.weight_cap) {
                w1 = std::min(w1, *m_spec.weight_cap);
                w0 = std::min(w0, *m_spec.weight_cap);
            }
            num1 += w1 * k[3];
            den1 += w1 * (k[2] + k[3]);
            num0 += w0 * k[1];
            den0 += w0 * (k[0] + k[1]);
            out.n_used += k[0] + k[1] + k[2] + k[3];
        }
        if (!bad.empty()) throw EstimationError(positivity_message(bad, row_cell));
        if (den1 == 0 || den0 == 0) throw EstimationError("one treatment arm is empty in the analysed sample");
        out.estimate = num1 / den1 - num0 / den0;
        return out;
    }

    std::uint32_t pattern_of(const Cell& cell) const { return cell.pattern & m_model_mask; }

private:
    std::size_t index_of(const std::string& name) const {
        const auto& covs = m_table.spec.covariates;
        for (std::size_t c = 0; c < covs.size(); ++c) {
            if (covs[c].name == name) return c;
        }
        throw EstimationError("unknown covariate '" + name + "'");
    }

    std::vector<Column> main_columns(std::size_t c) const {
        const auto& cov = m_table.spec.covariates[c];
        std::vector<Column> cols;
        switch (cov.type) {
            case CovariateType::binary:
                cols.push_back({cov.name, {Factor{Factor::value, c, 0, 0.0, 1.0}}});
                break;
            case CovariateType::continuous:
                cols.push_back({cov.name, {Factor{Factor::value, c, 0, m_centre[c], m_scale[c]}}});
                break;
            case CovariateType::categorical:
                for (std::size_t l = 1; l < cov.levels.size(); ++l) {
                    cols.push_back({cov.name + "=" + cov.levels[l], {Factor{Factor::level, c, static_cast<int>(l)}}});
                }
                break;
        }
        return cols;
    }

    template <class Avail>
    void build(Group& g, Avail available, bool indicators) {
        const auto& covs = m_table.spec.covariates;
        if (g.label.empty()) g.label = pattern_label(m_table.spec, g.pattern, m_model_mask);
        std::vector<Column> cols{{"(intercept)", {}}};
        for (auto c : m_terms) {
            if (!available(c)) continue;
            for (auto& col : main_columns(c)) cols.push_back(std::move(col));
            if (indicators && covs[c].partial) cols.push_back({covs[c].name + "=missing", {Factor{Factor::missing, c}}});
        }
        for (auto [a, b] : m_interactions) {
            if (!available(a) || !available(b)) continue;
            for (const auto& ca : main_columns(a)) {
                for (const auto& cb : main_columns(b)) {
                    Column col{ca.name + ":" + cb.name, ca.factors};
                    col.factors.insert(col.factors.end(), cb.factors.begin(), cb.factors.end());
                    cols.push_back(std::move(col));
                }
            }
        }
        g.design.resize(static_cast<Eigen::Index>(g.cells.size()), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t r = 0; r < g.cells.size(); ++r) {
            const auto& v = m_table.cells[g.cells[r]].values;
            for (std::size_t j = 0; j < cols.size(); ++j) {
                double x = 1.0;
                for (const auto& f : cols[j].factors) x *= f(v);
                g.design(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = x;
            }
        }
        for (auto& col : cols) g.columns.push_back(std::move(col.name));
    }

    std::string positivity_message(const std::vector<std::size_t>& bad_cells,
                                   const std::vector<std::size_t>* row_cell) const {
        std::string msg = "positivity violated: estimated propensity of exactly 0 or 1";
        if (!row_cell) return msg;
        std::set<std::size_t> bad(bad_cells.begin(), bad_cells.end());
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < row_cell->size() && rows.size() < 10; ++r) {
            if (bad.count((*row_cell)[r])) rows.push_back(r + 1);
        }
        msg += " on rows";
        for (auto r : rows) msg += " " + std::to_string(r);
        return msg + (rows.size() == 10 ? " ..." : "");
    }

    const CellTable& m_table;
    const ModelSpec& m_spec;
    std::vector<std::size_t> m_terms;
    std::vector<std::pair<std::size_t, std::size_t>> m_interactions;
    std::map<std::size_t, int> m_bit;
    std::uint32_t m_model_mask = 0;
    std::vector<double> m_centre, m_scale;
    std::vector<Group> m_groups;
};

Counts counts_of(const CellTable& t) {
    Counts c;
    c.reserve(t.cells.size());
    for (const auto& cell : t.cells) c.push_back(cell.count);
    return c;
}

PropensityFit propensity(const Dataset& data, ModelSpec spec, Method method) {
    spec.method = method;
    const CellTable table = compress(data);
    const Pipeline pipe(table, spec);
    const Output out = pipe.run(counts_of(table), &table.row_cell);
    PropensityFit fit;
    fit.models = out.fits;
    fit.scores.resize(data.n());
    for (std::size_t i = 0; i < data.n(); ++i) fit.scores[i] = out.e[table.row_cell[i]];
    return fit;
}

// Percentile with linear interpolation between order statistics.
double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double h = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// Multinomial resample of the n rows, drawn as conditional binomials over the
// (cell, z, y) categories.
Counts resample(const Counts& base, double n, std::mt19937_64& rng) {
    Counts out(base.size(), std::array<double, 4>{});
    auto remaining = static_cast<long long>(n);
    double mass = n;
    for (std::size_t i = 0; i < base.size() && remaining > 0; ++i) {
        for (int k = 0; k < 4 && remaining > 0; ++k) {
            const double c = base[i][k];
            if (c == 0) continue;
            const double p = c / mass;
            long long draw = remaining;
            if (p < 1.0) draw = std::binomial_distribution<long long>(remaining, p)(rng);
            out[i][k] = static_cast<double>(draw);
            remaining -= draw;
            mass -= c;
        }
    }
    return out;
}

struct BalanceAccumulator {
    struct Level {
        std::string covariate, level;
        std::size_t cov;
        Factor f;
        bool among_observed;  // continuous means use observed rows only
    };
    std::vector<Level> levels;
    // [level][arm] -> weight, sum, sum of squares
    std::vector<std::array<std::array<double, 3>, 2>> acc;

    explicit BalanceAccumulator(const DataSpec& spec) {
        for (std::size_t c = 0; c < spec.covariates.size(); ++c) {
            const auto& cov = spec.covariates[c];
            switch (cov.type) {
                case CovariateType::binary:
                    if (cov.partial) {
                        levels.push_back({cov.name, "0", c, Factor{Factor::level, c, 0}, false});
                        levels.push_back({cov.name, "1", c, Factor{Factor::level, c, 1}, false});
                    } else {
                        levels.push_back({cov.name, "", c, Factor{Factor::value, c}, false});
                    }
                    break;
                case CovariateType::categorical:
                    for (std::size_t l = 0; l < cov.levels.size(); ++l) {
                        levels.push_back({cov.name, cov.levels[l], c, Factor{Factor::level, c, static_cast<int>(l)}, false});
                    }
                    break;
                case CovariateType::continuous:
                    levels.push_back({cov.name, "", c, Factor{Factor::value, c}, true});
                    break;
            }
            if (cov.partial) levels.push_back({cov.name, "missing", c, Factor{Factor::missing, c}, false});
        }
        acc.assign(levels.size(), {});
    }

    void add(const std::vector<double>& v, int z, double w) {
        for (std::size_t l = 0; l < levels.size(); ++l) {
            if (levels[l].among_observed && std::isnan(v[levels[l].cov])) continue;
            const double x = levels[l].f(v);
            auto& a = acc[l][z];
            a[0] += w;
            a[1] += w * x;
            a[2] += w * x * x;
        }
    }

    std::vector<BalanceRow> rows() const {
        std::vector<BalanceRow> out;
        for (std::size_t l = 0; l < levels.size(); ++l) {
            BalanceRow row{levels[l].covariate, levels[l].level};
            double var[2] = {0, 0};
            double mean[2] = {0, 0};
            for (int z = 0; z < 2; ++z) {
                const auto& a = acc[l][z];
                if (a[0] <= 0) continue;
                mean[z] = a[1] / a[0];
                var[z] = std::max(0.0, a[2] / a[0] - mean[z] * mean[z]);
            }
            row.mean_control = mean[0];
            row.mean_treated = mean[1];
            const double pooled = (var[0] + var[1]) / 2;
            if (pooled <= 1e-300) {
                row.zero_variance = true;
                row.std_diff = 0.0;
            } else {
                row.std_diff = 100.0 * std::abs(mean[1] - mean[0]) / std::sqrt(pooled);
            }
            out.push_back(std::move(row));
        }
        return out;
    }
};

std::string fixed(double v, int digits) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(digits) << v;
    return ss.str();
}

}  // namespace

PropensityFit mpa_propensity(const Dataset& data, const ModelSpec& spec) {
    return propensity(data, spec, Method::mpa);
}

PropensityFit missing_indicator_propensity(const Dataset& data, const ModelSpec& spec) {
    return propensity(data, spec, Method::missing_indicator);
}

PropensityFit complete_records_propensity(const Dataset& data, const ModelSpec& spec) {
    return propensity(data, spec, Method::complete_records);
}

double iptw_ate(const std::vector<int>& y, const std::vector<int>& z, const std::vector<double>& e,
                std::optional<double> weight_cap) {
    if (y.size() != z.size() || z.size() != e.size()) throw EstimationError("y, z and e differ in length");
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (!(e[i] > 0.0 && e[i] < 1.0)) bad.push_back(i + 1);
    }
    if (!bad.empty()) {
        std::string msg = "positivity violated: propensity outside (0,1) on rows";
        for (std::size_t k = 0; k < bad.size() && k < 10; ++k) msg += " " + std::to_string(bad[k]);
        throw EstimationError(msg + (bad.size() > 10 ? " ..." : ""));
    }
    double num1 = 0, den1 = 0, num0 = 0, den0 = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (z[i]) {
            const double w = weight_cap ? std::min(1.0 / e[i], *weight_cap) : 1.0 / e[i];
            num1 += w * y[i];
            den1 += w;
        } else {
            const double w = weight_cap ? std::min(1.0 / (1.0 - e[i]), *weight_cap) : 1.0 / (1.0 - e[i]);
            num0 += w * y[i];
            den0 += w;
        }
    }
    if (den1 == 0 || den0 == 0) throw EstimationError("one treatment arm is empty");
    return num1 / den1 - num0 / den0;
}

std::vector<BalanceRow> standardized_differences(const Dataset& data, const std::vector<double>* weights) {
    if (weights && weights->size() != data.n()) throw EstimationError("weights and data differ in length");
    BalanceAccumulator acc(data.spec());
    std::vector<double> v(data.covariates().size());
    for (std::size_t i = 0; i < data.n(); ++i) {
        const double w = weights ? (*weights)[i] : 1.0;
        if (!(w > 0) || !std::isfinite(w)) {
            throw EstimationError("balance weight on row " + std::to_string(i + 1) + " is not positive");
        }
        for (std::size_t c = 0; c < v.size(); ++c) v[c] = data.column(c)[i];
        acc.add(v, data.z()[i], w);
    }
    return acc.rows();
}

AteResult estimate_ate(const Dataset& data, const ModelSpec& spec) {
    const CellTable table = compress(data);
    const Pipeline pipe(table, spec);
    const Counts base = counts_of(table);
    const Output out = pipe.run(base, &table.row_cell);

    AteResult r;
    r.method = spec.method;
    r.estimate = out.estimate;
    r.n_used = static_cast<std::size_t>(out.n_used);
    r.models = out.fits;
    for (const auto& m : r.models) {
        if (m.separation) r.notes.push_back("pattern " + m.label + ": separation flagged");
        if (!m.dropped.empty()) {
            std::string cols;
            for (const auto& d : m.dropped) cols += (cols.empty() ? "" : ", ") + d;
            r.notes.push_back("pattern " + m.label + ": aliased columns dropped: " + cols);
        }
    }
    if (spec.method == Method::missing_indicator || spec.method == Method::mpa ||
        spec.method == Method::complete_records) {
        for (const auto& c : data.covariates()) {
            if (c.type == CovariateType::continuous) {
                r.notes.push_back("continuous covariates centred on their observed mean and scaled by their SD" +
                                  std::string(spec.method == Method::missing_indicator
                                                  ? "; missing values then set to 0"
                                                  : ""));
                break;
            }
        }
    }

    // Balance on the analysed rows, before and after weighting.
    {
        BalanceAccumulator before(data.spec()), after(data.spec());
        std::vector<double> v(data.covariates().size());
        for (std::size_t i = 0; i < data.n(); ++i) {
            double e = 0.5;
            if (spec.method != Method::crude) {
                e = out.e[table.row_cell[i]];
                if (std::isnan(e)) continue;
            }
            for (std::size_t c = 0; c < v.size(); ++c) v[c] = data.column(c)[i];
            const int z = data.z()[i];
            before.add(v, z, 1.0);
            if (spec.method != Method::crude) {
                double w = z ? 1.0 / e : 1.0 / (1.0 - e);
                if (spec.weight_cap) w = std::min(w, *spec.weight_cap);
                after.add(v, z, w);
            }
        }
        r.balance_before = before.rows();
        if (spec.method != Method::crude) r.balance_after = after.rows();
    }

    if (spec.bootstrap > 0) {
        const double n = static_cast<double>(data.n());
        std::vector<double> reps;
        std::string first_failure;
        for (int b = 0; b < spec.bootstrap; ++b) {
            std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                              static_cast<std::uint32_t>(b)};
            std::mt19937_64 rng(seq);
            try {
                reps.push_back(pipe.run(resample(base, n, rng), nullptr).estimate);
            } catch (const std::runtime_error& e) {
                ++r.replicates_failed;
                if (first_failure.empty()) first_failure = e.what();
            }
        }
        r.replicates = static_cast<int>(reps.size());
        if (r.replicates_failed > 0.05 * spec.bootstrap) {
            throw EstimationError("bootstrap: " + std::to_string(r.replicates_failed) + " of " +
                                  std::to_string(spec.bootstrap) + " replicates failed (first: " + first_failure + ")");
        }
        if (r.replicates_failed > 0) {
            r.notes.push_back(std::to_string(r.replicates_failed) + " bootstrap replicates failed and were dropped");
        }
        if (reps.size() >= 2) {
            const double mean = std::accumulate(reps.begin(), reps.end(), 0.0) / static_cast<double>(reps.size());
            double ss = 0;
            for (double x : reps) ss += (x - mean) * (x - mean);
            r.boot_sd = std::sqrt(ss / static_cast<double>(reps.size() - 1));
            r.ci_low = r.estimate - 1.96 * r.boot_sd;
            r.ci_high = r.estimate + 1.96 * r.boot_sd;
            if (spec.percentile_ci) {
                r.pct_low = quantile(reps, 0.025);
                r.pct_high = quantile(reps, 0.975);
            }
        }
    }
    return r;
}

json to_json(const AteResult& r) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json models = json::array();
    for (const auto& m : r.models) {
        json coef = json::object();
        for (std::size_t j = 0; j < m.columns.size(); ++j) coef[m.columns[j]] = m.beta[j];
        models.push_back({{"pattern", m.label},
                          {"rows", m.rows},
                          {"treated", m.treated},
                          {"coefficients", coef},
                          {"columns", m.columns},
                          {"dropped", m.dropped},
                          {"iterations", m.iterations},
                          {"deviance", m.deviance},
                          {"separation", m.separation}});
    }
    auto balance = [](const std::vector<BalanceRow>& rows) {
        json a = json::array();
        for (const auto& b : rows) {
            a.push_back({{"covariate", b.covariate},
                         {"level", b.level},
                         {"mean_treated", b.mean_treated},
                         {"mean_control", b.mean_control},
                         {"std_diff", b.std_diff},
                         {"zero_variance", b.zero_variance}});
        }
        return a;
    };
    return {{"method", std::string(to_string(r.method))},
            {"estimate", r.estimate},
            {"per_1000", r.estimate * 1000},
            {"ci_low", opt(r.ci_low)},
            {"ci_high", opt(r.ci_high)},
            {"percentile_low", opt(r.pct_low)},
            {"percentile_high", opt(r.pct_high)},
            {"bootstrap_sd", r.boot_sd},
            {"replicates", r.replicates},
            {"replicates_failed", r.replicates_failed},
            {"n_used", r.n_used},
            {"models", models},
            {"balance_before", balance(r.balance_before)},
            {"balance_after", balance(r.balance_after)},
            {"notes", r.notes}};
}

std::string render_text(const AteResult& r) {
    std::ostringstream out;
    out << std::left << std::setw(20) << "method" << std::right << std::setw(10) << "n" << std::setw(18)
        << "RD per 1000" << "   95% CI per 1000\n";
    out << std::left << std::setw(20) << to_string(r.method) << std::right << std::setw(10) << r.n_used
        << std::setw(18) << fixed(r.estimate * 1000, 2) << "   ";
    if (r.ci_low) {
        out << "(" << fixed(*r.ci_low * 1000, 2) << ", " << fixed(*r.ci_high * 1000, 2) << ")";
    } else {
        out << "-";
    }
    out << "\n";
    if (r.pct_low) {
        out << std::setw(48) << "" << "   percentile (" << fixed(*r.pct_low * 1000, 2) << ", "
            << fixed(*r.pct_high * 1000, 2) << ")\n";
    }
    if (!r.balance_before.empty()) {
        out << "\n" << std::left << std::setw(28) << "covariate" << std::right << std::setw(12) << "SD before";
        if (!r.balance_after.empty()) out << std::setw(12) << "SD after";
        out << "\n";
        for (std::size_t i = 0; i < r.balance_before.size(); ++i) {
            const auto& b = r.balance_before[i];
            const std::string name = b.level.empty() ? b.covariate : b.covariate + " = " + b.level;
            out << std::left << std::setw(28) << name << std::right << std::setw(12) << fixed(b.std_diff, 2);
            if (!r.balance_after.empty()) out << std::setw(12) << fixed(r.balance_after[i].std_diff, 2);
            out << "\n";
        }
    }
    for (const auto& n : r.notes) out << "note: " << n << "\n";
    return out.str();
}

}  // namespace mpa
