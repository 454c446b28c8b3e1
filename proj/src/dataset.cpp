#include "mpa/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace mpa {

using nlohmann::json;

std::string_view to_string(CovariateType t) {
    switch (t) {
        case CovariateType::binary: return "binary";
        case CovariateType::categorical: return "categorical";
        case CovariateType::continuous: return "continuous";
    }
    return "?";
}

DataSpec data_spec_from_json(const json& j) {
    DataSpec spec;
    try {
        spec.treatment = j.at("treatment").get<std::string>();
        spec.outcome = j.at("outcome").get<std::string>();
        std::set<std::string> seen{spec.treatment, spec.outcome};
        if (seen.size() != 2) throw DataError("treatment and outcome must be different columns");
        for (const auto& c : j.at("covariates")) {
            CovariateSpec cov;
            cov.name = c.at("name").get<std::string>();
            if (!seen.insert(cov.name).second) throw DataError("column '" + cov.name + "' declared twice");
            const auto type = c.at("type").get<std::string>();
            if (type == "binary") {
                cov.type = CovariateType::binary;
            } else if (type == "categorical") {
                cov.type = CovariateType::categorical;
                cov.levels = c.at("levels").get<std::vector<std::string>>();
                if (cov.levels.size() < 2) throw DataError("categorical '" + cov.name + "' needs two or more levels");
                if (std::set<std::string>(cov.levels.begin(), cov.levels.end()).size() != cov.levels.size()) {
                    throw DataError("categorical '" + cov.name + "' repeats a level");
                }
            } else if (type == "continuous") {
                cov.type = CovariateType::continuous;
            } else {
                throw DataError("covariate '" + cov.name + "': unknown type '" + type + "'");
            }
            cov.partial = c.value("partial", false);
            spec.covariates.push_back(std::move(cov));
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("data section: ") + e.what());
    }
    const auto n_partial = std::count_if(spec.covariates.begin(), spec.covariates.end(),
                                         [](const CovariateSpec& c) { return c.partial; });
    if (n_partial > 16) throw DataError("at most 16 partial confounders are supported");
    return spec;
}

json to_json(const DataSpec& spec) {
    json covs = json::array();
    for (const auto& c : spec.covariates) {
        json o{{"name", c.name}, {"type", std::string(to_string(c.type))}, {"partial", c.partial}};
        if (c.type == CovariateType::categorical) o["levels"] = c.levels;
        covs.push_back(o);
    }
    return {{"treatment", spec.treatment}, {"outcome", spec.outcome}, {"covariates", covs}};
}

Dataset::Dataset(DataSpec spec, std::vector<int> z, std::vector<int> y, std::vector<std::vector<double>> columns)
    : m_spec(std::move(spec)), m_z(std::move(z)), m_y(std::move(y)), m_columns(std::move(columns)) {
    const std::size_t n = m_z.size();
    if (m_y.size() != n) throw DataError("treatment and outcome columns differ in length");
    if (m_columns.size() != m_spec.covariates.size()) throw DataError("column count does not match the spec");
    for (std::size_t i = 0; i < n; ++i) {
        if ((m_z[i] != 0 && m_z[i] != 1) || (m_y[i] != 0 && m_y[i] != 1)) {
            throw DataError("row " + std::to_string(i + 1) + ": treatment and outcome must be 0/1");
        }
    }
    for (std::size_t c = 0; c < m_columns.size(); ++c) {
        const auto& cov = m_spec.covariates[c];
        if (m_columns[c].size() != n) throw DataError("column '" + cov.name + "' has the wrong length");
        if (cov.partial) m_partial.push_back(c);
        for (std::size_t i = 0; i < n; ++i) {
            const double v = m_columns[c][i];
            if (std::isnan(v)) {
                if (!cov.partial) {
                    throw DataError("row " + std::to_string(i + 1) + ": missing value in fully observed column '" +
                                    cov.name + "'");
                }
                continue;
            }
            const bool ok = cov.type == CovariateType::binary        ? (v == 0.0 || v == 1.0)
                            : cov.type == CovariateType::categorical ? (v >= 0 && v < static_cast<double>(cov.levels.size()) &&
                                                                        v == std::floor(v))
                                                                     : std::isfinite(v);
            if (!ok) throw DataError("row " + std::to_string(i + 1) + ": invalid value in column '" + cov.name + "'");
        }
    }
    m_pattern.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < m_partial.size(); ++k) {
            if (!std::isnan(m_columns[m_partial[k]][i])) m_pattern[i] |= std::uint32_t{1} << k;
        }
    }
}

std::size_t Dataset::covariate_index(const std::string& name) const {
    for (std::size_t c = 0; c < m_spec.covariates.size(); ++c) {
        if (m_spec.covariates[c].name == name) return c;
    }
    throw DataError("unknown covariate '" + name + "'");
}

bool Dataset::missing(std::size_t c, std::size_t row) const { return std::isnan(m_columns[c][row]); }

std::string Dataset::pattern_label(std::uint32_t mask) const {
    std::string out;
    for (std::size_t k = 0; k < m_partial.size(); ++k) {
        if (k) out += ",";
        out += m_spec.covariates[m_partial[k]].name + "=" + (((mask >> k) & 1U) ? "1" : "0");
    }
    return out.empty() ? "(none)" : out;
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
    std::vector<int> z, y;
    std::vector<std::vector<double>> cols(m_columns.size());
    for (std::size_t r : rows) {
        z.push_back(m_z.at(r));
        y.push_back(m_y.at(r));
        for (std::size_t c = 0; c < cols.size(); ++c) cols[c].push_back(m_columns[c][r]);
    }
    return Dataset(m_spec, std::move(z), std::move(y), std::move(cols));
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim spaces and a trailing carriage return
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

int parse_binary(const std::string& s, const std::string& column, std::size_t line) {
    if (s == "0") return 0;
    if (s == "1") return 1;
    throw DataError("line " + std::to_string(line) + ": column '" + column + "' must be 0 or 1, got '" + s + "'");
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace

Dataset read_csv(const std::string& text, const DataSpec& spec) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty data file");
    const auto header = split_line(line);
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (!pos.emplace(header[i], i).second) throw DataError("duplicate column '" + header[i] + "' in header");
    }
    auto locate = [&](const std::string& name) {
        auto it = pos.find(name);
        if (it == pos.end()) throw DataError("column '" + name + "' not found in header");
        return it->second;
    };
    const std::size_t zc = locate(spec.treatment), yc = locate(spec.outcome);
    std::vector<std::size_t> cc;
    for (const auto& c : spec.covariates) cc.push_back(locate(c.name));

    std::vector<int> z, y;
    std::vector<std::vector<double>> cols(spec.covariates.size());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size()) {
            throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                            " fields, found " + std::to_string(cells.size()));
        }
        z.push_back(parse_binary(cells[zc], spec.treatment, line_no));
        y.push_back(parse_binary(cells[yc], spec.outcome, line_no));
        for (std::size_t k = 0; k < cc.size(); ++k) {
            const auto& cov = spec.covariates[k];
            const std::string& s = cells[cc[k]];
            if (s == "NA") {
                if (!cov.partial) {
                    throw DataError("line " + std::to_string(line_no) + ": NA in fully observed column '" +
                                    cov.name + "'");
                }
                cols[k].push_back(kMissing);
                continue;
            }
            double v = 0;
            switch (cov.type) {
                case CovariateType::binary: v = parse_binary(s, cov.name, line_no); break;
                case CovariateType::categorical: {
                    auto it = std::find(cov.levels.begin(), cov.levels.end(), s);
                    if (it == cov.levels.end()) {
                        throw DataError("line " + std::to_string(line_no) + ": '" + s +
                                        "' is not a declared level of '" + cov.name + "'");
                    }
                    v = static_cast<double>(it - cov.levels.begin());
                    break;
                }
                case CovariateType::continuous:
                    if (!parse_double(s, v) || !std::isfinite(v)) {
                        throw DataError("line " + std::to_string(line_no) + ": column '" + cov.name +
                                        "' needs a number, got '" + s + "'");
                    }
                    break;
            }
            cols[k].push_back(v);
        }
    }
    return Dataset(spec, std::move(z), std::move(y), std::move(cols));
}

std::string write_csv(const Dataset& data) {
    std::string out = data.spec().treatment + "," + data.spec().outcome;
    for (const auto& c : data.covariates()) out += "," + c.name;
    out += "\n";
    for (std::size_t i = 0; i < data.n(); ++i) {
        out += std::to_string(data.z()[i]) + "," + std::to_string(data.y()[i]);
        for (std::size_t c = 0; c < data.covariates().size(); ++c) {
            out += ",";
            const double v = data.column(c)[i];
            const auto& cov = data.covariates()[c];
            if (std::isnan(v)) {
                out += "NA";
            } else if (cov.type == CovariateType::categorical) {
                out += cov.levels[static_cast<std::size_t>(v)];
            } else if (cov.type == CovariateType::binary) {
                out += v == 1.0 ? "1" : "0";
            } else {
                out += format_double(v);
            }
        }
        out += "\n";
    }
    return out;
}

}  // namespace mpa
