#pragma once

#include "mpa/dataset.hpp"
#include "mpa/logistic.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mpa {

class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Method { crude, complete_records, mpa, missing_indicator };

std::string_view to_string(Method m);
/// Accepts the long names and the short CLI forms cra / mind.
Method parse_method(const std::string& s);

struct ModelSpec {
    DataSpec data;
    // Main-effect covariates in the propensity model; empty = every covariate.
    std::vector<std::string> terms;
    std::vector<std::pair<std::string, std::string>> interactions;
    Method method = Method::mpa;
    int bootstrap = 0;
    std::uint64_t seed = 1;
    bool percentile_ci = false;
    int min_pattern_size = 50;
    LogisticOptions logistic;
    std::optional<double> weight_cap;
};

ModelSpec model_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ModelSpec& spec);

/// Rows with identical covariate values (missing cells included) pooled into
/// one cell holding the four (z, y) counts.
struct Cell {
    std::vector<double> values;
    std::uint32_t pattern = 0;
    // index 2*z + y
    std::array<double, 4> count{};
    double total() const { return count[0] + count[1] + count[2] + count[3]; }
    double treated() const { return count[2] + count[3]; }
};

struct CellTable {
    DataSpec spec;
    std::vector<Cell> cells;
    std::vector<std::size_t> row_cell;
};

CellTable compress(const Dataset& data);

struct PatternFit {
    std::uint32_t pattern = 0;
    std::string label;
    double rows = 0, treated = 0;
    std::vector<std::string> columns;
    std::vector<double> beta;
    std::vector<std::string> dropped;
    int iterations = 0;
    double deviance = 0;
    bool separation = false;
};

struct PropensityFit {
    std::vector<PatternFit> models;
    // Generalized score per row; NaN for rows outside the analysed sample.
    std::vector<double> scores;
};

PropensityFit mpa_propensity(const Dataset& data, const ModelSpec& spec);
PropensityFit missing_indicator_propensity(const Dataset& data, const ModelSpec& spec);
PropensityFit complete_records_propensity(const Dataset& data, const ModelSpec& spec);

/// Hajek-normalized IPTW risk difference.
double iptw_ate(const std::vector<int>& y, const std::vector<int>& z, const std::vector<double>& e,
                std::optional<double> weight_cap = std::nullopt);

struct BalanceRow {
    std::string covariate;
    std::string level;  // empty for a binary/continuous covariate's own row
    double mean_treated = 0, mean_control = 0;
    double std_diff = 0;  // percent
    bool zero_variance = false;
};

/// One row per binary covariate, per categorical level and per continuous
/// covariate; partial confounders also get a `missing` row. Weights, when
/// given, must be positive.
std::vector<BalanceRow> standardized_differences(const Dataset& data, const std::vector<double>* weights = nullptr);

struct AteResult {
    Method method = Method::mpa;
    double estimate = 0;
    std::optional<double> ci_low, ci_high;
    std::optional<double> pct_low, pct_high;
    double boot_sd = 0;
    int replicates = 0, replicates_failed = 0;
    std::size_t n_used = 0;
    std::vector<PatternFit> models;
    std::vector<BalanceRow> balance_before, balance_after;
    std::vector<std::string> notes;
};

AteResult estimate_ate(const Dataset& data, const ModelSpec& spec);

nlohmann::json to_json(const AteResult& r);
/// Aligned text: method, n, risk difference per 1000 with CI, then balance.
std::string render_text(const AteResult& r);

}  // namespace mpa
