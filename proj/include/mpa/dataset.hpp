#pragma once

#include <json.hpp>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpa {

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class CovariateType { binary, categorical, continuous };

std::string_view to_string(CovariateType t);

struct CovariateSpec {
    std::string name;
    CovariateType type = CovariateType::binary;
    // categorical only; the first level is the reference
    std::vector<std::string> levels;
    // may contain missing cells
    bool partial = false;
};

/// Column roles and covariate declarations: the [data] section of a config.
struct DataSpec {
    std::string treatment;
    std::string outcome;
    std::vector<CovariateSpec> covariates;
};

DataSpec data_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DataSpec& spec);

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// Columnar table. Categorical cells hold the level index; missing cells are NaN.
class Dataset {
public:
    Dataset() = default;
    Dataset(DataSpec spec, std::vector<int> z, std::vector<int> y, std::vector<std::vector<double>> columns);

    std::size_t n() const { return m_z.size(); }
    const DataSpec& spec() const { return m_spec; }
    const std::vector<CovariateSpec>& covariates() const { return m_spec.covariates; }
    const std::vector<int>& z() const { return m_z; }
    const std::vector<int>& y() const { return m_y; }
    const std::vector<double>& column(std::size_t c) const { return m_columns[c]; }
    std::size_t covariate_index(const std::string& name) const;
    bool missing(std::size_t c, std::size_t row) const;

    /// Indices of the partial confounders, in declaration order.
    const std::vector<std::size_t>& partial() const { return m_partial; }
    /// Bit i set when the i-th partial confounder is observed on `row`.
    std::uint32_t pattern(std::size_t row) const { return m_pattern[row]; }
    std::uint32_t complete_pattern() const { return (std::uint32_t{1} << m_partial.size()) - 1; }
    /// "X=1,W=0" (1 = observed) in declaration order.
    std::string pattern_label(std::uint32_t mask) const;

    /// The given rows, in the given order (repeats allowed).
    Dataset subset(const std::vector<std::size_t>& rows) const;

private:
    DataSpec m_spec;
    std::vector<int> m_z, m_y;
    std::vector<std::vector<double>> m_columns;
    std::vector<std::size_t> m_partial;
    std::vector<std::uint32_t> m_pattern;
};

/// Comma-separated, header row, `NA` for missing cells. Columns not named in
/// the spec are ignored.
Dataset read_csv(const std::string& text, const DataSpec& spec);
std::string write_csv(const Dataset& data);

}  // namespace mpa
