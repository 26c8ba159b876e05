#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ccshap {

/// Column-major table of named real-valued columns. Categorical values are
/// stored as small integers. An optional intervention column records, per
/// row, the name of the node that was intervened on (empty = observational).
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<std::string> names, std::size_t rows);
    Dataset(std::vector<std::string> names, std::vector<std::vector<double>> columns);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return names_.size(); }
    const std::vector<std::string>& names() const noexcept { return names_; }

    bool has(std::string_view name) const;
    std::size_t index_of(std::string_view name) const;

    std::span<const double> column(std::string_view name) const { return columns_[index_of(name)]; }
    std::span<double> column(std::string_view name) { return columns_[index_of(name)]; }
    const std::vector<double>& column(std::size_t index) const { return columns_.at(index); }
    std::vector<double>& column(std::size_t index) { return columns_.at(index); }

    double at(std::size_t row, std::size_t col) const { return columns_[col][row]; }

    bool has_interventions() const noexcept { return !interventions_.empty(); }
    const std::vector<std::string>& interventions() const noexcept { return interventions_; }
    void set_interventions(std::vector<std::string> labels);

    void add_column(std::string name, std::vector<double> values);
    Dataset select_rows(std::span<const std::size_t> rows) const;
    Dataset select_columns(const std::vector<std::string>& names) const;
    Dataset head(std::size_t n) const;

    /// Throws ArgumentError on ragged columns or non-finite entries.
    void validate() const;

private:
    std::vector<std::string> names_;
    std::vector<std::vector<double>> columns_;
    std::vector<std::string> interventions_;
    std::size_t rows_ = 0;
};

/// Header row = column names; an `INT` column becomes the intervention labels.
Dataset read_csv(std::istream& in);
Dataset read_csv(const std::filesystem::path& path);
void write_csv(const Dataset& d, std::ostream& out);
void write_csv(const Dataset& d, const std::filesystem::path& path);

inline constexpr std::string_view kInterventionColumn = "INT";

} // namespace ccshap
