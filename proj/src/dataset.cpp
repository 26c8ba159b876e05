#include "ccshap/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "ccshap/errors.hpp"
#include "ccshap/util.hpp"

namespace ccshap {

namespace {

void require_unique(const std::vector<std::string>& names) {
    std::vector<std::string> sorted(names);
    std::ranges::sort(sorted);
    const auto dup = std::ranges::adjacent_find(sorted);
    if (dup != sorted.end()) throw IdentifierError("duplicate column name '" + *dup + "'");
}

} // namespace

Dataset::Dataset(std::vector<std::string> names, std::size_t rows)
    : names_(std::move(names)), columns_(names_.size(), std::vector<double>(rows, 0.0)), rows_(rows) {
    require_unique(names_);
}

Dataset::Dataset(std::vector<std::string> names, std::vector<std::vector<double>> columns)
    : names_(std::move(names)), columns_(std::move(columns)) {
    if (names_.size() != columns_.size()) throw ArgumentError("dataset needs one name per column");
    require_unique(names_);
    rows_ = columns_.empty() ? 0 : columns_.front().size();
    validate();
}

bool Dataset::has(std::string_view name) const {
    for (const auto& n : names_)
        if (n == name) return true;
    return false;
}

std::size_t Dataset::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return i;
    throw IdentifierError("dataset has no column '" + std::string(name) + "'");
}

void Dataset::set_interventions(std::vector<std::string> labels) {
    if (!labels.empty() && labels.size() != rows_) throw ArgumentError("intervention column length mismatch");
    interventions_ = std::move(labels);
}

void Dataset::add_column(std::string name, std::vector<double> values) {
    if (has(name)) throw ArgumentError("duplicate column '" + name + "'");
    if (names_.empty() && columns_.empty()) rows_ = values.size();
    if (values.size() != rows_) throw ArgumentError("column '" + name + "' has the wrong length");
    names_.push_back(std::move(name));
    columns_.push_back(std::move(values));
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
    Dataset out(names_, rows.size());
    for (std::size_t c = 0; c < cols(); ++c)
        for (std::size_t r = 0; r < rows.size(); ++r) out.columns_[c][r] = columns_[c].at(rows[r]);
    if (has_interventions()) {
        out.interventions_.reserve(rows.size());
        for (auto r : rows) out.interventions_.push_back(interventions_[r]);
    }
    return out;
}

Dataset Dataset::select_columns(const std::vector<std::string>& names) const {
    std::vector<std::vector<double>> cols;
    for (const auto& n : names) cols.push_back(columns_[index_of(n)]);
    Dataset out;
    out.names_ = names;
    out.columns_ = std::move(cols);
    out.rows_ = rows_;
    out.interventions_ = interventions_;
    return out;
}

Dataset Dataset::head(std::size_t n) const {
    std::vector<std::size_t> idx(std::min(n, rows_));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return select_rows(idx);
}

void Dataset::validate() const {
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (columns_[c].size() != rows_) throw ArgumentError("column '" + names_[c] + "' has the wrong length");
        for (std::size_t r = 0; r < rows_; ++r)
            if (!std::isfinite(columns_[c][r]))
                throw ArgumentError("non-finite value in column '" + names_[c] + "' row " + std::to_string(r));
    }
    if (!interventions_.empty() && interventions_.size() != rows_)
        throw ArgumentError("intervention column length mismatch");
}

Dataset read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty CSV input");
    std::vector<std::string> header;
    for (const auto& h : split(line, ',')) header.emplace_back(trim(h));
    std::size_t int_col = header.size();
    std::vector<std::string> names;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == kInterventionColumn)
            int_col = i;
        else
            names.push_back(header[i]);
    }
    std::vector<std::vector<double>> cols(names.size());
    std::vector<std::string> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != header.size())
            throw ParseError("CSV line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                             " fields, expected " + std::to_string(header.size()));
        std::size_t k = 0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i == int_col)
                labels.emplace_back(trim(cells[i]));
            else
                cols[k++].push_back(parse_double(cells[i], "CSV line " + std::to_string(line_no)));
        }
    }
    Dataset d(std::move(names), std::move(cols));
    if (int_col < header.size()) {
        bool any = false;
        for (const auto& l : labels) any = any || !l.empty();
        if (any) d.set_interventions(std::move(labels));
    }
    return d;
}

Dataset read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    return read_csv(in);
}

void write_csv(const Dataset& d, std::ostream& out) {
    auto header = d.names();
    if (d.has_interventions()) header.emplace_back(kInterventionColumn);
    out << join(header, ",") << '\n';
    for (std::size_t r = 0; r < d.rows(); ++r) {
        for (std::size_t c = 0; c < d.cols(); ++c) {
            if (c) out << ',';
            out << format_double(d.at(r, c));
        }
        if (d.has_interventions()) out << ',' << d.interventions()[r];
        out << '\n';
    }
}

void write_csv(const Dataset& d, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ComputeError("cannot write '" + path.string() + "'");
    write_csv(d, out);
}

} // namespace ccshap
