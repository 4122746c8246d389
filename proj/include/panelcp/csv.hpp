#pragma once

#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "panelcp/errors.hpp"
#include "panelcp/panel.hpp"

namespace panelcp {

/// Parsed panel CSV: one row per panel, T numeric columns, an optional
/// header row, and an optional leading string column of panel labels.
struct PanelCsv {
    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels; // empty when no label column
    bool had_header = false;

    PanelDataset to_dataset() const { return PanelDataset::from_rows(rows); }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline bool parse_double(const std::string& cell, double& out) {
    if (cell.empty()) return false;
    char* end = nullptr;
    out = std::strtod(cell.c_str(), &end);
    return end == cell.c_str() + cell.size();
}

} // namespace detail

/// Parse a panel CSV stream. A header is recognized when some cell beyond
/// the first is non-numeric in the first row; a label column is recognized
/// when the first cell of the first data row is non-numeric while the rest
/// parse. Ragged rows and non-numeric data cells produce input errors with
/// row/column positions (1-based, counting the header).
inline PanelCsv read_panel_csv(std::istream& in) {
    PanelCsv out;
    std::string line;
    int line_no = 0;
    bool layout_known = false;
    bool has_labels = false;
    std::size_t n_cols = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);

        if (!layout_known) {
            std::vector<double> parsed(cells.size());
            std::size_t numeric_from = cells.size();
            for (std::size_t c = cells.size(); c-- > 0;) {
                if (detail::parse_double(cells[c], parsed[c])) numeric_from = c; else break;
            }
            if (numeric_from == 0) {
                // all cells numeric: first data row, no labels
                layout_known = true;
                has_labels = false;
                n_cols = cells.size();
                out.rows.push_back(std::move(parsed));
                continue;
            }
            if (numeric_from == 1) {
                // leading label, rest numeric
                layout_known = true;
                has_labels = true;
                n_cols = cells.size();
                out.labels.push_back(cells[0]);
                out.rows.emplace_back(parsed.begin() + 1, parsed.end());
                continue;
            }
            if (!out.had_header) {
                out.had_header = true; // header row; layout decided by the first data row
                continue;
            }
            throw InputError("row " + std::to_string(line_no) +
                             ": expected numeric data (or one leading label column)");
        }

        if (cells.size() != n_cols) {
            throw InputError("row " + std::to_string(line_no) + " has " +
                             std::to_string(cells.size()) + " columns, expected " +
                             std::to_string(n_cols));
        }
        std::vector<double> values;
        values.reserve(n_cols - (has_labels ? 1 : 0));
        for (std::size_t c = has_labels ? 1 : 0; c < cells.size(); ++c) {
            double v = 0.0;
            if (!detail::parse_double(cells[c], v)) {
                throw InputError("row " + std::to_string(line_no) + ", column " +
                                 std::to_string(c + 1) + ": '" + cells[c] + "' is not numeric");
            }
            values.push_back(v);
        }
        if (has_labels) out.labels.push_back(cells[0]);
        out.rows.push_back(std::move(values));
    }

    if (out.rows.empty()) {
        throw InputError("no data rows found in panel CSV");
    }
    return out;
}

inline PanelCsv read_panel_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open input file: " + path);
    return read_panel_csv(in);
}

} // namespace panelcp
