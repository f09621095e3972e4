#include "panelkit/report.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace panelkit::report {

namespace {

std::size_t display_width(const std::string& s) {
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

}  // namespace

std::string fixed4(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", value);
    std::string s(buf);
    if (s == "-0.0000") s = "0.0000";
    return s;
}

std::string coefficient_cell(double estimate, const std::string& stars, double std_error) {
    return fixed4(estimate) + stars + " (" + fixed4(std_error) + ")";
}

std::string statistic_cell(double statistic, double p_value) {
    return fixed4(statistic) + " (" + fixed4(p_value) + ")";
}

void TextTable::add_row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

void TextTable::render(std::ostream& out) const {
    std::vector<std::size_t> widths;
    for (const auto& row : rows_) {
        if (widths.size() < row.size()) widths.resize(row.size(), 0);
        for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], display_width(row[c]));
    }
    for (const auto& row : rows_) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            const std::string pad(widths[c] - display_width(row[c]), ' ');
            if (c == 0) {
                line += row[c] + pad;
            } else {
                line += "  " + pad + row[c];
            }
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out << line << '\n';
    }
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ',';
        const std::string& cell = cells[i];
        if (cell.find_first_of(",\"\n") == std::string::npos) {
            out << cell;
        } else {
            out << '"';
            for (char c : cell) {
                if (c == '"') out << '"';
                out << c;
            }
            out << '"';
        }
    }
    out << '\n';
}

}  // namespace panelkit::report
