#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace panelkit::report {

/// Fixed four-decimal rendering; negative zero prints as 0.0000.
[[nodiscard]] std::string fixed4(double value);

/// "1.2345*** (0.1234)"
[[nodiscard]] std::string coefficient_cell(double estimate, const std::string& stars, double std_error);

/// "15.8400 (0.0000)"
[[nodiscard]] std::string statistic_cell(double statistic, double p_value);

/// Column-aligned plain-text table. The first column is left-aligned, the rest
/// right-aligned; widths count UTF-8 code points.
class TextTable {
public:
    void add_row(std::vector<std::string> cells);
    void render(std::ostream& out) const;

private:
    std::vector<std::vector<std::string>> rows_;
};

/// One CSV record with RFC 4180 quoting where needed.
void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);

}  // namespace panelkit::report
