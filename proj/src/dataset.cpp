#include "panelkit/dataset.hpp"

#include "panelkit/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace panelkit {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool is_missing_token(std::string_view s) { return s.empty() || s == "NA" || s == "na"; }

std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

std::optional<int> parse_int(std::string_view s) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return v;
}

std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string format_shortest(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

std::size_t find_column(const std::vector<std::string>& header, std::string_view name,
                        std::string_view source) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw Error(ErrorKind::MalformedCsv,
                    std::string(source) + ": header has no column '" + std::string(name) + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

// ---------------------------------------------------------------------------
// PanelDataset
// ---------------------------------------------------------------------------

PanelDataset::PanelDataset(std::vector<std::string> entities, std::vector<int> periods,
                           std::vector<std::string> variables,
                           std::vector<std::vector<double>> columns, bool transformed)
    : entities_(std::move(entities)),
      periods_(std::move(periods)),
      variables_(std::move(variables)),
      columns_(std::move(columns)),
      transformed_(transformed) {
    if (entities_.empty() || periods_.empty() || variables_.empty()) {
        throw Error(ErrorKind::InvalidArgument, "panel needs at least one entity, period and variable");
    }
    std::unordered_set<std::string> seen(entities_.begin(), entities_.end());
    if (seen.size() != entities_.size()) {
        throw Error(ErrorKind::DuplicateCell, "entity identifiers must be unique");
    }
    std::unordered_set<std::string> vars(variables_.begin(), variables_.end());
    if (vars.size() != variables_.size()) {
        throw Error(ErrorKind::InvalidArgument, "variable names must be unique");
    }
    for (std::size_t i = 1; i < periods_.size(); ++i) {
        if (periods_[i] != periods_[i - 1] + 1) {
            throw Error(ErrorKind::InvalidArgument, "periods must be strictly increasing and contiguous");
        }
    }
    if (columns_.size() != variables_.size()) {
        throw Error(ErrorKind::DimensionMismatch, "one column per variable required");
    }
    for (std::size_t v = 0; v < columns_.size(); ++v) {
        if (columns_[v].size() != n_obs()) {
            throw Error(ErrorKind::DimensionMismatch,
                        "column '" + variables_[v] + "' has " + std::to_string(columns_[v].size()) +
                            " values, expected " + std::to_string(n_obs()));
        }
        for (double x : columns_[v]) {
            if (!std::isfinite(x)) {
                throw Error(ErrorKind::NonFinite, "column '" + variables_[v] + "' holds a non-finite value");
            }
        }
    }
}

bool PanelDataset::has_variable(std::string_view name) const noexcept {
    return std::find(variables_.begin(), variables_.end(), name) != variables_.end();
}

std::size_t PanelDataset::variable_index(std::string_view name) const {
    const auto it = std::find(variables_.begin(), variables_.end(), name);
    if (it == variables_.end()) {
        throw Error(ErrorKind::InvalidArgument, "unknown variable '" + std::string(name) + "'");
    }
    return static_cast<std::size_t>(it - variables_.begin());
}

std::optional<std::size_t> PanelDataset::entity_index(std::string_view name) const noexcept {
    const auto it = std::find(entities_.begin(), entities_.end(), name);
    if (it == entities_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - entities_.begin());
}

std::span<const double> PanelDataset::column(std::string_view name) const {
    return columns_[variable_index(name)];
}

std::span<const double> PanelDataset::series(std::string_view name, std::size_t entity) const {
    if (entity >= n_entities()) {
        throw Error(ErrorKind::InvalidArgument, "entity index out of range");
    }
    return column(name).subspan(entity * n_periods(), n_periods());
}

double PanelDataset::value(std::size_t entity, std::size_t period, std::string_view name) const {
    if (entity >= n_entities() || period >= n_periods()) {
        throw Error(ErrorKind::InvalidArgument, "observation index out of range");
    }
    return column(name)[entity * n_periods() + period];
}

PanelDataset PanelDataset::with_column(std::string_view name, std::vector<double> values) const {
    auto columns = columns_;
    columns[variable_index(name)] = std::move(values);
    return PanelDataset(entities_, periods_, variables_, std::move(columns), transformed_);
}

PanelDataset PanelDataset::select_entities(std::span<const std::size_t> indices) const {
    const std::size_t T = n_periods();
    std::vector<std::string> entities;
    std::vector<std::vector<double>> columns(variables_.size());
    for (std::size_t idx : indices) {
        if (idx >= n_entities()) {
            throw Error(ErrorKind::InvalidArgument, "entity index out of range");
        }
        entities.push_back(entities_[idx]);
        for (std::size_t v = 0; v < variables_.size(); ++v) {
            const auto first = columns_[v].begin() + static_cast<std::ptrdiff_t>(idx * T);
            columns[v].insert(columns[v].end(), first, first + static_cast<std::ptrdiff_t>(T));
        }
    }
    return PanelDataset(std::move(entities), periods_, variables_, std::move(columns), transformed_);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

std::vector<std::string> split_csv_record(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back(trim(current));
            current.clear();
        } else {
            current += c;
        }
    }
    fields.emplace_back(trim(current));
    return fields;
}

PanelDataset parse_long_csv(std::istream& in, const CsvSchema& schema, std::string_view source) {
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorKind::MalformedCsv, std::string(source) + ": missing header row");
    }
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        line.erase(0, 3);
    }
    const auto header = split_csv_record(line);
    const std::size_t entity_col = find_column(header, schema.entity_column, source);
    const std::size_t year_col = find_column(header, schema.year_column, source);

    std::vector<std::string> variables = schema.variables;
    if (variables.empty()) {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (c != entity_col && c != year_col) variables.push_back(header[c]);
        }
    }
    if (variables.empty()) {
        throw Error(ErrorKind::MalformedCsv, std::string(source) + ": no variable columns");
    }
    std::vector<std::size_t> var_cols;
    for (const auto& v : variables) var_cols.push_back(find_column(header, v, source));

    struct Row {
        std::size_t entity;
        int year;
        std::vector<double> values;
        std::size_t line_no;
    };
    std::vector<Row> rows;
    std::vector<std::string> entities;
    std::unordered_map<std::string, std::size_t> entity_ids;
    int min_year = std::numeric_limits<int>::max();
    int max_year = std::numeric_limits<int>::min();

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_record(line);
        if (fields.size() != header.size()) {
            throw Error(ErrorKind::MalformedCsv, std::string(source) + ": line " + std::to_string(line_no) +
                                                     " has " + std::to_string(fields.size()) +
                                                     " fields, header has " + std::to_string(header.size()));
        }
        const auto year = parse_int(fields[year_col]);
        if (!year) {
            throw Error(ErrorKind::UnparsableNumber, std::string(source) + ": line " + std::to_string(line_no) +
                                                         ", column '" + header[year_col] + "': '" +
                                                         fields[year_col] + "' is not a year");
        }
        const std::string& name = fields[entity_col];
        if (name.empty()) {
            throw Error(ErrorKind::MalformedCsv,
                        std::string(source) + ": line " + std::to_string(line_no) + " has an empty entity");
        }
        auto [it, inserted] = entity_ids.try_emplace(name, entities.size());
        if (inserted) entities.push_back(name);

        Row row{it->second, *year, {}, line_no};
        row.values.reserve(var_cols.size());
        for (std::size_t v = 0; v < var_cols.size(); ++v) {
            const std::string& cell = fields[var_cols[v]];
            if (is_missing_token(cell)) {
                row.values.push_back(kMissing);
                continue;
            }
            const auto x = parse_double(cell);
            if (!x) {
                throw Error(ErrorKind::UnparsableNumber,
                            std::string(source) + ": line " + std::to_string(line_no) + ", column '" +
                                header[var_cols[v]] + "': '" + cell + "' is not a number");
            }
            row.values.push_back(*x);
        }
        min_year = std::min(min_year, *year);
        max_year = std::max(max_year, *year);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw Error(ErrorKind::MalformedCsv, std::string(source) + ": no data rows");
    }

    std::vector<int> periods(static_cast<std::size_t>(max_year - min_year + 1));
    std::iota(periods.begin(), periods.end(), min_year);
    const std::size_t T = periods.size();
    const std::size_t N = entities.size();

    std::vector<std::vector<double>> columns(variables.size(), std::vector<double>(N * T, kMissing));
    std::vector<std::size_t> first_line(N * T, 0);
    for (const auto& row : rows) {
        const std::size_t idx = row.entity * T + static_cast<std::size_t>(row.year - min_year);
        if (first_line[idx] != 0) {
            throw Error(ErrorKind::DuplicateCell, std::string(source) + ": (" + entities[row.entity] + ", " +
                                                      std::to_string(row.year) + ") appears on lines " +
                                                      std::to_string(first_line[idx]) + " and " +
                                                      std::to_string(row.line_no));
        }
        first_line[idx] = row.line_no;
        for (std::size_t v = 0; v < variables.size(); ++v) columns[v][idx] = row.values[v];
    }

    std::vector<std::string> gaps;
    for (std::size_t e = 0; e < N; ++e) {
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t v = 0; v < variables.size(); ++v) {
                if (std::isnan(columns[v][e * T + t])) {
                    gaps.push_back("(" + entities[e] + ", " + std::to_string(periods[t]) + ", " + variables[v] + ")");
                }
            }
        }
    }
    if (!gaps.empty()) {
        std::string msg = std::string(source) + ": unbalanced panel, " + std::to_string(gaps.size()) +
                          " missing cell(s): ";
        for (std::size_t i = 0; i < gaps.size(); ++i) {
            if (i) msg += ", ";
            msg += gaps[i];
        }
        throw Error(ErrorKind::MissingCell, msg);
    }
    return PanelDataset(std::move(entities), std::move(periods), std::move(variables), std::move(columns));
}

PanelDataset load_long_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::MalformedCsv, "cannot open '" + path.string() + "'");
    }
    return parse_long_csv(in, schema, path.string());
}

void write_long_csv(std::ostream& out, const PanelDataset& d) {
    out << "entity,year";
    for (const auto& v : d.variables()) out << ',' << quote_if_needed(v);
    out << '\n';
    for (std::size_t e = 0; e < d.n_entities(); ++e) {
        for (std::size_t t = 0; t < d.n_periods(); ++t) {
            out << quote_if_needed(d.entities()[e]) << ',' << d.periods()[t];
            for (const auto& v : d.variables()) out << ',' << format_shortest(d.value(e, t, v));
            out << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// Transform
// ---------------------------------------------------------------------------

PanelDataset apply_log_floor(const PanelDataset& d, const TransformPolicy& p) {
    if (d.transformed()) {
        throw Error(ErrorKind::DoubleTransform, "log-linearization already applied");
    }
    if (!(p.floor > 0.0) || !std::isfinite(p.floor)) {
        throw Error(ErrorKind::InvalidArgument, "log floor must be positive");
    }
    for (const auto& name : p.apply_to) {
        (void)d.variable_index(name);
    }
    std::vector<std::vector<double>> columns;
    columns.reserve(d.variables().size());
    for (const auto& name : d.variables()) {
        const auto src = d.column(name);
        std::vector<double> col(src.begin(), src.end());
        if (p.apply_to.empty() || p.apply_to.count(name) != 0) {
            for (double& x : col) x = std::log(std::max(x, p.floor));
        }
        columns.push_back(std::move(col));
    }
    return PanelDataset(d.entities(), d.periods(), d.variables(), std::move(columns), true);
}

// ---------------------------------------------------------------------------
// Descriptive statistics
// ---------------------------------------------------------------------------

SummaryRow summarize(std::string variable, std::span<const double> values) {
    if (values.empty()) {
        throw Error(ErrorKind::InvalidArgument, "cannot summarize an empty series");
    }
    SummaryRow row;
    row.variable = std::move(variable);
    row.n = values.size();
    const double n = static_cast<double>(values.size());

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    row.min = sorted.front();
    row.max = sorted.back();
    const std::size_t mid = sorted.size() / 2;
    row.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);

    row.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : values) {
        const double d = x - row.mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    row.std_dev = values.size() > 1 ? std::sqrt(m2 / (n - 1.0)) : 0.0;
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (m2 > 0.0) {
        row.skewness = m3 / std::pow(m2, 1.5);
        row.kurtosis = m4 / (m2 * m2);
    }
    return row;
}

std::vector<SummaryRow> describe(const PanelDataset& d) {
    std::vector<SummaryRow> rows;
    rows.reserve(d.variables().size());
    for (const auto& name : d.variables()) {
        rows.push_back(summarize(name, d.column(name)));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Regions
// ---------------------------------------------------------------------------

void RegionMap::add(std::string entity, std::string region) {
    if (std::find(kRegionCodes.begin(), kRegionCodes.end(), region) == kRegionCodes.end()) {
        throw Error(ErrorKind::UnknownRegion, "'" + region + "' is not a region code");
    }
    for (const auto& [e, r] : assignments_) {
        if (e == entity && r == region) {
            throw Error(ErrorKind::DuplicateCell, "'" + entity + "' assigned to " + region + " twice");
        }
    }
    assignments_.emplace_back(std::move(entity), std::move(region));
}

bool RegionMap::contains_region(std::string_view region) const noexcept {
    return std::any_of(assignments_.begin(), assignments_.end(),
                       [&](const auto& a) { return a.second == region; });
}

std::vector<std::string> RegionMap::regions() const {
    std::vector<std::string> out;
    for (auto code : kRegionCodes) {
        if (contains_region(code)) out.emplace_back(code);
    }
    return out;
}

std::vector<std::string> RegionMap::entities_in(std::string_view region) const {
    std::vector<std::string> out;
    for (const auto& [e, r] : assignments_) {
        if (r == region) out.push_back(e);
    }
    return out;
}

RegionMap parse_region_map(std::istream& in, std::string_view source) {
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorKind::MalformedCsv, std::string(source) + ": missing header row");
    }
    const auto header = split_csv_record(line);
    const std::size_t entity_col = find_column(header, "entity", source);
    const std::size_t region_col = find_column(header, "region", source);
    RegionMap map;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_record(line);
        if (fields.size() != header.size()) {
            throw Error(ErrorKind::MalformedCsv,
                        std::string(source) + ": line " + std::to_string(line_no) + " has the wrong field count");
        }
        map.add(fields[entity_col], fields[region_col]);
    }
    return map;
}

RegionMap load_region_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::MalformedCsv, "cannot open '" + path.string() + "'");
    }
    return parse_region_map(in, path.string());
}

PanelDataset subset_region(const PanelDataset& d, const RegionMap& m, std::string_view region) {
    if (std::find(kRegionCodes.begin(), kRegionCodes.end(), region) == kRegionCodes.end()) {
        throw Error(ErrorKind::UnknownRegion, "'" + std::string(region) + "' is not a region code");
    }
    const auto members = m.entities_in(region);
    std::vector<std::size_t> indices;
    for (const auto& name : members) {
        const auto idx = d.entity_index(name);
        if (!idx) {
            throw Error(ErrorKind::InvalidArgument,
                        "region map names '" + name + "' which is not in the dataset");
        }
        indices.push_back(*idx);
    }
    if (indices.empty()) {
        throw Error(ErrorKind::EmptyRegion, "region '" + std::string(region) + "' has no entities");
    }
    std::sort(indices.begin(), indices.end());
    return d.select_entities(indices);
}

}  // namespace panelkit
