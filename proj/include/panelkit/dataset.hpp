#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace panelkit {

/**
 * @brief Balanced entity × period × variable table.
 *
 * Values of one variable are stored contiguously in entity-major order, so the
 * observation for (entity e, period t) sits at index e * n_periods() + t. Every
 * estimator in the library consumes this layout directly.
 *
 * Instances are immutable; transformations return new datasets.
 */
class PanelDataset {
public:
    /// Validates balance, uniqueness and contiguity. `columns[v]` must hold
    /// entities.size() * periods.size() finite values.
    PanelDataset(std::vector<std::string> entities, std::vector<int> periods,
                 std::vector<std::string> variables, std::vector<std::vector<double>> columns,
                 bool transformed = false);

    [[nodiscard]] const std::vector<std::string>& entities() const noexcept { return entities_; }
    [[nodiscard]] const std::vector<int>& periods() const noexcept { return periods_; }
    [[nodiscard]] const std::vector<std::string>& variables() const noexcept { return variables_; }

    [[nodiscard]] std::size_t n_entities() const noexcept { return entities_.size(); }
    [[nodiscard]] std::size_t n_periods() const noexcept { return periods_.size(); }
    [[nodiscard]] std::size_t n_obs() const noexcept { return entities_.size() * periods_.size(); }
    [[nodiscard]] bool transformed() const noexcept { return transformed_; }

    [[nodiscard]] bool has_variable(std::string_view name) const noexcept;
    /// @throws Error InvalidArgument for unknown names.
    [[nodiscard]] std::size_t variable_index(std::string_view name) const;
    [[nodiscard]] std::optional<std::size_t> entity_index(std::string_view name) const noexcept;

    /// All observations of a variable, entity-major.
    [[nodiscard]] std::span<const double> column(std::string_view name) const;
    /// The time series of one entity.
    [[nodiscard]] std::span<const double> series(std::string_view name, std::size_t entity) const;
    [[nodiscard]] double value(std::size_t entity, std::size_t period, std::string_view name) const;

    /// Copy with one column's values replaced.
    [[nodiscard]] PanelDataset with_column(std::string_view name, std::vector<double> values) const;
    /// Copy restricted to the given entity indices (kept in the given order).
    [[nodiscard]] PanelDataset select_entities(std::span<const std::size_t> indices) const;

    friend bool operator==(const PanelDataset&, const PanelDataset&) = default;

private:
    std::vector<std::string> entities_;
    std::vector<int> periods_;
    std::vector<std::string> variables_;
    std::vector<std::vector<double>> columns_;
    bool transformed_ = false;
};

/// Column names of a long-format file. An empty `variables` list means every
/// column other than the two key columns, in header order.
struct CsvSchema {
    std::string entity_column = "entity";
    std::string year_column = "year";
    std::vector<std::string> variables;
};

/// Long-format CSV reader: header `entity,year,<var1>,...`, one row per
/// (entity, year) in any order. Empty cells and `NA` count as missing.
[[nodiscard]] PanelDataset load_long_csv(const std::filesystem::path& path,
                                         const CsvSchema& schema = {});
[[nodiscard]] PanelDataset parse_long_csv(std::istream& in, const CsvSchema& schema = {},
                                          std::string_view source = "<stream>");

/// Writes the dataset back in long format with shortest round-trip numbers.
void write_long_csv(std::ostream& out, const PanelDataset& d);

// ---------------------------------------------------------------------------
// Log-linearization
// ---------------------------------------------------------------------------

struct TransformPolicy {
    double floor = 0.01;
    /// Variables to transform; empty means all variables.
    std::set<std::string> apply_to;
};

/// x -> ln(max(x, floor)) for the selected variables.
/// @throws Error DoubleTransform when `d` is already transformed.
[[nodiscard]] PanelDataset apply_log_floor(const PanelDataset& d, const TransformPolicy& p);

// ---------------------------------------------------------------------------
// Descriptive statistics
// ---------------------------------------------------------------------------

struct SummaryRow {
    std::string variable;
    double mean = 0.0;
    double median = 0.0;
    double max = 0.0;
    double min = 0.0;
    double std_dev = 0.0;   ///< n - 1 denominator
    double skewness = 0.0;  ///< m3 / m2^1.5, 0 for constant data
    double kurtosis = 0.0;  ///< m4 / m2^2 (non-excess), 0 for constant data
    std::size_t n = 0;
};

[[nodiscard]] SummaryRow summarize(std::string variable, std::span<const double> values);
[[nodiscard]] std::vector<SummaryRow> describe(const PanelDataset& d);

// ---------------------------------------------------------------------------
// Regions
// ---------------------------------------------------------------------------

inline constexpr std::array<std::string_view, 9> kRegionCodes = {"EU", "AS", "AF", "NA", "LA",
                                                                  "OC", "FC", "SS", "PS"};

/// Entity → region assignments. An entity may belong to several regions.
class RegionMap {
public:
    RegionMap() = default;
    /// @throws Error UnknownRegion for codes outside kRegionCodes.
    void add(std::string entity, std::string region);

    [[nodiscard]] bool contains_region(std::string_view region) const noexcept;
    /// Regions present in the map, in canonical kRegionCodes order.
    [[nodiscard]] std::vector<std::string> regions() const;
    /// Entities assigned to `region`, in insertion order.
    [[nodiscard]] std::vector<std::string> entities_in(std::string_view region) const;
    [[nodiscard]] const std::vector<std::pair<std::string, std::string>>& assignments() const noexcept {
        return assignments_;
    }

private:
    std::vector<std::pair<std::string, std::string>> assignments_;
};

/// Reads `entity,region` CSV.
[[nodiscard]] RegionMap load_region_map(const std::filesystem::path& path);
[[nodiscard]] RegionMap parse_region_map(std::istream& in, std::string_view source = "<stream>");

/// Balanced sub-panel of the entities mapped to `region`, in dataset order.
/// @throws Error UnknownRegion, EmptyRegion, or InvalidArgument if the map
///         names an entity absent from the dataset.
[[nodiscard]] PanelDataset subset_region(const PanelDataset& d, const RegionMap& m,
                                         std::string_view region);

/// Splits one CSV record, honouring double quotes.
[[nodiscard]] std::vector<std::string> split_csv_record(std::string_view line);

}  // namespace panelkit
