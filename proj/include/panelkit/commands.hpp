#pragma once

#include "panelkit/dataset.hpp"
#include "panelkit/estimators.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace panelkit::cli {

/// Stable process exit codes.
namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kIngestion = 2;
inline constexpr int kUnitRoot = 3;
inline constexpr int kEstimation = 4;
inline constexpr int kRegion = 5;
inline constexpr int kSimulation = 6;
}  // namespace exit_code

enum class OutputFormat { Table, Csv };

struct RunConfig {
    std::filesystem::path input;
    std::optional<std::filesystem::path> regions;
    CsvSchema schema;
    /// Defaults to FDI when present, otherwise the first variable.
    std::string dependent;
    /// Defaults to every other variable in file order.
    std::vector<std::string> regressors;
    bool log_transform = false;
    double floor = 0.01;
    double alpha = 0.05;
    OutputFormat format = OutputFormat::Table;
    std::optional<std::uint64_t> seed;
    bool demean = false;
    std::optional<std::size_t> max_lag;
    CovarianceType covariance = CovarianceType::HC0;
    std::size_t threads = 1;
};

/// Model names accepted by `fit`: pooled | fe-lsdv | fe-gls | re | all.
[[nodiscard]] std::vector<EffectKind> parse_models(const std::string& name);

// Each command writes its report to `out` and diagnostics to `err`, and
// returns one of the exit codes above.
int cmd_describe(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_unitroot(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_fit(const RunConfig& config, const std::vector<EffectKind>& models, std::ostream& out, std::ostream& err);
int cmd_select(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_regional(const RunConfig& config, std::ostream& out, std::ostream& err);
/// Reads a DGP spec file, runs it and writes the McReport CSV to `out`.
int cmd_simulate(const RunConfig& config, const std::filesystem::path& spec_file, std::ostream& out,
                 std::ostream& err);

}  // namespace panelkit::cli
