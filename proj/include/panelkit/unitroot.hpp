#pragma once

#include "panelkit/dataset.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace panelkit {

/**
 * @brief One augmented Dickey-Fuller regression with intercept, no trend:
 *
 *     Δz_t = α + ρ z_{t-1} + Σ_{j=1..k} β_j Δz_{t-j} + e_t
 *
 * `t_stat` is ρ̂ divided by its classical standard error.
 */
struct AdfFit {
    double rho = 0.0;
    double t_stat = 0.0;
    std::size_t lag_order = 0;
    double intercept = 0.0;
    std::vector<double> lag_coefficients;
    double sic = 0.0;
    std::size_t n_effective = 0;
};

enum class LagCriterion { SIC };

/// floor(12 (T/100)^{1/4}), reduced until T - 1 - k >= k + 5.
[[nodiscard]] std::size_t default_max_lag(std::size_t series_length);

/// ADF regression at a fixed lag on its maximal sample.
[[nodiscard]] AdfFit adf_fixed_lag(std::span<const double> series, std::size_t lag);

/**
 * @brief ADF regression with the lag order chosen by SIC.
 *
 * Every k in 0..max_lag is scored on the common sample that the longest lag
 * allows, SIC = ln(RSS/n) + (k+2) ln(n)/n. The winner (smallest SIC, ties to the
 * smaller k) is refit on its own maximal sample.
 *
 * @throws Error TooShort unless the largest model keeps one residual degree of
 *         freedom (length >= 2 max_lag + 4); ConstantSeries for flat input.
 */
[[nodiscard]] AdfFit adf_fit(std::span<const double> series, std::size_t max_lag,
                             LagCriterion criterion = LagCriterion::SIC);

// ---------------------------------------------------------------------------
// IPS moments
// ---------------------------------------------------------------------------

struct TStatMoments {
    double mean = 0.0;
    double variance = 0.0;
};

/**
 * @brief Null mean and variance of the ADF t statistic for a driftless Gaussian
 * random walk of length T, tabulated on a (T, k) grid.
 *
 * The built-in table holds moments conditional on SIC selecting lag k with
 * max_lag = default_max_lag(T), which is how adf_fit produces the statistic.
 * Lookups interpolate linearly in T between grid rows that share k.
 */
class MomentTable {
public:
    struct Entry {
        std::size_t T = 0;
        std::size_t k = 0;
        TStatMoments moments;
    };

    MomentTable() = default;
    explicit MomentTable(std::vector<Entry> entries);

    /// The table compiled into the library from data/ips_moments.csv.
    [[nodiscard]] static const MomentTable& builtin();
    /// Parses CSV with header `T,k,mean_t,var_t`.
    [[nodiscard]] static MomentTable parse(std::istream& in);
    void write(std::ostream& out) const;

    [[nodiscard]] std::optional<TStatMoments> lookup(std::size_t T, std::size_t k) const;
    [[nodiscard]] const std::vector<Entry>& entries() const noexcept { return entries_; }

private:
    std::vector<Entry> entries_;
};

/// Monte-Carlo moments of the fixed-lag t statistic for several lags from
/// shared random-walk draws.
[[nodiscard]] std::vector<TStatMoments> simulate_moments(std::size_t T, std::span<const std::size_t> lags,
                                                         std::size_t replications, std::uint64_t seed);

struct SelectedLagMoments {
    TStatMoments moments;
    /// Replications in which SIC chose this lag; moments are zero below two.
    std::size_t count = 0;
};

/// Monte-Carlo moments of the SIC-selected t statistic, conditional on the
/// selected lag, for k = 0..max_lag. Uses the same draws as simulate_moments.
[[nodiscard]] std::vector<SelectedLagMoments> simulate_selected_moments(std::size_t T, std::size_t max_lag,
                                                                        std::size_t replications,
                                                                        std::uint64_t seed);

/// Fewest selections for a conditional cell to be used or tabulated.
inline constexpr std::size_t kMinSelectedDraws = 200;

// ---------------------------------------------------------------------------
// IPS panel test
// ---------------------------------------------------------------------------

enum class MomentsSource { Table, Simulated };

struct IpsOptions {
    /// Per-series maximum lag; default_max_lag(T) when unset.
    std::optional<std::size_t> max_lag;
    bool demean = false;
    /// Moment table to consult; MomentTable::builtin() when null. The built-in
    /// table only applies when the lag cap is default_max_lag(T).
    const MomentTable* table = nullptr;
    std::size_t simulation_replications = 20000;
    std::uint64_t simulation_seed = 20170101;
};

struct IpsResult {
    double t_bar = 0.0;
    double standardized = 0.0;  ///< W statistic, asymptotically N(0, 1)
    double p_value = 1.0;       ///< lower tail
    std::vector<AdfFit> per_entity;
    MomentsSource moments_source = MomentsSource::Table;
};

/// Subtracts each period's cross-entity mean; returns one series per entity.
[[nodiscard]] std::vector<std::vector<double>> demean_cross_section(const PanelDataset& d,
                                                                    std::string_view variable);

/// IPS t-bar test on an explicit set of series. `labels` name the series in errors.
[[nodiscard]] IpsResult ips_test_series(const std::vector<std::vector<double>>& series,
                                        std::span<const std::string> labels, const IpsOptions& options = {});

[[nodiscard]] IpsResult ips_test(const PanelDataset& d, std::string_view variable, const IpsOptions& options = {});

}  // namespace panelkit
