#pragma once

#include "panelkit/dataset.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace panelkit {

/**
 * @brief Synthetic panel data-generating process.
 *
 *     y_at = intercept + Σ_j β_j x_jat + ω_a + e_at
 *
 * Each regressor follows x_t = 0.5 x_{t-1} + η_t with η ~ N(0, 1), started from
 * its stationary distribution, independently across entities and regressors.
 * With `unit_root_mode` the regressors are random walks x_t = x_{t-1} + η_t
 * started at η_0. ω_a ~ N(0, σu²); with `fixed_effect_mode` the entity effect
 * becomes 0.8 × (entity mean of the first regressor) + N(0, σu²), which makes it
 * correlated with the regressors. e_at ~ N(0, σe²).
 *
 * Entity a draws from its own stream derive_seed(seed, a), so a dataset is a
 * pure function of the spec.
 */
struct DgpSpec {
    std::size_t n_entities = 20;
    std::size_t n_periods = 10;
    std::vector<std::pair<std::string, double>> true_beta = {{"x", 1.0}};
    double intercept = 0.0;
    double sigma_u = 0.0;
    double sigma_e = 1.0;
    bool fixed_effect_mode = false;
    bool unit_root_mode = false;
    std::uint64_t seed = 1;
    std::string dependent = "y";
    std::string entity_prefix = "E";
    int first_period = 1995;

    /// @throws Error InvalidSpec.
    void validate() const;
};

[[nodiscard]] PanelDataset generate(const DgpSpec& spec);

enum class Pipeline { Pooled, FeLsdv, FeGls, Re, Tests, UnitRoot };

[[nodiscard]] std::string_view to_string(Pipeline p) noexcept;
/// Accepts pooled | fe-lsdv | fe-gls | re | tests | unitroot.
[[nodiscard]] Pipeline parse_pipeline(std::string_view name);

struct CoefficientSummary {
    std::string name;
    double true_value = 0.0;
    double estimate_mean = 0.0;
    double estimate_sd = 0.0;
    double coverage_95 = 0.0;
};

struct RateSummary {
    std::string name;
    double rejection_rate = 0.0;
};

struct McReport {
    Pipeline pipeline = Pipeline::Re;
    std::uint64_t master_seed = 0;
    std::size_t replications = 0;
    std::vector<CoefficientSummary> coefficients;
    std::vector<RateSummary> tests;

    [[nodiscard]] const CoefficientSummary& coefficient(std::string_view name) const;
    [[nodiscard]] double rejection_rate(std::string_view name) const;
    void write_csv(std::ostream& out) const;
};

struct ExperimentOptions {
    double alpha = 0.05;
    /// Worker threads; 0 picks std::thread::hardware_concurrency().
    std::size_t threads = 1;
};

/**
 * @brief Repeats generate → fit/test and aggregates.
 *
 * Replication r uses seed derive_seed(spec.seed, r), so the report does not
 * depend on the thread count. Estimation pipelines summarize each slope with
 * its mean, standard deviation and 95% coverage (β̂ ± 1.96 White SE). `Tests`
 * records rejection rates of the redundant-FE, BP LM, Honda and Hausman tests
 * (Hausman evaluated in every replication). `UnitRoot` records the IPS
 * rejection rate on the first regressor.
 */
[[nodiscard]] McReport run_experiment(const DgpSpec& spec, Pipeline pipeline, std::size_t replications,
                                      const ExperimentOptions& options = {});

/// A DGP plus what to run on it, as read from a spec file.
struct ExperimentSpec {
    DgpSpec dgp;
    Pipeline pipeline = Pipeline::Re;
    std::size_t replications = 100;
    bool has_seed = false;
};

/// Flat `key = value` format; `#` starts a comment. Keys: n_entities,
/// n_periods, intercept, sigma_u, sigma_e, fixed_effect_mode, unit_root_mode,
/// seed, dependent, entity_prefix, first_period, pipeline, replications and
/// `beta.<name>` (one per regressor, in file order).
[[nodiscard]] ExperimentSpec parse_experiment_spec(std::istream& in);

}  // namespace panelkit
