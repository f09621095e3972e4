#pragma once

#include "panelkit/estimators.hpp"

#include <optional>
#include <span>
#include <string>

namespace panelkit {

enum class DistributionKind { ChiSquare, F, StdNormal };

struct Distribution {
    DistributionKind kind = DistributionKind::StdNormal;
    double df1 = 0.0;
    double df2 = 0.0;
};

[[nodiscard]] std::string describe(const Distribution& dist);

/// Outcome of a hypothesis test. `reject` is p_value < alpha.
struct TestResult {
    std::string name;
    double statistic = 0.0;
    Distribution distribution;
    double p_value = 1.0;
    double alpha = 0.05;
    bool reject = false;
};

enum class ModelChoice { Pooled, FE, RE };

[[nodiscard]] std::string_view to_string(ModelChoice choice) noexcept;

/// Covariance convention fed into the Hausman quadratic form.
enum class HausmanCovariance { Classical, Robust };

struct SelectionOptions {
    double alpha = 0.05;
    HausmanCovariance hausman_covariance = HausmanCovariance::Classical;
    FitOptions fit;
};

/**
 * @brief Result of the pooled / FE / RE decision procedure.
 *
 * The Hausman test is present exactly when both the redundant fixed-effects
 * test and the BP LM test reject. `chosen` is the fit of the selected model:
 * pooled OLS, the cross-section weighted FE fit, or the RE fit.
 */
struct SelectionOutcome {
    ModelChoice decision = ModelChoice::Pooled;
    TestResult rfe;
    TestResult bplm;
    std::optional<TestResult> hausman;
    FitResult chosen;
};

/// F = [(R²_FE − R²_P)/(N−1)] / [(1−R²_FE)/(NT−N−K)] against F(N−1, NT−N−K).
[[nodiscard]] TestResult redundant_fe_test(const FitResult& pooled, const FitResult& fe, double alpha = 0.05);

/// Breusch-Pagan LM for random effects from pooled residuals, χ²(1).
[[nodiscard]] TestResult bp_lm_test(const FitResult& pooled, double alpha = 0.05);
/// Honda's one-sided variant, standard normal upper tail.
[[nodiscard]] TestResult honda_test(const FitResult& pooled, double alpha = 0.05);

/// Residual-based building blocks, entity-major residuals.
[[nodiscard]] double bp_lm_statistic(std::span<const double> residuals, std::size_t n_entities,
                                     std::size_t n_periods);
[[nodiscard]] double honda_statistic(std::span<const double> residuals, std::size_t n_entities,
                                     std::size_t n_periods);

/**
 * @brief Hausman quadratic form qᵀ (V_FE − V_RE)⁺ q with q = β_FE − β_RE.
 *
 * The covariance difference is symmetrized and its negative eigenvalues are
 * clipped to zero before taking the pseudoinverse, so the result is always ≥ 0.
 */
[[nodiscard]] double hausman_statistic(const Vector& beta_fe, const Vector& beta_re, const Matrix& var_fe,
                                       const Matrix& var_re);

[[nodiscard]] TestResult hausman_test(const FitResult& fe, const FitResult& re, double alpha = 0.05,
                                      HausmanCovariance covariance = HausmanCovariance::Classical);

/// Panel Durbin-Watson: squared differences are taken within each entity only.
[[nodiscard]] double durbin_watson(std::span<const double> residuals, std::size_t n_entities,
                                   std::size_t n_periods);
[[nodiscard]] double durbin_watson(const FitResult& fit);

/// The four-cell decision table plus the Hausman tie-break, from p-values alone.
/// `hausman_p` is consulted only when both effects are detected.
[[nodiscard]] ModelChoice decide_model(double rfe_p, double bplm_p, std::optional<double> hausman_p,
                                       double alpha = 0.05);

[[nodiscard]] SelectionOutcome select_model(const PanelDataset& d, const ModelSpec& m,
                                            const SelectionOptions& options = {});

}  // namespace panelkit
