#pragma once

#include "panelkit/dataset.hpp"
#include "panelkit/numeric.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace panelkit {

/// Dependent variable, regressors, and whether a global intercept β₀ is estimated.
struct ModelSpec {
    std::string dependent;
    std::vector<std::string> regressors;
    bool include_intercept = true;

    /// @throws Error InvalidArgument if names are missing, repeated, or the
    ///         dependent appears among the regressors.
    void validate(const PanelDataset& d) const;
};

enum class EffectKind { Pooled, FE_LSDV, FE_GLS, RE };

[[nodiscard]] std::string_view to_string(EffectKind kind) noexcept;

/// Heteroskedasticity-consistent covariance flavour. HC1 scales HC0 by n/(n-k).
enum class CovarianceType { HC0, HC1 };

struct FitOptions {
    CovarianceType covariance = CovarianceType::HC0;
};

/**
 * @brief Random-effects variance decomposition.
 *
 * sigma_u is the spread of the entity component, sigma_e the idiosyncratic
 * one. rho_u / rho_e are their shares of the total variance and theta the
 * quasi-demeaning weight 1 - sqrt(σe² / (σe² + T σu²)).
 */
struct VarianceComponents {
    double sigma_u = 0.0;
    double sigma_e = 0.0;
    double rho_u = 0.0;
    double rho_e = 1.0;
    double theta = 0.0;

    [[nodiscard]] static VarianceComponents from_variances(double sigma_u2, double sigma_e2,
                                                           std::size_t n_periods);
};

/// Swamy-Arora combination: σu² = max(0, s_b² − σe²/T).
[[nodiscard]] VarianceComponents swamy_arora(double between_variance, double sigma_e2,
                                             std::size_t n_periods);

/**
 * @brief Output of one panel estimator.
 *
 * Parameters are reported in the order of `names`: "C" (when an intercept is
 * reported) followed by the regressors. For the dummy-variable estimators, C is
 * the average of the entity intercepts and the per-entity values are kept in
 * `entity_intercepts`.
 *
 * `residuals` are on the raw scale, entity-major: y minus fitted values, where
 * fitted values include the entity intercepts for the FE estimators and only
 * Xβ for pooled and RE.
 */
struct FitResult {
    EffectKind kind = EffectKind::Pooled;
    std::string dependent;
    std::vector<std::string> regressors;
    std::vector<std::string> names;

    Vector coefficients;
    Vector std_errors;  ///< White (sandwich) standard errors
    Vector t_stats;
    Vector p_values;    ///< two-sided, Student t with df_resid

    Matrix robust_covariance;
    Matrix classical_covariance;

    std::optional<double> r2_weighted;
    double r2_unweighted = 0.0;

    Vector residuals;
    std::optional<Vector> entity_intercepts;
    std::optional<VarianceComponents> components;

    double rss = 0.0;
    double sigma2 = 0.0;  ///< residual variance of the estimating regression
    std::size_t n_obs = 0;
    std::size_t n_entities = 0;
    std::size_t n_periods = 0;
    std::size_t df_resid = 0;

    [[nodiscard]] bool has_intercept() const noexcept { return !names.empty() && names.front() == "C"; }
    [[nodiscard]] std::size_t index_of(std::string_view name) const;
    [[nodiscard]] double coefficient(std::string_view name) const;
    [[nodiscard]] double std_error(std::string_view name) const;

    /// Regressor coefficients without the intercept.
    [[nodiscard]] Vector slopes() const;
    /// Classical covariance restricted to the regressor coefficients.
    [[nodiscard]] Matrix slope_covariance_classical() const;
};

/// "***" for p ≤ 0.01, "**" for p ≤ 0.05, "*" for p ≤ 0.10, otherwise "".
[[nodiscard]] std::string significance_stars(double p_value);

/// Sandwich covariance (XᵀX)⁻¹ (Σ eᵢ² xᵢxᵢᵀ) (XᵀX)⁻¹.
[[nodiscard]] Matrix white_covariance(const Matrix& X, const Vector& residuals,
                                      const Matrix& xtx_inverse,
                                      CovarianceType type = CovarianceType::HC0);

/// Square roots of the diagonal of white_covariance.
[[nodiscard]] Vector white_se(const Matrix& X, const Vector& residuals, const Matrix& xtx_inverse,
                              CovarianceType type = CovarianceType::HC0);

[[nodiscard]] FitResult fit_pooled(const PanelDataset& d, const ModelSpec& m, const FitOptions& o = {});
[[nodiscard]] FitResult fit_fe_lsdv(const PanelDataset& d, const ModelSpec& m, const FitOptions& o = {});

/// Two-pass cross-section weighted LSDV: observations of entity a are scaled by
/// 1/s_a where s_a² is the mean squared first-pass LSDV residual of entity a.
[[nodiscard]] FitResult fit_fe_gls(const PanelDataset& d, const ModelSpec& m, const FitOptions& o = {});

/// Within regression for σe², between regression on entity means for s_b².
[[nodiscard]] VarianceComponents estimate_variance_components(const PanelDataset& d, const ModelSpec& m);

[[nodiscard]] FitResult fit_re(const PanelDataset& d, const ModelSpec& m, const FitOptions& o = {});

/// Quasi-demeaned GLS with caller-supplied components (theta taken from `vc`).
[[nodiscard]] FitResult fit_re_with_components(const PanelDataset& d, const ModelSpec& m,
                                               const VarianceComponents& vc, const FitOptions& o = {});

}  // namespace panelkit
