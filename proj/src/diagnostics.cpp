#include "panelkit/diagnostics.hpp"

#include "panelkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace panelkit {

namespace {

TestResult make_test(std::string name, double statistic, Distribution dist, double p_value, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "alpha must lie in (0, 1)");
    }
    TestResult t;
    t.name = std::move(name);
    t.statistic = statistic;
    t.distribution = dist;
    t.p_value = std::clamp(p_value, 0.0, 1.0);
    t.alpha = alpha;
    t.reject = t.p_value < alpha;
    return t;
}

// Σ_a (Σ_t e_at)² / Σ e_at²
double between_ratio(std::span<const double> residuals, std::size_t N, std::size_t T) {
    if (residuals.size() != N * T) {
        throw Error(ErrorKind::DimensionMismatch, "residual count does not match N x T");
    }
    if (T < 2) {
        throw Error(ErrorKind::InsufficientDF, "LM tests need at least two periods");
    }
    double total = 0.0;
    double grouped = 0.0;
    for (std::size_t a = 0; a < N; ++a) {
        double sum = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
            const double e = residuals[a * T + t];
            sum += e;
            total += e * e;
        }
        grouped += sum * sum;
    }
    if (!(total > 0.0)) {
        throw Error(ErrorKind::ZeroResidualSS, "residual sum of squares is zero");
    }
    return grouped / total;
}

std::span<const double> as_span(const Vector& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

Matrix slope_block(const FitResult& fit, const Matrix& cov) {
    const Eigen::Index off = fit.has_intercept() ? 1 : 0;
    const Eigen::Index k = cov.rows() - off;
    return cov.bottomRightCorner(k, k);
}

}  // namespace

std::string describe(const Distribution& dist) {
    std::ostringstream out;
    switch (dist.kind) {
        case DistributionKind::ChiSquare: out << "ChiSquare(" << dist.df1 << ")"; break;
        case DistributionKind::F: out << "F(" << dist.df1 << ", " << dist.df2 << ")"; break;
        case DistributionKind::StdNormal: out << "N(0, 1)"; break;
    }
    return out.str();
}

std::string_view to_string(ModelChoice choice) noexcept {
    switch (choice) {
        case ModelChoice::Pooled: return "Pooled";
        case ModelChoice::FE: return "FE";
        case ModelChoice::RE: return "RE";
    }
    return "?";
}

TestResult redundant_fe_test(const FitResult& pooled, const FitResult& fe, double alpha) {
    if (pooled.kind != EffectKind::Pooled || fe.kind != EffectKind::FE_LSDV) {
        throw Error(ErrorKind::MismatchedFits, "redundant FE test needs a pooled fit and an unweighted LSDV fit");
    }
    if (pooled.n_obs != fe.n_obs || pooled.n_entities != fe.n_entities || pooled.n_periods != fe.n_periods ||
        pooled.regressors != fe.regressors || pooled.dependent != fe.dependent) {
        throw Error(ErrorKind::MismatchedFits, "pooled and FE fits were estimated on different data or models");
    }
    const double N = static_cast<double>(fe.n_entities);
    const double df1 = N - 1.0;
    const double df2 = static_cast<double>(fe.df_resid);
    const double unexplained = 1.0 - fe.r2_unweighted;
    if (!(unexplained > 0.0)) {
        throw Error(ErrorKind::ZeroResidualSS, "LSDV fit is exact; F statistic undefined");
    }
    const double F = std::max(0.0, ((fe.r2_unweighted - pooled.r2_unweighted) / df1) / (unexplained / df2));
    return make_test("Redundant FE", F, {DistributionKind::F, df1, df2}, f_sf(F, df1, df2), alpha);
}

double bp_lm_statistic(std::span<const double> residuals, std::size_t N, std::size_t T) {
    const double A = between_ratio(residuals, N, T);
    const double scale = static_cast<double>(N * T) / (2.0 * static_cast<double>(T - 1));
    return scale * (A - 1.0) * (A - 1.0);
}

double honda_statistic(std::span<const double> residuals, std::size_t N, std::size_t T) {
    const double A = between_ratio(residuals, N, T);
    const double scale = static_cast<double>(N * T) / (2.0 * static_cast<double>(T - 1));
    return std::sqrt(scale) * (A - 1.0);
}

TestResult bp_lm_test(const FitResult& pooled, double alpha) {
    const double lm = bp_lm_statistic(as_span(pooled.residuals), pooled.n_entities, pooled.n_periods);
    return make_test("BP LM", lm, {DistributionKind::ChiSquare, 1.0, 0.0}, chi2_sf(lm, 1), alpha);
}

TestResult honda_test(const FitResult& pooled, double alpha) {
    const double h = honda_statistic(as_span(pooled.residuals), pooled.n_entities, pooled.n_periods);
    return make_test("Honda", h, {DistributionKind::StdNormal, 0.0, 0.0}, normal_sf(h), alpha);
}

double hausman_statistic(const Vector& beta_fe, const Vector& beta_re, const Matrix& var_fe, const Matrix& var_re) {
    const auto k = beta_fe.size();
    if (beta_re.size() != k || var_fe.rows() != k || var_fe.cols() != k || var_re.rows() != k ||
        var_re.cols() != k) {
        throw Error(ErrorKind::SpecMismatch, "Hausman operands have inconsistent dimensions");
    }
    const Vector q = beta_fe - beta_re;
    const Matrix diff = var_fe - var_re;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (diff + diff.transpose()));
    const Vector clipped = eig.eigenvalues().cwiseMax(0.0);
    const Matrix psd = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    const double H = q.dot(pseudoinverse(psd) * q);
    return std::max(0.0, H);
}

TestResult hausman_test(const FitResult& fe, const FitResult& re, double alpha, HausmanCovariance covariance) {
    if (fe.regressors != re.regressors || fe.dependent != re.dependent) {
        throw Error(ErrorKind::SpecMismatch, "FE and RE fits use different regressor sets");
    }
    if (fe.regressors.empty()) {
        throw Error(ErrorKind::SpecMismatch, "Hausman test needs at least one slope coefficient");
    }
    const bool classical = covariance == HausmanCovariance::Classical;
    const Matrix v_fe = slope_block(fe, classical ? fe.classical_covariance : fe.robust_covariance);
    const Matrix v_re = slope_block(re, classical ? re.classical_covariance : re.robust_covariance);
    const double H = hausman_statistic(fe.slopes(), re.slopes(), v_fe, v_re);
    const int df = static_cast<int>(fe.regressors.size());
    return make_test("Hausman", H, {DistributionKind::ChiSquare, static_cast<double>(df), 0.0}, chi2_sf(H, df),
                     alpha);
}

double durbin_watson(std::span<const double> residuals, std::size_t N, std::size_t T) {
    if (residuals.size() != N * T) {
        throw Error(ErrorKind::DimensionMismatch, "residual count does not match N x T");
    }
    if (T < 2) {
        throw Error(ErrorKind::InsufficientDF, "Durbin-Watson needs at least two observations per entity");
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t a = 0; a < N; ++a) {
        for (std::size_t t = 0; t < T; ++t) {
            const double e = residuals[a * T + t];
            den += e * e;
            if (t > 0) {
                const double diff = e - residuals[a * T + t - 1];
                num += diff * diff;
            }
        }
    }
    if (!(den > 0.0)) {
        throw Error(ErrorKind::ZeroResidualSS, "residual sum of squares is zero");
    }
    return num / den;
}

double durbin_watson(const FitResult& fit) {
    return durbin_watson(as_span(fit.residuals), fit.n_entities, fit.n_periods);
}

ModelChoice decide_model(double rfe_p, double bplm_p, std::optional<double> hausman_p, double alpha) {
    const bool fixed = rfe_p < alpha;
    const bool random = bplm_p < alpha;
    if (!fixed && !random) return ModelChoice::Pooled;
    if (fixed && !random) return ModelChoice::FE;
    if (!fixed && random) return ModelChoice::RE;
    if (!hausman_p) {
        throw Error(ErrorKind::InvalidArgument, "both effects detected; a Hausman p-value is required");
    }
    return *hausman_p < alpha ? ModelChoice::FE : ModelChoice::RE;
}

SelectionOutcome select_model(const PanelDataset& d, const ModelSpec& m, const SelectionOptions& options) {
    const FitResult pooled = fit_pooled(d, m, options.fit);
    const FitResult lsdv = fit_fe_lsdv(d, m, options.fit);

    SelectionOutcome out;
    out.rfe = redundant_fe_test(pooled, lsdv, options.alpha);
    out.bplm = bp_lm_test(pooled, options.alpha);

    std::optional<FitResult> re;
    if (out.rfe.reject && out.bplm.reject) {
        re = fit_re(d, m, options.fit);
        out.hausman = hausman_test(lsdv, *re, options.alpha, options.hausman_covariance);
    }
    out.decision = decide_model(out.rfe.p_value, out.bplm.p_value,
                                out.hausman ? std::optional<double>(out.hausman->p_value) : std::nullopt,
                                options.alpha);
    switch (out.decision) {
        case ModelChoice::Pooled: out.chosen = pooled; break;
        case ModelChoice::FE: out.chosen = fit_fe_gls(d, m, options.fit); break;
        case ModelChoice::RE: out.chosen = re ? *re : fit_re(d, m, options.fit); break;
    }
    return out;
}

}  // namespace panelkit
