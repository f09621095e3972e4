#include "panelkit/estimators.hpp"

#include "panelkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace panelkit {

namespace {

struct PanelArrays {
    Vector y;
    Matrix X;  // regressors only, entity-major rows
    std::size_t N = 0;
    std::size_t T = 0;
};

PanelArrays extract(const PanelDataset& d, const ModelSpec& m) {
    m.validate(d);
    PanelArrays a;
    a.N = d.n_entities();
    a.T = d.n_periods();
    const auto n = static_cast<Eigen::Index>(d.n_obs());
    const auto y = d.column(m.dependent);
    a.y = Eigen::Map<const Vector>(y.data(), n);
    a.X.resize(n, static_cast<Eigen::Index>(m.regressors.size()));
    for (std::size_t j = 0; j < m.regressors.size(); ++j) {
        const auto col = d.column(m.regressors[j]);
        a.X.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Vector>(col.data(), n);
    }
    return a;
}

Matrix entity_means(const Matrix& X, std::size_t N, std::size_t T) {
    Matrix means(static_cast<Eigen::Index>(N), X.cols());
    for (std::size_t a = 0; a < N; ++a) {
        means.row(static_cast<Eigen::Index>(a)) =
            X.middleRows(static_cast<Eigen::Index>(a * T), static_cast<Eigen::Index>(T)).colwise().mean();
    }
    return means;
}

// Repeats each entity row T times.
Matrix expand_entities(const Matrix& per_entity, std::size_t T) {
    Matrix out(per_entity.rows() * static_cast<Eigen::Index>(T), per_entity.cols());
    for (Eigen::Index a = 0; a < per_entity.rows(); ++a) {
        out.middleRows(a * static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(T)).rowwise() =
            per_entity.row(a);
    }
    return out;
}

double centered_tss(const Vector& y) { return (y.array() - y.mean()).square().sum(); }

Matrix with_intercept(const Matrix& X, double value = 1.0) {
    Matrix out(X.rows(), X.cols() + 1);
    out.col(0).setConstant(value);
    out.rightCols(X.cols()) = X;
    return out;
}

Matrix with_dummies(const Matrix& X, std::size_t N, std::size_t T) {
    Matrix out = Matrix::Zero(X.rows(), static_cast<Eigen::Index>(N) + X.cols());
    for (std::size_t a = 0; a < N; ++a) {
        out.block(static_cast<Eigen::Index>(a * T), static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(T), 1)
            .setOnes();
    }
    out.rightCols(X.cols()) = X;
    return out;
}

void finish_inference(FitResult& r) {
    r.std_errors = r.robust_covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    const auto k = r.coefficients.size();
    r.t_stats.resize(k);
    r.p_values.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const double se = r.std_errors(i);
        if (se > 0.0) {
            r.t_stats(i) = r.coefficients(i) / se;
            r.p_values(i) = student_t_two_sided(r.t_stats(i), static_cast<double>(r.df_resid));
        } else {
            // Exact fit: the coefficient is known without sampling error.
            r.t_stats(i) = 0.0;
            r.p_values(i) = r.coefficients(i) == 0.0 ? 1.0 : 0.0;
        }
    }
}

void require_df(std::size_t n, std::size_t params, const char* what) {
    if (n <= params) {
        throw Error(ErrorKind::InsufficientDF, std::string(what) + ": " + std::to_string(n) +
                                                   " observations for " + std::to_string(params) +
                                                   " parameters");
    }
}

FitResult make_result(EffectKind kind, const PanelDataset& d, const ModelSpec& m) {
    FitResult r;
    r.kind = kind;
    r.dependent = m.dependent;
    r.regressors = m.regressors;
    r.n_obs = d.n_obs();
    r.n_entities = d.n_entities();
    r.n_periods = d.n_periods();
    return r;
}

struct LsdvStage {
    LeastSquaresFit ls;
    Matrix design;
};

LsdvStage lsdv_stage(const PanelArrays& a) {
    if (a.N < 2) {
        throw Error(ErrorKind::InsufficientDF, "fixed effects need at least two entities");
    }
    require_df(a.N * a.T, a.N + static_cast<std::size_t>(a.X.cols()), "LSDV");
    LsdvStage s;
    s.design = with_dummies(a.X, a.N, a.T);
    s.ls = solve_least_squares(s.design, a.y);
    return s;
}

// Maps [α_1..α_N, β] onto the reported [C = mean α, β].
Matrix lsdv_reporting_map(std::size_t N, Eigen::Index K) {
    const auto n = static_cast<Eigen::Index>(N);
    Matrix G = Matrix::Zero(K + 1, n + K);
    G.row(0).head(n).setConstant(1.0 / static_cast<double>(N));
    G.bottomRightCorner(K, K).setIdentity();
    return G;
}

// Fills the reported parameters of a dummy-variable fit whose full parameter
// vector is [α_1..α_N, β].
void fill_lsdv_parameters(FitResult& r, const PanelArrays& a, const LeastSquaresFit& ls,
                          const Matrix& design, CovarianceType cov) {
    const auto K = a.X.cols();
    const auto n = static_cast<Eigen::Index>(a.N);
    const Matrix G = lsdv_reporting_map(a.N, K);
    r.names.assign(1, "C");
    r.names.insert(r.names.end(), r.regressors.begin(), r.regressors.end());
    r.coefficients = G * ls.coefficients;
    r.entity_intercepts = ls.coefficients.head(n);
    r.df_resid = a.N * a.T - a.N - static_cast<std::size_t>(K);
    r.rss = ls.rss;
    r.sigma2 = ls.rss / static_cast<double>(r.df_resid);
    r.robust_covariance = G * white_covariance(design, ls.residuals, ls.xtx_inverse, cov) * G.transpose();
    r.classical_covariance = G * (r.sigma2 * ls.xtx_inverse) * G.transpose();
}

}  // namespace

// ---------------------------------------------------------------------------

void ModelSpec::validate(const PanelDataset& d) const {
    if (!d.has_variable(dependent)) {
        throw Error(ErrorKind::InvalidArgument, "dependent variable '" + dependent + "' not in dataset");
    }
    std::set<std::string> seen;
    for (const auto& r : regressors) {
        if (r == dependent) {
            throw Error(ErrorKind::InvalidArgument, "'" + r + "' is both dependent and regressor");
        }
        if (!d.has_variable(r)) {
            throw Error(ErrorKind::InvalidArgument, "regressor '" + r + "' not in dataset");
        }
        if (!seen.insert(r).second) {
            throw Error(ErrorKind::InvalidArgument, "regressor '" + r + "' listed twice");
        }
    }
    if (!include_intercept && regressors.empty()) {
        throw Error(ErrorKind::InvalidArgument, "model has neither intercept nor regressors");
    }
}

std::string_view to_string(EffectKind kind) noexcept {
    switch (kind) {
        case EffectKind::Pooled: return "Pooled";
        case EffectKind::FE_LSDV: return "FE (LSDV)";
        case EffectKind::FE_GLS: return "FE (GLS)";
        case EffectKind::RE: return "RE";
    }
    return "?";
}

VarianceComponents VarianceComponents::from_variances(double sigma_u2, double sigma_e2, std::size_t n_periods) {
    if (!(sigma_u2 >= 0.0) || !(sigma_e2 >= 0.0) || !std::isfinite(sigma_u2) || !std::isfinite(sigma_e2)) {
        throw Error(ErrorKind::InvalidArgument, "variance components must be finite and nonnegative");
    }
    VarianceComponents vc;
    vc.sigma_u = std::sqrt(sigma_u2);
    vc.sigma_e = std::sqrt(sigma_e2);
    const double total = sigma_u2 + sigma_e2;
    vc.rho_u = total > 0.0 ? sigma_u2 / total : 0.0;
    vc.rho_e = 1.0 - vc.rho_u;
    const double denom = sigma_e2 + static_cast<double>(n_periods) * sigma_u2;
    vc.theta = denom > 0.0 ? 1.0 - std::sqrt(sigma_e2 / denom) : 0.0;
    return vc;
}

VarianceComponents swamy_arora(double between_variance, double sigma_e2, std::size_t n_periods) {
    if (n_periods == 0) {
        throw Error(ErrorKind::InvalidArgument, "n_periods must be positive");
    }
    const double sigma_u2 = std::max(0.0, between_variance - sigma_e2 / static_cast<double>(n_periods));
    return VarianceComponents::from_variances(sigma_u2, sigma_e2, n_periods);
}

std::size_t FitResult::index_of(std::string_view name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
        throw Error(ErrorKind::InvalidArgument, "no coefficient named '" + std::string(name) + "'");
    }
    return static_cast<std::size_t>(it - names.begin());
}

double FitResult::coefficient(std::string_view name) const {
    return coefficients(static_cast<Eigen::Index>(index_of(name)));
}

double FitResult::std_error(std::string_view name) const {
    return std_errors(static_cast<Eigen::Index>(index_of(name)));
}

Vector FitResult::slopes() const {
    const Eigen::Index off = has_intercept() ? 1 : 0;
    return coefficients.tail(coefficients.size() - off);
}

Matrix FitResult::slope_covariance_classical() const {
    const Eigen::Index off = has_intercept() ? 1 : 0;
    const Eigen::Index k = classical_covariance.rows() - off;
    return classical_covariance.bottomRightCorner(k, k);
}

std::string significance_stars(double p_value) {
    if (p_value <= 0.01) return "***";
    if (p_value <= 0.05) return "**";
    if (p_value <= 0.10) return "*";
    return "";
}

Matrix white_covariance(const Matrix& X, const Vector& residuals, const Matrix& xtx_inverse,
                        CovarianceType type) {
    if (X.rows() != residuals.size() || xtx_inverse.rows() != X.cols() || xtx_inverse.cols() != X.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "white_covariance operand shapes disagree");
    }
    const Matrix scaled = X.array().colwise() * residuals.array();
    const Matrix meat = scaled.transpose() * scaled;
    Matrix cov = xtx_inverse * meat * xtx_inverse;
    if (type == CovarianceType::HC1) {
        const double n = static_cast<double>(X.rows());
        const double k = static_cast<double>(X.cols());
        if (n <= k) {
            throw Error(ErrorKind::InsufficientDF, "HC1 needs more observations than parameters");
        }
        cov *= n / (n - k);
    }
    return 0.5 * (cov + cov.transpose());
}

Vector white_se(const Matrix& X, const Vector& residuals, const Matrix& xtx_inverse, CovarianceType type) {
    return white_covariance(X, residuals, xtx_inverse, type).diagonal().cwiseMax(0.0).cwiseSqrt();
}

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

FitResult fit_pooled(const PanelDataset& d, const ModelSpec& m, const FitOptions& o) {
    const PanelArrays a = extract(d, m);
    const Matrix X = m.include_intercept ? with_intercept(a.X) : a.X;
    require_df(static_cast<std::size_t>(X.rows()), static_cast<std::size_t>(X.cols()), "pooled");
    const LeastSquaresFit ls = solve_least_squares(X, a.y);

    FitResult r = make_result(EffectKind::Pooled, d, m);
    if (m.include_intercept) r.names.emplace_back("C");
    r.names.insert(r.names.end(), m.regressors.begin(), m.regressors.end());
    r.coefficients = ls.coefficients;
    r.residuals = ls.residuals;
    r.rss = ls.rss;
    r.df_resid = static_cast<std::size_t>(X.rows() - X.cols());
    r.sigma2 = ls.rss / static_cast<double>(r.df_resid);
    r.robust_covariance = white_covariance(X, ls.residuals, ls.xtx_inverse, o.covariance);
    r.classical_covariance = r.sigma2 * ls.xtx_inverse;

    const double tss = m.include_intercept ? centered_tss(a.y) : a.y.squaredNorm();
    r.r2_unweighted = tss > 0.0 ? 1.0 - ls.rss / tss : 1.0;
    finish_inference(r);
    return r;
}

FitResult fit_fe_lsdv(const PanelDataset& d, const ModelSpec& m, const FitOptions& o) {
    const PanelArrays a = extract(d, m);
    const LsdvStage s = lsdv_stage(a);

    FitResult r = make_result(EffectKind::FE_LSDV, d, m);
    fill_lsdv_parameters(r, a, s.ls, s.design, o.covariance);
    r.residuals = s.ls.residuals;
    const double tss = centered_tss(a.y);
    r.r2_unweighted = tss > 0.0 ? 1.0 - s.ls.rss / tss : 1.0;
    finish_inference(r);
    return r;
}

FitResult fit_fe_gls(const PanelDataset& d, const ModelSpec& m, const FitOptions& o) {
    const PanelArrays a = extract(d, m);
    const LsdvStage first = lsdv_stage(a);

    const auto T = static_cast<Eigen::Index>(a.T);
    Vector weights(static_cast<Eigen::Index>(a.N * a.T));
    for (std::size_t e = 0; e < a.N; ++e) {
        const auto start = static_cast<Eigen::Index>(e) * T;
        const double var = first.ls.residuals.segment(start, T).squaredNorm() / static_cast<double>(a.T);
        if (var < 1e-12) {
            throw Error(ErrorKind::DegenerateWeight,
                        "entity '" + d.entities()[e] + "' has residual variance " + std::to_string(var) +
                            "; cross-section weighting is ill-posed");
        }
        weights.segment(start, T).setConstant(1.0 / std::sqrt(var));
    }

    const Matrix Xw = first.design.array().colwise() * weights.array();
    const Vector yw = a.y.cwiseProduct(weights);
    const LeastSquaresFit ls = solve_least_squares(Xw, yw);

    FitResult r = make_result(EffectKind::FE_GLS, d, m);
    fill_lsdv_parameters(r, a, ls, Xw, o.covariance);
    r.residuals = a.y - first.design * ls.coefficients;

    const Vector w2 = weights.cwiseAbs2();
    const double weighted_mean = w2.dot(a.y) / w2.sum();
    const double tss_w = (w2.array() * (a.y.array() - weighted_mean).square()).sum();
    r.r2_weighted = tss_w > 0.0 ? 1.0 - ls.rss / tss_w : 1.0;
    const double tss = centered_tss(a.y);
    r.r2_unweighted = tss > 0.0 ? std::max(0.0, 1.0 - r.residuals.squaredNorm() / tss) : 1.0;
    finish_inference(r);
    return r;
}

VarianceComponents estimate_variance_components(const PanelDataset& d, const ModelSpec& m) {
    const PanelArrays a = extract(d, m);
    if (a.N < 2 || a.T < 2) {
        throw Error(ErrorKind::InsufficientDF, "variance components need N >= 2 and T >= 2");
    }
    const auto K = static_cast<std::size_t>(a.X.cols());
    const std::size_t within_df = a.N * (a.T - 1);
    if (within_df <= K) {
        throw Error(ErrorKind::InsufficientDF, "within regression has no residual degrees of freedom");
    }
    if (a.N <= K + 1) {
        throw Error(ErrorKind::InsufficientDF, "between regression needs more entities than parameters (" +
                                                   std::to_string(a.N) + " <= " + std::to_string(K + 1) + ")");
    }

    const Vector y_means = entity_means(a.y, a.N, a.T);
    const Matrix X_means = entity_means(a.X, a.N, a.T);
    const Vector y_within = a.y - expand_entities(y_means, a.T);

    double within_rss = y_within.squaredNorm();
    if (K > 0) {
        const Matrix X_within = a.X - expand_entities(X_means, a.T);
        within_rss = solve_least_squares(X_within, y_within).rss;
    }
    const double sigma_e2 = within_rss / static_cast<double>(within_df - K);

    const LeastSquaresFit between = solve_least_squares(with_intercept(X_means), y_means);
    const double between_variance = between.rss / static_cast<double>(a.N - K - 1);
    return swamy_arora(between_variance, sigma_e2, a.T);
}

FitResult fit_re(const PanelDataset& d, const ModelSpec& m, const FitOptions& o) {
    return fit_re_with_components(d, m, estimate_variance_components(d, m), o);
}

FitResult fit_re_with_components(const PanelDataset& d, const ModelSpec& m, const VarianceComponents& vc,
                                 const FitOptions& o) {
    if (!(vc.theta >= 0.0 && vc.theta <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "theta must lie in [0, 1]");
    }
    const PanelArrays a = extract(d, m);
    const double theta = vc.theta;
    const Vector y_star = a.y - theta * expand_entities(entity_means(a.y, a.N, a.T), a.T);
    const Matrix X_demeaned = a.X - theta * expand_entities(entity_means(a.X, a.N, a.T), a.T);

    // At theta = 1 the intercept column vanishes; C is then recovered from the
    // grand means after a pure within fit.
    const bool intercept_column = m.include_intercept && (1.0 - theta) > 1e-12;
    const Matrix X_star = intercept_column ? with_intercept(X_demeaned, 1.0 - theta) : X_demeaned;
    require_df(static_cast<std::size_t>(X_star.rows()), static_cast<std::size_t>(X_star.cols()), "RE");
    const LeastSquaresFit ls = solve_least_squares(X_star, y_star);

    FitResult r = make_result(EffectKind::RE, d, m);
    r.components = vc;
    if (m.include_intercept) r.names.emplace_back("C");
    r.names.insert(r.names.end(), m.regressors.begin(), m.regressors.end());
    r.df_resid = static_cast<std::size_t>(X_star.rows() - X_star.cols());
    r.rss = ls.rss;
    r.sigma2 = ls.rss / static_cast<double>(r.df_resid);

    const Matrix robust = white_covariance(X_star, ls.residuals, ls.xtx_inverse, o.covariance);
    // Transformed errors have variance σe², so the GLS covariance uses the
    // within-based estimate; this keeps V_FE − V_RE positive semidefinite.
    const double gls_sigma2 = vc.sigma_e > 0.0 ? vc.sigma_e * vc.sigma_e : r.sigma2;
    const Matrix classical = gls_sigma2 * ls.xtx_inverse;
    if (m.include_intercept && !intercept_column) {
        const auto K = a.X.cols();
        const Vector x_bar = a.X.colwise().mean();
        // C = ȳ - x̄ᵀβ; its variance adds the sampling variance of ȳ to x̄ᵀVx̄.
        Matrix G = Matrix::Zero(K + 1, K);
        G.row(0) = -x_bar.transpose();
        G.bottomRows(K).setIdentity();
        const double mean_var = gls_sigma2 / static_cast<double>(a.y.size());
        r.coefficients.resize(K + 1);
        r.coefficients(0) = a.y.mean() - x_bar.dot(ls.coefficients);
        r.coefficients.tail(K) = ls.coefficients;
        r.robust_covariance = G * robust * G.transpose();
        r.classical_covariance = G * classical * G.transpose();
        r.robust_covariance(0, 0) += mean_var;
        r.classical_covariance(0, 0) += mean_var;
    } else {
        r.coefficients = ls.coefficients;
        r.robust_covariance = robust;
        r.classical_covariance = classical;
    }

    const Matrix X_raw = m.include_intercept ? with_intercept(a.X) : a.X;
    r.residuals = a.y - X_raw * r.coefficients;
    const double tss_star = centered_tss(y_star);
    r.r2_weighted = tss_star > 0.0 ? std::max(0.0, 1.0 - ls.rss / tss_star) : 1.0;
    const double tss = centered_tss(a.y);
    r.r2_unweighted = tss > 0.0 ? std::max(0.0, 1.0 - r.residuals.squaredNorm() / tss) : 1.0;
    finish_inference(r);
    return r;
}

}  // namespace panelkit
