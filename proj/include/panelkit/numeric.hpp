#pragma once

#include <Eigen/Dense>

#include <span>

namespace panelkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative cutoff on singular values below which a direction counts as null.
inline constexpr double kRankTolerance = 1e-10;

/**
 * @brief Result of an ordinary least-squares solve y ≈ Xβ.
 *
 * `xtx_inverse` is (XᵀX)⁻¹, obtained from the triangular QR factor rather than
 * by forming XᵀX, and is what the covariance estimators sandwich around.
 */
struct LeastSquaresFit {
    Vector coefficients;
    Vector residuals;
    Vector fitted;
    Matrix xtx_inverse;
    double rss = 0.0;
};

/**
 * @brief Least squares through a Householder QR factorization of X.
 *
 * The numerical rank is judged from the singular values of the R factor (which
 * equal those of X). Any singular value below kRankTolerance times the largest
 * raises ErrorKind::RankDeficient.
 *
 * @throws Error DimensionMismatch when X.rows() != y.size() or X has fewer rows
 *         than columns; NonFinite on NaN/Inf input; RankDeficient as above.
 */
[[nodiscard]] LeastSquaresFit solve_least_squares(const Matrix& X, const Vector& y);

/// Moore-Penrose pseudoinverse via SVD; singular values below
/// kRankTolerance × max are zeroed rather than inverted.
[[nodiscard]] Matrix pseudoinverse(const Matrix& M);

/// Throws NonFinite if any entry is NaN or infinite.
void require_finite(const Matrix& M, const char* what);
void require_finite(std::span<const double> values, const char* what);

// ---------------------------------------------------------------------------
// Probability tails
// ---------------------------------------------------------------------------

/// Regularized lower incomplete gamma P(a, x).
[[nodiscard]] double regularized_gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
[[nodiscard]] double regularized_gamma_q(double a, double x);
/// Regularized incomplete beta I_x(a, b).
[[nodiscard]] double regularized_beta(double x, double a, double b);

[[nodiscard]] double chi2_sf(double x, int df);
[[nodiscard]] double chi2_cdf(double x, int df);

[[nodiscard]] double normal_sf(double z);
[[nodiscard]] double normal_cdf(double z);

/// Upper tail of the F(df1, df2) distribution.
[[nodiscard]] double f_sf(double x, double df1, double df2);

/// Two-sided Student-t p-value P(|T_df| > |t|).
[[nodiscard]] double student_t_two_sided(double t, double df);

}  // namespace panelkit
