#include "panelkit/numeric.hpp"

#include "panelkit/error.hpp"

#include <cmath>
#include <string>

namespace panelkit {

void require_finite(const Matrix& M, const char* what) {
    if (!M.allFinite()) {
        throw Error(ErrorKind::NonFinite, std::string(what) + " contains NaN or Inf");
    }
}

void require_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw Error(ErrorKind::NonFinite, std::string(what) + " contains NaN or Inf");
        }
    }
}

LeastSquaresFit solve_least_squares(const Matrix& X, const Vector& y) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (n != y.size()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "design has " + std::to_string(n) + " rows but response has " +
                        std::to_string(y.size()) + " entries");
    }
    if (p < 1 || n < p) {
        throw Error(ErrorKind::DimensionMismatch,
                    "need rows >= cols >= 1, got " + std::to_string(n) + "x" + std::to_string(p));
    }
    require_finite(X, "design matrix");
    require_finite(y, "response");

    Eigen::HouseholderQR<Matrix> qr(X);
    const Matrix R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();

    // Singular values of R coincide with those of X.
    Eigen::JacobiSVD<Matrix> svd(R);
    const Vector& sv = svd.singularValues();
    const double largest = sv(0);
    if (!(largest > 0.0) || sv(p - 1) < kRankTolerance * largest) {
        throw Error(ErrorKind::RankDeficient,
                    "design matrix numerical rank below " + std::to_string(p) + " columns");
    }

    const Vector qty = (qr.householderQ().adjoint() * y).head(p);

    LeastSquaresFit fit;
    fit.coefficients = R.triangularView<Eigen::Upper>().solve(qty);
    fit.fitted = X * fit.coefficients;
    fit.residuals = y - fit.fitted;
    fit.rss = fit.residuals.squaredNorm();

    const Matrix r_inv = R.triangularView<Eigen::Upper>().solve(Matrix::Identity(p, p));
    fit.xtx_inverse = r_inv * r_inv.transpose();
    return fit;
}

Matrix pseudoinverse(const Matrix& M) {
    require_finite(M, "pseudoinverse input");
    if (M.size() == 0) {
        return Matrix(M.cols(), M.rows());
    }
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector& sv = svd.singularValues();
    const double cutoff = kRankTolerance * (sv.size() > 0 ? sv(0) : 0.0);

    Vector inv = Vector::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff && sv(i) > 0.0) {
            inv(i) = 1.0 / sv(i);
        }
    }
    const Eigen::Index r = sv.size();
    return svd.matrixV().leftCols(r) * inv.asDiagonal() * svd.matrixU().leftCols(r).transpose();
}

}  // namespace panelkit
