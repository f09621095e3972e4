#include "panelkit/error.hpp"
#include "panelkit/numeric.hpp"

#include <cmath>
#include <limits>

namespace panelkit {

namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 10000;

double log_gamma(double a) {
    int sign = 0;
    return ::lgamma_r(a, &sign);
}

// P(a, x) by its power series; converges quickly for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int n = 0; n < kMaxIter; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) {
            break;
        }
    }
    return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

// Q(a, x) by Lentz's continued fraction; used for x >= a + 1.
double gamma_q_continued_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) {
            break;
        }
    }
    return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
}

// Continued fraction for the incomplete beta function.
double beta_continued_fraction(double x, double a, double b) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m < kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) {
            break;
        }
    }
    return h;
}

void require_df(double df, const char* what) {
    if (!(df > 0.0) || !std::isfinite(df)) {
        throw Error(ErrorKind::InvalidArgument, std::string(what) + " must be positive");
    }
}

}  // namespace

double regularized_gamma_p(double a, double x) {
    if (!(a > 0.0) || x < 0.0 || std::isnan(x)) {
        throw Error(ErrorKind::InvalidArgument, "regularized_gamma_p requires a > 0, x >= 0");
    }
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_continued_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0 || std::isnan(x)) {
        throw Error(ErrorKind::InvalidArgument, "regularized_gamma_q requires a > 0, x >= 0");
    }
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_continued_fraction(a, x);
}

double regularized_beta(double x, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "regularized_beta requires a, b > 0 and x in [0, 1]");
    }
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front = log_gamma(a + b) - log_gamma(a) - log_gamma(b) + a * std::log(x) +
                             b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(x, a, b) / a;
    }
    return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double chi2_sf(double x, int df) {
    if (df <= 0) {
        throw Error(ErrorKind::InvalidArgument, "chi-square degrees of freedom must be positive");
    }
    if (x < 0.0) {
        throw Error(ErrorKind::InvalidArgument, "chi-square statistic must be nonnegative");
    }
    return regularized_gamma_q(0.5 * df, 0.5 * x);
}

double chi2_cdf(double x, int df) {
    if (df <= 0) {
        throw Error(ErrorKind::InvalidArgument, "chi-square degrees of freedom must be positive");
    }
    if (x < 0.0) {
        throw Error(ErrorKind::InvalidArgument, "chi-square statistic must be nonnegative");
    }
    return regularized_gamma_p(0.5 * df, 0.5 * x);
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double f_sf(double x, double df1, double df2) {
    require_df(df1, "F numerator df");
    require_df(df2, "F denominator df");
    if (x < 0.0 || std::isnan(x)) {
        throw Error(ErrorKind::InvalidArgument, "F statistic must be nonnegative");
    }
    if (std::isinf(x)) return 0.0;
    return regularized_beta(df2 / (df2 + df1 * x), 0.5 * df2, 0.5 * df1);
}

double student_t_two_sided(double t, double df) {
    require_df(df, "t degrees of freedom");
    if (std::isnan(t)) {
        throw Error(ErrorKind::InvalidArgument, "t statistic is NaN");
    }
    if (std::isinf(t)) return 0.0;
    return regularized_beta(df / (df + t * t), 0.5 * df, 0.5);
}

}  // namespace panelkit
