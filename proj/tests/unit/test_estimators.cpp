#include "../support/oracles.hpp"

#include "panelkit/error.hpp"
#include "panelkit/estimators.hpp"

#include <doctest.h>

#include <cmath>

using namespace panelkit;
using panelkit::testing::make_panel;

namespace {

ModelSpec spec_for(std::size_t K) { return ModelSpec{"y", testing::regressor_names(K), true}; }

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_SUITE("pooled") {
    TEST_CASE("exact y = 2x gives slope 2 and R² 1") {
        std::vector<double> x{1, 2, 3, 5, 8, 13}, y;
        for (double v : x) y.push_back(2.0 * v);
        const auto f = fit_pooled(make_panel(2, 3, y, {x}), spec_for(1));
        CHECK(f.coefficient("x1") == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(f.r2_unweighted == doctest::Approx(1.0));
        CHECK_FALSE(f.r2_weighted.has_value());
    }

    TEST_CASE("intercept only returns the pooled mean") {
        const std::vector<double> y{1, 4, 2, 9};
        const auto d = make_panel(2, 2, y, {{0, 1, 2, 4}});
        const auto f = fit_pooled(d, ModelSpec{"y", {}, true});
        CHECK(f.coefficient("C") == doctest::Approx(4.0));
    }

    TEST_CASE("3 x 4 panel matches normal equations") {
        Rng rng(21);
        const auto d = testing::random_panel(rng, 3, 4, 2, 0.5, 1.0);
        const auto f = fit_pooled(d, spec_for(2));
        Matrix X(12, 3);
        X.col(0).setOnes();
        X.rightCols(2) = testing::design(d, testing::regressor_names(2));
        const Vector oracle = testing::normal_equations(X, testing::response(d, "y"));
        CHECK((f.coefficients - oracle).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(f.names == std::vector<std::string>{"C", "x1", "x2"});
        CHECK(f.df_resid == 9);
    }

    TEST_CASE("without intercept R² is uncentered") {
        const auto d = make_panel(1, 3, {1, 2, 4}, {{1, 1, 1}});
        const auto f = fit_pooled(d, ModelSpec{"y", {"x1"}, false});
        CHECK(f.coefficient("x1") == doctest::Approx(7.0 / 3.0));
        const double rss = (1 - 7.0 / 3) * (1 - 7.0 / 3) + (2 - 7.0 / 3) * (2 - 7.0 / 3) + (4 - 7.0 / 3) * (4 - 7.0 / 3);
        CHECK(f.r2_unweighted == doctest::Approx(1.0 - rss / 21.0));
    }
}

TEST_SUITE("white standard errors") {
    TEST_CASE("mean-only hand case") {
        const Matrix X = Matrix::Ones(4, 1);
        const Vector e = (Vector(4) << 1, -1, 1, -1).finished();
        const Matrix xtx_inv = Matrix::Constant(1, 1, 0.25);
        CHECK(white_se(X, e, xtx_inv)(0) == doctest::Approx(0.5));
        CHECK(white_se(X, e, xtx_inv, CovarianceType::HC1)(0) == doctest::Approx(0.5 * std::sqrt(4.0 / 3.0)));
    }

    TEST_CASE("zero residuals give zero SEs") {
        const Matrix X = Matrix::Ones(4, 1);
        CHECK(white_se(X, Vector::Zero(4), Matrix::Constant(1, 1, 0.25))(0) == 0.0);
    }

    TEST_CASE("homoskedastic large sample: White within 15% of classical") {
        Rng rng(99);
        const auto d = testing::random_panel(rng, 100, 20, 2, 0.0, 1.0);
        const auto f = fit_pooled(d, spec_for(2));
        for (Eigen::Index i = 0; i < 3; ++i) {
            const double classical = std::sqrt(f.classical_covariance(i, i));
            CHECK(std::abs(f.std_errors(i) / classical - 1.0) < 0.15);
        }
    }
}

TEST_SUITE("fixed effects") {
    TEST_CASE("entity shifts with unit slope") {
        const std::vector<double> shifts{-1.0, 0.5, 3.0};
        std::vector<double> x, y;
        Rng rng(4);
        for (std::size_t a = 0; a < 3; ++a) {
            for (int t = 0; t < 5; ++t) {
                x.push_back(rng.normal());
                y.push_back(shifts[a] + x.back());
            }
        }
        const auto f = fit_fe_lsdv(make_panel(3, 5, y, {x}), spec_for(1));
        CHECK(f.coefficient("x1") == doctest::Approx(1.0).epsilon(1e-12));
        REQUIRE(f.entity_intercepts.has_value());
        for (std::size_t a = 0; a < 3; ++a) {
            CHECK((*f.entity_intercepts)(static_cast<Eigen::Index>(a)) == doctest::Approx(shifts[a]).epsilon(1e-12));
        }
        CHECK(f.coefficient("C") == doctest::Approx((shifts[0] + shifts[1] + shifts[2]) / 3.0));
    }

    TEST_CASE("LSDV slopes equal within-transform slopes on random panels") {
        Rng rng(8);
        for (int rep = 0; rep < 20; ++rep) {
            const std::size_t N = 2 + rep % 7, T = 3 + rep % 5, K = 1 + rep % 3;
            const auto d = testing::random_panel(rng, N, T, K, 1.0, 1.0);
            const auto f = fit_fe_lsdv(d, spec_for(K));
            CHECK((f.slopes() - testing::within_slopes(d, "y", testing::regressor_names(K))).cwiseAbs().maxCoeff() <
                  1e-8);
            CHECK(f.df_resid == N * T - N - K);
        }
    }

    TEST_CASE("time-invariant regressor is rank deficient") {
        std::vector<double> x, y;
        Rng rng(2);
        for (std::size_t a = 0; a < 4; ++a) {
            for (int t = 0; t < 3; ++t) {
                x.push_back(static_cast<double>(a));
                y.push_back(rng.normal());
            }
        }
        const auto d = make_panel(4, 3, y, {x});
        CHECK(kind_of([&] { (void)fit_fe_lsdv(d, spec_for(1)); }) == ErrorKind::RankDeficient);
    }

    TEST_CASE("GLS with equal entity variances equals LSDV") {
        // Residual pattern (+s, -s) per entity gives identical per-entity variances.
        std::vector<double> x{0, 1, 2, 3, 0, 1, 2, 3}, y;
        const double noise[] = {0.3, -0.3, -0.3, 0.3, -0.3, 0.3, 0.3, -0.3};
        for (std::size_t i = 0; i < 8; ++i) y.push_back((i < 4 ? 1.0 : -2.0) + 1.5 * x[i] + noise[i]);
        const auto d = make_panel(2, 4, y, {x});
        const auto lsdv = fit_fe_lsdv(d, spec_for(1));
        const auto gls = fit_fe_gls(d, spec_for(1));
        CHECK((gls.coefficients - lsdv.coefficients).cwiseAbs().maxCoeff() < 1e-6);
        CHECK(gls.r2_weighted.has_value());
    }

    TEST_CASE("GLS down-weights the noisy entity (weighted normal-equation oracle)") {
        Rng rng(31);
        const std::size_t T = 40;
        std::vector<double> x, y;
        for (std::size_t a = 0; a < 2; ++a) {
            const double slope = a == 0 ? 1.0 : 3.0;
            const double sd = a == 0 ? 0.1 : 1.0;
            for (std::size_t t = 0; t < T; ++t) {
                x.push_back(rng.normal());
                y.push_back(slope * x.back() + sd * rng.normal());
            }
        }
        const auto d = make_panel(2, T, y, {x});
        const auto lsdv = fit_fe_lsdv(d, spec_for(1));
        const auto gls = fit_fe_gls(d, spec_for(1));
        CHECK(std::abs(gls.coefficient("x1") - 1.0) < std::abs(lsdv.coefficient("x1") - 1.0));

        // Oracle: dummies + x, weights 1/s_a² from the LSDV residuals with denominator T.
        Matrix X = Matrix::Zero(2 * T, 3);
        Vector w(2 * T);
        for (std::size_t a = 0; a < 2; ++a) {
            double s2 = 0.0;
            for (std::size_t t = 0; t < T; ++t) s2 += std::pow(lsdv.residuals(static_cast<Eigen::Index>(a * T + t)), 2);
            s2 /= static_cast<double>(T);
            for (std::size_t t = 0; t < T; ++t) {
                const auto i = static_cast<Eigen::Index>(a * T + t);
                X(i, static_cast<Eigen::Index>(a)) = 1.0;
                X(i, 2) = x[static_cast<std::size_t>(i)];
                w(i) = 1.0 / s2;
            }
        }
        const Vector yv = testing::response(d, "y");
        const Matrix XtW = X.transpose() * w.asDiagonal();
        const Vector beta = (XtW * X).inverse() * (XtW * yv);
        CHECK(gls.coefficient("x1") == doctest::Approx(beta(2)).epsilon(1e-10));
    }

    TEST_CASE("zero first-pass residuals make weights degenerate") {
        std::vector<double> x{0, 1, 2, 0, 1, 2}, y;
        for (std::size_t i = 0; i < 6; ++i) y.push_back((i < 3 ? 1.0 : 2.0) + x[i]);
        const auto d = make_panel(2, 3, y, {x});
        CHECK(kind_of([&] { (void)fit_fe_gls(d, spec_for(1)); }) == ErrorKind::DegenerateWeight);
    }
}

TEST_SUITE("random effects") {
    TEST_CASE("Swamy-Arora arithmetic") {
        const auto vc = swamy_arora(0.25, 1.0, 10);
        CHECK(vc.sigma_u * vc.sigma_u == doctest::Approx(0.15));
        CHECK(vc.sigma_e == doctest::Approx(1.0));
        CHECK(vc.rho_u == doctest::Approx(0.15 / 1.15));
        CHECK(vc.theta == doctest::Approx(1.0 - std::sqrt(1.0 / 2.5)));
        const auto floored = swamy_arora(0.05, 1.0, 10);
        CHECK(floored.sigma_u == 0.0);
        CHECK(floored.theta == 0.0);
        CHECK(floored.rho_e == 1.0);
    }

    TEST_CASE("rho shares sum to one") {
        const auto vc = VarianceComponents::from_variances(0.2929, 0.7071, 22);
        CHECK(vc.rho_u + vc.rho_e == doctest::Approx(1.0));
        CHECK(vc.rho_u == doctest::Approx(0.2929));
    }

    TEST_CASE("estimated components follow the within and between regressions") {
        Rng rng(12);
        const auto d = testing::random_panel(rng, 15, 6, 2, 1.0, 1.0);
        const auto vc = estimate_variance_components(d, spec_for(2));
        const auto lsdv = fit_fe_lsdv(d, spec_for(2));
        CHECK(vc.sigma_e * vc.sigma_e == doctest::Approx(lsdv.rss / (15.0 * 5.0 - 2.0)).epsilon(1e-10));

        // Between regression of entity means on [1, x̄].
        Matrix Xb(15, 3);
        Vector yb(15);
        for (std::size_t a = 0; a < 15; ++a) {
            Xb(static_cast<Eigen::Index>(a), 0) = 1.0;
            double sy = 0, s1 = 0, s2 = 0;
            for (std::size_t t = 0; t < 6; ++t) {
                sy += d.value(a, t, "y");
                s1 += d.value(a, t, "x1");
                s2 += d.value(a, t, "x2");
            }
            yb(static_cast<Eigen::Index>(a)) = sy / 6;
            Xb(static_cast<Eigen::Index>(a), 1) = s1 / 6;
            Xb(static_cast<Eigen::Index>(a), 2) = s2 / 6;
        }
        const Vector bb = testing::normal_equations(Xb, yb);
        const double sb2 = (yb - Xb * bb).squaredNorm() / (15.0 - 3.0);
        const double su2 = std::max(0.0, sb2 - vc.sigma_e * vc.sigma_e / 6.0);
        CHECK(vc.sigma_u * vc.sigma_u == doctest::Approx(su2).epsilon(1e-10));
    }

    TEST_CASE("sigma_u = 0 reproduces pooled OLS") {
        Rng rng(13);
        const auto d = testing::random_panel(rng, 6, 5, 2, 0.0, 1.0);
        const auto vc = VarianceComponents::from_variances(0.0, 1.0, 5);
        const auto re = fit_re_with_components(d, spec_for(2), vc);
        const auto pooled = fit_pooled(d, spec_for(2));
        CHECK((re.coefficients - pooled.coefficients).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((re.std_errors - pooled.std_errors).cwiseAbs().maxCoeff() < 1e-10);
    }

    TEST_CASE("theta near one approaches the within slopes") {
        Rng rng(14);
        const auto d = testing::random_panel(rng, 8, 6, 2, 1.0, 1.0);
        const auto vc = VarianceComponents::from_variances(1e8 / 6.0, 1.0, 6);
        const auto re = fit_re_with_components(d, spec_for(2), vc);
        const Vector within = testing::within_slopes(d, "y", testing::regressor_names(2));
        CHECK((re.slopes() - within).cwiseAbs().maxCoeff() < 1e-3);
    }

    TEST_CASE("theta exactly one recovers C from grand means") {
        Rng rng(15);
        const auto d = testing::random_panel(rng, 5, 4, 1, 1.0, 1.0);
        VarianceComponents vc;
        vc.theta = 1.0;
        vc.sigma_e = 1.0;
        const auto re = fit_re_with_components(d, spec_for(1), vc);
        const Vector within = testing::within_slopes(d, "y", testing::regressor_names(1));
        CHECK(re.slopes()(0) == doctest::Approx(within(0)).epsilon(1e-10));
        const Vector y = testing::response(d, "y");
        const Matrix X = testing::design(d, {"x1"});
        CHECK(re.coefficient("C") == doctest::Approx(y.mean() - X.col(0).mean() * within(0)).epsilon(1e-10));
    }

    TEST_CASE("RE matches full GLS with the block Ω") {
        Rng rng(16);
        const auto d = testing::random_panel(rng, 20, 10, 2, 1.0, 1.0);
        const auto re = fit_re(d, spec_for(2));
        const auto& vc = *re.components;
        const Vector oracle =
            testing::full_gls(d, "y", testing::regressor_names(2), vc.sigma_u * vc.sigma_u, vc.sigma_e * vc.sigma_e);
        CHECK((re.coefficients - oracle).cwiseAbs().maxCoeff() < 1e-6);
        CHECK(re.r2_weighted.has_value());
    }

    TEST_CASE("FE minus RE classical covariance is positive semidefinite") {
        Rng rng(17);
        for (int rep = 0; rep < 10; ++rep) {
            const auto d = testing::random_panel(rng, 6 + rep, 5, 3, 0.7, 1.0);
            const Matrix diff = fit_fe_lsdv(d, spec_for(3)).slope_covariance_classical() -
                                fit_re(d, spec_for(3)).slope_covariance_classical();
            Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (diff + diff.transpose()));
            CHECK(eig.eigenvalues().minCoeff() > -1e-12);
        }
    }
}

TEST_SUITE("inference") {
    TEST_CASE("stars thresholds") {
        CHECK(significance_stars(0.0) == "***");
        CHECK(significance_stars(0.01) == "***");
        CHECK(significance_stars(0.0100001) == "**");
        CHECK(significance_stars(0.05) == "**");
        CHECK(significance_stars(0.1) == "*");
        CHECK(significance_stars(0.2).empty());
    }

    TEST_CASE("t statistics and p-values are consistent") {
        Rng rng(18);
        const auto d = testing::random_panel(rng, 10, 6, 2, 0.5, 1.0);
        for (const auto& f : {fit_pooled(d, spec_for(2)), fit_fe_lsdv(d, spec_for(2)), fit_fe_gls(d, spec_for(2)),
                              fit_re(d, spec_for(2))}) {
            for (Eigen::Index i = 0; i < f.coefficients.size(); ++i) {
                CHECK(f.t_stats(i) == doctest::Approx(f.coefficients(i) / f.std_errors(i)));
                CHECK(f.p_values(i) == doctest::Approx(student_t_two_sided(f.t_stats(i), static_cast<double>(f.df_resid))));
            }
            CHECK(f.n_obs == 60);
            CHECK(f.residuals.size() == 60);
        }
    }

    TEST_CASE("spec validation") {
        Rng rng(19);
        const auto d = testing::random_panel(rng, 3, 3, 1, 0.5, 1.0);
        CHECK(kind_of([&] { ModelSpec{"nope", {"x1"}, true}.validate(d); }) == ErrorKind::InvalidArgument);
        CHECK(kind_of([&] { ModelSpec{"y", {"y"}, true}.validate(d); }) == ErrorKind::InvalidArgument);
        CHECK(kind_of([&] { ModelSpec{"y", {"x1", "x1"}, true}.validate(d); }) == ErrorKind::InvalidArgument);
        CHECK(kind_of([&] { ModelSpec{"y", {}, false}.validate(d); }) == ErrorKind::InvalidArgument);
    }

    TEST_CASE("too few observations") {
        const auto d = make_panel(2, 2, {1, 2, 3, 5}, {{1, 0, 2, 1}, {0, 1, 1, 3}});
        CHECK(kind_of([&] { (void)fit_fe_lsdv(d, spec_for(2)); }) == ErrorKind::InsufficientDF);
    }
}
