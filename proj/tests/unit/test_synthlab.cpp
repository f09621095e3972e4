#include "panelkit/diagnostics.hpp"
#include "panelkit/error.hpp"
#include "panelkit/estimators.hpp"
#include "panelkit/random.hpp"
#include "panelkit/synthlab.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

using namespace panelkit;

namespace {

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

TEST_SUITE("random numbers") {
    TEST_CASE("reference SplitMix64 outputs") {
        // Published test vector for seed 1234567.
        std::uint64_t s = 1234567;
        CHECK(splitmix64(s) == 6457827717110365317ULL);
        CHECK(splitmix64(s) == 3203168211198807973ULL);
    }

    TEST_CASE("same seed, same stream; different seeds differ") {
        Rng a(42), b(42), c(43);
        for (int i = 0; i < 100; ++i) {
            const auto x = a.next_u64();
            CHECK(x == b.next_u64());
            CHECK(x != c.next_u64());
        }
    }

    TEST_CASE("uniform and normal moments") {
        Rng rng(7);
        double su = 0, sn = 0, sn2 = 0;
        const int n = 200000;
        for (int i = 0; i < n; ++i) {
            const double u = rng.uniform();
            CHECK_UNARY(u >= 0.0);
            CHECK_UNARY(u < 1.0);
            su += u;
            const double z = rng.normal();
            sn += z;
            sn2 += z * z;
        }
        CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
        CHECK(std::abs(sn / n) < 0.01);
        CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.01));
    }

    TEST_CASE("derived seeds are distinct") {
        std::set<std::uint64_t> seen;
        for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(5, i));
        CHECK(seen.size() == 1000);
        static_assert(derive_seed(1, 0) != derive_seed(1, 1));
    }
}

TEST_SUITE("generate") {
    TEST_CASE("noiseless construction is recovered exactly") {
        DgpSpec spec;
        spec.n_entities = 5;
        spec.n_periods = 6;
        spec.true_beta = {{"x", 2.0}};
        spec.intercept = 0.5;
        spec.sigma_u = 0.0;
        spec.sigma_e = 0.0;
        const auto d = generate(spec);
        const auto f = fit_pooled(d, {"y", {"x"}, true});
        CHECK(f.coefficient("x") == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(f.coefficient("C") == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(f.r2_unweighted == doctest::Approx(1.0));
    }

    TEST_CASE("determinism and naming") {
        DgpSpec spec;
        spec.n_entities = 12;
        spec.n_periods = 22;
        spec.entity_prefix = "EU";
        spec.seed = 99;
        const auto a = generate(spec);
        CHECK(a == generate(spec));
        CHECK(a.entities().front() == "EU001");
        CHECK(a.entities().back() == "EU012");
        CHECK(a.periods().front() == 1995);
        CHECK(a.periods().back() == 2016);
        spec.seed = 100;
        CHECK_FALSE(a == generate(spec));
    }

    TEST_CASE("entity means of the composite error have variance near 1 + 1/T") {
        DgpSpec spec;
        spec.n_entities = 2000;
        spec.n_periods = 10;
        spec.true_beta = {{"x", 0.0}};
        spec.sigma_u = 1.0;
        spec.sigma_e = 1.0;
        spec.seed = 3;
        const auto d = generate(spec);
        double s = 0, s2 = 0;
        for (std::size_t a = 0; a < d.n_entities(); ++a) {
            double m = 0;
            for (double v : d.series("y", a)) m += v;
            m /= 10.0;
            s += m;
            s2 += m * m;
        }
        const double n = 2000.0;
        const double var = (s2 - s * s / n) / (n - 1);
        CHECK(var == doctest::Approx(1.1).epsilon(0.08));
    }

    TEST_CASE("stationary regressors have unit innovation AR(0.5) variance") {
        DgpSpec spec;
        spec.n_entities = 400;
        spec.n_periods = 30;
        spec.seed = 8;
        const auto d = generate(spec);
        const auto x = d.column("x");
        double s2 = 0;
        for (double v : x) s2 += v * v;
        CHECK(s2 / static_cast<double>(x.size()) == doctest::Approx(4.0 / 3.0).epsilon(0.05));
    }

    TEST_CASE("invalid specs") {
        DgpSpec spec;
        spec.n_entities = 1;
        CHECK(kind_of([&] { spec.validate(); }) == ErrorKind::InvalidSpec);
        spec = {};
        spec.sigma_u = -1;
        CHECK(kind_of([&] { spec.validate(); }) == ErrorKind::InvalidSpec);
        spec = {};
        spec.true_beta.clear();
        CHECK(kind_of([&] { spec.validate(); }) == ErrorKind::InvalidSpec);
        spec = {};
        spec.true_beta = {{"y", 1.0}};
        CHECK(kind_of([&] { spec.validate(); }) == ErrorKind::InvalidSpec);
    }
}

TEST_SUITE("experiments") {
    TEST_CASE("one replication") {
        DgpSpec spec;
        spec.seed = 5;
        const auto r = run_experiment(spec, Pipeline::Pooled, 1);
        CHECK(r.replications == 1);
        CHECK(r.coefficient("x").estimate_sd == 0.0);
    }

    TEST_CASE("report is independent of the thread count") {
        DgpSpec spec;
        spec.sigma_u = 0.5;
        spec.seed = 6;
        std::ostringstream one, four;
        run_experiment(spec, Pipeline::Re, 24, {0.05, 1}).write_csv(one);
        run_experiment(spec, Pipeline::Re, 24, {0.05, 4}).write_csv(four);
        CHECK(one.str() == four.str());
    }

    TEST_CASE("CSV layout") {
        DgpSpec spec;
        spec.seed = 9;
        std::ostringstream out;
        run_experiment(spec, Pipeline::Tests, 3).write_csv(out);
        const std::string text = out.str();
        CHECK(text.rfind("pipeline,replications,master_seed,kind,name,true_value,estimate_mean,estimate_sd,"
                         "coverage_95,rejection_rate\n",
                         0) == 0);
        CHECK(text.find("tests,3,9,test,Hausman,,,,,") != std::string::npos);
    }

    TEST_CASE("tests pipeline records all four tests") {
        DgpSpec spec;
        spec.seed = 10;
        spec.sigma_u = 2.0;
        const auto r = run_experiment(spec, Pipeline::Tests, 20);
        CHECK(r.rejection_rate("RFE") >= 0.9);
        CHECK(r.rejection_rate("BP LM") >= 0.9);
        CHECK(r.rejection_rate("Honda") >= 0.9);
        CHECK(r.rejection_rate("Hausman") <= 0.5);
    }

    TEST_CASE("unit-root pipeline") {
        DgpSpec spec;
        spec.n_periods = 22;
        spec.seed = 11;
        const auto r = run_experiment(spec, Pipeline::UnitRoot, 10);
        CHECK(r.rejection_rate("IPS") >= 0.9);
    }

    TEST_CASE("RFE power under strong entity heterogeneity") {
        DgpSpec spec;
        spec.n_entities = 10;
        spec.n_periods = 10;
        spec.sigma_u = 3.0;
        spec.seed = 12;
        const auto r = run_experiment(spec, Pipeline::Tests, 100, {0.01, 1});
        CHECK(r.rejection_rate("RFE") >= 0.99);
    }
}

TEST_SUITE("spec files") {
    TEST_CASE("full spec") {
        std::istringstream in(
            "# acceptance\n"
            "n_entities = 156\n"
            "n_periods = 22\n"
            "beta.EFI = 1.15\n"
            "beta.Growth = 0.05   # trailing comment\n"
            "sigma_u = 0.5\n"
            "seed = 2017\n"
            "pipeline = re\n"
            "replications = 200\n"
            "fixed_effect_mode = false\n");
        const auto s = parse_experiment_spec(in);
        CHECK(s.dgp.n_entities == 156);
        CHECK(s.dgp.true_beta.size() == 2);
        CHECK(s.dgp.true_beta[0].first == "EFI");
        CHECK(s.dgp.true_beta[1].second == 0.05);
        CHECK(s.has_seed);
        CHECK(s.pipeline == Pipeline::Re);
        CHECK(s.replications == 200);
    }

    TEST_CASE("defaults and errors") {
        std::istringstream empty("");
        const auto s = parse_experiment_spec(empty);
        CHECK_FALSE(s.has_seed);
        CHECK(s.dgp.true_beta.size() == 1);
        for (const char* bad : {"n_entities = -3\n", "sigma_e = abc\n", "colour = red\n", "pipeline = magic\n",
                                "replications = 0\n", "just words\n", "sigma_u = -1\n"}) {
            std::istringstream in(bad);
            CHECK(kind_of([&] { (void)parse_experiment_spec(in); }) == ErrorKind::InvalidSpec);
        }
    }
}
