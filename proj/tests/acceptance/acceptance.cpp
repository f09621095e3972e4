// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "../support/oracles.hpp"

#include "panelkit/commands.hpp"
#include "panelkit/diagnostics.hpp"
#include "panelkit/synthlab.hpp"
#include "panelkit/unitroot.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace panelkit;

namespace {

// Pinned thresholds.
constexpr double kLsdvTolerance = 1e-8;
constexpr double kGlsTolerance = 1e-6;
constexpr double kOracleSeconds = 10.0;
constexpr double kChi2Anchor1 = 0.0010, kChi2Tol1 = 0.0002;
constexpr double kChi2Anchor2 = 0.0030, kChi2Tol2 = 0.0003;
constexpr double kPooledNestingTolerance = 1e-10;
constexpr double kWithinNestingTolerance = 1e-3;
constexpr double kMcBias = 0.02, kCoverageLow = 0.90, kCoverageHigh = 0.98, kMcSeconds = 300.0;
constexpr double kBpSizeLow = 0.03, kBpSizeHigh = 0.08, kHausmanPower = 0.90, kRfePower = 0.99;
constexpr double kIpsPower = 0.90, kIpsSizeLow = 0.02, kIpsSizeHigh = 0.09, kIpsSeconds = 120.0;
constexpr double kDwLow = 1.9, kDwHigh = 2.1;
constexpr double kDescribeTolerance = 1e-12;
constexpr double kLogFloorTolerance = 5e-6;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ModelSpec spec_for(std::size_t K) { return ModelSpec{"y", testing::regressor_names(K), true}; }

Outcome oracle_equivalence() {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(20170001);
    double worst_lsdv = 0.0, worst_gls = 0.0, worst_known = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t K = 1 + rng.next_u64() % 4;
        const std::size_t N = K + 2 + rng.next_u64() % (9 - K);
        const std::size_t T = 3 + rng.next_u64() % 6;
        const auto d = testing::random_panel(rng, N, T, K, 0.3 + rng.uniform(), 0.5 + rng.uniform());
        const auto m = spec_for(K);
        const auto names = testing::regressor_names(K);

        const auto lsdv = fit_fe_lsdv(d, m);
        worst_lsdv = std::max(worst_lsdv, (lsdv.slopes() - testing::within_slopes(d, "y", names)).cwiseAbs().maxCoeff());

        const auto re = fit_re(d, m);
        const auto& vc = *re.components;
        const Vector gls = testing::full_gls(d, "y", names, vc.sigma_u * vc.sigma_u, vc.sigma_e * vc.sigma_e);
        worst_gls = std::max(worst_gls, (re.coefficients - gls).cwiseAbs().maxCoeff());

        const double su2 = 0.5, se2 = 1.3;
        const auto known = fit_re_with_components(d, m, VarianceComponents::from_variances(su2, se2, T));
        worst_known = std::max(worst_known,
                               (known.coefficients - testing::full_gls(d, "y", names, su2, se2)).cwiseAbs().maxCoeff());
    }
    const double secs = seconds_since(start);
    const bool pass = worst_lsdv < kLsdvTolerance && worst_gls < kGlsTolerance && worst_known < kGlsTolerance &&
                      secs < kOracleSeconds;
    return {pass, fmt("max|LSDV-within|=%.2e (<%.0e), max|RE-GLS| estimated=%.2e known=%.2e (<%.0e), %.2fs (<%.0fs)",
                      worst_lsdv, kLsdvTolerance, worst_gls, worst_known, kGlsTolerance, secs, kOracleSeconds)};
}

Outcome published_p_values() {
    const double p1 = chi2_sf(22.4197, 6);
    const double p2 = chi2_sf(19.7777, 6);
    const bool pass = std::abs(p1 - kChi2Anchor1) <= kChi2Tol1 && std::abs(p2 - kChi2Anchor2) <= kChi2Tol2;
    return {pass, fmt("chi2_sf(22.4197,6)=%.5f (0.0010+-0.0002), chi2_sf(19.7777,6)=%.5f (0.0030+-0.0003)", p1, p2)};
}

Outcome decision_row() {
    const char* regions[] = {"EU", "AS", "AF", "NA", "LA", "OC", "FC", "SS", "PS"};
    const double rfe_p[] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
    const double bp_p[] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
    const double hausman_p[] = {0.0120, 0.0030, 0.0009, 0.1076, 0.0000, 0.0596, 0.2953, 0.0020, 0.0909};
    const char* expected[] = {"FE", "FE", "FE", "RE", "FE", "RE", "RE", "FE", "RE"};
    std::string got;
    bool pass = true;
    for (int r = 0; r < 9; ++r) {
        const auto choice = std::string(to_string(decide_model(rfe_p[r], bp_p[r], hausman_p[r], 0.05)));
        got += std::string(r ? " " : "") + regions[r] + "=" + choice;
        pass = pass && choice == expected[r];
    }
    return {pass, got};
}

Outcome nesting_identities() {
    Rng rng(20170004);
    double worst_pooled = 0.0, worst_within = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t N = 8 + rep, T = 6, K = 1 + rep % 3;
        const auto d = testing::random_panel(rng, N, T, K, 1.0, 1.0);
        const auto m = spec_for(K);
        const auto re0 = fit_re_with_components(d, m, VarianceComponents::from_variances(0.0, 1.0, T));
        worst_pooled = std::max(worst_pooled, (re0.coefficients - fit_pooled(d, m).coefficients).cwiseAbs().maxCoeff());
        // T σu² / σe² = 1e8.
        const auto re1 = fit_re_with_components(d, m, VarianceComponents::from_variances(1e8 / T, 1.0, T));
        worst_within = std::max(worst_within, (re1.slopes() - fit_fe_lsdv(d, m).slopes()).cwiseAbs().maxCoeff());
    }
    const bool pass = worst_pooled < kPooledNestingTolerance && worst_within < kWithinNestingTolerance;
    return {pass, fmt("sigma_u=0: max|RE-pooled|=%.2e (<%.0e); T*su2/se2=1e8: max|RE-FE|=%.2e (<%.0e)", worst_pooled,
                      kPooledNestingTolerance, worst_within, kWithinNestingTolerance)};
}

Outcome monte_carlo_consistency() {
    const auto start = std::chrono::steady_clock::now();
    DgpSpec spec;
    spec.n_entities = 156;
    spec.n_periods = 22;
    spec.true_beta = {{"EFI", 1.15}};
    spec.sigma_u = 1.0;
    spec.sigma_e = 1.0;
    spec.seed = 20170005;
    const auto report = run_experiment(spec, Pipeline::Re, 200);
    const auto& c = report.coefficient("EFI");
    const double secs = seconds_since(start);
    const bool pass = std::abs(c.estimate_mean - 1.15) <= kMcBias && c.coverage_95 >= kCoverageLow &&
                      c.coverage_95 <= kCoverageHigh && secs < kMcSeconds;
    return {pass, fmt("mean=%.4f (1.15+-%.2f), coverage=%.3f in [%.2f, %.2f], %.1fs (<%.0fs)", c.estimate_mean, kMcBias,
                      c.coverage_95, kCoverageLow, kCoverageHigh, secs, kMcSeconds)};
}

Outcome size_and_power() {
    DgpSpec pooled;
    pooled.n_entities = 50;
    pooled.n_periods = 10;
    pooled.sigma_u = 0.0;
    pooled.seed = 20170061;
    const double bp_size = run_experiment(pooled, Pipeline::Tests, 500).rejection_rate("BP LM");

    DgpSpec fixed;
    fixed.n_entities = 50;
    fixed.n_periods = 10;
    fixed.sigma_u = 0.0;
    fixed.fixed_effect_mode = true;
    fixed.seed = 20170062;
    const double hausman_power = run_experiment(fixed, Pipeline::Tests, 200).rejection_rate("Hausman");

    DgpSpec hetero;
    hetero.n_entities = 10;
    hetero.n_periods = 10;
    hetero.sigma_u = 3.0;
    hetero.seed = 20170063;
    const double rfe_power = run_experiment(hetero, Pipeline::Tests, 200, {0.01, 1}).rejection_rate("RFE");

    const bool pass = bp_size >= kBpSizeLow && bp_size <= kBpSizeHigh && hausman_power > kHausmanPower &&
                      rfe_power >= kRfePower;
    return {pass, fmt("BP LM size=%.3f in [%.2f, %.2f]; Hausman power=%.3f (>%.2f); RFE power at 1%%=%.3f (>=%.2f)",
                      bp_size, kBpSizeLow, kBpSizeHigh, hausman_power, kHausmanPower, rfe_power, kRfePower)};
}

Outcome ips_behaviour() {
    const auto start = std::chrono::steady_clock::now();
    DgpSpec stationary;
    stationary.n_entities = 50;
    stationary.n_periods = 22;
    stationary.seed = 20170071;
    const double power = run_experiment(stationary, Pipeline::UnitRoot, 200).rejection_rate("IPS");

    DgpSpec walk = stationary;
    walk.unit_root_mode = true;
    walk.seed = 20170072;
    const double size = run_experiment(walk, Pipeline::UnitRoot, 500).rejection_rate("IPS");

    const auto d = generate(stationary);
    const auto r = ips_test(d, "x");
    double sum = 0.0;
    for (const auto& f : r.per_entity) sum += f.t_stat;
    const bool exact = r.t_bar == sum / static_cast<double>(r.per_entity.size());

    const double secs = seconds_since(start);
    const bool pass = power > kIpsPower && size >= kIpsSizeLow && size <= kIpsSizeHigh && exact && secs < kIpsSeconds;
    return {pass, fmt("power=%.3f (>%.2f), size=%.3f in [%.2f, %.2f], t_bar exact=%s, %.1fs (<%.0fs)", power, kIpsPower,
                      size, kIpsSizeLow, kIpsSizeHigh, exact ? "yes" : "no", secs, kIpsSeconds)};
}

Outcome durbin_watson_anchor() {
    Rng rng(20170008);
    std::vector<double> e(10000);
    for (double& v : e) v = rng.normal();
    const double dw = durbin_watson(e, 1, e.size());
    const double hand[] = {1, -1, 1, -1};
    const double dw_hand = durbin_watson(hand, 1, 4);
    const bool pass = dw >= kDwLow && dw <= kDwHigh && dw_hand == 3.0;
    return {pass, fmt("white noise DW=%.4f in [%.1f, %.1f]; alternating DW=%.17g (3 exactly)", dw, kDwLow, kDwHigh,
                      dw_hand)};
}

Outcome descriptive_statistics() {
    Rng rng(20170009);
    double worst = 0.0;
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<double> v(5 + rep * 11);
        for (double& x : v) x = rep % 2 ? std::exp(rng.normal()) : rng.normal(3.0, 2.0);
        const auto row = summarize("v", v);
        const auto o = testing::brute_moments(v);
        auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
        worst = std::max({worst, rel(row.mean, o.mean), rel(row.median, o.median), rel(row.max, o.max),
                          rel(row.min, o.min), rel(row.std_dev, o.sd), rel(row.skewness, o.skew),
                          rel(row.kurtosis, o.kurt)});
    }
    const PanelDataset d({"A"}, {1}, {"x"}, {{0.0}});
    const double floored = apply_log_floor(d, {}).value(0, 0, "x");
    const bool pass = worst < kDescribeTolerance && std::abs(floored - (-4.60517)) < kLogFloorTolerance;
    return {pass, fmt("max rel. deviation from brute force=%.2e (<%.0e); log floor of 0 = %.5f (-4.60517)", worst,
                      kDescribeTolerance, floored)};
}

Outcome end_to_end_determinism() {
    cli::RunConfig config;
    config.input = std::filesystem::path(PANELKIT_FIXTURE_DIR) / "regional_panel.csv";
    config.regions = std::filesystem::path(PANELKIT_FIXTURE_DIR) / "regions.csv";
    std::ostringstream first, second, err;
    const int c1 = cli::cmd_regional(config, first, err);
    const int c2 = cli::cmd_regional(config, second, err);
    const std::string text = first.str();
    std::vector<std::string> missing;
    for (const char* row : {"C ", "Growth", "Import", "Export", "Inflation", "Interest", "EFI", "Weighted R²",
                            "Unweighted R²", "Cross-section", "Total Obs.", "RFE", "BP LM", "Hausman", "Decision"}) {
        if (text.find(std::string("\n") + row) == std::string::npos) missing.emplace_back(row);
    }
    const bool identical = text == second.str();
    const bool pass = c1 == 0 && c2 == 0 && identical && missing.empty() && !text.empty();
    std::string detail = fmt("exit codes %d/%d, %zu bytes, byte-identical=%s, missing rows=%zu", c1, c2, text.size(),
                             identical ? "yes" : "no", missing.size());
    for (const auto& m : missing) detail += " [" + m + "]";
    return {pass, detail};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"1 oracle equivalence", oracle_equivalence},
        {"2 published p-values", published_p_values},
        {"3 decision row", decision_row},
        {"4 nesting identities", nesting_identities},
        {"5 Monte-Carlo consistency", monte_carlo_consistency},
        {"6 test size and power", size_and_power},
        {"7 IPS behaviour", ips_behaviour},
        {"8 Durbin-Watson anchor", durbin_watson_anchor},
        {"9 descriptive statistics", descriptive_statistics},
        {"10 end-to-end determinism", end_to_end_determinism},
    };
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("[%s] criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
