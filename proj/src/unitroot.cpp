#include "panelkit/unitroot.hpp"

#include "panelkit/error.hpp"
#include "panelkit/numeric.hpp"
#include "panelkit/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

namespace panelkit {

extern const char* const kBuiltinIpsMoments;

namespace {

struct AdfRegression {
    LeastSquaresFit ls;
    std::size_t n = 0;
};

// Regression for lag k on levels z_start..z_{T-1}; requires start >= k + 1.
AdfRegression adf_regression(std::span<const double> z, std::size_t k, std::size_t start) {
    const std::size_t T = z.size();
    const auto n = static_cast<Eigen::Index>(T - start);
    const auto p = static_cast<Eigen::Index>(k + 2);
    Matrix X(n, p);
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::size_t t = start + static_cast<std::size_t>(i);
        y(i) = z[t] - z[t - 1];
        X(i, 0) = 1.0;
        X(i, 1) = z[t - 1];
        for (std::size_t j = 1; j <= k; ++j) {
            X(i, static_cast<Eigen::Index>(j + 1)) = z[t - j] - z[t - j - 1];
        }
    }
    return {solve_least_squares(X, y), static_cast<std::size_t>(n)};
}

double sic(double rss, std::size_t n, std::size_t k) {
    const double nn = static_cast<double>(n);
    const double floor_rss = std::max(rss, std::numeric_limits<double>::min());
    return std::log(floor_rss / nn) + static_cast<double>(k + 2) * std::log(nn) / nn;
}

void check_series(std::span<const double> series) {
    require_finite(series, "series");
    if (!series.empty() &&
        std::all_of(series.begin(), series.end(), [&](double v) { return v == series.front(); })) {
        throw Error(ErrorKind::ConstantSeries, "series is constant; the ADF regression is degenerate");
    }
}

void check_length(std::size_t T, std::size_t max_lag) {
    if (T < 2 * max_lag + 4) {
        throw Error(ErrorKind::TooShort, "series of length " + std::to_string(T) + " cannot support lag " +
                                             std::to_string(max_lag) + " (need at least " +
                                             std::to_string(2 * max_lag + 4) + ")");
    }
}

AdfFit to_adf_fit(const AdfRegression& reg, std::size_t k) {
    const std::size_t df = reg.n - (k + 2);
    const double sigma2 = reg.ls.rss / static_cast<double>(df);
    const double se = std::sqrt(sigma2 * reg.ls.xtx_inverse(1, 1));
    if (!(se > 0.0)) {
        throw Error(ErrorKind::ConstantSeries, "ADF regression fits exactly; t statistic undefined");
    }
    AdfFit fit;
    fit.intercept = reg.ls.coefficients(0);
    fit.rho = reg.ls.coefficients(1);
    fit.t_stat = fit.rho / se;
    fit.lag_order = k;
    for (std::size_t j = 0; j < k; ++j) {
        fit.lag_coefficients.push_back(reg.ls.coefficients(static_cast<Eigen::Index>(j + 2)));
    }
    fit.sic = sic(reg.ls.rss, reg.n, k);
    fit.n_effective = reg.n;
    return fit;
}

// Normal-equation t statistic for the simulation loop; same regression as
// adf_regression but without the QR/SVD overhead.
double fast_adf_t(const std::vector<double>& z, std::size_t k) {
    const std::size_t T = z.size();
    const std::size_t start = k + 1;
    const auto p = static_cast<Eigen::Index>(k + 2);
    Matrix xtx = Matrix::Zero(p, p);
    Vector xty = Vector::Zero(p);
    Vector row(p);
    double yty = 0.0;
    for (std::size_t t = start; t < T; ++t) {
        const double y = z[t] - z[t - 1];
        row(0) = 1.0;
        row(1) = z[t - 1];
        for (std::size_t j = 1; j <= k; ++j) row(static_cast<Eigen::Index>(j + 1)) = z[t - j] - z[t - j - 1];
        xtx.selfadjointView<Eigen::Lower>().rankUpdate(row);
        xty += y * row;
        yty += y * y;
    }
    const Matrix full = xtx.selfadjointView<Eigen::Lower>();
    Eigen::LDLT<Matrix> ldlt(full);
    const Vector beta = ldlt.solve(xty);
    const double rss = std::max(yty - beta.dot(xty), 0.0);
    const std::size_t n = T - start;
    const double sigma2 = rss / static_cast<double>(n - (k + 2));
    Vector e1 = Vector::Zero(p);
    e1(1) = 1.0;
    const double v11 = ldlt.solve(e1)(1);
    return beta(1) / std::sqrt(sigma2 * v11);
}

}  // namespace

std::size_t default_max_lag(std::size_t T) {
    auto k = static_cast<std::size_t>(std::floor(12.0 * std::pow(static_cast<double>(T) / 100.0, 0.25)));
    while (k > 0 && (T < k + 1 || T - 1 - k < k + 5)) --k;
    return k;
}

AdfFit adf_fixed_lag(std::span<const double> series, std::size_t lag) {
    check_series(series);
    check_length(series.size(), lag);
    return to_adf_fit(adf_regression(series, lag, lag + 1), lag);
}

AdfFit adf_fit(std::span<const double> series, std::size_t max_lag, LagCriterion criterion) {
    (void)criterion;  // SIC is the only criterion
    check_series(series);
    check_length(series.size(), max_lag);

    std::size_t best_k = 0;
    double best_sic = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k <= max_lag; ++k) {
        const AdfRegression reg = adf_regression(series, k, max_lag + 1);
        const double score = sic(reg.ls.rss, reg.n, k);
        if (score < best_sic) {
            best_sic = score;
            best_k = k;
        }
    }
    return to_adf_fit(adf_regression(series, best_k, best_k + 1), best_k);
}

// ---------------------------------------------------------------------------
// Moments
// ---------------------------------------------------------------------------

MomentTable::MomentTable(std::vector<Entry> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return a.k != b.k ? a.k < b.k : a.T < b.T; });
    for (std::size_t i = 1; i < entries_.size(); ++i) {
        if (entries_[i].k == entries_[i - 1].k && entries_[i].T == entries_[i - 1].T) {
            throw Error(ErrorKind::DuplicateCell, "moment table has two rows for T=" +
                                                      std::to_string(entries_[i].T) +
                                                      ", k=" + std::to_string(entries_[i].k));
        }
    }
    for (const auto& e : entries_) {
        if (!(e.moments.variance > 0.0) || !std::isfinite(e.moments.mean)) {
            throw Error(ErrorKind::InvalidArgument, "moment table variance must be positive and mean finite");
        }
    }
}

const MomentTable& MomentTable::builtin() {
    static const MomentTable table = [] {
        if (*kBuiltinIpsMoments == '\0') return MomentTable{};
        std::istringstream in(kBuiltinIpsMoments);
        return parse(in);
    }();
    return table;
}

MomentTable MomentTable::parse(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorKind::MalformedCsv, "moment table: missing header");
    }
    const auto header = split_csv_record(line);
    if (header != std::vector<std::string>{"T", "k", "mean_t", "var_t"}) {
        throw Error(ErrorKind::MalformedCsv, "moment table header must be T,k,mean_t,var_t");
    }
    std::vector<Entry> entries;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#' || line == "\r") continue;
        const auto f = split_csv_record(line);
        if (f.size() != 4) {
            throw Error(ErrorKind::MalformedCsv, "moment table line " + std::to_string(line_no) + " malformed");
        }
        try {
            Entry e;
            e.T = std::stoul(f[0]);
            e.k = std::stoul(f[1]);
            e.moments.mean = std::stod(f[2]);
            e.moments.variance = std::stod(f[3]);
            entries.push_back(e);
        } catch (const std::logic_error&) {
            throw Error(ErrorKind::UnparsableNumber, "moment table line " + std::to_string(line_no));
        }
    }
    return MomentTable(std::move(entries));
}

void MomentTable::write(std::ostream& out) const {
    out << "T,k,mean_t,var_t\n";
    std::vector<Entry> sorted = entries_;
    std::sort(sorted.begin(), sorted.end(),
              [](const Entry& a, const Entry& b) { return a.T != b.T ? a.T < b.T : a.k < b.k; });
    char buf[96];
    for (const auto& e : sorted) {
        std::snprintf(buf, sizeof buf, "%zu,%zu,%.6f,%.6f\n", e.T, e.k, e.moments.mean, e.moments.variance);
        out << buf;
    }
}

std::optional<TStatMoments> MomentTable::lookup(std::size_t T, std::size_t k) const {
    const Entry* below = nullptr;
    const Entry* above = nullptr;
    for (const auto& e : entries_) {
        if (e.k != k) continue;
        if (e.T == T) return e.moments;
        if (e.T < T && (!below || e.T > below->T)) below = &e;
        if (e.T > T && (!above || e.T < above->T)) above = &e;
    }
    if (!below || !above) return std::nullopt;
    const double w = static_cast<double>(T - below->T) / static_cast<double>(above->T - below->T);
    return TStatMoments{(1.0 - w) * below->moments.mean + w * above->moments.mean,
                        (1.0 - w) * below->moments.variance + w * above->moments.variance};
}

std::vector<TStatMoments> simulate_moments(std::size_t T, std::span<const std::size_t> lags,
                                           std::size_t replications, std::uint64_t seed) {
    if (replications < 2) {
        throw Error(ErrorKind::InvalidArgument, "moment simulation needs at least two replications");
    }
    for (std::size_t k : lags) check_length(T, k);

    std::vector<double> sum(lags.size(), 0.0);
    std::vector<double> sum_sq(lags.size(), 0.0);
    std::vector<double> z(T);
    Rng rng(seed);
    for (std::size_t r = 0; r < replications; ++r) {
        z[0] = 0.0;
        for (std::size_t t = 1; t < T; ++t) z[t] = z[t - 1] + rng.normal();
        for (std::size_t i = 0; i < lags.size(); ++i) {
            const double t_stat = fast_adf_t(z, lags[i]);
            sum[i] += t_stat;
            sum_sq[i] += t_stat * t_stat;
        }
    }
    std::vector<TStatMoments> out(lags.size());
    const double n = static_cast<double>(replications);
    for (std::size_t i = 0; i < lags.size(); ++i) {
        out[i].mean = sum[i] / n;
        out[i].variance = (sum_sq[i] - n * out[i].mean * out[i].mean) / (n - 1.0);
    }
    return out;
}

std::vector<SelectedLagMoments> simulate_selected_moments(std::size_t T, std::size_t max_lag,
                                                          std::size_t replications, std::uint64_t seed) {
    if (replications < 2) {
        throw Error(ErrorKind::InvalidArgument, "moment simulation needs at least two replications");
    }
    check_length(T, max_lag);

    // SIC on the common sample: nested designs share one QR, so the RSS of the
    // first k + 2 columns is the tail sum of squares of Q'y.
    const std::size_t start = max_lag + 1;
    const auto n = static_cast<Eigen::Index>(T - start);
    const auto p = static_cast<Eigen::Index>(max_lag + 2);
    Matrix X(n, p);
    Vector y(n);
    std::vector<double> z(T);
    std::vector<double> sum(max_lag + 1, 0.0);
    std::vector<double> sum_sq(max_lag + 1, 0.0);
    std::vector<std::size_t> count(max_lag + 1, 0);
    Rng rng(seed);
    for (std::size_t r = 0; r < replications; ++r) {
        z[0] = 0.0;
        for (std::size_t t = 1; t < T; ++t) z[t] = z[t - 1] + rng.normal();
        for (Eigen::Index i = 0; i < n; ++i) {
            const std::size_t t = start + static_cast<std::size_t>(i);
            y(i) = z[t] - z[t - 1];
            X(i, 0) = 1.0;
            X(i, 1) = z[t - 1];
            for (std::size_t j = 1; j <= max_lag; ++j) {
                X(i, static_cast<Eigen::Index>(j + 1)) = z[t - j] - z[t - j - 1];
            }
        }
        const Eigen::HouseholderQR<Matrix> qr(X);
        const Vector qty = qr.householderQ().adjoint() * y;
        std::vector<double> tail(static_cast<std::size_t>(n) + 1, 0.0);
        for (Eigen::Index i = n - 1; i >= 0; --i) {
            tail[static_cast<std::size_t>(i)] = tail[static_cast<std::size_t>(i) + 1] + qty(i) * qty(i);
        }
        std::size_t best_k = 0;
        double best_sic = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k <= max_lag; ++k) {
            const double score = sic(tail[k + 2], static_cast<std::size_t>(n), k);
            if (score < best_sic) {
                best_sic = score;
                best_k = k;
            }
        }
        const double t_stat = fast_adf_t(z, best_k);
        sum[best_k] += t_stat;
        sum_sq[best_k] += t_stat * t_stat;
        ++count[best_k];
    }
    std::vector<SelectedLagMoments> out(max_lag + 1);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        out[k].count = count[k];
        if (count[k] < 2) continue;
        const double c = static_cast<double>(count[k]);
        out[k].moments.mean = sum[k] / c;
        out[k].moments.variance = (sum_sq[k] - c * out[k].moments.mean * out[k].moments.mean) / (c - 1.0);
    }
    return out;
}

// ---------------------------------------------------------------------------
// IPS
// ---------------------------------------------------------------------------

std::vector<std::vector<double>> demean_cross_section(const PanelDataset& d, std::string_view variable) {
    const std::size_t N = d.n_entities();
    const std::size_t T = d.n_periods();
    const auto col = d.column(variable);
    std::vector<double> period_mean(T, 0.0);
    for (std::size_t a = 0; a < N; ++a) {
        for (std::size_t t = 0; t < T; ++t) period_mean[t] += col[a * T + t];
    }
    for (double& m : period_mean) m /= static_cast<double>(N);

    std::vector<std::vector<double>> out(N, std::vector<double>(T));
    for (std::size_t a = 0; a < N; ++a) {
        for (std::size_t t = 0; t < T; ++t) out[a][t] = col[a * T + t] - period_mean[t];
    }
    return out;
}

IpsResult ips_test_series(const std::vector<std::vector<double>>& series, std::span<const std::string> labels,
                          const IpsOptions& options) {
    if (series.empty()) {
        throw Error(ErrorKind::InvalidArgument, "IPS test needs at least one series");
    }
    const MomentTable& table = options.table ? *options.table : MomentTable::builtin();

    IpsResult result;
    double mean_sum = 0.0;
    double var_sum = 0.0;
    std::map<std::pair<std::size_t, std::size_t>, std::vector<SelectedLagMoments>> selected;
    std::map<std::pair<std::size_t, std::size_t>, TStatMoments> fixed;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const std::size_t max_lag = options.max_lag.value_or(default_max_lag(s.size()));
        AdfFit fit;
        try {
            fit = adf_fit(s, max_lag);
        } catch (const Error& e) {
            const std::string label = i < labels.size() ? labels[i] : "#" + std::to_string(i);
            throw Error(e.kind(), "entity '" + label + "': " + e.what());
        }

        std::optional<TStatMoments> moments;
        if (options.table || max_lag == default_max_lag(s.size())) moments = table.lookup(s.size(), fit.lag_order);
        if (!moments) {
            const std::size_t T = s.size();
            auto it = selected.find({T, max_lag});
            if (it == selected.end()) {
                it = selected
                         .emplace(std::make_pair(T, max_lag),
                                  simulate_selected_moments(T, max_lag, options.simulation_replications,
                                                            derive_seed(options.simulation_seed, T * 64 + max_lag)))
                         .first;
            }
            const auto& cell = it->second[fit.lag_order];
            if (cell.count >= kMinSelectedDraws) {
                moments = cell.moments;
            } else {
                // Rarely selected lag: fall back to the fixed-lag moments.
                auto fixed_it = fixed.find({T, fit.lag_order});
                if (fixed_it == fixed.end()) {
                    const std::size_t lag = fit.lag_order;
                    const auto sim = simulate_moments(T, std::span<const std::size_t>(&lag, 1),
                                                      options.simulation_replications,
                                                      derive_seed(options.simulation_seed, T * 64 + lag));
                    fixed_it = fixed.emplace(std::make_pair(T, lag), sim.front()).first;
                }
                moments = fixed_it->second;
            }
            result.moments_source = MomentsSource::Simulated;
        }
        mean_sum += moments->mean;
        var_sum += moments->variance;
        result.t_bar += fit.t_stat;
        result.per_entity.push_back(std::move(fit));
    }
    const double N = static_cast<double>(series.size());
    result.t_bar /= N;
    result.standardized = std::sqrt(N) * (result.t_bar - mean_sum / N) / std::sqrt(var_sum / N);
    result.p_value = normal_cdf(result.standardized);
    return result;
}

IpsResult ips_test(const PanelDataset& d, std::string_view variable, const IpsOptions& options) {
    std::vector<std::vector<double>> series;
    if (options.demean) {
        series = demean_cross_section(d, variable);
    } else {
        for (std::size_t a = 0; a < d.n_entities(); ++a) {
            const auto s = d.series(variable, a);
            series.emplace_back(s.begin(), s.end());
        }
    }
    return ips_test_series(series, d.entities(), options);
}

}  // namespace panelkit
