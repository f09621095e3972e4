#include "panelkit/synthlab.hpp"

#include "panelkit/diagnostics.hpp"
#include "panelkit/error.hpp"
#include "panelkit/estimators.hpp"
#include "panelkit/random.hpp"
#include "panelkit/unitroot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <thread>

namespace panelkit {

namespace {

constexpr double kRegressorAr = 0.5;
constexpr double kFixedEffectLoading = 0.8;

std::string entity_name(const std::string& prefix, std::size_t index, std::size_t count) {
    const std::size_t width = std::max<std::size_t>(3, std::to_string(count).size());
    std::string digits = std::to_string(index + 1);
    return prefix + std::string(width - digits.size(), '0') + digits;
}

struct Replication {
    std::vector<double> estimates;
    std::vector<double> std_errors;
    std::vector<bool> rejections;
};

ModelSpec model_for(const DgpSpec& spec) {
    ModelSpec m;
    m.dependent = spec.dependent;
    for (const auto& [name, beta] : spec.true_beta) m.regressors.push_back(name);
    return m;
}

const std::vector<std::string>& test_names(Pipeline p) {
    static const std::vector<std::string> tests = {"RFE", "BP LM", "Honda", "Hausman"};
    static const std::vector<std::string> unit = {"IPS"};
    static const std::vector<std::string> none;
    if (p == Pipeline::Tests) return tests;
    if (p == Pipeline::UnitRoot) return unit;
    return none;
}

Replication run_one(const DgpSpec& spec, Pipeline pipeline, double alpha) {
    const PanelDataset d = generate(spec);
    const ModelSpec m = model_for(spec);
    Replication rep;
    auto record = [&](const FitResult& fit) {
        for (const auto& name : m.regressors) {
            rep.estimates.push_back(fit.coefficient(name));
            rep.std_errors.push_back(fit.std_error(name));
        }
    };
    switch (pipeline) {
        case Pipeline::Pooled: record(fit_pooled(d, m)); break;
        case Pipeline::FeLsdv: record(fit_fe_lsdv(d, m)); break;
        case Pipeline::FeGls: record(fit_fe_gls(d, m)); break;
        case Pipeline::Re: record(fit_re(d, m)); break;
        case Pipeline::Tests: {
            const FitResult pooled = fit_pooled(d, m);
            const FitResult fe = fit_fe_lsdv(d, m);
            const FitResult re = fit_re(d, m);
            rep.rejections.push_back(redundant_fe_test(pooled, fe, alpha).reject);
            rep.rejections.push_back(bp_lm_test(pooled, alpha).reject);
            rep.rejections.push_back(honda_test(pooled, alpha).reject);
            rep.rejections.push_back(hausman_test(fe, re, alpha).reject);
            break;
        }
        case Pipeline::UnitRoot: {
            const IpsResult ips = ips_test(d, m.regressors.front());
            rep.rejections.push_back(ips.p_value < alpha);
            break;
        }
    }
    return rep;
}

}  // namespace

void DgpSpec::validate() const {
    if (n_entities < 2) throw Error(ErrorKind::InvalidSpec, "n_entities must be at least 2");
    if (n_periods < 3) throw Error(ErrorKind::InvalidSpec, "n_periods must be at least 3");
    if (true_beta.empty()) throw Error(ErrorKind::InvalidSpec, "at least one regressor is required");
    if (!(sigma_u >= 0.0) || !std::isfinite(sigma_u)) throw Error(ErrorKind::InvalidSpec, "sigma_u must be >= 0");
    if (!(sigma_e >= 0.0) || !std::isfinite(sigma_e)) throw Error(ErrorKind::InvalidSpec, "sigma_e must be >= 0");
    if (!std::isfinite(intercept)) throw Error(ErrorKind::InvalidSpec, "intercept must be finite");
    if (dependent.empty()) throw Error(ErrorKind::InvalidSpec, "dependent name is empty");
    std::set<std::string> names{dependent};
    for (const auto& [name, beta] : true_beta) {
        if (name.empty() || !names.insert(name).second) {
            throw Error(ErrorKind::InvalidSpec, "regressor names must be unique, non-empty and differ from the dependent");
        }
        if (!std::isfinite(beta)) throw Error(ErrorKind::InvalidSpec, "beta." + name + " must be finite");
    }
}

PanelDataset generate(const DgpSpec& spec) {
    spec.validate();
    const std::size_t N = spec.n_entities;
    const std::size_t T = spec.n_periods;
    const std::size_t K = spec.true_beta.size();

    std::vector<std::string> entities;
    std::vector<std::vector<double>> columns(K + 1, std::vector<double>(N * T));
    const double stationary_sd = 1.0 / std::sqrt(1.0 - kRegressorAr * kRegressorAr);

    for (std::size_t a = 0; a < N; ++a) {
        entities.push_back(entity_name(spec.entity_prefix, a, N));
        Rng rng(derive_seed(spec.seed, a));
        for (std::size_t j = 0; j < K; ++j) {
            double* x = &columns[j + 1][a * T];
            if (spec.unit_root_mode) {
                x[0] = rng.normal();
                for (std::size_t t = 1; t < T; ++t) x[t] = x[t - 1] + rng.normal();
            } else {
                x[0] = stationary_sd * rng.normal();
                for (std::size_t t = 1; t < T; ++t) x[t] = kRegressorAr * x[t - 1] + rng.normal();
            }
        }
        double effect = spec.sigma_u * rng.normal();
        if (spec.fixed_effect_mode) {
            const double* x = &columns[1][a * T];
            double mean = 0.0;
            for (std::size_t t = 0; t < T; ++t) mean += x[t];
            effect += kFixedEffectLoading * mean / static_cast<double>(T);
        }
        for (std::size_t t = 0; t < T; ++t) {
            double y = spec.intercept + effect + spec.sigma_e * rng.normal();
            for (std::size_t j = 0; j < K; ++j) y += spec.true_beta[j].second * columns[j + 1][a * T + t];
            columns[0][a * T + t] = y;
        }
    }

    std::vector<int> periods(T);
    for (std::size_t t = 0; t < T; ++t) periods[t] = spec.first_period + static_cast<int>(t);
    std::vector<std::string> variables{spec.dependent};
    for (const auto& [name, beta] : spec.true_beta) variables.push_back(name);
    return PanelDataset(std::move(entities), std::move(periods), std::move(variables), std::move(columns));
}

std::string_view to_string(Pipeline p) noexcept {
    switch (p) {
        case Pipeline::Pooled: return "pooled";
        case Pipeline::FeLsdv: return "fe-lsdv";
        case Pipeline::FeGls: return "fe-gls";
        case Pipeline::Re: return "re";
        case Pipeline::Tests: return "tests";
        case Pipeline::UnitRoot: return "unitroot";
    }
    return "?";
}

Pipeline parse_pipeline(std::string_view name) {
    for (auto p : {Pipeline::Pooled, Pipeline::FeLsdv, Pipeline::FeGls, Pipeline::Re, Pipeline::Tests,
                   Pipeline::UnitRoot}) {
        if (to_string(p) == name) return p;
    }
    throw Error(ErrorKind::InvalidSpec, "unknown pipeline '" + std::string(name) + "'");
}

const CoefficientSummary& McReport::coefficient(std::string_view name) const {
    for (const auto& c : coefficients) {
        if (c.name == name) return c;
    }
    throw Error(ErrorKind::InvalidArgument, "report has no coefficient '" + std::string(name) + "'");
}

double McReport::rejection_rate(std::string_view name) const {
    for (const auto& t : tests) {
        if (t.name == name) return t.rejection_rate;
    }
    throw Error(ErrorKind::InvalidArgument, "report has no test '" + std::string(name) + "'");
}

void McReport::write_csv(std::ostream& out) const {
    out << "pipeline,replications,master_seed,kind,name,true_value,estimate_mean,estimate_sd,coverage_95,"
           "rejection_rate\n";
    const std::string prefix = std::string(to_string(pipeline)) + "," + std::to_string(replications) + "," +
                               std::to_string(master_seed) + ",";
    char buf[160];
    for (const auto& c : coefficients) {
        std::snprintf(buf, sizeof buf, "%.4f,%.4f,%.4f,%.4f,", c.true_value, c.estimate_mean, c.estimate_sd,
                      c.coverage_95);
        out << prefix << "coefficient," << c.name << ',' << buf << '\n';
    }
    for (const auto& t : tests) {
        std::snprintf(buf, sizeof buf, "%.4f", t.rejection_rate);
        out << prefix << "test," << t.name << ",,,,," << buf << '\n';
    }
}

McReport run_experiment(const DgpSpec& spec, Pipeline pipeline, std::size_t replications,
                        const ExperimentOptions& options) {
    spec.validate();
    if (replications < 1) throw Error(ErrorKind::InvalidSpec, "replications must be at least 1");

    std::vector<std::optional<Replication>> results(replications);
    std::vector<std::exception_ptr> errors(replications);
    auto work = [&](std::size_t first, std::size_t stride) {
        for (std::size_t r = first; r < replications; r += stride) {
            DgpSpec rep_spec = spec;
            rep_spec.seed = derive_seed(spec.seed, r);
            try {
                results[r] = run_one(rep_spec, pipeline, options.alpha);
            } catch (...) {
                errors[r] = std::current_exception();
            }
        }
    };
    std::size_t threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
    threads = std::min(threads, replications);
    if (threads <= 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(work, i, threads);
    }
    for (std::size_t r = 0; r < replications; ++r) {
        if (!errors[r]) continue;
        try {
            std::rethrow_exception(errors[r]);
        } catch (const Error& e) {
            throw Error(e.kind(), "replication " + std::to_string(r) + ": " + e.what());
        }
    }

    McReport report;
    report.pipeline = pipeline;
    report.master_seed = spec.seed;
    report.replications = replications;
    const double n = static_cast<double>(replications);

    const bool estimation = test_names(pipeline).empty();
    if (estimation) {
        for (std::size_t j = 0; j < spec.true_beta.size(); ++j) {
            CoefficientSummary c;
            c.name = spec.true_beta[j].first;
            c.true_value = spec.true_beta[j].second;
            double sum = 0.0, covered = 0.0;
            for (const auto& rep : results) sum += rep->estimates[j];
            c.estimate_mean = sum / n;
            double ss = 0.0;
            for (const auto& rep : results) {
                const double est = rep->estimates[j];
                ss += (est - c.estimate_mean) * (est - c.estimate_mean);
                if (std::abs(est - c.true_value) <= 1.959963984540054 * rep->std_errors[j]) covered += 1.0;
            }
            c.estimate_sd = replications > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
            c.coverage_95 = covered / n;
            report.coefficients.push_back(std::move(c));
        }
    }
    const auto& names = test_names(pipeline);
    for (std::size_t i = 0; i < names.size(); ++i) {
        double rejected = 0.0;
        for (const auto& rep : results) rejected += rep->rejections[i] ? 1.0 : 0.0;
        report.tests.push_back({names[i], rejected / n});
    }
    return report;
}

// ---------------------------------------------------------------------------
// Spec files
// ---------------------------------------------------------------------------

namespace {

std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::logic_error&) {
        throw Error(ErrorKind::InvalidSpec, key + ": '" + v + "' is not a number");
    }
}

std::uint64_t to_unsigned(const std::string& key, const std::string& v) {
    try {
        if (v.empty() || v[0] == '-') throw std::invalid_argument(v);
        std::size_t used = 0;
        const auto x = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::logic_error&) {
        throw Error(ErrorKind::InvalidSpec, key + ": '" + v + "' is not a nonnegative integer");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw Error(ErrorKind::InvalidSpec, key + ": '" + v + "' is not a boolean");
}

}  // namespace

ExperimentSpec parse_experiment_spec(std::istream& in) {
    ExperimentSpec spec;
    spec.dgp.true_beta.clear();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = strip(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::InvalidSpec, "line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        auto& d = spec.dgp;
        if (key.rfind("beta.", 0) == 0) {
            d.true_beta.emplace_back(key.substr(5), to_double(key, value));
        } else if (key == "n_entities") {
            d.n_entities = to_unsigned(key, value);
        } else if (key == "n_periods") {
            d.n_periods = to_unsigned(key, value);
        } else if (key == "intercept") {
            d.intercept = to_double(key, value);
        } else if (key == "sigma_u") {
            d.sigma_u = to_double(key, value);
        } else if (key == "sigma_e") {
            d.sigma_e = to_double(key, value);
        } else if (key == "fixed_effect_mode") {
            d.fixed_effect_mode = to_bool(key, value);
        } else if (key == "unit_root_mode") {
            d.unit_root_mode = to_bool(key, value);
        } else if (key == "seed") {
            d.seed = to_unsigned(key, value);
            spec.has_seed = true;
        } else if (key == "dependent") {
            d.dependent = value;
        } else if (key == "entity_prefix") {
            d.entity_prefix = value;
        } else if (key == "first_period") {
            d.first_period = static_cast<int>(to_double(key, value));
        } else if (key == "pipeline") {
            spec.pipeline = parse_pipeline(value);
        } else if (key == "replications") {
            spec.replications = to_unsigned(key, value);
        } else {
            throw Error(ErrorKind::InvalidSpec, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    if (spec.dgp.true_beta.empty()) spec.dgp.true_beta = {{"x", 1.0}};
    spec.dgp.validate();
    if (spec.replications < 1) throw Error(ErrorKind::InvalidSpec, "replications must be at least 1");
    return spec;
}

}  // namespace panelkit
