#include "panelkit/commands.hpp"

#include "panelkit/diagnostics.hpp"
#include "panelkit/error.hpp"
#include "panelkit/report.hpp"
#include "panelkit/synthlab.hpp"
#include "panelkit/unitroot.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

namespace panelkit::cli {

namespace {

using report::coefficient_cell;
using report::fixed4;
using report::statistic_cell;
using report::TextTable;
using report::write_csv_row;

const char* const kStarsNote = "*, **, and *** denote significance at 10%, 5%, and 1% levels respectively.";

/// Checks that do not need the data: numeric ranges and path existence.
int validate_config(const RunConfig& c, std::ostream& err) {
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) {
        err << "error: --alpha must lie in (0, 1)\n";
        return exit_code::kUsage;
    }
    if (!(c.floor > 0.0)) {
        err << "error: --floor must be positive\n";
        return exit_code::kUsage;
    }
    if (c.input.empty()) {
        err << "error: --input is required\n";
        return exit_code::kUsage;
    }
    if (!std::filesystem::is_regular_file(c.input)) {
        err << "error: input file '" << c.input.string() << "' does not exist\n";
        return exit_code::kIngestion;
    }
    if (c.regions && !std::filesystem::is_regular_file(*c.regions)) {
        err << "error: region map '" << c.regions->string() << "' does not exist\n";
        return exit_code::kIngestion;
    }
    return exit_code::kOk;
}

/// Loads (and optionally log-transforms) the dataset; returns an exit code.
int load(const RunConfig& c, std::optional<PanelDataset>& out, std::ostream& err) {
    if (const int code = validate_config(c, err); code != exit_code::kOk) return code;
    try {
        PanelDataset d = load_long_csv(c.input, c.schema);
        if (c.log_transform) {
            d = apply_log_floor(d, TransformPolicy{c.floor, {}});
        }
        out.emplace(std::move(d));
        return exit_code::kOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::kIngestion;
    }
}

int model_spec(const RunConfig& c, const PanelDataset& d, ModelSpec& m, std::ostream& err) {
    m.dependent = c.dependent;
    if (m.dependent.empty()) {
        m.dependent = d.has_variable("FDI") ? "FDI" : d.variables().front();
    }
    m.regressors = c.regressors;
    if (m.regressors.empty()) {
        for (const auto& v : d.variables()) {
            if (v != m.dependent) m.regressors.push_back(v);
        }
    }
    try {
        m.validate(d);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::kUsage;
    }
    return exit_code::kOk;
}

std::string optional_cell(const std::optional<double>& v) { return v ? fixed4(*v) : "-"; }

std::string decision_sentence(ModelChoice choice) {
    return std::string(to_string(choice)) + " model is appropriate.";
}

// Rows shared by the Table-6 and Table-7 style grids: one column per fit.
struct GridColumn {
    std::string label;
    const FitResult* fit = nullptr;
    std::optional<double> durbin_watson;
};

std::vector<std::string> term_order(const std::vector<GridColumn>& columns) {
    std::vector<std::string> terms;
    for (const auto& col : columns) {
        for (const auto& name : col.fit->names) {
            if (std::find(terms.begin(), terms.end(), name) == terms.end()) terms.push_back(name);
        }
    }
    return terms;
}

void add_coefficient_rows(TextTable& table, const std::vector<GridColumn>& columns) {
    for (const auto& term : term_order(columns)) {
        std::vector<std::string> row{term};
        for (const auto& col : columns) {
            const auto& names = col.fit->names;
            const auto it = std::find(names.begin(), names.end(), term);
            if (it == names.end()) {
                row.emplace_back("-");
                continue;
            }
            const auto i = static_cast<Eigen::Index>(it - names.begin());
            row.push_back(coefficient_cell(col.fit->coefficients(i), significance_stars(col.fit->p_values(i)),
                                           col.fit->std_errors(i)));
        }
        table.add_row(std::move(row));
    }
}

void add_summary_rows(TextTable& table, const std::vector<GridColumn>& columns, bool cross_section) {
    auto add = [&](const std::string& label, auto&& cell) {
        std::vector<std::string> row{label};
        for (const auto& col : columns) row.push_back(cell(col));
        table.add_row(std::move(row));
    };
    add("Weighted R²", [](const GridColumn& c) { return optional_cell(c.fit->r2_weighted); });
    add("Unweighted R²", [](const GridColumn& c) { return fixed4(c.fit->r2_unweighted); });
    if (cross_section) {
        add("Cross-section", [](const GridColumn& c) { return std::to_string(c.fit->n_entities); });
    }
    add("Total Obs.", [](const GridColumn& c) { return std::to_string(c.fit->n_obs); });
    add("σ_u", [](const GridColumn& c) {
        return c.fit->components ? fixed4(c.fit->components->rho_u) : std::string("-");
    });
    add("σ_e", [](const GridColumn& c) {
        return c.fit->components ? fixed4(c.fit->components->rho_e) : std::string("-");
    });
    add("Durbin-Watson", [](const GridColumn& c) { return optional_cell(c.durbin_watson); });
}

void write_grid_csv(std::ostream& out, const std::vector<GridColumn>& columns) {
    write_csv_row(out, {"column", "row", "value", "std_error", "p_value", "stars"});
    for (const auto& col : columns) {
        const FitResult& f = *col.fit;
        for (std::size_t i = 0; i < f.names.size(); ++i) {
            const auto j = static_cast<Eigen::Index>(i);
            write_csv_row(out, {col.label, f.names[i], fixed4(f.coefficients(j)), fixed4(f.std_errors(j)),
                                fixed4(f.p_values(j)), significance_stars(f.p_values(j))});
        }
        write_csv_row(out, {col.label, "Weighted R2", f.r2_weighted ? fixed4(*f.r2_weighted) : "", "", "", ""});
        write_csv_row(out, {col.label, "Unweighted R2", fixed4(f.r2_unweighted), "", "", ""});
        write_csv_row(out, {col.label, "Cross-section", std::to_string(f.n_entities), "", "", ""});
        write_csv_row(out, {col.label, "Total Obs.", std::to_string(f.n_obs), "", "", ""});
        write_csv_row(out, {col.label, "sigma_u", f.components ? fixed4(f.components->rho_u) : "", "", "", ""});
        write_csv_row(out, {col.label, "sigma_e", f.components ? fixed4(f.components->rho_e) : "", "", "", ""});
        write_csv_row(out, {col.label, "Durbin-Watson", col.durbin_watson ? fixed4(*col.durbin_watson) : "", "",
                            "", ""});
    }
}

std::optional<double> try_durbin_watson(const FitResult& fit) {
    try {
        return durbin_watson(fit);
    } catch (const Error&) {
        return std::nullopt;
    }
}

std::string covariance_label(CovarianceType t) { return t == CovarianceType::HC0 ? "HC0" : "HC1"; }

}  // namespace

std::vector<EffectKind> parse_models(const std::string& name) {
    if (name == "pooled") return {EffectKind::Pooled};
    if (name == "fe-lsdv") return {EffectKind::FE_LSDV};
    if (name == "fe-gls") return {EffectKind::FE_GLS};
    if (name == "re") return {EffectKind::RE};
    if (name == "all") return {EffectKind::FE_GLS, EffectKind::FE_LSDV, EffectKind::RE, EffectKind::Pooled};
    throw Error(ErrorKind::InvalidArgument, "unknown model '" + name + "' (pooled, fe-lsdv, fe-gls, re, all)");
}

// ---------------------------------------------------------------------------

int cmd_describe(const RunConfig& config, std::ostream& out, std::ostream& err) {
    std::optional<PanelDataset> d;
    if (const int code = load(config, d, err); code != exit_code::kOk) return code;
    const auto rows = describe(*d);

    if (config.format == OutputFormat::Csv) {
        write_csv_row(out, {"variable", "mean", "median", "max", "min", "std_dev", "skewness", "kurtosis", "n"});
        for (const auto& r : rows) {
            write_csv_row(out, {r.variable, fixed4(r.mean), fixed4(r.median), fixed4(r.max), fixed4(r.min),
                                fixed4(r.std_dev), fixed4(r.skewness), fixed4(r.kurtosis), std::to_string(r.n)});
        }
        return exit_code::kOk;
    }
    TextTable table;
    table.add_row({"", "Mean", "Median", "Max.", "Min.", "Std. Dev.", "Skewness", "Kurtosis", "N"});
    for (const auto& r : rows) {
        table.add_row({r.variable, fixed4(r.mean), fixed4(r.median), fixed4(r.max), fixed4(r.min), fixed4(r.std_dev),
                       fixed4(r.skewness), fixed4(r.kurtosis), std::to_string(r.n)});
    }
    table.render(out);
    out << "\nNotes: Std. Dev. uses the n-1 denominator; skewness and kurtosis use population central moments; "
           "kurtosis is not excess (Gaussian = 3).\n";
    if (d->transformed()) {
        out << "Log linearization ln(max(x, " << fixed4(config.floor) << ")) is applied to the data.\n";
    }
    return exit_code::kOk;
}

int cmd_unitroot(const RunConfig& config, std::ostream& out, std::ostream& err) {
    std::optional<PanelDataset> d;
    if (const int code = load(config, d, err); code != exit_code::kOk) return code;

    IpsOptions options;
    options.max_lag = config.max_lag;
    options.demean = config.demean;

    struct Row {
        std::string variable;
        std::optional<IpsResult> result;
        std::string error;
    };
    std::vector<Row> rows;
    bool failed = false;
    for (const auto& v : d->variables()) {
        Row row{v, std::nullopt, {}};
        try {
            row.result = ips_test(*d, v, options);
        } catch (const Error& e) {
            row.error = e.what();
            failed = true;
            err << "error: " << v << ": " << e.what() << '\n';
        }
        rows.push_back(std::move(row));
    }

    auto mean_lag = [](const IpsResult& r) {
        double sum = 0.0;
        for (const auto& f : r.per_entity) sum += static_cast<double>(f.lag_order);
        return sum / static_cast<double>(r.per_entity.size());
    };

    if (config.format == OutputFormat::Csv) {
        write_csv_row(out, {"variable", "w_stat", "p_value", "stars", "t_bar", "mean_lag", "moments", "status"});
        for (const auto& r : rows) {
            if (r.result) {
                write_csv_row(out, {r.variable, fixed4(r.result->standardized), fixed4(r.result->p_value),
                                    significance_stars(r.result->p_value), fixed4(r.result->t_bar),
                                    fixed4(mean_lag(*r.result)),
                                    r.result->moments_source == MomentsSource::Table ? "table" : "simulated", "ok"});
            } else {
                write_csv_row(out, {r.variable, "", "", "", "", "", "", r.error});
            }
        }
    } else {
        TextTable table;
        table.add_row({"Variables", "IPS W-stat", "p-value", "t-bar", "Mean lag"});
        for (const auto& r : rows) {
            if (r.result) {
                table.add_row({r.variable, fixed4(r.result->standardized) + significance_stars(r.result->p_value),
                               fixed4(r.result->p_value), fixed4(r.result->t_bar), fixed4(mean_lag(*r.result))});
            } else {
                table.add_row({r.variable, "ERROR", "-", "-", "-"});
            }
        }
        table.render(out);
        out << "\nNotes: Lags chosen by SIC with maximum lag "
            << (config.max_lag ? std::to_string(*config.max_lag) : std::string("floor(12 (T/100)^0.25)"))
            << "; intercept, no trend. The p-values are computed assuming asymptotic normality (lower tail). "
            << kStarsNote << '\n';
        if (config.demean) out << "Series are cross-sectionally demeaned.\n";
        for (const auto& r : rows) {
            if (!r.result) out << "Error: " << r.variable << ": " << r.error << '\n';
        }
    }
    return failed ? exit_code::kUnitRoot : exit_code::kOk;
}

int cmd_fit(const RunConfig& config, const std::vector<EffectKind>& models, std::ostream& out, std::ostream& err) {
    if (models.empty()) {
        err << "error: no model selected\n";
        return exit_code::kUsage;
    }
    std::optional<PanelDataset> d;
    if (const int code = load(config, d, err); code != exit_code::kOk) return code;
    ModelSpec m;
    if (const int code = model_spec(config, *d, m, err); code != exit_code::kOk) return code;

    const FitOptions options{config.covariance};
    std::vector<FitResult> fits;
    try {
        for (EffectKind kind : models) {
            switch (kind) {
                case EffectKind::Pooled: fits.push_back(fit_pooled(*d, m, options)); break;
                case EffectKind::FE_LSDV: fits.push_back(fit_fe_lsdv(*d, m, options)); break;
                case EffectKind::FE_GLS: fits.push_back(fit_fe_gls(*d, m, options)); break;
                case EffectKind::RE: fits.push_back(fit_re(*d, m, options)); break;
            }
        }
    } catch (const Error& e) {
        err << "error: estimation failed: " << e.what() << '\n';
        return exit_code::kEstimation;
    }

    std::vector<GridColumn> columns;
    for (const auto& f : fits) columns.push_back({std::string(to_string(f.kind)), &f, try_durbin_watson(f)});

    if (config.format == OutputFormat::Csv) {
        write_grid_csv(out, columns);
        return exit_code::kOk;
    }
    TextTable table;
    std::vector<std::string> header{""};
    for (const auto& c : columns) header.push_back(c.label);
    table.add_row(header);
    add_coefficient_rows(table, columns);
    add_summary_rows(table, columns, false);
    table.render(out);
    out << "\nNotes: Dependent variable " << m.dependent << "; " << d->n_entities() << " cross-sections and "
        << d->n_periods() << " periods (" << d->periods().front() << "-" << d->periods().back()
        << "). The White (" << covariance_label(config.covariance)
        << ") standard errors are presented in parentheses, and " << kStarsNote
        << " The σ_u and σ_e rows give the Swamy-Arora variance shares (rho).\n";
    return exit_code::kOk;
}

int cmd_select(const RunConfig& config, std::ostream& out, std::ostream& err) {
    std::optional<PanelDataset> d;
    if (const int code = load(config, d, err); code != exit_code::kOk) return code;
    ModelSpec m;
    if (const int code = model_spec(config, *d, m, err); code != exit_code::kOk) return code;

    SelectionOptions options;
    options.alpha = config.alpha;
    options.fit.covariance = config.covariance;
    SelectionOutcome s;
    std::optional<TestResult> honda;
    try {
        s = select_model(*d, m, options);
        honda = honda_test(fit_pooled(*d, m, options.fit), config.alpha);
    } catch (const Error& e) {
        err << "error: model selection failed: " << e.what() << '\n';
        return exit_code::kEstimation;
    }

    if (config.format == OutputFormat::Csv) {
        write_csv_row(out, {"test", "statistic", "distribution", "p_value", "reject"});
        auto row = [&](const TestResult& t) {
            write_csv_row(out, {t.name, fixed4(t.statistic), describe(t.distribution), fixed4(t.p_value),
                                t.reject ? "true" : "false"});
        };
        row(s.rfe);
        row(s.bplm);
        row(*honda);
        if (s.hausman) row(*s.hausman);
        write_csv_row(out, {"Decision", std::string(to_string(s.decision)), "", "", ""});
        return exit_code::kOk;
    }
    TextTable table;
    table.add_row({"Redundant Fixed Effect Test", "Breusch-Pagan LM Test", "Hausman Test", "Decision"});
    table.add_row({statistic_cell(s.rfe.statistic, s.rfe.p_value), statistic_cell(s.bplm.statistic, s.bplm.p_value),
                   s.hausman ? statistic_cell(s.hausman->statistic, s.hausman->p_value) : "-",
                   decision_sentence(s.decision)});
    table.render(out);
    out << "\nNotes: Redundant FE ~ " << describe(s.rfe.distribution) << "; BP LM ~ "
        << describe(s.bplm.distribution);
    if (s.hausman) out << "; Hausman ~ " << describe(s.hausman->distribution);
    out << ". Honda LM " << statistic_cell(honda->statistic, honda->p_value)
        << ". Probability values in parentheses; alpha = " << fixed4(config.alpha) << ".\n";
    return exit_code::kOk;
}

int cmd_regional(const RunConfig& config, std::ostream& out, std::ostream& err) {
    if (!config.regions) {
        err << "error: regional analysis requires --regions\n";
        return exit_code::kUsage;
    }
    std::optional<PanelDataset> d;
    if (const int code = load(config, d, err); code != exit_code::kOk) return code;
    ModelSpec m;
    if (const int code = model_spec(config, *d, m, err); code != exit_code::kOk) return code;

    RegionMap map;
    try {
        map = load_region_map(*config.regions);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.kind() == ErrorKind::UnknownRegion ? exit_code::kRegion : exit_code::kIngestion;
    }

    SelectionOptions options;
    options.alpha = config.alpha;
    options.fit.covariance = config.covariance;

    std::vector<std::string> regions = map.regions();
    std::vector<SelectionOutcome> outcomes;
    for (const auto& region : regions) {
        std::optional<PanelDataset> sub;
        try {
            sub = subset_region(*d, map, region);
        } catch (const Error& e) {
            err << "error: region " << region << ": " << e.what() << '\n';
            return exit_code::kRegion;
        }
        if (sub->n_entities() < 2) {
            err << "error: region " << region << " has " << sub->n_entities()
                << " entity; at least 2 are required\n";
            return exit_code::kRegion;
        }
        try {
            outcomes.push_back(select_model(*sub, m, options));
        } catch (const Error& e) {
            err << "error: region " << region << ": estimation failed: " << e.what() << '\n';
            return exit_code::kEstimation;
        }
    }

    std::vector<GridColumn> columns;
    for (std::size_t i = 0; i < regions.size(); ++i) {
        columns.push_back({regions[i], &outcomes[i].chosen, try_durbin_watson(outcomes[i].chosen)});
    }

    if (config.format == OutputFormat::Csv) {
        write_grid_csv(out, columns);
        for (std::size_t i = 0; i < regions.size(); ++i) {
            const auto& s = outcomes[i];
            auto row = [&](const std::string& label, const std::optional<TestResult>& t) {
                write_csv_row(out, {regions[i], label, t ? fixed4(t->statistic) : "", "",
                                    t ? fixed4(t->p_value) : "", ""});
            };
            row("RFE", s.rfe);
            row("BP LM", s.bplm);
            row("Hausman", s.hausman);
            write_csv_row(out, {regions[i], "Decision", std::string(to_string(s.decision)), "", "", ""});
        }
        return exit_code::kOk;
    }

    TextTable table;
    std::vector<std::string> header{""};
    for (const auto& r : regions) header.push_back(r);
    table.add_row(header);
    add_coefficient_rows(table, columns);
    add_summary_rows(table, columns, true);
    auto test_row = [&](const std::string& label, auto&& pick) {
        std::vector<std::string> row{label};
        for (const auto& s : outcomes) {
            const std::optional<TestResult> t = pick(s);
            row.push_back(t ? statistic_cell(t->statistic, t->p_value) : "-");
        }
        table.add_row(std::move(row));
    };
    test_row("RFE", [](const SelectionOutcome& s) { return std::optional<TestResult>(s.rfe); });
    test_row("BP LM", [](const SelectionOutcome& s) { return std::optional<TestResult>(s.bplm); });
    test_row("Hausman", [](const SelectionOutcome& s) { return s.hausman; });
    std::vector<std::string> decision{"Decision"};
    for (const auto& s : outcomes) decision.emplace_back(to_string(s.decision));
    table.add_row(std::move(decision));
    table.render(out);
    out << "\nNotes: Each region is estimated with its selected model: FE uses cross-section GLS weights, RE the "
           "Swamy-Arora random effects, Pooled plain least squares. The White ("
        << covariance_label(config.covariance) << ") standard errors are presented in parentheses, and "
        << kStarsNote << " RFE, BP LM and Hausman statistics show probability values in parentheses; alpha = "
        << fixed4(config.alpha) << ".\n";
    return exit_code::kOk;
}

int cmd_simulate(const RunConfig& config, const std::filesystem::path& spec_file, std::ostream& out,
                 std::ostream& err) {
    if (!std::filesystem::is_regular_file(spec_file)) {
        err << "error: spec file '" << spec_file.string() << "' does not exist\n";
        return exit_code::kSimulation;
    }
    ExperimentSpec spec;
    try {
        std::ifstream in(spec_file);
        spec = parse_experiment_spec(in);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::kSimulation;
    }
    if (config.seed) {
        spec.dgp.seed = *config.seed;
        spec.has_seed = true;
    }
    if (!spec.has_seed) {
        err << "error: simulation requires a seed (--seed or `seed =` in the spec file)\n";
        return exit_code::kUsage;
    }
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
        err << "error: --alpha must lie in (0, 1)\n";
        return exit_code::kUsage;
    }
    try {
        const McReport report = run_experiment(spec.dgp, spec.pipeline, spec.replications,
                                               ExperimentOptions{config.alpha, config.threads});
        err << "master seed: " << spec.dgp.seed << '\n';
        report.write_csv(out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::kSimulation;
    }
    return exit_code::kOk;
}

}  // namespace panelkit::cli
