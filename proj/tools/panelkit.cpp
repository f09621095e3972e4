// panelkit command-line front end.

#include "panelkit/commands.hpp"
#include "panelkit/error.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace panelkit;

int main(int argc, char** argv) {
    CLI::App app{"panelkit: panel data estimation, specification tests and panel unit-root tests"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Flat key = value file; command-line flags override it");

    cli::RunConfig config;
    std::string input;
    std::string regions;
    std::string format = "table";
    std::string covariance = "hc0";
    std::vector<std::string> vars;
    std::uint64_t seed = 0;
    std::size_t max_lag = 0;

    app.add_option("--input", input, "Long-format panel CSV");
    app.add_option("--regions", regions, "Region map CSV with header entity,region");
    app.add_option("--entity-col", config.schema.entity_column, "Entity column name")->capture_default_str();
    app.add_option("--year-col", config.schema.year_column, "Period column name")->capture_default_str();
    auto* vars_opt = app.add_option("--vars", vars, "Comma-separated variables to load (default: all)")
                         ->delimiter(',');
    app.add_option("--dependent", config.dependent, "Dependent variable (default: FDI, else the first)");
    app.add_option("--regressors", config.regressors, "Comma-separated regressors (default: the rest)")
        ->delimiter(',');
    app.add_flag("--log", config.log_transform, "Apply ln(max(x, floor)) to every variable");
    app.add_option("--floor", config.floor, "Log transform floor")->capture_default_str();
    app.add_option("--alpha", config.alpha, "Significance level")->capture_default_str();
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"table", "csv"}))->capture_default_str();
    auto* seed_opt = app.add_option("--seed", seed, "Master seed for simulate");
    app.add_flag("--demean", config.demean, "Cross-sectionally demean before the unit-root test");
    auto* lag_opt = app.add_option("--max-lag", max_lag, "Maximum ADF lag (default: floor(12 (T/100)^0.25))");
    app.add_option("--covariance", covariance, "White covariance variant")
        ->check(CLI::IsMember({"hc0", "hc1"}))
        ->capture_default_str();
    app.add_option("--threads", config.threads, "Worker threads for simulate")->check(CLI::PositiveNumber);

    auto* describe = app.add_subcommand("describe", "Descriptive statistics per variable")->fallthrough();
    auto* unitroot = app.add_subcommand("unitroot", "IPS panel unit-root test per variable")->fallthrough();
    auto* fit = app.add_subcommand("fit", "Estimate pooled, FE and RE models")->fallthrough();
    std::string model = "all";
    fit->add_option("--model", model, "pooled | fe-lsdv | fe-gls | re | all")->capture_default_str();
    auto* select = app.add_subcommand("select", "RFE, BP LM and Hausman tests with model decision")->fallthrough();
    auto* regional = app.add_subcommand("regional", "Model selection and estimation per region")->fallthrough();
    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo experiment from a spec file")->fallthrough();
    std::string spec_file;
    std::string output;
    simulate->add_option("--spec", spec_file, "Experiment spec file")->required();
    simulate->add_option("--output", output, "Write the report here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? cli::exit_code::kOk : cli::exit_code::kUsage;
    }

    config.input = input;
    if (!regions.empty()) config.regions = regions;
    config.format = format == "csv" ? cli::OutputFormat::Csv : cli::OutputFormat::Table;
    config.covariance = covariance == "hc1" ? CovarianceType::HC1 : CovarianceType::HC0;
    if (*seed_opt) config.seed = seed;
    if (*lag_opt) config.max_lag = max_lag;
    if (*vars_opt) {
        for (const auto& v : vars) {
            if (!v.empty()) config.schema.variables.push_back(v);
        }
        if (config.schema.variables.empty()) {
            std::cerr << "error: --vars names no variables\n";
            return cli::exit_code::kUsage;
        }
    }

    if (*describe) return cli::cmd_describe(config, std::cout, std::cerr);
    if (*unitroot) return cli::cmd_unitroot(config, std::cout, std::cerr);
    if (*select) return cli::cmd_select(config, std::cout, std::cerr);
    if (*regional) return cli::cmd_regional(config, std::cout, std::cerr);
    if (*fit) {
        std::vector<EffectKind> models;
        try {
            models = cli::parse_models(model);
        } catch (const Error& e) {
            std::cerr << "error: " << e.what() << '\n';
            return cli::exit_code::kUsage;
        }
        return cli::cmd_fit(config, models, std::cout, std::cerr);
    }
    if (*simulate) {
        if (output.empty()) return cli::cmd_simulate(config, spec_file, std::cout, std::cerr);
        std::ofstream file(output);
        if (!file) {
            std::cerr << "error: cannot write '" << output << "'\n";
            return cli::exit_code::kUsage;
        }
        return cli::cmd_simulate(config, spec_file, file, std::cerr);
    }
    return cli::exit_code::kUsage;
}
