// Writes the nine-region synthetic panel and its region map.
//
// Regions flagged `fixed` draw entity effects correlated with Growth, so the
// Hausman test should favour FE there; the others draw independent effects
// and should come out RE.

#include "panelkit/dataset.hpp"
#include "panelkit/synthlab.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace panelkit;

namespace {

struct RegionDesign {
    const char* code;
    const char* prefix;
    std::size_t entities;
    bool fixed;
    double efi;
};

constexpr RegionDesign kDesign[] = {
    {"EU", "EU", 42, true, 2.40},  {"AS", "AS", 26, true, 1.39},  {"AF", "AF", 45, true, 1.21},
    {"NA", "NA", 12, false, 1.91}, {"LA", "LA", 15, true, 1.39},  {"OC", "OC", 15, false, 0.79},
    {"FC", "FC", 23, false, 0.70}, {"SS", "SS", 40, true, 0.78},  {"PS", "PS", 15, false, 0.99},
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Write the synthetic regional panel fixture"};
    std::string dir = "tests/fixtures";
    std::uint64_t seed = 2017;
    app.add_option("--dir", dir)->capture_default_str();
    app.add_option("--seed", seed)->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    std::vector<std::string> entities;
    std::vector<std::string> variables;
    std::vector<std::vector<double>> columns;
    std::vector<int> periods;
    RegionMap map;

    for (std::size_t r = 0; r < std::size(kDesign); ++r) {
        const RegionDesign& region = kDesign[r];
        DgpSpec spec;
        spec.n_entities = region.entities;
        spec.n_periods = 22;
        spec.true_beta = {{"Growth", 0.10},   {"Import", -1.00},  {"Export", 0.40},
                          {"Inflation", -0.10}, {"Interest", 0.15}, {"EFI", region.efi}};
        spec.intercept = -5.0;
        spec.sigma_u = region.fixed ? 0.0 : 1.0;
        spec.sigma_e = 1.0;
        spec.fixed_effect_mode = region.fixed;
        spec.seed = seed * 100 + r;
        spec.dependent = "FDI";
        spec.entity_prefix = region.prefix;
        spec.first_period = 1995;
        const PanelDataset d = generate(spec);
        if (columns.empty()) {
            variables = d.variables();
            columns.resize(variables.size());
            periods = d.periods();
        }
        for (std::size_t v = 0; v < variables.size(); ++v) {
            const auto col = d.column(variables[v]);
            columns[v].insert(columns[v].end(), col.begin(), col.end());
        }
        for (const auto& e : d.entities()) {
            entities.push_back(e);
            map.add(e, region.code);
        }
    }

    const PanelDataset panel(std::move(entities), std::move(periods), std::move(variables), std::move(columns));
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(std::filesystem::path(dir) / "regional_panel.csv");
        write_long_csv(out, panel);
    }
    {
        std::ofstream out(std::filesystem::path(dir) / "regions.csv");
        out << "entity,region\n";
        for (const auto& [entity, region] : map.assignments()) out << entity << ',' << region << '\n';
    }
    std::cout << "wrote " << panel.n_entities() << " entities x " << panel.n_periods() << " periods to " << dir
              << '\n';
    return 0;
}
