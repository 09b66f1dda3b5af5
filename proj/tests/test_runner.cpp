#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "survscreen/report.hpp"
#include "survscreen/runner.hpp"

using namespace survscreen;

namespace {

GridConfig small_grid() {
    GridConfig config;
    config.sample_sizes = {100, 200};
    config.censoring_rates = {0.1, 0.5};
    config.correlations = {0.0};
    config.replicates = 40;
    config.master_seed = 321;
    config.workers = 2;
    return config;
}

}  // namespace

TEST_CASE("single-replicate scenario yields zero-one fractions", "[runner]") {
    ScenarioSpec spec;
    spec.n = 120;
    spec.replicates = 1;
    spec.master_seed = 17;
    const auto result = run_scenario(spec, {Model::gaussian}, false, 1);
    REQUIRE(result.reports.size() == 1);
    const auto& report = result.reports[0];
    CHECK((report.sensitivity == 0.0 || report.sensitivity == 1.0));
    CHECK((report.specificity == 0.0 || report.specificity == 1.0));
    CHECK((report.ranking_accuracy == 0.0 || report.ranking_accuracy == 1.0));
    CHECK(report.replicates == 1);
}

TEST_CASE("scenario reports are identical across worker counts", "[runner]") {
    ScenarioSpec spec;
    spec.n = 150;
    spec.censoring_rate = 0.3;
    spec.rho = 0.8;
    spec.replicates = 30;
    spec.master_seed = 99;
    const std::vector<Model> models{kAllModels.begin(), kAllModels.end()};
    const auto one = run_scenario(spec, models, true, 1);
    const auto four = run_scenario(spec, models, true, 4);
    const auto eight = run_scenario(spec, models, true, 8);
    const std::string a = format_report_csv(one.reports) + format_ph_csv(one.ph_rows);
    const std::string b = format_report_csv(four.reports) + format_ph_csv(four.ph_rows);
    const std::string c = format_report_csv(eight.reports) + format_ph_csv(eight.ph_rows);
    CHECK(a == b);
    CHECK(a == c);
}

TEST_CASE("grid cardinality: sizes x censorings x correlations x models", "[runner]") {
    GridConfig config = small_grid();
    const GridResult result = run_grid(config);
    CHECK(result.rows.size() == 2 * 2 * 1 * 4);
    // scenario ids assigned by lexicographic grid position
    CHECK(result.rows[0].spec.scenario_id == 0);
    CHECK(result.rows[4].spec.scenario_id == 1);
    CHECK(result.rows.back().spec.scenario_id == 3);
}

TEST_CASE("rerunning an identical config reproduces the report bytes", "[runner]") {
    GridConfig config = small_grid();
    config.replicates = 25;
    const GridResult first = run_grid(config);
    const GridResult second = run_grid(config);
    CHECK(first.report_text == second.report_text);
    config.workers = 3;
    const GridResult third = run_grid(config);
    CHECK(first.report_text == third.report_text);
}

TEST_CASE("markdown and csv reports encode identical numbers", "[runner]") {
    GridConfig config = small_grid();
    config.sample_sizes = {120};
    config.replicates = 30;
    const GridResult result = run_grid(config);
    const std::string csv = format_report_csv(result.rows);
    const std::string md = format_report_markdown(result.rows);
    // pull the three fraction columns out of both formats and compare
    std::istringstream csv_in(csv);
    std::string line;
    std::getline(csv_in, line);  // header
    std::vector<std::string> csv_fractions;
    while (std::getline(csv_in, line)) {
        std::stringstream ss(line);
        std::string field;
        int idx = 0;
        while (std::getline(ss, field, ',')) {
            if (idx >= 4 && idx <= 6) csv_fractions.push_back(field);
            ++idx;
        }
    }
    std::istringstream md_in(md);
    std::getline(md_in, line);
    std::getline(md_in, line);  // header + separator
    std::vector<std::string> md_fractions;
    while (std::getline(md_in, line)) {
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> cells;
        while (std::getline(ss, field, '|')) {
            const auto begin = field.find_first_not_of(' ');
            if (begin == std::string::npos) continue;
            const auto end = field.find_last_not_of(' ');
            cells.push_back(field.substr(begin, end - begin + 1));
        }
        REQUIRE(cells.size() == 10);
        for (int idx = 4; idx <= 6; ++idx) md_fractions.push_back(cells[idx]);
    }
    REQUIRE(!csv_fractions.empty());
    CHECK(csv_fractions == md_fractions);
}

TEST_CASE("grid writes the report file and fails fast on bad paths", "[runner]") {
    GridConfig config = small_grid();
    config.sample_sizes = {100};
    config.censoring_rates = {0.1};
    config.replicates = 10;
    config.output_path = "test_report_out.csv";
    const GridResult result = run_grid(config);
    std::ifstream in(config.output_path);
    REQUIRE(in.good());
    std::stringstream content;
    content << in.rdbuf();
    CHECK(content.str() == result.report_text);
    std::remove(config.output_path.c_str());

    config.output_path = "no_such_directory/report.csv";
    CHECK_THROWS_AS(run_grid(config), std::runtime_error);
}

TEST_CASE("ph rows appear only when requested and count failures", "[runner]") {
    GridConfig config = small_grid();
    config.sample_sizes = {150};
    config.censoring_rates = {0.1};
    config.replicates = 15;
    const GridResult without = run_grid(config);
    CHECK(without.ph_rows.empty());
    config.with_ph_test = true;
    config.output_path = "test_ph_report.csv";
    const GridResult with_ph = run_grid(config);
    CHECK(with_ph.ph_rows.size() == 10);
    for (const auto& row : with_ph.ph_rows) {
        CHECK(row.true_effect == static_cast<double>(row.feature_id));
        CHECK(row.mean_chisq >= 0.0);
    }
    std::ifstream ph_in("ph_diagnostics.csv");
    REQUIRE(ph_in.good());
    std::remove("test_ph_report.csv");
    std::remove("ph_diagnostics.csv");
}

TEST_CASE("config files parse, apply, and respect CLI overrides", "[runner]") {
    std::istringstream in(
        "# comment line\n"
        "sizes = 500, 1000\n"
        "censoring = 0.1,0.5\n"
        "rho = 0.8\n"
        "replicates = 77\n"
        "seed = 4242\n"
        "models = gaussian, univariate_cox\n"
        "with-ph-test = true\n"
        "format = markdown\n"
        "workers = 3\n"
        "output = out.csv\n");
    const auto entries = parse_config_entries(in);
    GridConfig config;
    apply_config_entries(config, entries);
    CHECK(config.sample_sizes == std::vector<std::size_t>{500, 1000});
    CHECK(config.censoring_rates == std::vector<double>{0.1, 0.5});
    CHECK(config.correlations == std::vector<double>{0.8});
    CHECK(config.replicates == 77);
    CHECK(config.master_seed == 4242);
    REQUIRE(config.models.size() == 2);
    CHECK(config.models[0] == Model::gaussian);
    CHECK(config.models[1] == Model::univariate_cox);
    CHECK(config.with_ph_test);
    CHECK(config.format == ReportFormat::markdown);
    CHECK(config.workers == 3);
    CHECK(config.output_path == "out.csv");

    // a key pinned by the command line is not overwritten
    GridConfig overridden;
    overridden.replicates = 5;
    apply_config_entries(overridden, entries, {"replicates"});
    CHECK(overridden.replicates == 5);
    CHECK(overridden.master_seed == 4242);
}

TEST_CASE("config parsing rejects unknown keys and bad values", "[runner]") {
    GridConfig config;
    std::istringstream unknown("budget = 12\n");
    CHECK_THROWS_WITH(apply_config_entries(config, parse_config_entries(unknown)),
                      Catch::Matchers::ContainsSubstring("unknown config key"));
    std::istringstream bad_model("models = ridge\n");
    CHECK_THROWS_WITH(apply_config_entries(config, parse_config_entries(bad_model)),
                      Catch::Matchers::ContainsSubstring("unknown model"));
    std::istringstream no_equals("sizes 500\n");
    CHECK_THROWS(parse_config_entries(no_equals));
    std::istringstream bad_format("format = yaml\n");
    CHECK_THROWS(apply_config_entries(config, parse_config_entries(bad_format)));
}

TEST_CASE("replicate totals are preserved regardless of fit failures", "[runner]") {
    ScenarioSpec spec;
    spec.n = 100;
    spec.censoring_rate = 0.5;
    spec.rho = 0.8;
    spec.replicates = 20;
    spec.master_seed = 5;
    const std::vector<Model> models{kAllModels.begin(), kAllModels.end()};
    const auto result = run_scenario(spec, models, false, 2);
    for (const auto& report : result.reports) CHECK(report.replicates == 20);
}
