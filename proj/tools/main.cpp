// survscreen command line: scenario-grid simulation, dataset generation, and
// the recommended screening pipeline for external CSV datasets.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "survscreen/dataset_io.hpp"
#include "survscreen/pipeline.hpp"
#include "survscreen/runner.hpp"

namespace {

int run_simulate(const survscreen::GridConfig& config) {
    const survscreen::GridResult result = survscreen::run_grid(config, &std::cerr);
    if (config.output_path.empty()) {
        std::cout << result.report_text;
        if (config.with_ph_test)
            std::cerr << "PH diagnostics written to "
                      << survscreen::ph_output_path(config) << "\n";
    } else {
        std::cerr << "report written to " << config.output_path << "\n";
        if (config.with_ph_test)
            std::cerr << "PH diagnostics written to "
                      << survscreen::ph_output_path(config) << "\n";
    }
    return 0;
}

int run_screen(const std::string& input, bool correlated) {
    const survscreen::Dataset data = survscreen::ingest_csv_file(input);
    const survscreen::PipelineResult result = survscreen::recommended_pipeline(data, correlated);

    auto name = [&](std::size_t k) { return data.feature_names[k]; };
    auto print_ranking = [&](const std::vector<std::size_t>& ranking) {
        for (std::size_t i = 0; i < ranking.size(); ++i)
            std::cout << (i ? " > " : "") << name(ranking[i]);
        std::cout << "\n";
    };

    std::cout << "subjects: " << data.n() << ", features screened: " << data.n_features()
              << "\n";
    std::cout << "selected (gaussian screen, p < 0.05):";
    if (result.selected_features.empty()) {
        std::cout << " none\n";
        return 0;
    }
    for (const std::size_t k : result.selected_features) std::cout << " " << name(k);
    std::cout << "\n";

    std::cout << "gaussian ranking"
              << (result.cox_ranking_primary ? " (screening order)" : " (primary)") << ": ";
    print_ranking(result.gaussian_ranking);

    if (result.cox_refit_error) {
        std::cout << "cox refit unavailable: " << *result.cox_refit_error << "\n";
    } else {
        std::cout << "cox refit ranking"
                  << (result.cox_ranking_primary ? " (primary)" : " (sensitivity analysis)")
                  << ": ";
        print_ranking(result.cox_refit_ranking);
    }
    return 0;
}

int run_generate(std::size_t n, double censoring, double rho, std::uint64_t seed,
                 std::uint64_t scenario_id, std::size_t replicate, const std::string& output) {
    survscreen::ScenarioSpec spec;
    spec.n = n;
    spec.censoring_rate = censoring;
    spec.rho = rho;
    spec.master_seed = seed;
    spec.scenario_id = scenario_id;
    spec.replicates = replicate + 1;
    const survscreen::SimDataset ds = survscreen::generate_dataset(spec, replicate);
    survscreen::write_dataset_files(ds, output, seed, scenario_id, replicate);
    std::cerr << "dataset written to " << output << " (+ " << output << ".meta.json)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo benchmark of feature-screening models for time-to-event outcomes"};
    app.require_subcommand(1);

    // simulate ---------------------------------------------------------------
    auto* simulate = app.add_subcommand("simulate", "run a scenario grid and emit the report");
    std::string config_path;
    std::vector<std::size_t> sizes;
    std::vector<double> censoring, rho;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> model_names;
    bool with_ph_test = false;
    std::string output_path, format_name;
    unsigned workers = 0;

    simulate->add_option("--config", config_path, "flat key=value config file");
    simulate->add_option("--sizes", sizes, "sample sizes")->delimiter(',');
    simulate->add_option("--censoring", censoring, "censoring rates")->delimiter(',');
    simulate->add_option("--rho", rho, "feature correlations")->delimiter(',');
    simulate->add_option("--replicates", replicates, "replicates per scenario");
    simulate->add_option("--seed", seed, "master seed");
    simulate->add_option("--models", model_names,
                         "models: multivariate_cox,univariate_cox,logistic,gaussian")
        ->delimiter(',');
    simulate->add_flag("--with-ph-test", with_ph_test, "run PH diagnostics per scenario");
    simulate->add_option("--output", output_path, "report file (stdout when omitted)");
    simulate->add_option("--format", format_name, "csv or markdown")
        ->check(CLI::IsMember({"csv", "markdown"}));
    simulate->add_option("--workers", workers, "worker threads (0 = hardware)");

    // screen -----------------------------------------------------------------
    auto* screen = app.add_subcommand("screen", "recommended screening pipeline on a CSV dataset");
    std::string input_path;
    bool correlated = false;
    screen->add_option("--input", input_path, "CSV with header time,event,<features...>")
        ->required();
    screen->add_flag("--correlated", correlated,
                     "features are highly correlated; the Cox refit ranking is primary");

    // generate ---------------------------------------------------------------
    auto* generate = app.add_subcommand("generate", "write one simulated dataset as CSV");
    std::size_t gen_n = 1000;
    double gen_censoring = 0.1, gen_rho = 0.0;
    std::uint64_t gen_seed = 1, gen_scenario = 0;
    std::size_t gen_replicate = 0;
    std::string gen_output;
    generate->add_option("--n", gen_n, "sample size");
    generate->add_option("--censoring", gen_censoring, "censoring rate");
    generate->add_option("--rho", gen_rho, "feature correlation");
    generate->add_option("--seed", gen_seed, "master seed");
    generate->add_option("--scenario-id", gen_scenario, "scenario id for stream derivation");
    generate->add_option("--replicate", gen_replicate, "replicate index");
    generate->add_option("--output", gen_output, "output CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            survscreen::GridConfig config;
            std::vector<std::string> overridden;
            auto mark = [&](const char* flag, const char* key) {
                if (simulate->count(flag) > 0) overridden.push_back(key);
            };
            mark("--sizes", "sizes");
            mark("--censoring", "censoring");
            mark("--rho", "rho");
            mark("--replicates", "replicates");
            mark("--seed", "seed");
            mark("--models", "models");
            mark("--with-ph-test", "with-ph-test");
            mark("--output", "output");
            mark("--format", "format");
            mark("--workers", "workers");

            if (!config_path.empty()) {
                std::ifstream in(config_path);
                if (!in) throw std::runtime_error("cannot open config file " + config_path);
                survscreen::apply_config_entries(config, survscreen::parse_config_entries(in),
                                                 overridden);
            }
            if (simulate->count("--sizes")) config.sample_sizes = sizes;
            if (simulate->count("--censoring")) config.censoring_rates = censoring;
            if (simulate->count("--rho")) config.correlations = rho;
            if (simulate->count("--replicates")) config.replicates = replicates;
            if (simulate->count("--seed")) config.master_seed = seed;
            if (simulate->count("--models")) {
                config.models.clear();
                for (const auto& name : model_names) {
                    const auto model = survscreen::parse_model(name);
                    if (!model) throw std::runtime_error("unknown model '" + name + "'");
                    config.models.push_back(*model);
                }
            }
            if (simulate->count("--with-ph-test")) config.with_ph_test = with_ph_test;
            if (simulate->count("--output")) config.output_path = output_path;
            if (simulate->count("--format"))
                config.format = format_name == "markdown" ? survscreen::ReportFormat::markdown
                                                          : survscreen::ReportFormat::csv;
            if (simulate->count("--workers")) config.workers = workers;
            return run_simulate(config);
        }
        if (screen->parsed()) return run_screen(input_path, correlated);
        if (generate->parsed())
            return run_generate(gen_n, gen_censoring, gen_rho, gen_seed, gen_scenario,
                                gen_replicate, gen_output);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
