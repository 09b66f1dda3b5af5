#pragma once

// Scenario-grid orchestration. Replicates are independent work units: each
// one derives its own random stream, so any worker count and any execution
// order produce identical reports. Per-replicate results land in
// index-addressed slots and are reduced sequentially afterwards.

#include <array>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "survscreen/cox.hpp"
#include "survscreen/datagen.hpp"
#include "survscreen/linear_models.hpp"
#include "survscreen/parallel.hpp"
#include "survscreen/ph_test.hpp"
#include "survscreen/report.hpp"
#include "survscreen/screening.hpp"

namespace survscreen {

struct GridConfig {
    std::vector<std::size_t> sample_sizes = {500, 1000, 2000, 5000};
    std::vector<double> censoring_rates = {0.1, 0.5};
    std::vector<double> correlations = {0.0, 0.8};
    std::size_t replicates = 1000;
    std::uint64_t master_seed = 1;
    std::vector<Model> models{kAllModels.begin(), kAllModels.end()};
    bool with_ph_test = false;
    std::string output_path;  // empty: caller decides where the text goes
    ReportFormat format = ReportFormat::csv;
    unsigned workers = 0;  // 0 = hardware concurrency

    void validate() const {
        if (sample_sizes.empty() || censoring_rates.empty() || correlations.empty())
            throw std::invalid_argument("GridConfig: grid lists must be nonempty");
        if (replicates < 1) throw std::invalid_argument("GridConfig: replicates must be >= 1");
        if (models.empty()) throw std::invalid_argument("GridConfig: no models requested");
        for (std::size_t a = 0; a < models.size(); ++a)
            for (std::size_t b = a + 1; b < models.size(); ++b)
                if (models[a] == models[b])
                    throw std::invalid_argument("GridConfig: duplicate model");
        for (const std::size_t n : sample_sizes)
            if (n < 50) throw std::invalid_argument("GridConfig: sample sizes must be >= 50");
        for (const double c : censoring_rates)
            if (!(c >= 0.0 && c < 1.0))
                throw std::invalid_argument("GridConfig: censoring rates must be in [0, 1)");
        for (const double r : correlations)
            if (!(r >= 0.0 && r < 1.0))
                throw std::invalid_argument("GridConfig: correlations must be in [0, 1)");
    }
};

namespace detail {

// Applies one screening model to one dataset. Fit errors are absorbed into
// "never selected" entries plus the nonconverged counter; the replicate
// always produces a scoreable outcome.
inline ScreeningOutcome screen_dataset(const SimDataset& ds, Model model) {
    ScreeningOutcome o;
    o.model = model;
    o.observed_true_ids = ds.observed_true_ids;
    for (std::size_t k = 0; k < kScreenedFeatures; ++k) o.p_values[k] = 1.0;

    auto record = [&](std::size_t k, const ScreenResult& r) {
        o.p_values[k] = r.p_value;
        o.statistics[k] = r.statistic;
        o.has_statistic[k] = true;
        o.selected[k] = r.p_value < 0.05;
        if (!r.converged) ++o.nonconverged;
    };
    auto record_error = [&](std::size_t k) {
        o.p_values[k] = 1.0;
        o.statistics[k] = 0.0;
        o.has_statistic[k] = true;
        o.selected[k] = false;
        ++o.nonconverged;
    };

    switch (model) {
        case Model::gaussian:
            for (std::size_t k = 0; k < kScreenedFeatures; ++k) {
                try {
                    record(k, gaussian_screen(ds, k));
                } catch (const std::exception&) {
                    record_error(k);
                }
            }
            break;
        case Model::logistic:
            for (std::size_t k = 0; k < kScreenedFeatures; ++k) {
                try {
                    record(k, logistic_screen(ds, k));
                } catch (const std::exception&) {
                    record_error(k);
                }
            }
            break;
        case Model::univariate_cox:
            for (std::size_t k = 0; k < kScreenedFeatures; ++k) {
                try {
                    record(k, univariate_cox_screen(ds, k));
                } catch (const std::exception&) {
                    record_error(k);
                }
            }
            break;
        case Model::multivariate_cox: {
            // Ideal model: joint fit of the five observed true features for
            // sensitivity and ranking. The model never sees noise features;
            // its negativity check scores each noise column with a univariate
            // null fit. (Appending the noise columns to the joint fit instead
            // inflates their Wald tests well past the nominal 5% here: the
            // fitted linear predictor spans tens of standard deviations and
            // degenerates the late risk sets.)
            try {
                const CoxFit fit = multivariate_cox_fit(ds, {0, 1, 2, 3, 4});
                if (fit.converged) {
                    for (std::size_t j = 0; j < kObservedTrue; ++j) {
                        o.p_values[j] = fit.p_values[j];
                        o.statistics[j] = std::sqrt(fit.statistics[j]);
                        o.has_statistic[j] = true;
                        o.selected[j] = fit.p_values[j] < 0.05;
                    }
                } else {
                    ++o.nonconverged;
                }
            } catch (const std::exception&) {
                ++o.nonconverged;
            }
            for (std::size_t j = kObservedTrue; j < kScreenedFeatures; ++j) {
                try {
                    const ScreenResult r = univariate_cox_screen(ds, j);
                    o.p_values[j] = r.p_value;
                    o.selected[j] = r.p_value < 0.05;
                    if (!r.converged) ++o.nonconverged;
                } catch (const std::exception&) {
                    ++o.nonconverged;
                }
            }
            break;
        }
    }
    return o;
}

struct PhReplicateRecord {
    std::array<double, 10> chisq{};
    std::array<std::int8_t, 10> status{};  // 1 rejected, 0 retained, -1 failed
};

// Univariate Cox fit + PH test per true feature, on the full pre-masking
// truth. Failures (non-convergence, test breakdown) are recorded, never
// raised.
inline PhReplicateRecord compute_ph_record(const FullReplicate& full) {
    PhReplicateRecord rec;
    const std::size_t n = full.true_features.rows();
    Matrix column(n, 1);
    for (std::size_t f = 0; f < 10; ++f) {
        for (std::size_t i = 0; i < n; ++i) column(i, 0) = full.true_features(i, f);
        try {
            const CoxFit fit = fit_cox(column, full.dataset.time, full.dataset.event);
            const PhTestResult test =
                ph_test(fit, column, full.dataset.time, full.dataset.event, TimeTransform::km);
            rec.chisq[f] = test.per_covariate_chisq[0];
            rec.status[f] = test.per_covariate_p[0] < 0.05 ? 1 : 0;
        } catch (const std::exception&) {
            rec.chisq[f] = 0.0;
            rec.status[f] = -1;
        }
    }
    return rec;
}

}  // namespace detail

struct ScenarioRunResult {
    std::vector<ScenarioReport> reports;  // one per requested model
    std::vector<PhFeatureRow> ph_rows;    // ten rows when the PH test ran
    std::size_t ph_failures = 0;
};

// Runs every replicate of one scenario: generate once, apply every requested
// model to the same dataset, score, reduce. Deterministic for any worker
// count.
inline ScenarioRunResult run_scenario(const ScenarioSpec& spec, const std::vector<Model>& models,
                                      bool with_ph_test = false, unsigned workers = 0) {
    spec.validate();
    if (models.empty()) throw std::invalid_argument("run_scenario: no models requested");
    const std::size_t replicates = spec.replicates;

    std::vector<std::vector<ScreeningOutcome>> outcomes(models.size());
    for (auto& slot : outcomes) slot.resize(replicates);
    std::vector<detail::PhReplicateRecord> ph_records(with_ph_test ? replicates : 0);

    parallel_for(replicates, workers, [&](std::size_t r) {
        const FullReplicate full = generate_dataset_with_truth(spec, r);
        for (std::size_t m = 0; m < models.size(); ++m)
            outcomes[m][r] = detail::screen_dataset(full.dataset, models[m]);
        if (with_ph_test) ph_records[r] = detail::compute_ph_record(full);
    });

    ScenarioRunResult result;
    if (with_ph_test) {
        for (std::size_t f = 0; f < 10; ++f) {
            double chisq_sum = 0.0;
            std::size_t rejected = 0, failed = 0;
            for (std::size_t r = 0; r < replicates; ++r) {  // fixed order
                if (ph_records[r].status[f] < 0) {
                    ++failed;
                    continue;
                }
                chisq_sum += ph_records[r].chisq[f];
                rejected += ph_records[r].status[f];
            }
            const std::size_t usable = replicates - failed;
            PhFeatureRow row;
            row.scenario_id = spec.scenario_id;
            row.feature_id = static_cast<int>(f + 1);
            row.true_effect = spec.effects[f];
            row.mean_chisq = usable > 0 ? chisq_sum / static_cast<double>(usable) : 0.0;
            row.rejection_rate =
                usable > 0 ? static_cast<double>(rejected) / static_cast<double>(usable) : 0.0;
            row.failure_count = failed;
            result.ph_rows.push_back(row);
            result.ph_failures += failed;
        }
    }
    for (std::size_t m = 0; m < models.size(); ++m) {
        ScenarioReport report = aggregate(std::span<const ScreeningOutcome>(outcomes[m]), spec,
                                          models[m]);
        report.ph_failures = result.ph_failures;
        result.reports.push_back(std::move(report));
    }
    return result;
}

struct GridResult {
    std::vector<ScenarioReport> rows;
    std::vector<PhFeatureRow> ph_rows;
    std::string report_text;  // formatted per config.format
    std::string ph_text;      // PH diagnostics CSV when enabled
};

inline std::string ph_output_path(const GridConfig& config) {
    if (config.output_path.empty()) return "ph_diagnostics.csv";
    const auto slash = config.output_path.find_last_of('/');
    if (slash == std::string::npos) return "ph_diagnostics.csv";
    return config.output_path.substr(0, slash + 1) + "ph_diagnostics.csv";
}

// Iterates the whole scenario grid in lexicographic order (sizes, then
// censoring rates, then correlations), assigning scenario ids by position.
// Output sinks are opened before any computation so a bad path fails fast.
inline GridResult run_grid(const GridConfig& config, std::ostream* progress = nullptr) {
    config.validate();

    std::optional<std::ofstream> out;
    if (!config.output_path.empty()) {
        out.emplace(config.output_path);
        if (!*out)
            throw std::runtime_error("cannot open output path " + config.output_path);
    }
    std::optional<std::ofstream> ph_out;
    if (config.with_ph_test) {
        const std::string path = ph_output_path(config);
        ph_out.emplace(path);
        if (!*ph_out) throw std::runtime_error("cannot open output path " + path);
    }

    GridResult result;
    const std::size_t total = config.sample_sizes.size() * config.censoring_rates.size() *
                              config.correlations.size();
    std::uint64_t scenario_id = 0;
    for (const std::size_t n : config.sample_sizes) {
        for (const double censoring : config.censoring_rates) {
            for (const double rho : config.correlations) {
                ScenarioSpec spec;
                spec.n = n;
                spec.censoring_rate = censoring;
                spec.rho = rho;
                spec.replicates = config.replicates;
                spec.master_seed = config.master_seed;
                spec.scenario_id = scenario_id;

                const auto start = std::chrono::steady_clock::now();
                ScenarioRunResult scenario =
                    run_scenario(spec, config.models, config.with_ph_test, config.workers);
                const auto elapsed = std::chrono::duration<double>(
                                         std::chrono::steady_clock::now() - start)
                                         .count();
                if (progress)
                    *progress << "scenario " << (scenario_id + 1) << "/" << total << " (n=" << n
                              << ", censoring=" << censoring << ", rho=" << rho << ") done in "
                              << elapsed << "s\n";
                for (auto& row : scenario.reports) result.rows.push_back(std::move(row));
                for (auto& row : scenario.ph_rows) result.ph_rows.push_back(row);
                ++scenario_id;
            }
        }
    }

    result.report_text = format_report(result.rows, config.format);
    if (out) *out << result.report_text;
    if (config.with_ph_test) {
        result.ph_text = format_ph_csv(result.ph_rows);
        if (ph_out) *ph_out << result.ph_text;
    }
    return result;
}

// ---- flat key=value config files ------------------------------------------
// Every key mirrors a CLI flag; list values are comma separated. Values given
// on the command line take precedence over the file.

namespace detail {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    std::string::size_type start = 0;
    while (true) {
        const auto comma = value.find(',', start);
        const std::string item =
            trim(comma == std::string::npos ? value.substr(start)
                                            : value.substr(start, comma - start));
        if (!item.empty()) items.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return items;
}

}  // namespace detail

inline std::map<std::string, std::string> parse_config_entries(std::istream& in) {
    std::map<std::string, std::string> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string stripped = detail::trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": expected key = value");
        const std::string key = detail::trim(stripped.substr(0, eq));
        const std::string value = detail::trim(stripped.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config line " + std::to_string(line_no) + ": empty key");
        entries[key] = value;
    }
    return entries;
}

// Applies file entries to a config. Keys already pinned by the command line
// are listed in `overridden` and skipped.
inline void apply_config_entries(GridConfig& config,
                                 const std::map<std::string, std::string>& entries,
                                 const std::vector<std::string>& overridden = {}) {
    auto is_overridden = [&](const std::string& key) {
        for (const auto& k : overridden)
            if (k == key) return true;
        return false;
    };
    for (const auto& [key, value] : entries) {
        if (is_overridden(key)) continue;
        if (key == "sizes") {
            config.sample_sizes.clear();
            for (const auto& item : detail::split_list(value))
                config.sample_sizes.push_back(std::stoull(item));
        } else if (key == "censoring") {
            config.censoring_rates.clear();
            for (const auto& item : detail::split_list(value))
                config.censoring_rates.push_back(std::stod(item));
        } else if (key == "rho") {
            config.correlations.clear();
            for (const auto& item : detail::split_list(value))
                config.correlations.push_back(std::stod(item));
        } else if (key == "replicates") {
            config.replicates = std::stoull(value);
        } else if (key == "seed") {
            config.master_seed = std::stoull(value);
        } else if (key == "models") {
            config.models.clear();
            for (const auto& item : detail::split_list(value)) {
                const auto model = parse_model(item);
                if (!model) throw std::runtime_error("unknown model '" + item + "'");
                config.models.push_back(*model);
            }
        } else if (key == "with-ph-test") {
            if (value == "true" || value == "1")
                config.with_ph_test = true;
            else if (value == "false" || value == "0")
                config.with_ph_test = false;
            else
                throw std::runtime_error("with-ph-test must be true/false");
        } else if (key == "output") {
            config.output_path = value;
        } else if (key == "format") {
            if (value == "csv")
                config.format = ReportFormat::csv;
            else if (value == "markdown")
                config.format = ReportFormat::markdown;
            else
                throw std::runtime_error("format must be csv or markdown");
        } else if (key == "workers") {
            config.workers = static_cast<unsigned>(std::stoul(value));
        } else {
            throw std::runtime_error("unknown config key '" + key + "'");
        }
    }
}

}  // namespace survscreen
