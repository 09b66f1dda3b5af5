#pragma once

// Report emission. CSV and markdown encode the same numbers with the same
// formatting so cross-format comparisons are exact; fractions carry four
// decimal places.

#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "survscreen/screening.hpp"

namespace survscreen {

enum class ReportFormat { csv, markdown };

struct PhFeatureRow {
    std::uint64_t scenario_id = 0;
    int feature_id = 0;  // 1-based true feature id
    double true_effect = 0.0;
    double mean_chisq = 0.0;
    double rejection_rate = 0.0;
    std::size_t failure_count = 0;
};

namespace detail {

inline std::string format_fraction(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

inline std::string format_compact(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace detail

inline const char* report_csv_header() {
    return "sample_size,censoring_rate,correlation,model,sensitivity,specificity,"
           "ranking_accuracy,replicates,nonconverged,ph_failures";
}

inline std::string format_report_csv(std::span<const ScenarioReport> rows) {
    std::string out = report_csv_header();
    out += "\n";
    for (const auto& r : rows) {
        out += std::to_string(r.spec.n);
        out += ",";
        out += detail::format_compact(r.spec.censoring_rate);
        out += ",";
        out += detail::format_compact(r.spec.rho);
        out += ",";
        out += model_name(r.model);
        out += ",";
        out += detail::format_fraction(r.sensitivity);
        out += ",";
        out += detail::format_fraction(r.specificity);
        out += ",";
        out += detail::format_fraction(r.ranking_accuracy);
        out += ",";
        out += std::to_string(r.replicates);
        out += ",";
        out += std::to_string(r.nonconverged_total);
        out += ",";
        out += std::to_string(r.ph_failures);
        out += "\n";
    }
    return out;
}

inline std::string format_report_markdown(std::span<const ScenarioReport> rows) {
    std::string out =
        "| Sample Size | Censoring Rate | True Feature Correlation | Model | Sensitivity | "
        "Specificity | Ranking Accuracy | Replicates | Nonconverged | PH Failures |\n"
        "|---:|---:|---:|:---|---:|---:|---:|---:|---:|---:|\n";
    for (const auto& r : rows) {
        out += "| " + std::to_string(r.spec.n);
        out += " | " + detail::format_compact(r.spec.censoring_rate);
        out += " | " + detail::format_compact(r.spec.rho);
        out += " | " + std::string(model_name(r.model));
        out += " | " + detail::format_fraction(r.sensitivity);
        out += " | " + detail::format_fraction(r.specificity);
        out += " | " + detail::format_fraction(r.ranking_accuracy);
        out += " | " + std::to_string(r.replicates);
        out += " | " + std::to_string(r.nonconverged_total);
        out += " | " + std::to_string(r.ph_failures);
        out += " |\n";
    }
    return out;
}

inline std::string format_report(std::span<const ScenarioReport> rows, ReportFormat format) {
    return format == ReportFormat::csv ? format_report_csv(rows) : format_report_markdown(rows);
}

inline std::string format_ph_csv(std::span<const PhFeatureRow> rows) {
    std::string out = "scenario_id,feature_id,true_effect,mean_chisq,rejection_rate,failure_count\n";
    for (const auto& r : rows) {
        char buf[64];
        out += std::to_string(r.scenario_id);
        out += ",";
        out += std::to_string(r.feature_id);
        out += ",";
        out += detail::format_compact(r.true_effect);
        out += ",";
        std::snprintf(buf, sizeof buf, "%.6f", r.mean_chisq);
        out += buf;
        out += ",";
        out += detail::format_fraction(r.rejection_rate);
        out += ",";
        out += std::to_string(r.failure_count);
        out += "\n";
    }
    return out;
}

}  // namespace survscreen
