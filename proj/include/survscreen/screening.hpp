#pragma once

// Dataset-level screening decisions and their aggregation. One simulated
// dataset is one analysis unit: positive only when all five observed true
// features are selected, negative only when no noise feature is selected,
// accurately ranked only when the five observed true features order exactly
// by their true effect sizes.

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "survscreen/datagen.hpp"

namespace survscreen {

enum class Model { multivariate_cox, univariate_cox, logistic, gaussian };

inline constexpr std::array<Model, 4> kAllModels = {Model::multivariate_cox,
                                                    Model::univariate_cox, Model::logistic,
                                                    Model::gaussian};

inline constexpr const char* model_name(Model m) {
    switch (m) {
        case Model::multivariate_cox: return "multivariate_cox";
        case Model::univariate_cox: return "univariate_cox";
        case Model::logistic: return "logistic";
        case Model::gaussian: return "gaussian";
    }
    return "unknown";
}

inline std::optional<Model> parse_model(std::string_view name) {
    for (Model m : kAllModels)
        if (name == model_name(m)) return m;
    return std::nullopt;
}

// Per-dataset, per-model selection flags and inference over the ten screened
// features (columns 0..4 observed true, 5..9 noise). Ranking reads the
// p-values; `statistics` carries the absolute Wald statistics alongside for
// diagnostics. The multivariate model has usable entries only for its five
// fitted columns.
struct ScreeningOutcome {
    Model model = Model::gaussian;
    std::array<bool, kScreenedFeatures> selected{};
    std::array<double, kScreenedFeatures> statistics{};
    std::array<double, kScreenedFeatures> p_values{};
    std::array<bool, kScreenedFeatures> has_statistic{};
    std::array<int, kObservedTrue> observed_true_ids{};  // 1-based, column-aligned
    int nonconverged = 0;
};

// Positive-by-test: all five observed true features selected.
inline bool dataset_positive(const ScreeningOutcome& outcome) {
    for (std::size_t j = 0; j < kObservedTrue; ++j)
        if (!outcome.selected[j]) return false;
    return true;
}

// Negative-by-test: no noise feature selected.
inline bool dataset_negative(const ScreeningOutcome& outcome) {
    for (std::size_t j = kObservedTrue; j < kScreenedFeatures; ++j)
        if (outcome.selected[j]) return false;
    return true;
}

// Accurate ranking: ordering the observed true features by ascending p-value
// reproduces the descending true-effect order. Effects are strictly
// increasing in the feature id, so ids stand in for effect sizes. P-values
// are compared as computed in double precision: once Wald statistics grow
// large enough that several p-values underflow to the same value (exactly
// zero at the extreme), those features tie and the ranking scores as
// inaccurate. Large-sample scenarios with strong effects collapse through
// exactly this mechanism.
inline bool ranking_accurate(const ScreeningOutcome& outcome) {
    std::array<std::size_t, kObservedTrue> idx{};
    for (std::size_t j = 0; j < kObservedTrue; ++j) {
        if (!outcome.has_statistic[j]) return false;
        idx[j] = j;
    }
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return outcome.p_values[a] < outcome.p_values[b];
    });
    for (std::size_t k = 1; k < kObservedTrue; ++k) {
        if (outcome.p_values[idx[k - 1]] == outcome.p_values[idx[k]]) return false;
        if (outcome.observed_true_ids[idx[k - 1]] <= outcome.observed_true_ids[idx[k]])
            return false;
    }
    return true;
}

// One aggregated row per (scenario, model).
struct ScenarioReport {
    ScenarioSpec spec;
    Model model = Model::gaussian;
    double sensitivity = 0.0;
    double specificity = 0.0;
    double ranking_accuracy = 0.0;
    std::size_t replicates = 0;
    std::size_t nonconverged_total = 0;
    std::size_t ph_failures = 0;
};

// Integer counts divided once; the mean is exact up to the final division.
inline ScenarioReport aggregate(std::span<const ScreeningOutcome> outcomes,
                                const ScenarioSpec& spec, Model model) {
    if (outcomes.empty()) throw std::invalid_argument("aggregate: empty outcome collection");
    std::size_t positives = 0, negatives = 0, ranked = 0, nonconverged = 0;
    for (const auto& o : outcomes) {
        if (o.model != model) throw std::invalid_argument("aggregate: mixed models");
        positives += dataset_positive(o) ? 1 : 0;
        negatives += dataset_negative(o) ? 1 : 0;
        ranked += ranking_accurate(o) ? 1 : 0;
        nonconverged += static_cast<std::size_t>(o.nonconverged);
    }
    ScenarioReport report;
    report.spec = spec;
    report.model = model;
    const double n = static_cast<double>(outcomes.size());
    report.sensitivity = static_cast<double>(positives) / n;
    report.specificity = static_cast<double>(negatives) / n;
    report.ranking_accuracy = static_cast<double>(ranked) / n;
    report.replicates = outcomes.size();
    report.nonconverged_total = nonconverged;
    return report;
}

}  // namespace survscreen
