#pragma once

// Recommended screening pipeline: Gaussian regression screen per feature,
// select at p < 0.05, rank the selected set by the Gaussian statistic, then
// refit a multivariate Cox model on the selection and re-rank by its Wald
// statistics. The Cox ranking is the primary result for correlated features
// and a sensitivity analysis otherwise.

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "survscreen/cox.hpp"
#include "survscreen/dataset_io.hpp"
#include "survscreen/linear_models.hpp"

namespace survscreen {

struct PipelineResult {
    std::vector<std::size_t> selected_features;     // 0-based column indices
    std::vector<std::size_t> gaussian_ranking;      // selected set, strongest first
    std::vector<std::size_t> cox_refit_ranking;     // present iff the refit succeeded
    std::optional<std::string> cox_refit_error;
    bool cox_ranking_primary = false;
};

inline PipelineResult recommended_pipeline(const Dataset& data, bool correlated) {
    if (data.n() == 0 || data.n_features() == 0)
        throw std::invalid_argument("recommended_pipeline: dataset has no usable rows or features");
    PipelineResult result;
    result.cox_ranking_primary = correlated;

    const std::size_t p = data.n_features();
    std::vector<double> statistic(p, 0.0);
    for (std::size_t k = 0; k < p; ++k) {
        const ScreenResult r = gaussian_screen(data.time, data.event, data.X, k);
        statistic[k] = r.statistic;
        if (r.p_value < 0.05) result.selected_features.push_back(k);
    }
    if (result.selected_features.empty()) return result;

    result.gaussian_ranking = result.selected_features;
    std::sort(result.gaussian_ranking.begin(), result.gaussian_ranking.end(),
              [&](std::size_t a, std::size_t b) {
                  if (statistic[a] != statistic[b]) return statistic[a] > statistic[b];
                  return a < b;
              });

    try {
        const CoxFit refit =
            fit_cox(data.X.select_columns(result.selected_features), data.time, data.event);
        if (!refit.converged) {
            result.cox_refit_error = "multivariate Cox refit did not converge";
        } else {
            std::vector<std::size_t> order(result.selected_features.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                if (refit.statistics[a] != refit.statistics[b])
                    return refit.statistics[a] > refit.statistics[b];
                return a < b;
            });
            for (const std::size_t k : order)
                result.cox_refit_ranking.push_back(result.selected_features[k]);
        }
    } catch (const std::exception& e) {
        result.cox_refit_error = e.what();
    }
    return result;
}

}  // namespace survscreen
