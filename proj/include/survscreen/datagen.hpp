#pragma once

// Simulation dataset generator. Survival times follow a proportional-hazards
// model with exponential baseline hazard 1/theta: T = theta * (-ln U) *
// exp(-effects . x), so hazard ratios are exp(effects) exactly. Ten true
// features drive the outcome; only a random five of them are kept in the
// screened matrix, alongside five noise features drawn from the same
// equicorrelated Gaussian but independent of the true ones.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "survscreen/linalg.hpp"
#include "survscreen/mvn.hpp"
#include "survscreen/rng.hpp"

namespace survscreen {

inline constexpr std::size_t kScreenedFeatures = 10;
inline constexpr std::size_t kObservedTrue = 5;
inline constexpr std::size_t kNoiseFeatures = 5;

struct ScenarioSpec {
    std::size_t n = 1000;
    double censoring_rate = 0.1;
    double rho = 0.0;
    std::size_t n_true = 10;
    std::size_t n_observed_true = kObservedTrue;
    std::size_t n_noise = kNoiseFeatures;
    Vector effects = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::size_t replicates = 1000;
    std::uint64_t master_seed = 1;
    std::uint64_t scenario_id = 0;

    void validate() const {
        if (n < 50) throw std::invalid_argument("ScenarioSpec: n must be >= 50");
        if (!(censoring_rate >= 0.0 && censoring_rate < 1.0))
            throw std::invalid_argument("ScenarioSpec: censoring_rate must be in [0, 1)");
        if (!(rho >= 0.0 && rho < 1.0))
            throw std::invalid_argument("ScenarioSpec: rho must be in [0, 1)");
        if (n_true != 10 || n_observed_true != kObservedTrue || n_noise != kNoiseFeatures)
            throw std::invalid_argument("ScenarioSpec: feature layout must be 10 true / 5 observed / 5 noise");
        if (effects.size() != n_true)
            throw std::invalid_argument("ScenarioSpec: effects length must equal n_true");
        for (std::size_t i = 1; i < effects.size(); ++i)
            if (!(effects[i] > effects[i - 1]))
                throw std::invalid_argument("ScenarioSpec: effects must be strictly increasing");
        if (replicates < 1) throw std::invalid_argument("ScenarioSpec: replicates must be >= 1");
    }
};

struct SimDataset {
    Matrix X;                        // n x 10; columns 0..4 observed true, 5..9 noise
    Vector time;                     // observed follow-up time, strictly positive
    std::vector<std::uint8_t> event; // 1 = event, 0 = censored
    std::array<int, kObservedTrue> observed_true_ids{};  // 1-based ids into effects
    std::array<double, kObservedTrue> observed_effects{};
    double theta = 0.0;

    std::size_t n() const { return time.size(); }
};

// Dataset plus the full pre-masking truth, for diagnostics that need all ten
// true features.
struct FullReplicate {
    SimDataset dataset;
    Matrix true_features;  // n x 10
};

// Baseline scale theta, equiprobable on the grid {2.0, 2.2, ..., 40.0}
// (191 values: integers 10..200 divided by 5).
inline double draw_baseline_scale(RngStream& rng) {
    return static_cast<double>(10 + rng.uniform_int(191)) / 5.0;
}

// n i.i.d. rows from the d-dimensional equicorrelated standard Gaussian.
inline Matrix generate_true_features(RngStream& rng, std::size_t n, double rho,
                                     std::size_t d = 10) {
    if (n < 1) throw std::invalid_argument("generate_true_features: n must be >= 1");
    if (!(rho >= 0.0 && rho < 1.0))
        throw std::invalid_argument("generate_true_features: rho must be in [0, 1)");
    const CholeskyFactor factor = cholesky(equicorrelation(d, rho));
    return sample_mvn(rng, factor, n);
}

// Inverse-CDF map: uniform draw u and linear predictor to an event time.
inline double event_time_from_uniform(double u, double linear_predictor, double theta) {
    return theta * (-std::log(u)) * std::exp(-linear_predictor);
}

inline Vector generate_event_times(const Matrix& X_true, const Vector& effects, double theta,
                                   RngStream& rng) {
    if (!(theta > 0.0)) throw std::invalid_argument("generate_event_times: theta must be positive");
    if (X_true.cols() != effects.size())
        throw std::invalid_argument("generate_event_times: effects length mismatch");
    const std::size_t n = X_true.rows();
    Vector times(n);
    for (std::size_t i = 0; i < n; ++i) {
        double lp = 0.0;
        const double* row = X_true.row(i);
        for (std::size_t j = 0; j < effects.size(); ++j) lp += effects[j] * row[j];
        times[i] = event_time_from_uniform(rng.uniform_open01(), lp, theta);
    }
    return times;
}

struct CensoredTimes {
    Vector time;
    std::vector<std::uint8_t> event;
};

// Per-subject Bernoulli(rate) censoring flag; a censored subject reports a
// uniform fraction of its latent event time. Independent of covariates, so
// the expected censored fraction equals the rate.
inline CensoredTimes apply_censoring(const Vector& event_times, double rate, RngStream& rng) {
    if (!(rate >= 0.0 && rate < 1.0))
        throw std::invalid_argument("apply_censoring: rate must be in [0, 1)");
    const std::size_t n = event_times.size();
    CensoredTimes out;
    out.time.resize(n);
    out.event.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (rate > 0.0 && rng.bernoulli(rate)) {
            out.event[i] = 0;
            out.time[i] = rng.uniform_open01() * event_times[i];
        } else {
            out.event[i] = 1;
            out.time[i] = event_times[i];
        }
    }
    return out;
}

namespace detail {

// Exact ties among observed times are a measure-zero accident of finite
// precision; redraw the colliding value until all times are distinct.
inline void break_time_ties(Vector& time, const std::vector<std::uint8_t>& event,
                            Vector& latent_times, const Vector& linear_predictor, double theta,
                            RngStream& rng) {
    const std::size_t n = time.size();
    std::vector<std::size_t> order(n);
    bool clean = false;
    while (!clean) {
        clean = true;
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return time[a] < time[b]; });
        for (std::size_t k = 1; k < n; ++k) {
            const std::size_t i = order[k];
            if (time[i] != time[order[k - 1]]) continue;
            clean = false;
            if (event[i]) {
                latent_times[i] =
                    event_time_from_uniform(rng.uniform_open01(), linear_predictor[i], theta);
                time[i] = latent_times[i];
            } else {
                time[i] = rng.uniform_open01() * latent_times[i];
            }
        }
    }
}

}  // namespace detail

// One replicate: baseline scale, true features, event times, censoring, the
// random 5-subset of observed true features, and the noise block.
inline FullReplicate generate_dataset_with_truth(const ScenarioSpec& spec,
                                                 std::size_t replicate_index) {
    spec.validate();
    if (replicate_index >= spec.replicates)
        throw std::invalid_argument("generate_dataset_with_truth: replicate_index out of range");
    RngStream rng = derive_stream(spec.master_seed, spec.scenario_id, replicate_index);

    const std::size_t n = spec.n;
    const double theta = draw_baseline_scale(rng);
    Matrix X_true = generate_true_features(rng, n, spec.rho, spec.n_true);

    Vector lp(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = X_true.row(i);
        for (std::size_t j = 0; j < spec.n_true; ++j) lp[i] += spec.effects[j] * row[j];
    }
    Vector latent(n);
    for (std::size_t i = 0; i < n; ++i)
        latent[i] = event_time_from_uniform(rng.uniform_open01(), lp[i], theta);

    CensoredTimes observed = apply_censoring(latent, spec.censoring_rate, rng);

    // Uniform 5-subset of the 10 true feature ids (partial Fisher-Yates).
    std::array<int, 10> ids{};
    std::iota(ids.begin(), ids.end(), 1);
    for (std::size_t j = 0; j < kObservedTrue; ++j) {
        const std::size_t k = j + rng.uniform_int(ids.size() - j);
        std::swap(ids[j], ids[k]);
    }

    // Noise block: same equicorrelation among themselves, independent of the
    // true features.
    const CholeskyFactor noise_factor = cholesky(equicorrelation(kNoiseFeatures, spec.rho));
    Matrix noise = sample_mvn(rng, noise_factor, n);

    detail::break_time_ties(observed.time, observed.event, latent, lp, theta, rng);

    SimDataset ds;
    ds.X = Matrix(n, kScreenedFeatures);
    for (std::size_t j = 0; j < kObservedTrue; ++j) {
        ds.observed_true_ids[j] = ids[j];
        ds.observed_effects[j] = spec.effects[static_cast<std::size_t>(ids[j]) - 1];
        for (std::size_t i = 0; i < n; ++i)
            ds.X(i, j) = X_true(i, static_cast<std::size_t>(ids[j]) - 1);
    }
    for (std::size_t j = 0; j < kNoiseFeatures; ++j)
        for (std::size_t i = 0; i < n; ++i) ds.X(i, kObservedTrue + j) = noise(i, j);
    ds.time = std::move(observed.time);
    ds.event = std::move(observed.event);
    ds.theta = theta;

    return FullReplicate{std::move(ds), std::move(X_true)};
}

inline SimDataset generate_dataset(const ScenarioSpec& spec, std::size_t replicate_index) {
    return generate_dataset_with_truth(spec, replicate_index).dataset;
}

}  // namespace survscreen
