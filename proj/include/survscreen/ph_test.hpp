#pragma once

// Proportional-hazards assumption check: Schoenfeld residuals correlated with
// a transform of event time (Grambsch-Therneau score test). Scaled residuals
// use the average-information approximation, residuals * n_events *
// fit.covariance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "survscreen/cox.hpp"
#include "survscreen/linalg.hpp"
#include "survscreen/special.hpp"

namespace survscreen {

enum class TimeTransform { km, rank, identity };

class PhTestFailure : public std::runtime_error {
public:
    explicit PhTestFailure(const std::string& why) : std::runtime_error("ph_test failed: " + why) {}
};

struct PhTestResult {
    Vector per_covariate_chisq;
    Vector per_covariate_p;
    double global_chisq = 0.0;
    double global_p = 1.0;
    TimeTransform transform = TimeTransform::km;
    std::size_t n_events = 0;
};

namespace detail {

// Event rows in ascending time order: residual = x_event - risk-set weighted
// mean of x at beta.
inline Matrix schoenfeld_rows(const Vector& beta, const Matrix& X, const Vector& time,
                              const std::vector<std::uint8_t>& event) {
    const auto order = cox_order(time, event);
    check_untied_events(time, event, order);
    const std::size_t p = X.cols();

    std::size_t n_events = 0;
    for (auto e : event) n_events += e;
    if (n_events == 0) throw std::invalid_argument("schoenfeld_residuals: no events");

    Matrix rows(n_events, p);  // filled in descending order, reversed below
    double max_eta = -std::numeric_limits<double>::infinity();
    double s0 = 0.0;
    Vector s1(p, 0.0);
    std::size_t row_idx = 0;
    for (const std::size_t i : order) {
        const double* row = X.row(i);
        double eta = 0.0;
        for (std::size_t j = 0; j < p; ++j) eta += row[j] * beta[j];
        if (eta > max_eta) {
            if (s0 > 0.0) {
                const double scale = std::exp(max_eta - eta);
                s0 *= scale;
                for (std::size_t a = 0; a < p; ++a) s1[a] *= scale;
            }
            max_eta = eta;
        }
        const double w = std::exp(eta - max_eta);
        s0 += w;
        for (std::size_t a = 0; a < p; ++a) s1[a] += w * row[a];
        if (event[i]) {
            for (std::size_t a = 0; a < p; ++a) rows(row_idx, a) = row[a] - s1[a] / s0;
            ++row_idx;
        }
    }
    // reverse to ascending event time
    Matrix out(n_events, p);
    for (std::size_t r = 0; r < n_events; ++r)
        for (std::size_t a = 0; a < p; ++a) out(r, a) = rows(n_events - 1 - r, a);
    return out;
}

// Event times in ascending order.
inline Vector event_times_ascending(const Vector& time, const std::vector<std::uint8_t>& event) {
    Vector t;
    for (std::size_t i = 0; i < time.size(); ++i)
        if (event[i]) t.push_back(time[i]);
    std::sort(t.begin(), t.end());
    return t;
}

// Left-continuous Kaplan-Meier transform g(t) = 1 - KM(t-) at each event
// time, ascending. The KM curve uses the full sample's risk sets.
inline Vector km_transform(const Vector& time, const std::vector<std::uint8_t>& event) {
    const std::size_t n = time.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (time[a] != time[b]) return time[a] < time[b];
        return event[a] > event[b];  // event leaves before a censored tie
    });
    Vector g;
    double surv = 1.0;
    std::size_t at_risk = n;
    for (const std::size_t i : order) {
        if (event[i]) {
            g.push_back(1.0 - surv);
            surv *= 1.0 - 1.0 / static_cast<double>(at_risk);
        }
        --at_risk;
    }
    return g;
}

inline Vector time_transform_values(TimeTransform transform, const Vector& time,
                                    const std::vector<std::uint8_t>& event) {
    switch (transform) {
        case TimeTransform::km:
            return km_transform(time, event);
        case TimeTransform::rank: {
            const Vector t = event_times_ascending(time, event);
            Vector g(t.size());
            for (std::size_t k = 0; k < t.size(); ++k) g[k] = static_cast<double>(k + 1);
            return g;
        }
        case TimeTransform::identity:
            return event_times_ascending(time, event);
    }
    throw std::logic_error("unknown time transform");
}

}  // namespace detail

// Schoenfeld residual matrix (events x p), rows in ascending event time.
inline Matrix schoenfeld_residuals(const CoxFit& fit, const Matrix& X, const Vector& time,
                                   const std::vector<std::uint8_t>& event) {
    if (!fit.converged) throw PhTestFailure("fit did not converge");
    return detail::schoenfeld_rows(fit.coefficients, X, time, event);
}

inline PhTestResult ph_test(const CoxFit& fit, const Matrix& X, const Vector& time,
                            const std::vector<std::uint8_t>& event,
                            TimeTransform transform = TimeTransform::km) {
    if (!fit.converged) throw PhTestFailure("fit did not converge");
    const std::size_t p = X.cols();
    if (fit.coefficients.size() != p) throw std::invalid_argument("ph_test: dimension mismatch");

    const Matrix residuals = detail::schoenfeld_rows(fit.coefficients, X, time, event);
    const std::size_t d = residuals.rows();
    if (d < 10) throw PhTestFailure("fewer than 10 events");

    Vector g = detail::time_transform_values(transform, time, event);
    double g_mean = 0.0;
    for (double v : g) g_mean += v;
    g_mean /= static_cast<double>(d);
    double denom = 0.0;
    for (double& v : g) {
        v -= g_mean;
        denom += v * v;
    }
    if (!(denom > 0.0)) throw PhTestFailure("degenerate time transform");

    Vector u(p, 0.0);
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t j = 0; j < p; ++j) u[j] += g[r] * residuals(r, j);

    const Matrix& v = fit.covariance;
    Vector vu(p, 0.0);
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < p; ++b) vu[a] += v(a, b) * u[b];

    PhTestResult out;
    out.transform = transform;
    out.n_events = d;
    out.per_covariate_chisq.resize(p);
    out.per_covariate_p.resize(p);
    const double dn = static_cast<double>(d);
    for (std::size_t j = 0; j < p; ++j) {
        const double chisq = dn * vu[j] * vu[j] / (v(j, j) * denom);
        if (!std::isfinite(chisq) || chisq < 0.0) throw PhTestFailure("non-finite statistic");
        out.per_covariate_chisq[j] = chisq;
        out.per_covariate_p[j] = chi_square_sf(chisq, 1);
    }
    double quad = 0.0;
    for (std::size_t j = 0; j < p; ++j) quad += u[j] * vu[j];
    out.global_chisq = dn * quad / denom;
    if (!std::isfinite(out.global_chisq) || out.global_chisq < 0.0)
        throw PhTestFailure("non-finite global statistic");
    out.global_p = chi_square_sf(out.global_chisq, static_cast<int>(p));
    return out;
}

}  // namespace survscreen
