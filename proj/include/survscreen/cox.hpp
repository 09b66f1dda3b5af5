#pragma once

// Cox proportional-hazards fitting: Breslow log partial likelihood, score and
// observed information in one descending-time pass, Newton iterations with
// step halving, Wald inference. The generator guarantees untied event times,
// so Breslow and Efron coincide; ties among events are a contract violation
// and raise an error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "survscreen/datagen.hpp"
#include "survscreen/linalg.hpp"
#include "survscreen/linear_models.hpp"
#include "survscreen/special.hpp"

namespace survscreen {

class TiedEventTimes : public std::runtime_error {
public:
    TiedEventTimes() : std::runtime_error("tied event times violate the generator contract") {}
};

class SingularInformation : public std::runtime_error {
public:
    SingularInformation()
        : std::runtime_error("Cox information matrix is singular (collinear design)") {}
};

struct CoxFit {
    Vector coefficients;
    Matrix covariance;  // inverse observed information
    Vector statistics;  // Wald chi-square per coefficient
    Vector p_values;    // df = 1
    double log_partial_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
    bool loglik_monotone = true;
};

struct CoxOptions {
    int max_iter = 50;
    double tol = 1e-9;
    int max_halvings = 20;
};

namespace detail {

// Descending time; within an exact tie, censored subjects first so they stay
// in the risk set of an event at the same instant.
inline std::vector<std::size_t> cox_order(const Vector& time,
                                          const std::vector<std::uint8_t>& event) {
    std::vector<std::size_t> order(time.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (time[a] != time[b]) return time[a] > time[b];
        if (event[a] != event[b]) return event[a] < event[b];
        return a < b;
    });
    return order;
}

inline void check_untied_events(const Vector& time, const std::vector<std::uint8_t>& event,
                                const std::vector<std::size_t>& order) {
    for (std::size_t k = 1; k < order.size(); ++k) {
        const std::size_t a = order[k - 1], b = order[k];
        if (time[a] == time[b] && event[a] && event[b]) throw TiedEventTimes();
    }
}

struct CoxEval {
    double loglik = 0.0;
    Vector gradient;
    Matrix neg_hessian;
};

// One pass over descending-time order with running rescaled sums
// S0 = sum exp(eta), S1 = sum x exp(eta), S2 = sum x x^T exp(eta); the
// running maximum of eta keeps every exponential in (0, 1].
inline CoxEval cox_eval(const Vector& beta, const Matrix& X,
                        const std::vector<std::uint8_t>& event,
                        const std::vector<std::size_t>& order, bool want_derivatives) {
    const std::size_t p = X.cols();
    CoxEval out;
    if (want_derivatives) {
        out.gradient.assign(p, 0.0);
        out.neg_hessian = Matrix(p, p);
    }
    double max_eta = -std::numeric_limits<double>::infinity();
    double s0 = 0.0;
    Vector s1(p, 0.0);
    Matrix s2(want_derivatives ? p : 0, want_derivatives ? p : 0);
    Vector xbar(p);

    for (const std::size_t i : order) {
        const double* row = X.row(i);
        double eta = 0.0;
        for (std::size_t j = 0; j < p; ++j) eta += row[j] * beta[j];
        if (eta > max_eta) {
            if (s0 > 0.0) {
                const double scale = std::exp(max_eta - eta);
                s0 *= scale;
                if (want_derivatives) {
                    for (std::size_t a = 0; a < p; ++a) {
                        s1[a] *= scale;
                        for (std::size_t b = a; b < p; ++b) s2(a, b) *= scale;
                    }
                }
            }
            max_eta = eta;
        }
        const double w = std::exp(eta - max_eta);
        s0 += w;
        if (want_derivatives) {
            for (std::size_t a = 0; a < p; ++a) {
                s1[a] += w * row[a];
                for (std::size_t b = a; b < p; ++b) s2(a, b) += w * row[a] * row[b];
            }
        }
        if (event[i]) {
            out.loglik += eta - (max_eta + std::log(s0));
            if (want_derivatives) {
                for (std::size_t a = 0; a < p; ++a) xbar[a] = s1[a] / s0;
                for (std::size_t a = 0; a < p; ++a) {
                    out.gradient[a] += row[a] - xbar[a];
                    for (std::size_t b = a; b < p; ++b)
                        out.neg_hessian(a, b) += s2(a, b) / s0 - xbar[a] * xbar[b];
                }
            }
        }
    }
    if (want_derivatives)
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = 0; b < a; ++b) out.neg_hessian(a, b) = out.neg_hessian(b, a);
    return out;
}

inline void validate_cox_design(const Matrix& X, const std::vector<std::uint8_t>& event) {
    if (X.cols() == 0) throw std::invalid_argument("fit_cox: need at least one covariate");
    if (X.rows() != event.size()) throw std::invalid_argument("fit_cox: size mismatch");
    std::size_t n_events = 0;
    for (auto e : event) n_events += e;
    if (n_events == 0) throw std::invalid_argument("fit_cox: no events in data");
    for (std::size_t j = 0; j < X.cols(); ++j) {
        const double first = X(0, j);
        bool constant = true;
        for (std::size_t i = 1; i < X.rows() && constant; ++i) constant = X(i, j) == first;
        if (constant)
            throw std::invalid_argument("fit_cox: column " + std::to_string(j) + " is constant");
    }
}

}  // namespace detail

// Breslow log partial likelihood at a fixed coefficient vector.
inline double log_partial_likelihood(const Vector& beta, const Matrix& X, const Vector& time,
                                     const std::vector<std::uint8_t>& event) {
    const auto order = detail::cox_order(time, event);
    detail::check_untied_events(time, event, order);
    return detail::cox_eval(beta, X, event, order, false).loglik;
}

// Score vector and observed information (negative Hessian) of the Breslow
// log partial likelihood.
inline std::pair<Vector, Matrix> plik_gradient_hessian(const Vector& beta, const Matrix& X,
                                                       const Vector& time,
                                                       const std::vector<std::uint8_t>& event) {
    const auto order = detail::cox_order(time, event);
    detail::check_untied_events(time, event, order);
    auto eval = detail::cox_eval(beta, X, event, order, true);
    return {std::move(eval.gradient), std::move(eval.neg_hessian)};
}

// Newton's method from beta = 0 with step halving; converged when the
// accepted step's max coefficient change falls below tol.
inline CoxFit fit_cox(const Matrix& X, const Vector& time, const std::vector<std::uint8_t>& event,
                      const CoxOptions& opt = {}) {
    detail::validate_cox_design(X, event);
    const auto order = detail::cox_order(time, event);
    detail::check_untied_events(time, event, order);

    const std::size_t p = X.cols();
    Vector beta(p, 0.0);
    auto eval = detail::cox_eval(beta, X, event, order, true);

    CoxFit fit;
    fit.loglik_monotone = true;
    int iter = 0;
    while (iter < opt.max_iter) {
        ++iter;
        CholeskyFactor factor;
        try {
            factor = cholesky(eval.neg_hessian);
        } catch (const NotPositiveDefinite&) {
            throw SingularInformation();
        }
        const Vector delta = chol_solve(factor, eval.gradient);
        double delta_inf = 0.0;
        for (double d : delta) delta_inf = std::max(delta_inf, std::fabs(d));
        if (delta_inf < opt.tol) {
            fit.converged = true;
            break;
        }

        // Accept any step whose objective change is within the evaluation
        // roundoff of the log partial likelihood.
        const double noise_tol = 1e-13 * (1.0 + std::fabs(eval.loglik));
        double step = 1.0;
        Vector candidate(p);
        double cand_loglik = -std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int h = 0; h <= opt.max_halvings; ++h) {
            for (std::size_t j = 0; j < p; ++j) candidate[j] = beta[j] + step * delta[j];
            cand_loglik = detail::cox_eval(candidate, X, event, order, false).loglik;
            if (cand_loglik >= eval.loglik - noise_tol) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            fit.converged = delta_inf < 1e-5;  // at the optimum up to noise
            break;
        }
        if (cand_loglik < eval.loglik - noise_tol) fit.loglik_monotone = false;
        double change = 0.0;
        for (std::size_t j = 0; j < p; ++j)
            change = std::max(change, std::fabs(step * delta[j]));
        beta = candidate;
        eval = detail::cox_eval(beta, X, event, order, true);
        if (change < opt.tol) {
            fit.converged = true;
            break;
        }
    }

    fit.coefficients = beta;
    fit.iterations = iter;
    fit.log_partial_likelihood = eval.loglik;
    try {
        fit.covariance = chol_inverse(cholesky(eval.neg_hessian));
    } catch (const NotPositiveDefinite&) {
        throw SingularInformation();
    }
    fit.statistics.resize(p);
    fit.p_values.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        fit.statistics[j] = beta[j] * beta[j] / fit.covariance(j, j);
        fit.p_values[j] = chi_square_sf(fit.statistics[j], 1);
    }
    return fit;
}

// Univariate Cox screen on one feature column. Non-convergence reports p = 1
// (never selected); structural errors propagate to the caller.
inline ScreenResult univariate_cox_screen(const Vector& time,
                                          const std::vector<std::uint8_t>& event,
                                          const Matrix& features, std::size_t feature_index) {
    if (feature_index >= features.cols())
        throw std::invalid_argument("univariate_cox_screen: feature index out of range");
    Matrix X(features.rows(), 1);
    for (std::size_t i = 0; i < features.rows(); ++i) X(i, 0) = features(i, feature_index);
    const CoxFit fit = fit_cox(X, time, event);
    if (!fit.converged) return ScreenResult{1.0, fit.coefficients[0], 0.0, false};
    return ScreenResult{fit.p_values[0], fit.coefficients[0], std::sqrt(fit.statistics[0]), true};
}

inline ScreenResult univariate_cox_screen(const SimDataset& ds, std::size_t feature_index) {
    return univariate_cox_screen(ds.time, ds.event, ds.X, feature_index);
}

// Joint fit over a column subset of the screened feature matrix.
inline CoxFit multivariate_cox_fit(const SimDataset& ds, const std::vector<std::size_t>& columns) {
    if (columns.empty()) throw std::invalid_argument("multivariate_cox_fit: empty column set");
    for (std::size_t a = 0; a < columns.size(); ++a)
        for (std::size_t b = a + 1; b < columns.size(); ++b)
            if (columns[a] == columns[b])
                throw std::invalid_argument("multivariate_cox_fit: duplicate column");
    return fit_cox(ds.X.select_columns(columns), ds.time, ds.event);
}

}  // namespace survscreen
