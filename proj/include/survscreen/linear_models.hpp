#pragma once

// Gaussian regression (normal equations) and logistic regression (iteratively
// reweighted least squares with step halving), each with Wald inference, plus
// the two single-feature screens built on them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "survscreen/datagen.hpp"
#include "survscreen/linalg.hpp"
#include "survscreen/special.hpp"

namespace survscreen {

class RankDeficient : public std::runtime_error {
public:
    explicit RankDeficient(std::size_t column)
        : std::runtime_error("design matrix is rank deficient at column " + std::to_string(column)),
          column_(column) {}
    std::size_t column() const { return column_; }

private:
    std::size_t column_;
};

class SingleClassOutcome : public std::runtime_error {
public:
    SingleClassOutcome() : std::runtime_error("outcome vector contains a single class") {}
};

struct FitResult {
    Vector coefficients;  // intercept first
    Vector std_errors;
    Vector statistics;  // t (OLS) or z (logistic), signed
    Vector p_values;
    bool converged = true;
    int iterations = 0;
    double log_likelihood = 0.0;
    bool loglik_monotone = true;
};

// One screened feature's inference. `statistic` is the absolute Wald
// statistic on the z/t scale.
struct ScreenResult {
    double p_value = 1.0;
    double coefficient = 0.0;
    double statistic = 0.0;
    bool converged = true;
};

namespace detail {

inline Matrix cross_product(const Matrix& X) {
    const std::size_t n = X.rows(), p = X.cols();
    Matrix xtx(p, p);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = X.row(i);
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = a; b < p; ++b) xtx(a, b) += row[a] * row[b];
    }
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < a; ++b) xtx(a, b) = xtx(b, a);
    return xtx;
}

inline double sigmoid(double eta) {
    if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

// log(1 + exp(eta)) without overflow.
inline double softplus(double eta) {
    if (eta > 0.0) return eta + std::log1p(std::exp(-eta));
    return std::log1p(std::exp(eta));
}

inline double bernoulli_loglik(const std::vector<std::uint8_t>& y, const Matrix& X,
                               const Vector& beta) {
    double ll = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double eta = 0.0;
        const double* row = X.row(i);
        for (std::size_t j = 0; j < beta.size(); ++j) eta += row[j] * beta[j];
        ll += (y[i] ? eta : 0.0) - softplus(eta);
    }
    return ll;
}

struct Standardized {
    Vector values;
    double mean = 0.0;
    double sd = 1.0;
};

inline Standardized standardize(const Vector& v) {
    const std::size_t n = v.size();
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) throw RankDeficient(0);
    Standardized out;
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.values[i] = (v[i] - mean) / sd;
    out.mean = mean;
    out.sd = sd;
    return out;
}

}  // namespace detail

// Ordinary least squares with t-based Wald inference. X must carry its own
// intercept column.
inline FitResult fit_ols(const Vector& y, const Matrix& X) {
    const std::size_t n = X.rows(), p = X.cols();
    if (y.size() != n) throw std::invalid_argument("fit_ols: y length mismatch");
    if (n <= p) throw std::invalid_argument("fit_ols: need n > p");

    CholeskyFactor factor;
    try {
        factor = cholesky(detail::cross_product(X));
    } catch (const NotPositiveDefinite& e) {
        throw RankDeficient(e.pivot());
    }

    Vector xty(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = X.row(i);
        for (std::size_t j = 0; j < p; ++j) xty[j] += row[j] * y[i];
    }
    Vector beta = chol_solve(factor, xty);

    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double fitted = 0.0;
        const double* row = X.row(i);
        for (std::size_t j = 0; j < p; ++j) fitted += row[j] * beta[j];
        const double r = y[i] - fitted;
        rss += r * r;
    }
    const double s2 = rss / static_cast<double>(n - p);
    const Matrix xtx_inv = chol_inverse(factor);
    const int df = static_cast<int>(n - p);

    FitResult fit;
    fit.coefficients = std::move(beta);
    fit.std_errors.resize(p);
    fit.statistics.resize(p);
    fit.p_values.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        const double se = std::sqrt(s2 * xtx_inv(j, j));
        fit.std_errors[j] = se;
        const double c = fit.coefficients[j];
        if (se > 0.0) {
            fit.statistics[j] = c / se;
            fit.p_values[j] = two_sided_t_p(fit.statistics[j], df);
        } else {  // exact fit; keep inference well defined
            fit.statistics[j] = c == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
            fit.p_values[j] = c == 0.0 ? 1.0 : 0.0;
        }
    }
    fit.converged = true;
    fit.iterations = 1;
    const double s2_mle = rss / static_cast<double>(n);
    fit.log_likelihood =
        s2_mle > 0.0
            ? -0.5 * static_cast<double>(n) * (std::log(2.0 * std::numbers::pi * s2_mle) + 1.0)
            : std::numeric_limits<double>::infinity();
    return fit;
}

struct LogisticOptions {
    int max_iter = 100;
    double coef_tol = 1e-10;
    double loglik_rel_tol = 1e-12;
    double grad_tol = 1e-6;
    int max_halvings = 20;
    double separation_coef = 15.0;
};

// Bernoulli log-likelihood maximized by IRLS (Newton with step halving, so
// the objective never decreases). Separation shows up as coefficients walking
// past `separation_coef` while the Newton step stays large; such fits come
// back converged=false.
inline FitResult fit_logistic(const std::vector<std::uint8_t>& y, const Matrix& X,
                              const LogisticOptions& opt = {}) {
    const std::size_t n = X.rows(), p = X.cols();
    if (y.size() != n) throw std::invalid_argument("fit_logistic: y length mismatch");
    if (n <= p) throw std::invalid_argument("fit_logistic: need n > p");
    bool any0 = false, any1 = false;
    for (auto v : y) (v ? any1 : any0) = true;
    if (!any0 || !any1) throw SingleClassOutcome();

    Vector beta(p, 0.0);
    double loglik = detail::bernoulli_loglik(y, X, beta);
    FitResult fit;
    fit.converged = false;
    fit.loglik_monotone = true;

    Vector grad(p);
    Matrix hess(p, p);
    int iter = 0;
    bool information_ok = true;
    CholeskyFactor factor;

    while (iter < opt.max_iter) {
        ++iter;
        std::fill(grad.begin(), grad.end(), 0.0);
        hess = Matrix(p, p);
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = X.row(i);
            double e = 0.0;
            for (std::size_t j = 0; j < p; ++j) e += row[j] * beta[j];
            const double mu = detail::sigmoid(e);
            const double resid = static_cast<double>(y[i]) - mu;
            const double w = mu * (1.0 - mu);
            for (std::size_t a = 0; a < p; ++a) {
                grad[a] += resid * row[a];
                for (std::size_t b = a; b < p; ++b) hess(a, b) += w * row[a] * row[b];
            }
        }
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = 0; b < a; ++b) hess(a, b) = hess(b, a);

        double grad_inf = 0.0;
        for (double g : grad) grad_inf = std::max(grad_inf, std::fabs(g));

        try {
            factor = cholesky(hess);
        } catch (const NotPositiveDefinite&) {
            information_ok = false;
            break;
        }
        Vector delta = chol_solve(factor, grad);
        double delta_inf = 0.0;
        for (double d : delta) delta_inf = std::max(delta_inf, std::fabs(d));

        double beta_inf = 0.0;
        for (double b : beta) beta_inf = std::max(beta_inf, std::fabs(b));
        if (beta_inf > opt.separation_coef && delta_inf > 1e-3) break;  // separation

        if (delta_inf < opt.coef_tol) {
            fit.converged = true;
            break;
        }

        // Improvements smaller than the evaluation roundoff of the
        // log-likelihood are indistinguishable from zero; accept them.
        const double noise_tol = 1e-13 * (1.0 + std::fabs(loglik));
        double step = 1.0;
        Vector candidate(p);
        double new_loglik = -std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int h = 0; h <= opt.max_halvings; ++h) {
            for (std::size_t j = 0; j < p; ++j) candidate[j] = beta[j] + step * delta[j];
            new_loglik = detail::bernoulli_loglik(y, X, candidate);
            if (new_loglik >= loglik - noise_tol) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            fit.converged = delta_inf < 1e-5;  // at the optimum up to noise
            break;
        }
        if (new_loglik < loglik - noise_tol) fit.loglik_monotone = false;
        const double change = step * delta_inf;
        const double rel_ll =
            std::fabs(new_loglik - loglik) / std::max(1.0, std::fabs(new_loglik));
        beta = candidate;
        loglik = new_loglik;
        if (change < opt.coef_tol || (rel_ll < opt.loglik_rel_tol && grad_inf < opt.grad_tol)) {
            fit.converged = true;
            break;
        }
    }

    fit.coefficients = beta;
    fit.iterations = iter;
    fit.log_likelihood = loglik;
    fit.std_errors.assign(p, std::numeric_limits<double>::quiet_NaN());
    fit.statistics.assign(p, 0.0);
    fit.p_values.assign(p, 1.0);
    if (information_ok) {
        // observed information at the final iterate
        hess = Matrix(p, p);
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = X.row(i);
            double e = 0.0;
            for (std::size_t j = 0; j < p; ++j) e += row[j] * beta[j];
            const double mu = detail::sigmoid(e);
            const double w = mu * (1.0 - mu);
            for (std::size_t a = 0; a < p; ++a)
                for (std::size_t b = a; b < p; ++b) hess(a, b) += w * row[a] * row[b];
        }
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = 0; b < a; ++b) hess(a, b) = hess(b, a);
        try {
            const Matrix cov = chol_inverse(cholesky(hess));
            for (std::size_t j = 0; j < p; ++j) {
                const double se = std::sqrt(cov(j, j));
                fit.std_errors[j] = se;
                fit.statistics[j] = fit.coefficients[j] / se;
                fit.p_values[j] = two_sided_normal_p(fit.statistics[j]);
            }
        } catch (const NotPositiveDefinite&) {
            fit.converged = false;
        }
    } else {
        fit.converged = false;
    }
    return fit;
}

// Gaussian regression screen: log follow-up time on [intercept, feature,
// event indicator]; returns the feature coefficient's inference. A constant
// event column (fully uncensored data) would alias the intercept, so it is
// dropped in that case.
inline ScreenResult gaussian_screen(const Vector& time, const std::vector<std::uint8_t>& event,
                                    const Matrix& features, std::size_t feature_index) {
    const std::size_t n = time.size();
    if (feature_index >= features.cols())
        throw std::invalid_argument("gaussian_screen: feature index out of range");
    bool event_varies = false;
    for (std::size_t i = 1; i < n && !event_varies; ++i) event_varies = event[i] != event[0];
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = std::log(time[i]);
    Matrix X(n, event_varies ? 3 : 2);
    for (std::size_t i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = features(i, feature_index);
        if (event_varies) X(i, 2) = static_cast<double>(event[i]);
    }
    const FitResult fit = fit_ols(y, X);
    return ScreenResult{fit.p_values[1], fit.coefficients[1], std::fabs(fit.statistics[1]), true};
}

inline ScreenResult gaussian_screen(const SimDataset& ds, std::size_t feature_index) {
    return gaussian_screen(ds.time, ds.event, ds.X, feature_index);
}

// Logistic regression screen: event indicator on [intercept, feature, time].
// Covariates are standardized internally for conditioning; Wald statistics are
// invariant, and the reported coefficient is mapped back to the raw scale.
//
// Follow-up times are heavy-tailed here, so the time covariate frequently
// quasi-separates (the largest time is almost always an event). Those fits
// come back flagged; the feature column's own inference is still sound, so it
// is reported and the flag only feeds the non-convergence counter. p = 1 is
// reserved for fits whose feature inference is itself unusable (single-class
// outcome, separation of the feature, broken information matrix).
inline ScreenResult logistic_screen(const Vector& time, const std::vector<std::uint8_t>& event,
                                    const Matrix& features, std::size_t feature_index) {
    const std::size_t n = time.size();
    if (feature_index >= features.cols())
        throw std::invalid_argument("logistic_screen: feature index out of range");
    bool any0 = false, any1 = false;
    for (auto v : event) (v ? any1 : any0) = true;
    if (!any0 || !any1) return ScreenResult{1.0, 0.0, 0.0, false};

    const auto zx = detail::standardize(features.column(feature_index));
    const auto zt = detail::standardize(time);
    Matrix X(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = zx.values[i];
        X(i, 2) = zt.values[i];
    }
    const FitResult fit = fit_logistic(event, X);
    const double se = fit.std_errors[1];
    const bool feature_usable = std::isfinite(se) && se > 0.0 &&
                                std::isfinite(fit.p_values[1]) &&
                                std::fabs(fit.coefficients[1]) <= 15.0;
    if (!feature_usable) return ScreenResult{1.0, 0.0, 0.0, false};
    return ScreenResult{fit.p_values[1], fit.coefficients[1] / zx.sd,
                        std::fabs(fit.statistics[1]), fit.converged};
}

inline ScreenResult logistic_screen(const SimDataset& ds, std::size_t feature_index) {
    return logistic_screen(ds.time, ds.event, ds.X, feature_index);
}

}  // namespace survscreen
