#pragma once

// Multivariate Gaussian sampling through a Cholesky factor.

#include <cstddef>
#include <stdexcept>

#include "survscreen/linalg.hpp"
#include "survscreen/rng.hpp"

namespace survscreen {

// Unit-diagonal covariance with constant off-diagonal rho.
inline Matrix equicorrelation(std::size_t d, double rho) {
    Matrix cov(d, d, rho);
    for (std::size_t i = 0; i < d; ++i) cov(i, i) = 1.0;
    return cov;
}

// n i.i.d. rows, each L * z with z standard normal.
inline Matrix sample_mvn(RngStream& rng, const CholeskyFactor& factor, std::size_t n) {
    if (n < 1) throw std::invalid_argument("sample_mvn: n must be >= 1");
    const std::size_t d = factor.dim();
    const Matrix& L = factor.lower;
    Matrix out(n, d);
    Vector z(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) z[j] = rng.normal();
        double* row = out.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k <= j; ++k) s += L(j, k) * z[k];
            row[j] = s;
        }
    }
    return out;
}

}  // namespace survscreen
