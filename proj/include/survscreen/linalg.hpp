#pragma once

// Small dense linear algebra sized for the regression problems in this
// library (p <= ~16 design columns). Row-major storage, no BLAS.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace survscreen {

using Vector = std::vector<double>;

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }

    Vector column(std::size_t j) const {
        Vector out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
        return out;
    }

    // Copies the named columns, in order, into a fresh rows x cols.size() matrix.
    Matrix select_columns(const std::vector<std::size_t>& cols) const {
        Matrix out(rows_, cols.size());
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols.size(); ++k)
                out(i, k) = (*this)(i, cols[k]);
        return out;
    }

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vector data_;
};

// Thrown when a Cholesky factorization hits a non-positive pivot. `pivot` is
// the 0-based diagonal index that failed.
class NotPositiveDefinite : public std::runtime_error {
public:
    explicit NotPositiveDefinite(std::size_t pivot)
        : std::runtime_error("matrix not positive definite at pivot " + std::to_string(pivot)),
          pivot_(pivot) {}
    std::size_t pivot() const { return pivot_; }

private:
    std::size_t pivot_;
};

// Lower-triangular factor L with L * L^T equal to the input covariance.
struct CholeskyFactor {
    Matrix lower;
    std::size_t dim() const { return lower.rows(); }
};

inline CholeskyFactor cholesky(const Matrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("cholesky: matrix must be square");
    const std::size_t d = a.rows();
    Matrix L(d, d);
    for (std::size_t j = 0; j < d; ++j) {
        double diag = a(j, j);
        for (std::size_t k = 0; k < j; ++k) diag -= L(j, k) * L(j, k);
        if (!(diag > 0.0)) throw NotPositiveDefinite(j);
        const double ljj = std::sqrt(diag);
        L(j, j) = ljj;
        for (std::size_t i = j + 1; i < d; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            L(i, j) = s / ljj;
        }
    }
    return CholeskyFactor{std::move(L)};
}

// Solves (L L^T) x = b given the lower factor.
inline Vector chol_solve(const CholeskyFactor& f, const Vector& b) {
    const Matrix& L = f.lower;
    const std::size_t d = f.dim();
    if (b.size() != d) throw std::invalid_argument("chol_solve: size mismatch");
    Vector y(d);
    for (std::size_t i = 0; i < d; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= L(i, k) * y[k];
        y[i] = s / L(i, i);
    }
    Vector x(d);
    for (std::size_t ii = d; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < d; ++k) s -= L(k, ii) * x[k];
        x[ii] = s / L(ii, ii);
    }
    return x;
}

// Inverse of L L^T, computed column by column from the factor.
inline Matrix chol_inverse(const CholeskyFactor& f) {
    const std::size_t d = f.dim();
    Matrix inv(d, d);
    Vector e(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        e[j] = 1.0;
        Vector col = chol_solve(f, e);
        for (std::size_t i = 0; i < d; ++i) inv(i, j) = col[i];
        e[j] = 0.0;
    }
    // symmetrize against roundoff
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            const double m = 0.5 * (inv(i, j) + inv(j, i));
            inv(i, j) = m;
            inv(j, i) = m;
        }
    return inv;
}

inline Vector solve_spd(const Matrix& a, const Vector& b) { return chol_solve(cholesky(a), b); }

}  // namespace survscreen
