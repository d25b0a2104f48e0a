#pragma once

// Dense real/complex matrices and a symmetric eigensolver, sized for
// desk-scale sector problems. Everything is deterministic: fixed sweep
// order, fixed tie handling, no randomized pivoting.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <vector>

#include "orbifold/errors.hpp"

namespace orbifold {

using Complex = std::complex<double>;

/// Hard cap on dense eigenproblem dimension; larger sectors must go through
/// an analytic (closed-form) spectrum.
inline constexpr int kDenseDimensionGuard = 4096;

class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {}

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Matrix operator*(const Matrix& rhs) const {
        if (cols_ != rhs.rows_) throw ValidationError("matrix multiply: inner dimensions differ");
        Matrix out(rows_, rhs.cols_);
        for (int i = 0; i < rows_; ++i)
            for (int k = 0; k < cols_; ++k) {
                const double a = (*this)(i, k);
                if (a == 0.0) continue;
                for (int j = 0; j < rhs.cols_; ++j) out(i, j) += a * rhs(k, j);
            }
        return out;
    }

    Matrix operator-(const Matrix& rhs) const {
        if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw ValidationError("matrix subtract: shape mismatch");
        Matrix out(rows_, cols_);
        for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] - rhs.data_[i];
        return out;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    double frobenius() const {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return std::sqrt(s);
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

struct SymmetricEigen {
    std::vector<double> values;  // ascending
    Matrix vectors;              // column k pairs with values[k]
};

/// Cyclic Jacobi for real symmetric matrices. Fixed (p,q) sweep order keeps
/// repeated runs bit-identical.
inline SymmetricEigen jacobi_eigensolve(Matrix a, int max_sweeps = 128) {
    const int n = a.rows();
    if (a.cols() != n) throw ValidationError("jacobi_eigensolve: square matrix required");
    if (n > kDenseDimensionGuard)
        throw GuardError("jacobi_eigensolve: dimension " + std::to_string(n) + " exceeds dense guard " +
                         std::to_string(kDenseDimensionGuard));
    Matrix v = Matrix::identity(n);
    if (n > 1) {
        const double scale = std::max(a.max_abs(), 1e-300);
        for (int sweep = 0; sweep < max_sweeps; ++sweep) {
            double off = 0.0;
            for (int p = 0; p < n; ++p)
                for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
            if (off <= 1e-15 * scale) break;
            for (int p = 0; p < n - 1; ++p) {
                for (int q = p + 1; q < n; ++q) {
                    const double apq = a(p, q);
                    if (std::abs(apq) <= 1e-18 * scale) continue;
                    const double theta = 0.5 * (a(q, q) - a(p, p)) / apq;
                    const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                    const double c = 1.0 / std::sqrt(t * t + 1.0);
                    const double s = t * c;
                    const double tau = s / (1.0 + c);
                    const double app = a(p, p);
                    const double aqq = a(q, q);
                    a(p, p) = app - t * apq;
                    a(q, q) = aqq + t * apq;
                    a(p, q) = 0.0;
                    a(q, p) = 0.0;
                    for (int i = 0; i < n; ++i) {
                        if (i != p && i != q) {
                            const double aip = a(i, p);
                            const double aiq = a(i, q);
                            a(i, p) = aip - s * (aiq + tau * aip);
                            a(p, i) = a(i, p);
                            a(i, q) = aiq + s * (aip - tau * aiq);
                            a(q, i) = a(i, q);
                        }
                        const double vip = v(i, p);
                        const double viq = v(i, q);
                        v(i, p) = vip - s * (viq + tau * vip);
                        v(i, q) = viq + s * (vip - tau * viq);
                    }
                }
            }
        }
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x) < a(y, y); });
    SymmetricEigen out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (int k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (int i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

/// Flip each column so its largest-magnitude entry (first, on ties) is positive.
inline void canonicalize_column_signs(Matrix& vectors) {
    for (int k = 0; k < vectors.cols(); ++k) {
        int best = 0;
        double best_abs = -1.0;
        for (int i = 0; i < vectors.rows(); ++i) {
            const double m = std::abs(vectors(i, k));
            if (m > best_abs) {
                best_abs = m;
                best = i;
            }
        }
        if (vectors.rows() > 0 && vectors(best, k) < 0.0)
            for (int i = 0; i < vectors.rows(); ++i) vectors(i, k) = -vectors(i, k);
    }
}

/// Generalized symmetric problem L v = lambda W v with positive diagonal W.
/// Reduced through D = W^{-1/2} to a standard problem; returned columns are
/// W-orthonormal. Eigenvalues within 1e-12 of zero (relative to the largest)
/// are snapped to exactly zero so kernel modes survive cutoff comparisons.
inline SymmetricEigen generalized_eigensolve(const Matrix& stiffness, const std::vector<double>& weight) {
    const int n = stiffness.rows();
    if (stiffness.cols() != n) throw ValidationError("generalized_eigensolve: square matrix required");
    if (n > kDenseDimensionGuard)
        throw GuardError("generalized_eigensolve: matrix too large: dimension " + std::to_string(n) +
                         " exceeds the dense guard of " + std::to_string(kDenseDimensionGuard) +
                         "; use an analytic (closed-form) space for spectra at this size");
    if (static_cast<int>(weight.size()) != n) throw ValidationError("generalized_eigensolve: weight size mismatch");
    const double scale = std::max(stiffness.max_abs(), 1.0);
    for (int i = 0; i < n; ++i) {
        if (!(weight[i] > 0.0)) throw ValidationError("generalized_eigensolve: weights must be strictly positive");
        for (int j = i + 1; j < n; ++j)
            if (std::abs(stiffness(i, j) - stiffness(j, i)) > 1e-10 * scale)
                throw ValidationError("generalized_eigensolve: matrix is not symmetric within 1e-10");
    }
    std::vector<double> dinv(n);
    for (int i = 0; i < n; ++i) dinv[i] = 1.0 / std::sqrt(weight[i]);
    Matrix b(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) b(i, j) = stiffness(i, j) * dinv[i] * dinv[j];
    SymmetricEigen eig = jacobi_eigensolve(std::move(b));
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) eig.vectors(i, k) *= dinv[i];
    double lam_max = 0.0;
    for (double l : eig.values) lam_max = std::max(lam_max, l);
    const double zero_tol = 1e-12 * std::max(1.0, lam_max);
    for (double& l : eig.values) {
        if (l < -1e-8 * std::max(1.0, lam_max))
            throw ValidationError("generalized_eigensolve: operator is not positive semidefinite");
        if (l <= zero_tol) l = 0.0;
    }
    canonicalize_column_signs(eig.vectors);
    return eig;
}

/// Largest singular value via the symmetric eigenproblem of A^T A.
inline double spectral_norm(const Matrix& a) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    const Matrix ata = a.transposed() * a;
    SymmetricEigen eig = jacobi_eigensolve(ata);
    const double top = eig.values.empty() ? 0.0 : eig.values.back();
    return std::sqrt(std::max(top, 0.0));
}

/// Smallest singular value of a symmetric matrix (min |eigenvalue|).
inline double min_singular_value_symmetric(const Matrix& a) {
    if (a.rows() == 0) return 0.0;
    SymmetricEigen eig = jacobi_eigensolve(a);
    double best = std::abs(eig.values.front());
    for (double l : eig.values) best = std::min(best, std::abs(l));
    return best;
}

class CMatrix {
public:
    CMatrix() = default;
    CMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, Complex(0.0, 0.0)) {}

    static CMatrix identity(int n) {
        CMatrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = Complex(1.0, 0.0);
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    Complex& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    Complex operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    CMatrix operator*(const CMatrix& rhs) const {
        if (cols_ != rhs.rows_) throw ValidationError("cmatrix multiply: inner dimensions differ");
        CMatrix out(rows_, rhs.cols_);
        for (int i = 0; i < rows_; ++i)
            for (int k = 0; k < cols_; ++k) {
                const Complex a = (*this)(i, k);
                if (a == Complex(0.0, 0.0)) continue;
                for (int j = 0; j < rhs.cols_; ++j) out(i, j) += a * rhs(k, j);
            }
        return out;
    }

    CMatrix operator-(const CMatrix& rhs) const {
        if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw ValidationError("cmatrix subtract: shape mismatch");
        CMatrix out(rows_, cols_);
        for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] - rhs.data_[i];
        return out;
    }

    Complex trace() const {
        Complex t(0.0, 0.0);
        const int n = std::min(rows_, cols_);
        for (int i = 0; i < n; ++i) t += (*this)(i, i);
        return t;
    }

    double max_abs() const {
        double m = 0.0;
        for (const Complex& v : data_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<Complex> data_;
};

/// Operator norm of a complex matrix through the standard real 2n embedding
/// [[Re, -Im], [Im, Re]], which shares its singular values with the original.
inline double spectral_norm(const CMatrix& a) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    Matrix e(2 * a.rows(), 2 * a.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) {
            const Complex z = a(i, j);
            e(i, j) = z.real();
            e(i, j + a.cols()) = -z.imag();
            e(i + a.rows(), j) = z.imag();
            e(i + a.rows(), j + a.cols()) = z.real();
        }
    return spectral_norm(e);
}

}  // namespace orbifold
