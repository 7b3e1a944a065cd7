#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

#include "heunmcv/errors.hpp"

namespace heunmcv {

using Complex = std::complex<double>;

/// Dense row-major complex matrix. Sizes here are tiny (2x2 .. 18x6), so the
/// interface favors clarity over allocation tricks.
class CMatrix {
public:
    CMatrix() : rows_(0), cols_(0) {}
    CMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(size_t(rows) * cols) {}
    CMatrix(int rows, int cols, std::initializer_list<Complex> entries);

    static CMatrix identity(int n);
    static CMatrix zero(int rows, int cols) { return CMatrix(rows, cols); }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    Complex& operator()(int i, int j) { return a_[size_t(i) * cols_ + j]; }
    const Complex& operator()(int i, int j) const { return a_[size_t(i) * cols_ + j]; }

    CMatrix operator+(const CMatrix& o) const;
    CMatrix operator-(const CMatrix& o) const;
    CMatrix operator*(const CMatrix& o) const;
    CMatrix operator*(Complex s) const;
    CMatrix& operator+=(const CMatrix& o);

    CMatrix transpose() const;
    /// Copies o into this matrix with its upper-left corner at (i0, j0).
    void set_block(int i0, int j0, const CMatrix& o);
    CMatrix block(int i0, int j0, int rows, int cols) const;

    double frobenius_norm() const;
    double max_abs() const;
    bool finite() const;

private:
    int rows_, cols_;
    std::vector<Complex> a_;
};

inline CMatrix operator*(Complex s, const CMatrix& m) { return m * s; }

/// Orthonormal basis (columns returned as vectors) of the null space of m.
/// Rank is decided by SVD with threshold tol * sigma_max; each returned v
/// satisfies |m v| <= tol * |m|.
std::vector<std::vector<Complex>> kernel_basis(const CMatrix& m, double tol = 1e-10);

int rank(const CMatrix& m, double tol = 1e-10);
Complex det(const CMatrix& m);
CMatrix inverse(const CMatrix& m);
std::vector<Complex> eigenvalues(const CMatrix& m);
/// Solves m x = b for square m.
std::vector<Complex> solve(const CMatrix& m, const std::vector<Complex>& b);

}  // namespace heunmcv
