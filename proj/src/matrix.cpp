#include "heunmcv/matrix.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace heunmcv {

const char* err_name(Err e) {
    switch (e) {
        case Err::InvalidInput: return "InvalidInput";
        case Err::PoleError: return "PoleError";
        case Err::UseInfinityRealization: return "UseInfinityRealization";
        case Err::DegenerateThetaInf: return "DegenerateThetaInf";
        case Err::UseLineRealization: return "UseLineRealization";
        case Err::FirstOrderReducible: return "FirstOrderReducible";
        case Err::NotHeunShaped: return "NotHeunShaped";
        case Err::TransitionUndefined: return "TransitionUndefined";
        case Err::NoGluing: return "NoGluing";
        case Err::NotRealizable: return "NotRealizable";
        case Err::DegenerateDenominator: return "DegenerateDenominator";
        case Err::GeneratorUndefined: return "GeneratorUndefined";
        case Err::MapUndefined: return "MapUndefined";
        case Err::GaugeUndefined: return "GaugeUndefined";
        case Err::KernelUndefined: return "KernelUndefined";
        case Err::WrongBranch: return "WrongBranch";
        case Err::BadGerm: return "BadGerm";
        case Err::LogarithmicCase: return "LogarithmicCase";
        case Err::NotRegularSingular: return "NotRegularSingular";
        case Err::PathTooClose: return "PathTooClose";
        case Err::BranchError: return "BranchError";
        case Err::QuadratureError: return "QuadratureError";
        case Err::VerificationFailure: return "VerificationFailure";
    }
    return "Error";
}

namespace {

Eigen::MatrixXcd to_eigen(const CMatrix& m) {
    Eigen::MatrixXcd e(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
    return e;
}

CMatrix from_eigen(const Eigen::MatrixXcd& e) {
    CMatrix m(int(e.rows()), int(e.cols()));
    for (int i = 0; i < e.rows(); ++i)
        for (int j = 0; j < e.cols(); ++j) m(i, j) = e(i, j);
    return m;
}

void require_finite(const CMatrix& m, const char* op) {
    if (!m.finite()) fail(Err::InvalidInput, std::string(op) + ": matrix has non-finite entries");
}

}  // namespace

CMatrix::CMatrix(int rows, int cols, std::initializer_list<Complex> entries)
    : rows_(rows), cols_(cols), a_(entries) {
    if (int(a_.size()) != rows * cols)
        fail(Err::InvalidInput, "CMatrix: initializer size does not match shape");
}

CMatrix CMatrix::identity(int n) {
    CMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

CMatrix CMatrix::operator+(const CMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) fail(Err::InvalidInput, "matrix add: shape mismatch");
    CMatrix r(rows_, cols_);
    for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] + o.a_[i];
    return r;
}

CMatrix CMatrix::operator-(const CMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) fail(Err::InvalidInput, "matrix sub: shape mismatch");
    CMatrix r(rows_, cols_);
    for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] - o.a_[i];
    return r;
}

CMatrix CMatrix::operator*(const CMatrix& o) const {
    if (cols_ != o.rows_) fail(Err::InvalidInput, "matrix mul: shape mismatch");
    CMatrix r(rows_, o.cols_);
    for (int i = 0; i < rows_; ++i)
        for (int k = 0; k < cols_; ++k) {
            Complex v = (*this)(i, k);
            if (v == 0.0) continue;
            for (int j = 0; j < o.cols_; ++j) r(i, j) += v * o(k, j);
        }
    return r;
}

CMatrix CMatrix::operator*(Complex s) const {
    CMatrix r(rows_, cols_);
    for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] * s;
    return r;
}

CMatrix& CMatrix::operator+=(const CMatrix& o) {
    *this = *this + o;
    return *this;
}

CMatrix CMatrix::transpose() const {
    CMatrix r(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
    return r;
}

void CMatrix::set_block(int i0, int j0, const CMatrix& o) {
    if (i0 + o.rows_ > rows_ || j0 + o.cols_ > cols_)
        fail(Err::InvalidInput, "set_block: block exceeds matrix bounds");
    for (int i = 0; i < o.rows_; ++i)
        for (int j = 0; j < o.cols_; ++j) (*this)(i0 + i, j0 + j) = o(i, j);
}

CMatrix CMatrix::block(int i0, int j0, int rows, int cols) const {
    CMatrix r(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) r(i, j) = (*this)(i0 + i, j0 + j);
    return r;
}

double CMatrix::frobenius_norm() const {
    double s = 0;
    for (const auto& v : a_) s += std::norm(v);
    return std::sqrt(s);
}

double CMatrix::max_abs() const {
    double s = 0;
    for (const auto& v : a_) s = std::max(s, std::abs(v));
    return s;
}

bool CMatrix::finite() const {
    for (const auto& v : a_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

std::vector<std::vector<Complex>> kernel_basis(const CMatrix& m, double tol) {
    require_finite(m, "kernel_basis");
    if (m.rows() == 0 || m.cols() == 0) fail(Err::InvalidInput, "kernel_basis: empty matrix");
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(to_eigen(m), Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double smax = sv.size() ? sv(0) : 0.0;
    int r = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > tol * smax) ++r;
    std::vector<std::vector<Complex>> basis;
    for (int j = r; j < m.cols(); ++j) {
        std::vector<Complex> v(m.cols());
        for (int i = 0; i < m.cols(); ++i) v[i] = svd.matrixV()(i, j);
        basis.push_back(std::move(v));
    }
    return basis;
}

int rank(const CMatrix& m, double tol) {
    require_finite(m, "rank");
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(to_eigen(m));
    const auto& sv = svd.singularValues();
    double smax = sv.size() ? sv(0) : 0.0;
    int r = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > tol * smax) ++r;
    return r;
}

Complex det(const CMatrix& m) {
    require_finite(m, "det");
    if (m.rows() != m.cols()) fail(Err::InvalidInput, "det: matrix not square");
    return to_eigen(m).determinant();
}

CMatrix inverse(const CMatrix& m) {
    require_finite(m, "inverse");
    if (m.rows() != m.cols()) fail(Err::InvalidInput, "inverse: matrix not square");
    Eigen::MatrixXcd e = to_eigen(m);
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(e);
    if (!lu.isInvertible()) fail(Err::DegenerateDenominator, "inverse: matrix is singular");
    return from_eigen(lu.inverse());
}

std::vector<Complex> eigenvalues(const CMatrix& m) {
    require_finite(m, "eigenvalues");
    if (m.rows() != m.cols()) fail(Err::InvalidInput, "eigenvalues: matrix not square");
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(to_eigen(m), false);
    std::vector<Complex> ev(m.rows());
    for (int i = 0; i < m.rows(); ++i) ev[i] = es.eigenvalues()(i);
    return ev;
}

std::vector<Complex> solve(const CMatrix& m, const std::vector<Complex>& b) {
    require_finite(m, "solve");
    if (m.rows() != m.cols() || int(b.size()) != m.rows())
        fail(Err::InvalidInput, "solve: shape mismatch");
    Eigen::VectorXcd rhs(b.size());
    for (size_t i = 0; i < b.size(); ++i) rhs(long(i)) = b[i];
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(to_eigen(m));
    if (!lu.isInvertible()) fail(Err::DegenerateDenominator, "solve: matrix is singular");
    Eigen::VectorXcd x = lu.solve(rhs);
    std::vector<Complex> out(b.size());
    for (size_t i = 0; i < b.size(); ++i) out[i] = x(long(i));
    return out;
}

}  // namespace heunmcv
