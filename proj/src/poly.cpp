#include "heunmcv/poly.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace heunmcv {

CPoly::CPoly(std::vector<Complex> coeffs, double trim_rel) : c_(std::move(coeffs)) {
    if (c_.empty()) c_.push_back(0.0);
    for (const auto& v : c_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            fail(Err::InvalidInput, "CPoly: non-finite coefficient");
    double m = 0;
    for (const auto& v : c_) m = std::max(m, std::abs(v));
    while (c_.size() > 1 && std::abs(c_.back()) <= trim_rel * m) c_.pop_back();
    if (c_.size() == 1 && std::abs(c_[0]) == 0.0) c_[0] = 0.0;
}

CPoly CPoly::from_roots(const std::vector<Complex>& roots, Complex lead) {
    CPoly p({lead});
    for (Complex r : roots) p = p * CPoly::linear(r);
    return p;
}

Complex CPoly::eval(Complex z) const {
    Complex acc = 0.0;
    for (size_t i = c_.size(); i-- > 0;) acc = acc * z + c_[i];
    return acc;
}

CPoly CPoly::derivative() const {
    if (c_.size() == 1) return CPoly();
    std::vector<Complex> d(c_.size() - 1);
    for (size_t i = 1; i < c_.size(); ++i) d[i - 1] = double(i) * c_[i];
    return CPoly(std::move(d));
}

CPoly CPoly::shifted(Complex a) const {
    // Repeated synthetic division by (z - a); out[k] is the k-th Taylor
    // coefficient at a, so p(z) = sum out[k] (z-a)^k exactly.
    std::vector<Complex> work = c_, out(c_.size());
    size_t n = c_.size();
    for (size_t k = 0; k < n; ++k) {
        size_t m = n - k;
        Complex carry = work[m - 1];
        for (size_t i = m - 1; i-- > 0;) {
            Complex tmp = work[i];
            work[i] = carry;
            carry = tmp + a * carry;
        }
        out[k] = carry;
    }
    return CPoly(std::move(out), 0.0);
}

CPoly CPoly::operator+(const CPoly& o) const {
    std::vector<Complex> r(std::max(c_.size(), o.c_.size()), 0.0);
    for (size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
    for (size_t i = 0; i < o.c_.size(); ++i) r[i] += o.c_[i];
    return CPoly(std::move(r));
}

CPoly CPoly::operator-(const CPoly& o) const {
    std::vector<Complex> r(std::max(c_.size(), o.c_.size()), 0.0);
    for (size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
    for (size_t i = 0; i < o.c_.size(); ++i) r[i] -= o.c_[i];
    return CPoly(std::move(r));
}

CPoly CPoly::operator*(const CPoly& o) const {
    if (is_zero() || o.is_zero()) return CPoly();
    std::vector<Complex> r(c_.size() + o.c_.size() - 1, 0.0);
    for (size_t i = 0; i < c_.size(); ++i)
        for (size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
    return CPoly(std::move(r));
}

CPoly CPoly::operator*(Complex s) const {
    std::vector<Complex> r = c_;
    for (auto& v : r) v *= s;
    return CPoly(std::move(r));
}

double CPoly::max_coeff() const {
    double m = 0;
    for (const auto& v : c_) m = std::max(m, std::abs(v));
    return m;
}

std::vector<Complex> CPoly::roots() const {
    int n = degree();
    if (n <= 0) return {};
    if (n == 1) return {-c_[0] / c_[1]};
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -c_[size_t(i)] / c_.back();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
    std::vector<Complex> out(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) out[size_t(i)] = es.eigenvalues()(i);
    return out;
}

PolyDivMod poly_divmod(const CPoly& a, const CPoly& b) {
    if (b.is_zero()) fail(Err::InvalidInput, "poly_divmod: division by the zero polynomial");
    int da = a.degree(), db = b.degree();
    if (da < db) return {CPoly(), a};
    std::vector<Complex> rem = a.coeffs();
    std::vector<Complex> quot(size_t(da - db) + 1, Complex(0.0));
    const Complex blead = b.lead();
    for (int k = da - db; k >= 0; --k) {
        Complex q = rem[size_t(k + db)] / blead;
        quot[size_t(k)] = q;
        for (int j = 0; j <= db; ++j) rem[size_t(k + j)] -= q * b.coeff(j);
    }
    rem.resize(size_t(db > 0 ? db : 1));
    return {CPoly(std::move(quot)), CPoly(std::move(rem))};
}

}  // namespace heunmcv
