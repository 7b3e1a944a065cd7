#pragma once

#include <vector>

#include "heunmcv/matrix.hpp"

namespace heunmcv {

/// Polynomial over C with coefficients in ascending degree order.
/// Normalized form has no trailing near-zero coefficients (the zero
/// polynomial keeps a single 0 entry and reports degree -1).
class CPoly {
public:
    CPoly() : c_{0.0} {}
    explicit CPoly(std::vector<Complex> coeffs, double trim_rel = 1e-12);
    CPoly(std::initializer_list<Complex> coeffs) : CPoly(std::vector<Complex>(coeffs)) {}

    static CPoly constant(Complex a) { return CPoly({a}); }
    /// z - a
    static CPoly linear(Complex a) { return CPoly({-a, Complex(1.0)}); }
    static CPoly from_roots(const std::vector<Complex>& roots, Complex lead = 1.0);

    int degree() const { return is_zero() ? -1 : int(c_.size()) - 1; }
    bool is_zero() const { return c_.size() == 1 && c_[0] == 0.0; }
    const std::vector<Complex>& coeffs() const { return c_; }
    Complex coeff(int k) const { return k < int(c_.size()) ? c_[size_t(k)] : Complex(0.0); }
    Complex lead() const { return c_.back(); }

    Complex eval(Complex z) const;
    CPoly derivative() const;
    /// Rewrites the polynomial in powers of (z - a); exact coefficient shift.
    CPoly shifted(Complex a) const;

    CPoly operator+(const CPoly& o) const;
    CPoly operator-(const CPoly& o) const;
    CPoly operator*(const CPoly& o) const;
    CPoly operator*(Complex s) const;

    /// Max |coeff|; scale reference for relative tolerances.
    double max_coeff() const;
    std::vector<Complex> roots() const;

private:
    std::vector<Complex> c_;
};

struct PolyDivMod {
    CPoly quot, rem;
};

/// Euclidean division a = quot * b + rem with deg rem < deg b; throws on
/// zero b.
PolyDivMod poly_divmod(const CPoly& a, const CPoly& b);

}  // namespace heunmcv
