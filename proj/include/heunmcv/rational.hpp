#pragma once

#include "heunmcv/poly.hpp"
#include "heunmcv/series.hpp"

namespace heunmcv {

/// Rational function num/den over C. Construction cancels shared roots by
/// root matching (pairing tolerance root_tol) and rescales the denominator
/// monic. Exact polynomial GCD is hopeless in floating point; the
/// root-matching cancellation at 1e-9 is the contract here.
class CRational {
public:
    CRational() : num_(), den_({Complex(1.0)}) {}
    CRational(CPoly num, CPoly den, double root_tol = 1e-9);

    static CRational constant(Complex a) { return CRational(CPoly::constant(a), CPoly::constant(1.0)); }
    static CRational poly(CPoly p) { return CRational(std::move(p), CPoly::constant(1.0)); }
    /// c / (z - a)
    static CRational simple_fraction(Complex c, Complex a) {
        return CRational(CPoly::constant(c), CPoly::linear(a));
    }

    const CPoly& num() const { return num_; }
    const CPoly& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }

    /// Evaluates at z; throws PoleError (naming z) when the denominator
    /// vanishes there beyond tolerance.
    Complex eval(Complex z) const;
    bool is_pole(Complex z, double tol = 1e-9) const;

    CRational operator+(const CRational& o) const;
    CRational operator-(const CRational& o) const;
    CRational operator*(const CRational& o) const;
    CRational operator/(const CRational& o) const;
    CRational operator*(Complex s) const;
    CRational derivative() const;

    /// Poles after normalization, with multiplicities (root clusters merged
    /// at cluster_tol).
    std::vector<std::pair<Complex, int>> poles(double cluster_tol = 1e-7) const;

    /// Laurent expansion at a: r(z) = sum_{j >= offset} c_j (z-a)^j.
    LaurentSeries laurent_at(Complex a, int nterms) const;

private:
    CPoly num_, den_;
};

inline CRational operator*(Complex s, const CRational& r) { return r * s; }

/// rational_eval contract entry point (same as CRational::eval).
Complex rational_eval(const CRational& r, Complex z);

}  // namespace heunmcv
