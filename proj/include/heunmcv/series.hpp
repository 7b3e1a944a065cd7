#pragma once

#include <vector>

#include "heunmcv/matrix.hpp"

namespace heunmcv {

/// Truncated power series sum c[j] x^j. Arithmetic truncates to the shorter
/// operand's length; callers decide working lengths.
struct PowerSeries {
    std::vector<Complex> c;

    int len() const { return int(c.size()); }
    Complex at(int j) const { return j >= 0 && j < len() ? c[size_t(j)] : Complex(0.0); }

    PowerSeries truncated(int n) const;
    PowerSeries plus(const PowerSeries& o) const;
    PowerSeries minus(const PowerSeries& o) const;
    PowerSeries times(const PowerSeries& o) const;
    PowerSeries times(Complex s) const;
    /// Division; leading denominator coefficient must be nonzero.
    PowerSeries over(const PowerSeries& o) const;
};

/// Horner evaluation at displacement x from the expansion point.
Complex eval(const PowerSeries& p, Complex x);

/// Term-by-term derivative; the length shrinks by one (an empty or constant
/// series differentiates to the zero series of length max(len-1, 0)).
PowerSeries derivative(const PowerSeries& p);

/// Laurent series sum_{j} c[j - offset]... i.e. term j runs over
/// offset, offset+1, ... with coefficient c[j - offset].
struct LaurentSeries {
    int offset = 0;
    PowerSeries p;

    Complex coeff(int j) const { return p.at(j - offset); }
    /// Drops exactly-zero leading terms, bumping offset.
    void normalize();
};

}  // namespace heunmcv
