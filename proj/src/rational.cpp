#include "heunmcv/rational.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace heunmcv {

namespace {

// Greedy pairing of numerator roots against denominator roots.
void cancel_matched_roots(std::vector<Complex>& nr, std::vector<Complex>& dr, double tol) {
    for (size_t i = 0; i < dr.size();) {
        bool cancelled = false;
        for (size_t j = 0; j < nr.size(); ++j) {
            if (std::abs(nr[j] - dr[i]) <= tol * (1.0 + std::abs(dr[i]))) {
                nr.erase(nr.begin() + long(j));
                dr.erase(dr.begin() + long(i));
                cancelled = true;
                break;
            }
        }
        if (!cancelled) ++i;
    }
}

double poly_scale_at(const CPoly& p, Complex z) {
    double s = 0, zp = 1, az = std::abs(z);
    for (int k = 0; k <= std::max(p.degree(), 0); ++k) {
        s += std::abs(p.coeff(k)) * zp;
        zp *= az;
    }
    return s;
}

}  // namespace

CRational::CRational(CPoly num, CPoly den, double root_tol) : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) fail(Err::InvalidInput, "CRational: zero denominator");
    if (num_.is_zero()) {
        den_ = CPoly::constant(1.0);
        return;
    }
    if (den_.degree() > 0 && num_.degree() > 0) {
        auto nr = num_.roots();
        auto dr = den_.roots();
        size_t before = dr.size();
        cancel_matched_roots(nr, dr, root_tol);
        if (dr.size() != before) {
            Complex nl = num_.lead(), dl = den_.lead();
            num_ = CPoly::from_roots(nr, nl);
            den_ = CPoly::from_roots(dr, dl);
        }
    }
    // monic denominator
    Complex dl = den_.lead();
    num_ = num_ * (1.0 / dl);
    den_ = den_ * (1.0 / dl);
}

Complex CRational::eval(Complex z) const {
    Complex d = den_.eval(z);
    double scale = poly_scale_at(den_, z);
    if (std::abs(d) <= 1e-12 * (scale > 0 ? scale : 1.0)) {
        std::ostringstream os;
        os << "rational_eval: pole at z = (" << z.real() << ", " << z.imag() << ")";
        fail(Err::PoleError, os.str());
    }
    return num_.eval(z) / d;
}

bool CRational::is_pole(Complex z, double tol) const {
    double scale = poly_scale_at(den_, z);
    return std::abs(den_.eval(z)) <= tol * (scale > 0 ? scale : 1.0);
}

CRational CRational::operator+(const CRational& o) const {
    return CRational(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
}

CRational CRational::operator-(const CRational& o) const {
    return CRational(num_ * o.den_ - o.num_ * den_, den_ * o.den_);
}

CRational CRational::operator*(const CRational& o) const {
    return CRational(num_ * o.num_, den_ * o.den_);
}

CRational CRational::operator/(const CRational& o) const {
    if (o.num_.is_zero()) fail(Err::InvalidInput, "rational division by zero");
    return CRational(num_ * o.den_, den_ * o.num_);
}

CRational CRational::operator*(Complex s) const { return CRational(num_ * s, den_); }

CRational CRational::derivative() const {
    return CRational(num_.derivative() * den_ - num_ * den_.derivative(), den_ * den_);
}

std::vector<std::pair<Complex, int>> CRational::poles(double cluster_tol) const {
    std::vector<std::pair<Complex, int>> out;
    for (Complex r : den_.roots()) {
        bool merged = false;
        for (auto& [c, m] : out) {
            if (std::abs(c - r) <= cluster_tol * (1.0 + std::abs(c))) {
                c = (c * double(m) + r) / double(m + 1);
                ++m;
                merged = true;
                break;
            }
        }
        if (!merged) out.emplace_back(r, 1);
    }
    return out;
}

LaurentSeries CRational::laurent_at(Complex a, int nterms) const {
    if (nterms <= 0) fail(Err::InvalidInput, "laurent_at: nterms must be positive");
    CPoly ns = num_.shifted(a), ds = den_.shifted(a);
    // multiplicity of the root a of den: count leading shifted coefficients
    // negligible against the coefficient scale
    double dscale = ds.max_coeff();
    int m = 0;
    while (m <= ds.degree() && std::abs(ds.coeff(m)) <= 1e-11 * dscale) ++m;
    if (m > ds.degree()) fail(Err::InvalidInput, "laurent_at: denominator vanishes identically");
    int nlead = 0;
    double nscale = ns.max_coeff();
    if (ns.is_zero()) {
        LaurentSeries z;
        z.offset = 0;
        z.p.c.assign(size_t(nterms), 0.0);
        return z;
    }
    while (nlead < ns.degree() && std::abs(ns.coeff(nlead)) <= 1e-13 * nscale) ++nlead;

    int need = nterms + m;
    PowerSeries nn, dd;
    nn.c.resize(size_t(need));
    dd.c.resize(size_t(need));
    for (int j = 0; j < need; ++j) {
        nn.c[size_t(j)] = (j + nlead <= ns.degree()) ? ns.coeff(j + nlead) : Complex(0.0);
        dd.c[size_t(j)] = (j + m <= ds.degree()) ? ds.coeff(j + m) : Complex(0.0);
    }
    LaurentSeries out;
    out.offset = nlead - m;
    out.p = nn.over(dd).truncated(nterms);
    return out;
}

Complex rational_eval(const CRational& r, Complex z) { return r.eval(z); }

}  // namespace heunmcv
