#include "heunmcv/fuchsian.hpp"

#include <algorithm>
#include <cmath>

namespace heunmcv {

namespace {

// Inputs closer than this to a degenerate configuration are rejected, not
// regularized; the caller is told which specialized construction applies.
constexpr double kGuard = 1e-8;

void check_t(Complex t) {
    if (std::abs(t) <= kGuard || std::abs(t - 1.0) <= kGuard)
        fail(Err::InvalidInput, "t must stay away from 0 and 1");
}

bool lex_less(Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

// Roots of x^2 + b x + c, returned in (re, im) order.
std::array<Complex, 2> quadratic_roots(Complex b, Complex c) {
    Complex d = std::sqrt(b * b - 4.0 * c);
    Complex big = (std::abs(-b + d) >= std::abs(-b - d)) ? (-b + d) / 2.0 : (-b - d) / 2.0;
    Complex other = (std::abs(big) > 0.0) ? c / big : -b - big;
    std::array<Complex, 2> r{big, other};
    if (lex_less(r[1], r[0])) std::swap(r[0], r[1]);
    return r;
}

// Numerator of the (i,j) entry of A(z) over the common denominator
// z(z-1)(z-t).
CPoly entry_numerator(const FuchsianSystem& sys, int i, int j) {
    return CPoly::from_roots({1.0, sys.t}) * sys.a0(i, j) +
           CPoly::from_roots({0.0, sys.t}) * sys.a1(i, j) +
           CPoly::from_roots({0.0, 1.0}) * sys.at(i, j);
}

void check_generic(const ThetaParams& th, const SystemState& s) {
    check_t(s.t);
    if (s.lambda_infinite)
        fail(Err::UseInfinityRealization, "lambda is infinite; use the infinity realization");
    if (std::abs(s.k) <= 1e-12) fail(Err::InvalidInput, "k must be nonzero");
    if (std::abs(th.thinf) <= kGuard)
        fail(Err::DegenerateThetaInf, "theta_inf vanishes; the u-variables are not determined");
    if (std::abs(s.lambda) <= kGuard || std::abs(s.lambda - 1.0) <= kGuard ||
        std::abs(s.lambda - s.t) <= kGuard * (1.0 + std::abs(s.t)))
        fail(Err::UseLineRealization, "lambda collides with a singular point; use the line realization");
}

}  // namespace

Complex kappa1(const ThetaParams& th) { return th.kappa1(); }
Complex kappa2(const ThetaParams& th) { return th.kappa2(); }

CMatrix residue_matrix(Complex u, Complex theta, Complex w) {
    if (std::abs(w) == 0.0) fail(Err::InvalidInput, "residue_matrix needs w != 0");
    CMatrix m(2, 2);
    m(0, 0) = u + theta;
    m(0, 1) = -w;
    m(1, 0) = u * (u + theta) / w;
    m(1, 1) = -u;
    return m;
}

CMatrix FuchsianSystem::residue_sum_neg() const {
    return (a0 + a1 + at) * Complex(-1.0);
}

CMatrix FuchsianSystem::coefficient_at(Complex z) const {
    for (Complex p : {Complex(0.0), Complex(1.0), t})
        if (std::abs(z - p) <= 1e-13 * (1.0 + std::abs(p)))
            fail(Err::PoleError, "coefficient matrix evaluated at a singular point");
    return a0 * (1.0 / z) + a1 * (1.0 / (z - 1.0)) + at * (1.0 / (z - t));
}

CRational FuchsianSystem::entry(int i, int j) const {
    return CRational(entry_numerator(*this, i, j), CPoly::from_roots({0.0, 1.0, t}));
}

Weights weights(const SystemState& s) {
    check_t(s.t);
    const Complex t = s.t, k = s.k;
    Weights w;
    if (s.lambda_infinite) {
        // limiting weights of the infinity realization scaling
        w.w0 = -k / t;
        w.w1 = k / (t - 1.0);
        w.wt = -k / (t * (t - 1.0));
        return w;
    }
    const Complex lam = s.lambda;
    w.w0 = k * lam / t;
    w.w1 = -k * (lam - 1.0) / (t - 1.0);
    w.wt = k * (lam - t) / (t * (t - 1.0));
    double tiny = 1e-10 * (1.0 + std::abs(k));
    w.degenerate = std::abs(w.w0) <= tiny || std::abs(w.w1) <= tiny || std::abs(w.wt) <= tiny;
    return w;
}

SystemVariables solve_system_variables(const ThetaParams& th, const SystemState& s) {
    check_generic(th, s);
    const Complex t = s.t, lam = s.lambda, mu = s.mu;
    const Complex k1 = th.kappa1(), thinf = th.thinf;
    Weights w = weights(s);

    // One shared quadratic-in-mu core per point; the three differ only in
    // the mu coefficient and the constant.
    const Complex cubic = lam * (lam - 1.0) * (lam - t);
    const Complex base_mu = 2.0 * k1 * (lam - 1.0) * (lam - t);

    const Complex b0 = base_mu - th.th1 * (lam - t) - t * th.tht * (lam - 1.0);
    const Complex c0 = k1 * (k1 * (lam - t - 1.0) - th.th1 - t * th.tht);
    const Complex b1 = base_mu + (thinf - th.th1) * (lam - t) - t * th.tht * (lam - 1.0);
    const Complex c1 = k1 * (k1 * (lam - t + 1.0) + th.th0 - (t - 1.0) * th.tht);
    const Complex bt = base_mu - th.th1 * (lam - t) + t * (thinf - th.tht) * (lam - 1.0);
    const Complex ct = k1 * (k1 * (lam - t + 1.0) + th.th0 + (t - 1.0) * (thinf - th.tht));

    SystemVariables v;
    v.w0 = w.w0;
    v.w1 = w.w1;
    v.wt = w.wt;
    v.u0 = -th.th0 + lam / (t * thinf) * (cubic * mu * mu + b0 * mu + c0);
    v.u1 = -th.th1 - (lam - 1.0) / ((t - 1.0) * thinf) * (cubic * mu * mu + b1 * mu + c1);
    v.ut = -th.tht + (lam - t) / (t * (t - 1.0) * thinf) * (cubic * mu * mu + bt * mu + ct);
    return v;
}

FuchsianSystem build_system(const ThetaParams& th, const SystemState& s) {
    SystemVariables v = solve_system_variables(th, s);
    FuchsianSystem sys;
    sys.t = s.t;
    sys.a0 = residue_matrix(v.u0, th.th0, v.w0);
    sys.a1 = residue_matrix(v.u1, th.th1, v.w1);
    sys.at = residue_matrix(v.ut, th.tht, v.wt);
    return sys;
}

ScalarODE2 reduce_to_scalar(const FuchsianSystem& sys) {
    check_t(sys.t);
    CPoly d3 = CPoly::from_roots({0.0, 1.0, sys.t});
    CPoly n11 = entry_numerator(sys, 0, 0);
    CPoly n12 = entry_numerator(sys, 0, 1);
    CPoly n21 = entry_numerator(sys, 1, 0);
    CPoly n22 = entry_numerator(sys, 1, 1);

    double scale = std::max({n11.max_coeff(), n12.max_coeff(), n21.max_coeff(), n22.max_coeff(), 1.0});
    if (n12.max_coeff() <= 1e-14 * scale)
        fail(Err::FirstOrderReducible, "a12 vanishes identically; y1 already satisfies a first-order equation");

    CPoly d3p = d3.derivative();
    CPoly n12p = n12.derivative();

    // Eliminating y2 from y1' = a11 y1 + a12 y2 gives
    //   p1 = -(a11 + a22) - a12'/a12,  p2 = a11 a22 - a12 a21 - a11' + a11 a12'/a12
    // and with every a_ij = n_ij/d3 the d3' cross terms in p2 cancel.
    CPoly p1num = (n11 + n22) * n12 * Complex(-1.0) - n12p * d3 + d3p * n12;
    CPoly p1den = d3 * n12;

    CPoly p2top = (n11 * n22 - n12 * n21 - n11.derivative() * d3) * n12 + n11 * n12p * d3;
    auto dm = poly_divmod(p2top, d3);
    ScalarODE2 out;
    out.p1 = CRational(p1num, p1den);
    if (dm.rem.max_coeff() <= 1e-9 * std::max(p2top.max_coeff(), 1e-300)) {
        // residue eigenvalue 0 at each finite point keeps p2 to simple poles
        out.p2 = CRational(dm.quot, d3 * n12);
    } else {
        out.p2 = CRational(p2top, d3 * d3 * n12);
    }
    return out;
}

Complex hamiltonian_h(const ThetaParams& th, const SystemState& s) {
    check_t(s.t);
    if (s.lambda_infinite)
        fail(Err::UseInfinityRealization, "the Hamiltonian is stated for finite lambda");
    const Complex t = s.t, lam = s.lambda, mu = s.mu;
    const Complex k1 = th.kappa1(), k2 = th.kappa2();
    Complex top = lam * (lam - 1.0) * (lam - t) * mu * mu -
                  (th.th0 * (lam - 1.0) * (lam - t) + th.th1 * lam * (lam - t) +
                   (th.tht - 1.0) * lam * (lam - 1.0)) *
                      mu +
                  k1 * (k2 + 1.0) * (lam - t);
    return top / (t * (t - 1.0));
}

ScalarODE2 scalar_ode_unguarded(const ThetaParams& th, const SystemState& s) {
    check_t(s.t);
    if (s.lambda_infinite)
        fail(Err::UseInfinityRealization, "the scalar form is stated for finite lambda");
    const Complex t = s.t, lam = s.lambda, mu = s.mu;
    const Complex k1 = th.kappa1(), k2 = th.kappa2();
    const Complex h = hamiltonian_h(th, s);

    CPoly den = CPoly::from_roots({0.0, 1.0, t, lam});
    CPoly p1num = CPoly::from_roots({1.0, t, lam}) * (1.0 - th.th0) +
                  CPoly::from_roots({0.0, t, lam}) * (1.0 - th.th1) +
                  CPoly::from_roots({0.0, 1.0, lam}) * (1.0 - th.tht) +
                  CPoly::from_roots({0.0, 1.0, t}) * Complex(-1.0);
    CPoly p2num = CPoly::from_roots({t, lam}) * (k1 * (k2 + 1.0)) +
                  CPoly::from_roots({t}) * (lam * (lam - 1.0) * mu) +
                  CPoly::from_roots({lam}) * (-t * (t - 1.0) * h);
    return {CRational(p1num, den), CRational(p2num, den)};
}

ScalarODE2 scalar_ode_of_parameters(const ThetaParams& th, const SystemState& s) {
    check_t(s.t);
    if (s.lambda_infinite)
        fail(Err::UseInfinityRealization, "the scalar form is stated for finite lambda");
    if (std::abs(s.lambda) <= kGuard || std::abs(s.lambda - 1.0) <= kGuard ||
        std::abs(s.lambda - s.t) <= kGuard * (1.0 + std::abs(s.t)))
        fail(Err::UseLineRealization, "lambda collides with a singular point; restrict to the line instead");
    return scalar_ode_unguarded(th, s);
}

HeunParams heun_normal_form(const ScalarODE2& ode, Complex t, double tol) {
    check_t(t);
    CPoly den3 = CPoly::from_roots({0.0, 1.0, t});

    // p1 * z(z-1)(z-t) must reduce to a polynomial of degree <= 2.
    CPoly prod1 = ode.p1.num() * den3;
    auto dm1 = poly_divmod(prod1, ode.p1.den());
    if (dm1.rem.max_coeff() > tol * std::max(prod1.max_coeff(), 1e-300))
        fail(Err::NotHeunShaped, "p1 has a pole outside {0, 1, t}");
    CPoly n1 = dm1.quot;
    for (int j = 3; j <= n1.degree(); ++j)
        if (std::abs(n1.coeff(j)) > tol * std::max(n1.max_coeff(), 1e-300))
            fail(Err::NotHeunShaped, "p1 does not vanish at infinity");

    // p2 * z(z-1)(z-t) must reduce to a polynomial of degree <= 1.
    CPoly prod2 = ode.p2.num() * den3;
    auto dm2 = poly_divmod(prod2, ode.p2.den());
    if (dm2.rem.max_coeff() > tol * std::max(prod2.max_coeff(), 1e-300))
        fail(Err::NotHeunShaped, "p2 has a pole outside {0, 1, t}");
    CPoly n2 = dm2.quot;
    for (int j = 2; j <= n2.degree(); ++j)
        if (std::abs(n2.coeff(j)) > tol * std::max(n2.max_coeff(), 1e-300))
            fail(Err::NotHeunShaped, "p2 decays too slowly at infinity");

    HeunParams hp;
    hp.t = t;
    hp.gamma = n1.eval(0.0) / t;
    hp.delta = n1.eval(1.0) / (1.0 - t);
    hp.epsilon = n1.eval(t) / (t * (t - 1.0));
    Complex ab = n2.coeff(1);
    hp.q = -n2.coeff(0);
    Complex sum = hp.gamma + hp.delta + hp.epsilon - 1.0;
    auto r = quadratic_roots(-sum, ab);
    hp.alpha = r[0];
    hp.beta = r[1];
    return hp;
}

ScalarODE2 heun_ode(const HeunParams& hp) {
    check_t(hp.t);
    double scale = 1.0 + std::abs(hp.gamma) + std::abs(hp.delta) + std::abs(hp.epsilon) +
                   std::abs(hp.alpha) + std::abs(hp.beta);
    if (std::abs(hp.fuchs_defect()) > 1e-8 * scale)
        fail(Err::InvalidInput, "exponents violate gamma+delta+epsilon = alpha+beta+1");
    CPoly den3 = CPoly::from_roots({0.0, 1.0, hp.t});
    CPoly p1num = CPoly::from_roots({1.0, hp.t}) * hp.gamma +
                  CPoly::from_roots({0.0, hp.t}) * hp.delta +
                  CPoly::from_roots({0.0, 1.0}) * hp.epsilon;
    CPoly p2num({-hp.q, hp.alpha * hp.beta});
    return {CRational(p1num, den3), CRational(p2num, den3)};
}

std::array<Complex, 2> indicial_exponents(const ScalarODE2& ode, Complex s, bool point_at_infinity) {
    Complex P, Q;
    if (point_at_infinity) {
        int dn1 = ode.p1.num().degree(), dd1 = ode.p1.den().degree();
        if (!ode.p1.is_zero() && dn1 > dd1 - 1)
            fail(Err::NotRegularSingular, "p1 does not decay at infinity");
        P = (dn1 == dd1 - 1) ? ode.p1.num().lead() / ode.p1.den().lead() : Complex(0.0);
        int dn2 = ode.p2.num().degree(), dd2 = ode.p2.den().degree();
        if (!ode.p2.is_zero() && dn2 > dd2 - 2)
            fail(Err::NotRegularSingular, "p2 decays too slowly at infinity");
        Q = (dn2 == dd2 - 2) ? ode.p2.num().lead() / ode.p2.den().lead() : Complex(0.0);
        // local exponents in z: roots of rho(rho+1) - P rho + Q
        return quadratic_roots(1.0 - P, Q);
    }
    LaurentSeries l1 = ode.p1.laurent_at(s, 3);
    LaurentSeries l2 = ode.p2.laurent_at(s, 3);
    for (int j = l1.offset; j < -1; ++j)
        if (std::abs(l1.coeff(j)) > 1e-9 * (1.0 + std::abs(l1.coeff(-1))))
            fail(Err::NotRegularSingular, "p1 has a pole of order > 1");
    for (int j = l2.offset; j < -2; ++j)
        if (std::abs(l2.coeff(j)) > 1e-9 * (1.0 + std::abs(l2.coeff(-2))))
            fail(Err::NotRegularSingular, "p2 has a pole of order > 2");
    P = l1.coeff(-1);
    Q = l2.coeff(-2);
    return quadratic_roots(P - 1.0, Q);
}

double system_constraint_residual(const ThetaParams& th, const SystemState& s, const SystemVariables& v) {
    check_t(s.t);
    if (s.lambda_infinite)
        fail(Err::UseInfinityRealization, "constraint residual is stated for finite lambda");
    const Complex t = s.t, lam = s.lambda, mu = s.mu, k = s.k;
    const Complex k1 = th.kappa1(), k2 = th.kappa2();
    auto rel = [](Complex lhs, Complex rhs) {
        return std::abs(lhs - rhs) / (1.0 + std::abs(lhs) + std::abs(rhs));
    };
    double r = 0.0;
    r = std::max(r, rel(v.w0 + v.w1 + v.wt, 0.0));
    r = std::max(r, rel(v.w0 * (t + 1.0) + v.w1 * t + v.wt, k));
    r = std::max(r, rel(v.w0 * t, k * lam));
    r = std::max(r, rel(v.u0 * (v.u0 + th.th0) / v.w0 + v.u1 * (v.u1 + th.th1) / v.w1 +
                            v.ut * (v.ut + th.tht) / v.wt,
                        0.0));
    r = std::max(r, rel((v.u0 + th.th0) + (v.u1 + th.th1) + (v.ut + th.tht), -k1));
    r = std::max(r, rel(v.u0 + v.u1 + v.ut, k2));
    r = std::max(r, rel((v.u0 + th.th0) / lam + (v.u1 + th.th1) / (lam - 1.0) +
                            (v.ut + th.tht) / (lam - t),
                        mu));
    return r;
}

}  // namespace heunmcv
