#pragma once

#include <array>

#include "heunmcv/rational.hpp"

namespace heunmcv {

/// Local exponent data (theta_0, theta_1, theta_t, theta_inf) of a rank-2
/// Fuchsian system with singular points {0, 1, t, inf}. Residue eigenvalues
/// at the finite points are {0, theta_p}; at infinity they are kappa1 and
/// kappa2 with theta_inf = kappa1 - kappa2.
struct ThetaParams {
    Complex th0, th1, tht, thinf;

    Complex kappa1() const { return (thinf - th0 - th1 - tht) / 2.0; }
    Complex kappa2() const { return -(thinf + th0 + th1 + tht) / 2.0; }
};

/// Moving data (t; lambda, mu; k). lambda lives on the spectral curve; the
/// point lambda = infinity is representable but rejected by the generic
/// constructors (the infinity realization handles it).
struct SystemState {
    Complex t;
    Complex lambda;
    Complex mu;
    Complex k = 1.0;
    bool lambda_infinite = false;

    static SystemState at_infinity(Complex t, Complex mu, Complex k) {
        return SystemState{t, 0.0, mu, k, true};
    }
};

struct Weights {
    Complex w0, w1, wt;
    bool degenerate = false;  // some w_p vanished (lambda on a line)
};

struct SystemVariables {
    Complex w0, w1, wt;
    Complex u0, u1, ut;
};

/// Rank-2 Fuchsian system dY/dz = (a0/z + a1/(z-1) + at/(z-t)) Y.
struct FuchsianSystem {
    Complex t;
    CMatrix a0, a1, at;  // 2x2 residues

    CMatrix residue_sum_neg() const;            // -(a0+a1+at), the residue at infinity
    CMatrix coefficient_at(Complex z) const;    // pointwise A(z)
    CRational entry(int i, int j) const;        // a_ij(z) as a rational function
};

/// y'' + p1 y' + p2 y = 0 with rational coefficients.
struct ScalarODE2 {
    CRational p1, p2;
};

/// Standard Heun data: exponents (gamma, delta, epsilon) at (0, 1, t),
/// alpha/beta at infinity, accessory parameter q with the p2 numerator
/// normalized as alpha*beta*z - q.
struct HeunParams {
    Complex gamma, delta, epsilon;
    Complex alpha, beta;
    Complex q;
    Complex t;

    Complex fuchs_defect() const { return gamma + delta + epsilon - alpha - beta - 1.0; }
};

Complex kappa1(const ThetaParams& th);
Complex kappa2(const ThetaParams& th);

/// The generic residue block [[u+theta, -w], [u(u+theta)/w, -u]]; eigenvalues
/// {0, theta}, requires w != 0.
CMatrix residue_matrix(Complex u, Complex theta, Complex w);

/// w_p from lambda (the canonical solution of the three linear w-relations).
Weights weights(const SystemState& s);

/// u_p closed forms; requires theta_inf != 0 and lambda off {0,1,t,inf}.
SystemVariables solve_system_variables(const ThetaParams& th, const SystemState& s);

/// Residue matrices from (theta; t, lambda, mu, k). Guard band: inputs within
/// 1e-8 of lambda in {0,1,t} or theta_inf = 0 are rejected, not regularized.
FuchsianSystem build_system(const ThetaParams& th, const SystemState& s);

/// Second-order scalar reduction eliminating y2; requires a12 not
/// identically zero (otherwise the system splits first order).
ScalarODE2 reduce_to_scalar(const FuchsianSystem& sys);

/// The scalar ODE satisfied by y1 directly from (theta; lambda, mu),
/// normalized with singular points {0, 1, t, lambda} and an apparent
/// singularity at lambda with exponents {0, 2}.
ScalarODE2 scalar_ode_of_parameters(const ThetaParams& th, const SystemState& s);

/// The value H entering the z-independent part of the scalar ODE; exposed as
/// a named accessor because it is also the natural time-dependent Hamiltonian
/// of the isomonodromy flow (no flow integrator is provided here).
Complex hamiltonian_h(const ThetaParams& th, const SystemState& s);

/// Internal variant without the lambda guard bands: used where the line
/// restrictions legitimately evaluate the scalar coefficients at lambda in
/// {0,1,t} (the z-pole at lambda merges into the corresponding singular
/// point).
ScalarODE2 scalar_ode_unguarded(const ThetaParams& th, const SystemState& s);

/// Reads (gamma, delta, epsilon; alpha, beta; q) off a scalar ODE, validating
/// the Heun shape: simple poles of p1 inside {0,1,t}, p2 numerator of degree
/// <= 1 over z(z-1)(z-t). {alpha, beta} is sorted by (re, im).
HeunParams heun_normal_form(const ScalarODE2& ode, Complex t, double tol = 1e-8);

/// Builds the Heun ODE from parameters, validating the Fuchs relation
/// gamma+delta+epsilon = alpha+beta+1 at 1e-8.
ScalarODE2 heun_ode(const HeunParams& hp);

/// Indicial exponents of a regular singular point of the ODE; for
/// point_at_infinity the roots of rho(rho+1) - P rho + Q with P = lim z p1,
/// Q = lim z^2 p2.
std::array<Complex, 2> indicial_exponents(const ScalarODE2& ode, Complex s, bool point_at_infinity = false);

/// Max relative residual of the seven defining relations (three linear in w,
/// one quadratic and three linear in u) for the given variables.
double system_constraint_residual(const ThetaParams& th, const SystemState& s, const SystemVariables& v);

}  // namespace heunmcv
