#pragma once

#include <array>
#include <functional>
#include <utility>
#include <vector>

#include "heunmcv/fuchsian.hpp"
#include "heunmcv/series.hpp"
#include "heunmcv/weyl.hpp"

namespace heunmcv::mcv {

/// Size-6 convolution matrices of a rank-2 system with poles {0, 1, t}:
/// b_p carries the block row (a0 .. a_p + nu .. a_t) in slot p and zeros
/// elsewhere, so trace(b_p) = theta_p + 2 nu.
struct ConvolutionSystem {
    Complex nu;
    Complex t;
    CMatrix b0, b1, bt;  // 6x6
};

ConvolutionSystem convolution_matrices(const FuchsianSystem& sys, Complex nu);

/// Fuchsian data of arbitrary rank: square residues of one common size, one
/// per distinct finite pole. dY/dz = sum_j residues[j]/(z - poles[j]) Y.
struct GeneralSystem {
    std::vector<Complex> poles;
    std::vector<CMatrix> residues;
};

/// Arbitrary-rank convolution matrices (block row j of the j-th output is
/// residues[0] .. residues[j] + nu .. residues[m-1]).
std::vector<CMatrix> convolution_matrices(const GeneralSystem& sys, Complex nu);

/// The two invariant subspaces of the convolution matrices: k is the common
/// kernel of b0, b1, bt; l is spanned by Ker(a_p) embedded in slot p. The
/// quotient dimension 6 - dim(k + l) drops from 3 to 2 exactly when nu is
/// one of {0, kappa1, kappa2} of the underlying residues.
struct InvariantSubspaces {
    std::vector<std::vector<Complex>> l_basis;
    std::vector<std::vector<Complex>> k_basis;
    int quotient_dim = 0;
};

InvariantSubspaces invariant_subspaces(const ConvolutionSystem& cs, double tol = 1e-8);

/// Gauge bringing the order-kappa2 convolution matrices to the split shape
/// whose upper-left 2x2 block is the image system. Columns 3..6 are the
/// invariant-subspace vectors; columns 1..2 complete the basis and define
/// the moved point lambda_tilde. Requires lambda off {0, 1, t}, both kappas
/// and k nonzero, and mu != theta_0/lambda + theta_1/(lambda-1) +
/// theta_t/(lambda-t); violations report GaugeUndefined (or the builder's
/// own code where the residues themselves are undefined).
struct GaugeS {
    CMatrix s;  // 6x6
    Complex lambda_tilde;
};

GaugeS gauge_s(const ThetaParams& th, const SystemState& st);

/// Conjugates the order-kappa2 convolution matrices by gauge_s and extracts
/// the upper-left 2x2 blocks: the image Fuchsian system together with its
/// parameter tuple (theta_p + kappa2 at every point; lambda_tilde, mu_tilde;
/// k unchanged), which equals weyl::mc_kappa2_map of the input. The image
/// moving point must stay off {0, 1, t} (MapUndefined otherwise).
std::pair<weyl::ExtParams, FuchsianSystem> middle_convolution_kappa2(const ThetaParams& th,
                                                                     const SystemState& st);

/// Pointwise data of a rank-2 solution handed to a convolution kernel.
struct SolutionSample {
    Complex y1, y2, dy1, dy2;
};

/// One integrand: weight(w, sample) multiplies the branch factor
/// (z - w)^exponent under the contour integral in w.
struct ConvolutionKernel {
    Complex exponent;
    std::function<Complex(Complex, const SolutionSample&)> weight;
};

/// Integrands of the order-kappa2 convolution. k1, k2 map a solution of the
/// source system to a solution of the image system (parameters in image);
/// scalar is the one-line kernel y1(w) (z-w)^{kappa2-1} tied to k1 by
/// integration by parts: integral(k1) = kappa2 * integral(scalar) over any
/// cycle on which the integrand closes up.
/// Requires kappa1 != 0 and kappa2 != 0 (KernelUndefined).
struct IntegrandsKappa2 {
    ConvolutionKernel k1, k2;
    ConvolutionKernel scalar;
    weyl::ExtParams image;
};

IntegrandsKappa2 transform_integrands_kappa2(const ThetaParams& th, const SystemState& st);

/// Integrands of the order-kappa1 convolution; the image parameters coincide
/// with weyl generator 2. Requires kappa2 != 0 and mu != 0.
struct IntegrandsKappa1 {
    ConvolutionKernel k1, k2;
    weyl::ExtParams image;
};

IntegrandsKappa1 transform_integrands_kappa1(const ThetaParams& th, const SystemState& st);

/// Local holomorphic solution data at an ordinary point: truncated Taylor
/// coefficients of both components in powers of (z - center).
struct SystemGerm {
    Complex center;
    PowerSeries y1, y2;
};

/// Same for arbitrary rank.
struct VectorGerm {
    Complex center;
    std::vector<PowerSeries> y;
};

/// Taylor recurrence for dY/dz = A(z) Y at an ordinary point; y0 is the
/// value at the center and order the number of coefficients produced.
SystemGerm taylor_system_germ(const FuchsianSystem& sys, Complex center,
                              std::array<Complex, 2> y0, int order);
VectorGerm taylor_germ(const GeneralSystem& sys, Complex center,
                       const std::vector<Complex>& y0, int order);

/// Max relative coefficient residual of dY/dz - A(z) Y over the first
/// n_coeffs coefficients (clamped to what the germ length supports).
double germ_system_residual(const FuchsianSystem& sys, const SystemGerm& germ, int n_coeffs);
double germ_residual(const GeneralSystem& sys, const VectorGerm& germ, int n_coeffs);

enum class IntegerBranch {
    Identity,     // the relevant kappa vanishes; the transform is trivial
    OrderKappa2,  // kappa2 a negative integer: successive derivatives of y1
    OrderKappa1,  // kappa1 a negative integer: derivatives of the combination
};

struct DerivativeImage {
    weyl::ExtParams image;
    SystemGerm germ;
    IntegerBranch branch;
};

/// Integer-parameter replacement for the contour transforms. If kappa2 is a
/// nonpositive integer the image germ is
///   y1~ = (d/dz)^{-kappa2} y1,
///   y2~ = C (d/dz)^{-kappa2-1} { (y1' - mu y1)/(lambda - z) + (mu/kappa1) y1' },
///   C = kappa2 lambda (lambda-1) (lambda-t) / (k (lambda - lambda_tilde)),
/// a solution of the system with parameters mc_kappa2_map. Else, if kappa1
/// is a nonpositive integer,
///   y1~ = (d/dz)^{-kappa1-1} { (kappa1 y1 + (z - lambda - kappa1/mu) y1') / (z - lambda) },
///   y2~ = (-theta_inf/kappa2) (d/dz)^{-kappa1} y2,
/// a solution of the generator-2 image. Any other parameter reports
/// WrongBranch. The input germ is validated against the source system over
/// order_check coefficients first (BadGerm), and its center must stay away
/// from lambda, where the kernel expressions are expanded.
DerivativeImage derivative_transform(const ThetaParams& th, const SystemState& st,
                                     const SystemGerm& germ, int order_check = 8);

/// Checks the derivative realization of the convolution vector for
/// nu = -1 - n: U stacks the n-th derivatives of (z - p_j)^{-1} y_i(z) and
/// must satisfy dU/dz = sum_j b_j/(z - p_j) U. Returns the max relative
/// residual over the samples (points inside the germ's disk of convergence).
/// The germ itself is validated first (BadGerm); nu away from negative
/// integers reports WrongBranch.
double verify_convolution_vector(const FuchsianSystem& sys, Complex nu, const SystemGerm& germ,
                                 const std::vector<Complex>& samples);
double verify_convolution_vector(const GeneralSystem& sys, Complex nu, const VectorGerm& germ,
                                 const std::vector<Complex>& samples);

/// How a convolution with parameter nu should be evaluated.
enum class ConvolutionRoute {
    Identity,          // nu = 0
    DerivativeBranch,  // nu a negative integer: successive differentiation
    ClosedContour,     // nu a positive integer: simple loop around the pole
    Pochhammer,        // generic nu: double commutator contour
};

ConvolutionRoute convolution_route(Complex nu, double tol = 1e-9);

}  // namespace heunmcv::mcv
