#pragma once

#include <vector>

#include "heunmcv/fuchsian.hpp"

namespace heunmcv::weyl {

/// The full tuple the symmetry group acts on: exponents plus the moving
/// data (lambda, mu), with t and k carried along unchanged.
struct ExtParams {
    ThetaParams theta;
    SystemState state;
};

/// Generators of the symmetry group, numbered 0..4:
///   0: theta_t -> -theta_t,   mu -> mu - theta_t/(lambda - t)
///   1: theta_inf -> 2 - theta_inf
///   2: theta_p -> theta_p + kappa1 (p = 0,1,t), theta_inf -> -kappa2,
///      lambda -> lambda + kappa1/mu
///   3: theta_1 -> -theta_1,   mu -> mu - theta_1/(lambda - 1)
///   4: theta_0 -> -theta_0,   mu -> mu - theta_0/lambda
/// Each is an involution; 2 braids with each of 0, 3, 4. Division by zero in
/// the moving-data update is reported as GeneratorUndefined.
ExtParams apply_generator(int g, const ExtParams& p);

/// word[0] acts first. Errors are annotated with the failing stage.
ExtParams apply_word(const std::vector<int>& word, const ExtParams& p);

/// Parameter map of the order-kappa2 convolution:
///   theta_p -> theta_p + kappa2 (all four),
///   lambda  -> lambda - kappa2 / (mu - sum_p theta_p/(lambda - p)),
///   mu      -> sum_p (kappa2+theta_p)/(lambda~ - p) + kappa2/(lambda - lambda~),
/// k and t unchanged. kappa2 = 0 is the identity. Equals the generator words
/// {0,3,4,2,0,3,4} and {0,3,4,2,4,3,0}.
ExtParams mc_kappa2_map(const ExtParams& p);

/// Parameter map of the order-kappa1 convolution: coincides with generator 2
/// (theta_p + kappa1 at finite points, -kappa2 at infinity,
/// lambda -> lambda + kappa1/mu). kappa1 = 0 is the identity.
ExtParams mc_kappa1_map(const ExtParams& p);

}  // namespace heunmcv::weyl
