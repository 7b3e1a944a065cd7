#pragma once

#include <optional>
#include <vector>

#include "heunmcv/fuchsian.hpp"

namespace heunmcv::sic {

enum class Chart { U0, U1, U2, U3, U4, UInf };

/// Point of the compactified phase space in one affine chart.
/// (q0, p0) = (lambda, mu) in U0; the other charts are glued by
///   q0 q_inf = 1,                 q0 p0 + q_inf p_inf = -kappa1,
///   q0 p0 + q1 p1 = theta_0,      p0 p1 = 1,
///   (q0-1) p0 + q2 p2 = theta_1,  p0 p2 = 1,
///   (q0-t) p0 + q3 p3 = theta_t,  p0 p3 = 1,
///   q_inf p_inf + q4 p4 = 1 - theta_inf,  p_inf p4 = 1.
struct SICPoint {
    Chart chart;
    Complex q, p;
};

/// The eight vertical leaves over lambda in {0, 1, t, inf}, each a
/// coordinate axis of one chart: L0/L1/Lt = {q0 = 0/1/t} in U0,
/// LInf = {q_inf = 0} in UInf, and the starred lines {p_j = 0} in
/// U1/U2/U3/U4 (the mu = inf ends).
enum class Line { L0, L1, Lt, LInf, L0star, L1star, Ltstar, LInfstar };

const char* chart_name(Chart c);
const char* line_name(Line l);

/// Coordinate change between glued charts. Defined pairs are U0-U1, U0-U2,
/// U0-U3, U0-UInf, UInf-U4 (NoGluing otherwise); a vanishing divisor is
/// TransitionUndefined. Same-chart transitions are the identity.
SICPoint chart_transition(const SICPoint& x, Chart target, const ThetaParams& th, Complex t);

/// chart_transition routed through the hubs U0/UInf (at most three hops).
SICPoint to_chart(const SICPoint& x, Chart target, const ThetaParams& th, Complex t);

/// The line the point lies on within tol, if any. The point's own chart is
/// checked first; other charts are consulted through transitions where those
/// are defined.
std::optional<Line> classify_point(const SICPoint& x, const ThetaParams& th, Complex t,
                                   double tol = 1e-10);

/// Heun data of the one-parameter family along a line. `coordinate` is the
/// line parameter: mu on L0/L1/Lt, p_inf on LInf, q_j on the starred lines.
struct LineFamily {
    HeunParams params;       // params.q in standard form (p2 num = ab z - q)
    Complex display_q;       // accessory anchored at the line's base point
    int gauge_exponent = 0;  // v = (z - gauge_center)^gauge_exponent * y
    Complex gauge_center = 0.0;
    Complex accessory_slope;  // d(params.q)/d(coordinate), an affine map
    bool degenerate_accessory = false;  // slope ~ 0: not all q reachable
};

LineFamily heun_on_line(Line line, const ThetaParams& th, Complex t, Complex coordinate);

/// Residue matrices realizing the system with the moving point on a line,
/// a12(z) scaled by k. LInfstar admits no such realization (NotRealizable).
FuchsianSystem realize_system_on_line(Line line, const ThetaParams& th, Complex t,
                                      Complex coordinate, Complex k);

/// Max |difference| over the probe points (kept off the singular set by the
/// caller) between the line family's Heun coefficients and the limit of the
/// generic scalar coefficients along the chart curve onto the line; the
/// unstarred finite lines evaluate exactly, the others extrapolate the
/// curve parameter to 0.
double restriction_consistency(Line line, const ThetaParams& th, Complex t, Complex coordinate,
                               const std::vector<Complex>& probes);

}  // namespace heunmcv::sic
