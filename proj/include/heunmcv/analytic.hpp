#pragma once

#include <functional>
#include <vector>

#include "heunmcv/fuchsian.hpp"
#include "heunmcv/matrix.hpp"
#include "heunmcv/mcv.hpp"
#include "heunmcv/series.hpp"

namespace heunmcv::analytic {

/// Local solution (z-base)^exponent * sum_j series.c[j] (z-base)^j at a
/// regular singular point, principal branch of the power.
struct FrobeniusGerm {
    Complex base;
    Complex exponent;
    PowerSeries series;      // series.c[0] != 0
    double radius_hint = 0;  // distance to the nearest other singularity
};

/// Frobenius coefficients at a regular singular point (ordinary points work
/// too and produce plain Taylor data). `exponent` must solve the indicial
/// equation. When the other indicial root exceeds `exponent` by a positive
/// integer, the recurrence is consistent only in the apparent (log-free)
/// case; the resonant coefficient is then set to zero. Otherwise
/// LogarithmicCase. A pole of higher than regular-singular order raises
/// NotRegularSingular.
FrobeniusGerm frobenius_series(const ScalarODE2& ode, Complex base, Complex exponent, int n);

Complex eval(const FrobeniusGerm& g, Complex z);
Complex eval_derivative(const FrobeniusGerm& g, Complex z);

/// Max |y'' + p1 y' + p2 y| / (1 + |y| + |y'| + |y''|) over the points.
double frobenius_residual(const ScalarODE2& ode, const FrobeniusGerm& g,
                          const std::vector<Complex>& points);

/// Taylor coefficients (length n) of the scalar solution with y(center) = y0,
/// y'(center) = dy0; center must be an ordinary point.
PowerSeries scalar_taylor(const ScalarODE2& ode, Complex center, Complex y0, Complex dy0, int n);

/// Per-coefficient relative defect of y'' + p1 y' + p2 y around center over
/// the first n_check coefficients.
double scalar_taylor_residual(const ScalarODE2& ode, Complex center, const PowerSeries& y,
                              int n_check);

// ---------------------------------------------------------------------------
// paths and contours

struct Segment {
    enum class Kind { Line, Arc };
    Kind kind = Kind::Line;
    Complex a, b;        // line endpoints
    Complex center;      // arc center
    double radius = 0;   // arc radius
    double phi0 = 0, phi1 = 0;  // arc angles; phi1 > phi0 runs anticlockwise

    static Segment line(Complex a, Complex b);
    static Segment arc(Complex center, double radius, double phi0, double phi1);

    Complex point(double s) const;     // s in [0, 1]
    Complex velocity(double s) const;  // d(point)/ds
    Complex start() const { return point(0.0); }
    Complex end() const { return point(1.0); }
    double length() const;
    Segment reversed() const;
};

struct Path {
    std::vector<Segment> segments;

    Complex start() const;
    Complex end() const;
    double length() const;
    bool closed(double tol = 1e-9) const;
    Path reversed() const;
    /// Appends o; its start must coincide with this path's end.
    Path& operator+=(const Path& o);
};

Path line_path(Complex a, Complex b);

/// Polyline from a to b detouring around the listed points. Each avoided
/// point keeps a clearance of min(guard_fraction of its distance to the
/// nearest other avoided point, |b-a|/4), floored by guard.
Path safe_path(Complex a, Complex b, const std::vector<Complex>& avoid, double guard = 1e-3);

/// Base point off the marked set: (1/3 + i/2) rescaled until it clears every
/// marked point by a quarter of the scale.
Complex choose_base(const std::vector<Complex>& avoid);

/// A quarter of the distance from p to the nearest of the other points.
double loop_radius(Complex p, const std::vector<Complex>& others);

/// Planned net anticlockwise turns of the path around a tracked point;
/// contour_transform checks the measured winding of its kernel point
/// against this log.
struct WindingPlan {
    Complex point;
    int turns = 0;
};

struct Contour {
    enum class Kind { SimpleLoop, Pochhammer, CpLoop, BigLoop };
    Kind kind = Kind::SimpleLoop;
    Path path;
    Complex about;  // the encircled point (loop kinds); the pole p for Pochhammer/CpLoop
    std::vector<WindingPlan> branch_log;
};

/// Segment from base toward p, an anticlockwise circle around p, segment
/// back. radius 0 picks loop_radius(p, avoid). The approach avoids the other
/// listed points.
Contour simple_loop(Complex p, Complex base, const std::vector<Complex>& avoid,
                    double radius = 0.0);

/// Commutator cycle: loop around z, loop around p, then both reversed, all
/// based at `base`. The circle around z uses radius min(1e-2, dist(z,
/// avoid)/4); the kernel branch and the continued solution both return to
/// their initial values along it.
Contour pochhammer_contour(Complex z, Complex p, Complex base, const std::vector<Complex>& avoid);

/// Cycle from w = z turning p anticlockwise and returning to z. Only
/// meaningful for kernels with nonnegative integer exponent (the integrand
/// stays single-valued in z - w).
Contour cp_loop(Complex z, Complex p, const std::vector<Complex>& avoid);

/// Anticlockwise circle enclosing all listed points, entered from base.
Contour big_loop(Complex base, const std::vector<Complex>& enclosed);

// ---------------------------------------------------------------------------
// linear ODE transport

/// Coefficient data of a linear system dY/dw = A(w) Y: Taylor expansions of
/// A on demand plus the singularity list used for step control and path
/// guards.
struct OdeSpec {
    int dim = 0;
    std::vector<Complex> sings;
    /// Taylor coefficients of A at the center, len terms.
    std::function<std::vector<CMatrix>(Complex center, int len)> coeffs;
};

OdeSpec ode_of(const FuchsianSystem& sys);
OdeSpec ode_of(const mcv::GeneralSystem& sys);
/// First-order form of the scalar equation, state (y, y').
OdeSpec companion_ode(const ScalarODE2& ode);
/// dY/dw = A Y with constant A (no singularities).
OdeSpec constant_ode(const CMatrix& a);

/// Continues the columns of y0 along the path by local Taylor steps; step
/// size adapts to the distance from the singularities and the observed
/// coefficient decay (local error <= tol per step). Returns the value at the
/// path end. Steps that would shrink below the guard distance raise
/// PathTooClose.
CMatrix integrate_system(const OdeSpec& ode, const CMatrix& y0, const Path& path,
                         double tol = 1e-12);
std::vector<Complex> integrate_vector(const OdeSpec& ode, const std::vector<Complex>& y0,
                                      const Path& path, double tol = 1e-12);

/// Transport matrix of a fundamental system around the loop: Y_end = M Y_start.
CMatrix monodromy(const FuchsianSystem& sys, Complex base, const Contour& loop,
                  double tol = 1e-12);

/// Simple-loop transports around 0, 1, t from a common base point, plus the
/// transport minf around a circle enclosing all three, oriented so that its
/// eigenvalues are {e^{2 pi i kappa1}, e^{2 pi i kappa2}}. With these
/// orientations the loop product composes as minf = (mt * m1 * m0)^{-1} up
/// to transport error when t lies in the upper half plane with base left of
/// the singular triple (the factory geometry).
struct MonodromyData {
    Complex base;
    CMatrix m0, m1, mt, minf;
};
MonodromyData monodromy_data(const FuchsianSystem& sys, double tol = 1e-12);

// ---------------------------------------------------------------------------
// contour quadrature of Euler-kernel transforms

/// Integrand weight(w, y, y') * (z - w)^nu where y is the solution of `ode`
/// continued along the contour from its start value y0. The kernel branch is
/// principal at the contour start and tracked along the path.
struct ContourIntegrand {
    OdeSpec ode;
    std::vector<Complex> y0;
    Complex nu;
    std::function<Complex(Complex w, const std::vector<Complex>& y,
                          const std::vector<Complex>& dy)>
        weight;
};

struct ContourIntegral {
    Complex value;
    std::vector<Complex> y_end;  // continued solution at the path end
    double winding;              // net turns of arg(z - w) along the path
};

/// Adaptive Gauss-Kronrod panels along the contour with simultaneous
/// continuation of the solution and of the kernel argument. Checks the
/// winding against the contour's branch log (BranchError on mismatch) and,
/// for Pochhammer cycles, that the continued solution closes up. Panels that
/// cannot reach the tolerance raise QuadratureError.
ContourIntegral contour_transform(const ContourIntegrand& f, const Contour& c, Complex z,
                                  double tol = 1e-10);

struct TransformSample {
    Complex y, dy, d2y;
};

/// Value and first n_derivs (<= 2) z-derivatives of the transform at z.
/// Derivatives differentiate under the integral (kernel exponent shifts by
/// -1 each time); for cycles based at w = z with integer exponent the
/// boundary contributes the monodromy difference of the weight once the
/// falling factorial hits zero.
TransformSample transform_at(const ContourIntegrand& f, const Contour& c, Complex z,
                             int n_derivs = 2, double tol = 1e-10);

}  // namespace heunmcv::analytic
