#include "heunmcv/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "heunmcv/errors.hpp"

namespace heunmcv::analytic {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Gauss-Kronrod 7-15 abscissae and weights on [-1, 1], positive half of the
// symmetric rule; odd indices carry the embedded Gauss-7 nodes.
constexpr double kXgk[8] = {0.991455371120813, 0.949107912342759, 0.864864423359769,
                            0.741531185599394, 0.586087235467691, 0.405845151377397,
                            0.207784955007898, 0.0};
constexpr double kWgk[8] = {0.022935322010529, 0.063092092629979, 0.104790010322250,
                            0.140653259715525, 0.169004726639267, 0.190350578064785,
                            0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                           0.417959183673469};

bool near_integer(Complex v, long& n, double tol = 1e-9) {
    const double r = std::round(v.real());
    if (std::abs(v.real() - r) <= tol && std::abs(v.imag()) <= tol) {
        n = long(r);
        return true;
    }
    return false;
}

Complex int_power(Complex base, long n) {
    if (n < 0) return 1.0 / int_power(base, -n);
    Complex r = 1.0;
    for (long i = 0; i < n; ++i) r *= base;
    return r;
}

PowerSeries rational_taylor(const CRational& r, Complex a, int len, const char* what) {
    PowerSeries p;
    p.c.assign(size_t(len), Complex(0.0));
    if (r.is_zero()) return p;
    const LaurentSeries l = r.laurent_at(a, len + 4);
    if (l.offset < 0) fail(Err::PoleError, std::string(what) + ": expansion point is a pole");
    for (int j = 0; j < len; ++j) p.c[size_t(j)] = l.coeff(j);
    return p;
}

std::vector<Complex> pole_list(const ScalarODE2& ode) {
    std::vector<Complex> ps;
    for (const auto& r : {ode.p1, ode.p2})
        if (!r.is_zero())
            for (const auto& [p, m] : r.poles()) ps.push_back(p);
    return ps;
}

double nearest_distance(Complex w, const std::vector<Complex>& pts) {
    double d = std::numeric_limits<double>::infinity();
    for (Complex p : pts) d = std::min(d, std::abs(w - p));
    return d;
}

}  // namespace

// ---------------------------------------------------------------------------
// Frobenius and Taylor data

FrobeniusGerm frobenius_series(const ScalarODE2& ode, Complex base, Complex exponent, int n) {
    if (n < 1) fail(Err::InvalidInput, "frobenius_series needs at least one term");
    LaurentSeries l1, l2;
    bool z1 = ode.p1.is_zero(), z2 = ode.p2.is_zero();
    if (!z1) l1 = ode.p1.laurent_at(base, n + 4);
    if (!z2) l2 = ode.p2.laurent_at(base, n + 4);
    if ((!z1 && l1.offset < -1) || (!z2 && l2.offset < -2))
        fail(Err::NotRegularSingular, "coefficient pole order exceeds the regular singular bound");

    // p1 = sum_k a_k x^{k-1}, p2 = sum_k b_k x^{k-2} with x = z - base
    auto a = [&](int k) { return z1 ? Complex(0.0) : l1.coeff(k - 1); };
    auto b = [&](int k) { return z2 ? Complex(0.0) : l2.coeff(k - 2); };
    auto indicial = [&](Complex s) { return s * (s - 1.0) + a(0) * s + b(0); };

    const Complex rho = exponent;
    if (std::abs(indicial(rho)) > 1e-8 * (1.0 + std::norm(rho) + std::abs(a(0) * rho) + std::abs(b(0))))
        fail(Err::InvalidInput, "exponent does not solve the indicial equation");

    FrobeniusGerm g;
    g.base = base;
    g.exponent = rho;
    g.series.c.assign(size_t(n), Complex(0.0));
    g.series.c[0] = 1.0;
    for (int m = 1; m < n; ++m) {
        Complex rhs = 0.0;
        double absum = 0.0;
        for (int j = 0; j < m; ++j) {
            const Complex term = g.series.c[size_t(j)] * ((rho + double(j)) * a(m - j) + b(m - j));
            rhs -= term;
            absum += std::abs(term);
        }
        const Complex den = indicial(rho + double(m));
        if (std::abs(den) <= 1e-8 * (1.0 + std::norm(rho + double(m)))) {
            // resonance: the exponent pair differs by m; only the apparent
            // (log-free) case admits a power series, with a free coefficient
            // we pin to zero
            if (std::abs(rhs) > 1e-8 * (1.0 + absum))
                fail(Err::LogarithmicCase, "resonant exponents without the no-log condition");
            g.series.c[size_t(m)] = 0.0;
        } else {
            g.series.c[size_t(m)] = rhs / den;
        }
    }

    g.radius_hint = std::numeric_limits<double>::infinity();
    for (Complex p : pole_list(ode)) {
        const double d = std::abs(p - base);
        if (d > 1e-9) g.radius_hint = std::min(g.radius_hint, d);
    }
    return g;
}

Complex eval(const FrobeniusGerm& g, Complex z) {
    const Complex x = z - g.base;
    return std::exp(g.exponent * std::log(x)) * heunmcv::eval(g.series, x);
}

Complex eval_derivative(const FrobeniusGerm& g, Complex z) {
    const Complex x = z - g.base;
    const Complex s = heunmcv::eval(g.series, x);
    const Complex sp = heunmcv::eval(derivative(g.series), x);
    return std::exp((g.exponent - 1.0) * std::log(x)) * (g.exponent * s + x * sp);
}

double frobenius_residual(const ScalarODE2& ode, const FrobeniusGerm& g,
                          const std::vector<Complex>& points) {
    const PowerSeries d1 = derivative(g.series);
    const PowerSeries d2 = derivative(d1);
    double worst = 0.0;
    for (Complex z : points) {
        const Complex x = z - g.base;
        const Complex s = heunmcv::eval(g.series, x);
        const Complex sp = heunmcv::eval(d1, x);
        const Complex spp = heunmcv::eval(d2, x);
        const Complex rho = g.exponent;
        const Complex y = std::exp(rho * std::log(x)) * s;
        const Complex dy = std::exp((rho - 1.0) * std::log(x)) * (rho * s + x * sp);
        const Complex ddy = std::exp((rho - 2.0) * std::log(x)) *
                            (rho * (rho - 1.0) * s + 2.0 * rho * x * sp + x * x * spp);
        const Complex r = ddy + ode.p1.eval(z) * dy + ode.p2.eval(z) * y;
        worst = std::max(worst,
                         std::abs(r) / (1.0 + std::abs(y) + std::abs(dy) + std::abs(ddy)));
    }
    return worst;
}

PowerSeries scalar_taylor(const ScalarODE2& ode, Complex center, Complex y0, Complex dy0, int n) {
    if (n < 2) fail(Err::InvalidInput, "scalar_taylor needs at least two terms");
    const PowerSeries p1 = rational_taylor(ode.p1, center, n, "scalar_taylor");
    const PowerSeries p2 = rational_taylor(ode.p2, center, n, "scalar_taylor");
    PowerSeries y;
    y.c.assign(size_t(n), Complex(0.0));
    y.c[0] = y0;
    y.c[1] = dy0;
    for (int m = 0; m + 2 < n; ++m) {
        Complex s = 0.0;
        for (int j = 0; j <= m; ++j) {
            s += p1.at(j) * double(m + 1 - j) * y.at(m + 1 - j);
            s += p2.at(j) * y.at(m - j);
        }
        y.c[size_t(m + 2)] = -s / double((m + 2) * (m + 1));
    }
    return y;
}

double scalar_taylor_residual(const ScalarODE2& ode, Complex center, const PowerSeries& y,
                              int n_check) {
    const int len = y.len();
    if (len < n_check + 2) fail(Err::InvalidInput, "germ too short for the requested check");
    const PowerSeries p1 = rational_taylor(ode.p1, center, len, "scalar_taylor_residual");
    const PowerSeries p2 = rational_taylor(ode.p2, center, len, "scalar_taylor_residual");
    const PowerSeries d1 = derivative(y);
    const PowerSeries d2 = derivative(d1);
    double worst = 0.0;
    for (int m = 0; m < n_check; ++m) {
        Complex t1 = 0.0, t2 = 0.0;
        for (int j = 0; j <= m; ++j) {
            t1 += p1.at(j) * d1.at(m - j);
            t2 += p2.at(j) * y.at(m - j);
        }
        const Complex r = d2.at(m) + t1 + t2;
        worst = std::max(worst, std::abs(r) / (1.0 + std::abs(d2.at(m)) + std::abs(t1) +
                                               std::abs(t2)));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// geometry

Segment Segment::line(Complex a, Complex b) {
    Segment s;
    s.kind = Kind::Line;
    s.a = a;
    s.b = b;
    return s;
}

Segment Segment::arc(Complex center, double radius, double phi0, double phi1) {
    Segment s;
    s.kind = Kind::Arc;
    s.center = center;
    s.radius = radius;
    s.phi0 = phi0;
    s.phi1 = phi1;
    return s;
}

Complex Segment::point(double s) const {
    if (kind == Kind::Line) return a + (b - a) * s;
    return center + radius * std::exp(Complex(0.0, phi0 + (phi1 - phi0) * s));
}

Complex Segment::velocity(double s) const {
    if (kind == Kind::Line) return b - a;
    return Complex(0.0, phi1 - phi0) * radius * std::exp(Complex(0.0, phi0 + (phi1 - phi0) * s));
}

double Segment::length() const {
    if (kind == Kind::Line) return std::abs(b - a);
    return radius * std::abs(phi1 - phi0);
}

Segment Segment::reversed() const {
    Segment s = *this;
    if (kind == Kind::Line) {
        s.a = b;
        s.b = a;
    } else {
        s.phi0 = phi1;
        s.phi1 = phi0;
    }
    return s;
}

Complex Path::start() const {
    if (segments.empty()) fail(Err::InvalidInput, "empty path");
    return segments.front().start();
}

Complex Path::end() const {
    if (segments.empty()) fail(Err::InvalidInput, "empty path");
    return segments.back().end();
}

double Path::length() const {
    double l = 0.0;
    for (const Segment& s : segments) l += s.length();
    return l;
}

bool Path::closed(double tol) const {
    return !segments.empty() && std::abs(start() - end()) <= tol * (1.0 + std::abs(start()));
}

Path Path::reversed() const {
    Path r;
    for (auto it = segments.rbegin(); it != segments.rend(); ++it)
        r.segments.push_back(it->reversed());
    return r;
}

Path& Path::operator+=(const Path& o) {
    if (!segments.empty() && !o.segments.empty() &&
        std::abs(end() - o.start()) > 1e-9 * (1.0 + std::abs(end())))
        fail(Err::InvalidInput, "path concatenation endpoints do not meet");
    segments.insert(segments.end(), o.segments.begin(), o.segments.end());
    return *this;
}

Path line_path(Complex a, Complex b) {
    Path p;
    p.segments.push_back(Segment::line(a, b));
    return p;
}

namespace {

void safe_path_rec(Complex a, Complex b, const std::vector<Complex>& avoid, double guard,
                   int depth, Path& out) {
    const Complex d = b - a;
    const double len = std::abs(d);
    if (depth < 8 && len > 0.0) {
        double worst_gap = 0.0;
        Complex worst_q = 0.0, worst_foot = 0.0;
        double worst_clear = 0.0;
        for (Complex q : avoid) {
            double dnn = std::numeric_limits<double>::infinity();
            for (Complex r : avoid)
                if (std::abs(r - q) > 1e-12) dnn = std::min(dnn, std::abs(r - q));
            double clear = std::isfinite(dnn) ? 0.2 * dnn : 0.25 * len;
            clear = std::max(guard, std::min(clear, 0.25 * len));
            // endpoints that sit deliberately close to q (loop entries) are fine
            if (std::min(std::abs(q - a), std::abs(q - b)) <= clear + 1e-12) continue;
            const double t =
                std::clamp((std::conj(d) * (q - a)).real() / (len * len), 0.0, 1.0);
            const Complex foot = a + d * t;
            const double gap = clear - std::abs(q - foot);
            if (gap > worst_gap) {
                worst_gap = gap;
                worst_q = q;
                worst_foot = foot;
                worst_clear = clear;
            }
        }
        if (worst_gap > 0.0) {
            Complex dir = worst_foot - worst_q;
            if (std::abs(dir) < 1e-12 * (1.0 + std::abs(worst_q)))
                dir = Complex(0.0, 1.0) * (d / len);
            dir /= std::abs(dir);
            const Complex m = worst_q + dir * (1.3 * worst_clear);
            safe_path_rec(a, m, avoid, guard, depth + 1, out);
            safe_path_rec(m, b, avoid, guard, depth + 1, out);
            return;
        }
    }
    out.segments.push_back(Segment::line(a, b));
}

}  // namespace

Path safe_path(Complex a, Complex b, const std::vector<Complex>& avoid, double guard) {
    Path p;
    safe_path_rec(a, b, avoid, guard, 0, p);
    return p;
}

Complex choose_base(const std::vector<Complex>& avoid) {
    const Complex dir(1.0 / 3.0, 0.5);
    double s0 = 1.0;
    for (Complex q : avoid) s0 = std::max(s0, 0.75 * std::abs(q));
    if (avoid.empty()) return dir * s0;
    const double want = 0.25 * std::max(1.0, 0.5 * s0);
    Complex best = dir * s0;
    double best_d = -1.0;
    for (double f : {1.0, 1.45, 0.7, 1.9, 0.5, 2.6, 0.35, 3.4}) {
        const Complex o = dir * (f * s0);
        const double dmin = nearest_distance(o, avoid);
        if (dmin >= want) return o;
        if (dmin > best_d) {
            best_d = dmin;
            best = o;
        }
    }
    return best;
}

double loop_radius(Complex p, const std::vector<Complex>& others) {
    double d = std::numeric_limits<double>::infinity();
    for (Complex q : others)
        if (std::abs(q - p) > 1e-12) d = std::min(d, std::abs(q - p));
    if (!std::isfinite(d)) return 0.25;
    return 0.25 * d;
}

namespace {

// approach + full anticlockwise circle + retreat, entering along the ray
// from base to p
Path loop_path(Complex base, Complex p, double radius, const std::vector<Complex>& others,
               double guard) {
    if (std::abs(base - p) <= radius * 1.5)
        fail(Err::InvalidInput, "loop base point sits inside the loop circle");
    const Complex entry = p + radius * (base - p) / std::abs(base - p);
    Path approach = safe_path(base, entry, others, guard);
    const double phi = std::arg(entry - p);
    Path out = approach;
    out.segments.push_back(Segment::arc(p, radius, phi, phi + 2.0 * kPi));
    out += approach.reversed();
    return out;
}

std::vector<Complex> without(const std::vector<Complex>& pts, Complex q) {
    std::vector<Complex> r;
    for (Complex p : pts)
        if (std::abs(p - q) > 1e-12) r.push_back(p);
    return r;
}

double guard_of(const std::vector<Complex>& pts) {
    double d = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < pts.size(); ++i)
        for (size_t j = i + 1; j < pts.size(); ++j) d = std::min(d, std::abs(pts[i] - pts[j]));
    if (!std::isfinite(d)) return 1e-3;
    return std::max(1e-6, 0.02 * d);
}

}  // namespace

Contour simple_loop(Complex p, Complex base, const std::vector<Complex>& avoid, double radius) {
    const std::vector<Complex> others = without(avoid, p);
    double r = radius;
    if (r <= 0.0) {
        std::vector<Complex> ref = others;
        ref.push_back(base);
        r = loop_radius(p, ref);
    }
    Contour c;
    c.kind = Contour::Kind::SimpleLoop;
    c.about = p;
    c.path = loop_path(base, p, r, others, guard_of(avoid));
    c.branch_log = {{p, 1}};
    return c;
}

Contour pochhammer_contour(Complex z, Complex p, Complex base,
                           const std::vector<Complex>& avoid) {
    std::vector<Complex> all = without(avoid, z);
    all.push_back(z);
    const double rz = std::min(1e-2, loop_radius(z, without(all, z)));
    std::vector<Complex> withp = without(all, z);
    if (nearest_distance(p, withp) > 1e-12) withp.push_back(p);

    const double guard = guard_of(all);
    const Path gz = loop_path(base, z, rz, withp, guard);
    std::vector<Complex> ref = without(all, p);
    ref.push_back(base);
    const Path gp = loop_path(base, p, loop_radius(p, ref), without(all, p), guard);

    Contour c;
    c.kind = Contour::Kind::Pochhammer;
    c.about = p;
    c.path = gz;
    c.path += gp;
    c.path += gz.reversed();
    c.path += gp.reversed();
    c.branch_log = {{z, 0}, {p, 0}};
    return c;
}

Contour cp_loop(Complex z, Complex p, const std::vector<Complex>& avoid) {
    std::vector<Complex> ref = without(avoid, p);
    ref.push_back(z);
    const double r = loop_radius(p, ref);
    Contour c;
    c.kind = Contour::Kind::CpLoop;
    c.about = p;
    c.path = loop_path(z, p, r, without(without(avoid, p), z), guard_of(avoid));
    c.branch_log = {{z, 0}, {p, 1}};
    return c;
}

Contour big_loop(Complex base, const std::vector<Complex>& enclosed) {
    Complex c0 = 0.0;
    for (Complex e : enclosed) c0 += e;
    if (!enclosed.empty()) c0 /= double(enclosed.size());
    double r = 1.0 + std::abs(base - c0);
    for (Complex e : enclosed) r = std::max(r, std::abs(e - c0));
    r = 2.0 * r + 1.0;
    Complex dir = base - c0;
    if (std::abs(dir) < 1e-9) dir = 1.0;
    const Complex entry = c0 + r * dir / std::abs(dir);
    Path approach = safe_path(base, entry, enclosed, guard_of(enclosed));
    Contour c;
    c.kind = Contour::Kind::BigLoop;
    c.about = c0;
    c.path = approach;
    const double phi = std::arg(entry - c0);
    c.path.segments.push_back(Segment::arc(c0, r, phi, phi + 2.0 * kPi));
    c.path += approach.reversed();
    for (Complex e : enclosed) c.branch_log.push_back({e, 1});
    return c;
}

// ---------------------------------------------------------------------------
// ODE specs and transport

namespace {

std::function<std::vector<CMatrix>(Complex, int)> residue_coeffs(std::vector<Complex> poles,
                                                                 std::vector<CMatrix> res) {
    return [poles = std::move(poles), res = std::move(res)](Complex c, int len) {
        const int n = res.empty() ? 0 : res[0].rows();
        std::vector<CMatrix> out(size_t(len), CMatrix(n, n));
        for (size_t q = 0; q < poles.size(); ++q) {
            // 1/(w - p) = sum_j (-1)^j / (c - p)^{j+1} (w - c)^j
            const Complex q0 = 1.0 / (c - poles[q]);
            Complex cur = q0;
            for (int j = 0; j < len; ++j) {
                out[size_t(j)] += res[q] * cur;
                cur *= -q0;
            }
        }
        return out;
    };
}

struct LocalGerm {
    Complex center;
    std::vector<PowerSeries> y, dy;
};

std::vector<PowerSeries> taylor_solution(const OdeSpec& ode, Complex center,
                                         const std::vector<Complex>& y0, int len) {
    const auto as = ode.coeffs(center, len);
    const int n = ode.dim;
    std::vector<PowerSeries> y(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        y[size_t(i)].c.assign(size_t(len), Complex(0.0));
        y[size_t(i)].c[0] = y0[size_t(i)];
    }
    for (int m = 0; m + 1 < len; ++m) {
        for (int i = 0; i < n; ++i) {
            Complex s = 0.0;
            for (int j = 0; j <= m; ++j)
                for (int k = 0; k < n; ++k) s += as[size_t(j)](i, k) * y[size_t(k)].at(m - j);
            y[size_t(i)].c[size_t(m + 1)] = s / double(m + 1);
        }
    }
    return y;
}

LocalGerm make_germ(const OdeSpec& ode, Complex center, const std::vector<Complex>& y0, int len) {
    LocalGerm g;
    g.center = center;
    g.y = taylor_solution(ode, center, y0, len);
    g.dy.reserve(g.y.size());
    for (const PowerSeries& p : g.y) g.dy.push_back(derivative(p));
    return g;
}

std::vector<Complex> germ_values(const LocalGerm& g, Complex w) {
    std::vector<Complex> v(g.y.size());
    for (size_t i = 0; i < g.y.size(); ++i) v[i] = heunmcv::eval(g.y[i], w - g.center);
    return v;
}

std::vector<Complex> germ_derivs(const LocalGerm& g, Complex w) {
    std::vector<Complex> v(g.dy.size());
    for (size_t i = 0; i < g.dy.size(); ++i) v[i] = heunmcv::eval(g.dy[i], w - g.center);
    return v;
}

double germ_tail(const LocalGerm& g, double span) {
    double t = 0.0;
    for (const PowerSeries& p : g.y) {
        const int l = p.len();
        if (l < 2) continue;
        t = std::max(t, std::abs(p.c[size_t(l - 1)]) * std::pow(span, l - 1) +
                            std::abs(p.c[size_t(l - 2)]) * std::pow(span, l - 2));
    }
    return t;
}

constexpr int kGermLen = 34;

}  // namespace

OdeSpec ode_of(const FuchsianSystem& sys) {
    OdeSpec o;
    o.dim = 2;
    o.sings = {0.0, 1.0, sys.t};
    o.coeffs = residue_coeffs({0.0, 1.0, sys.t}, {sys.a0, sys.a1, sys.at});
    return o;
}

OdeSpec ode_of(const mcv::GeneralSystem& sys) {
    if (sys.residues.empty()) fail(Err::InvalidInput, "empty system");
    OdeSpec o;
    o.dim = sys.residues[0].rows();
    o.sings = sys.poles;
    o.coeffs = residue_coeffs(sys.poles, sys.residues);
    return o;
}

OdeSpec companion_ode(const ScalarODE2& ode) {
    OdeSpec o;
    o.dim = 2;
    for (Complex p : pole_list(ode))
        if (nearest_distance(p, o.sings) > 1e-9) o.sings.push_back(p);
    o.coeffs = [p1 = ode.p1, p2 = ode.p2](Complex c, int len) {
        const PowerSeries t1 = rational_taylor(p1, c, len, "companion_ode");
        const PowerSeries t2 = rational_taylor(p2, c, len, "companion_ode");
        std::vector<CMatrix> out(size_t(len), CMatrix(2, 2));
        out[0](0, 1) = 1.0;
        for (int j = 0; j < len; ++j) {
            out[size_t(j)](1, 0) = -t2.at(j);
            out[size_t(j)](1, 1) = -t1.at(j);
        }
        return out;
    };
    return o;
}

OdeSpec constant_ode(const CMatrix& a) {
    OdeSpec o;
    o.dim = a.rows();
    o.coeffs = [a](Complex, int len) {
        std::vector<CMatrix> out(size_t(len), CMatrix(a.rows(), a.cols()));
        out[0] = a;
        return out;
    };
    return o;
}

std::vector<Complex> integrate_vector(const OdeSpec& ode, const std::vector<Complex>& y0,
                                      const Path& path, double tol) {
    if (int(y0.size()) != ode.dim) fail(Err::InvalidInput, "initial value has the wrong size");
    std::vector<Complex> y = y0;
    for (const Segment& seg : path.segments) {
        double s = 0.0;
        const double speed = std::abs(seg.velocity(0.5)) + 1e-300;
        while (s < 1.0) {
            const Complex w0 = seg.point(s);
            const double d = nearest_distance(w0, ode.sings);
            if (d < 1e-9 * (1.0 + std::abs(w0)))
                fail(Err::PathTooClose, "path touches a singular point");
            double ds = std::min(1.0 - s, std::isfinite(d) ? 0.35 * d / speed : 1.0 - s);
            double scale = 0.0;
            for (Complex v : y) scale = std::max(scale, std::abs(v));
            for (int tries = 0;; ++tries) {
                if (ds * speed < 1e-12 * (1.0 + std::abs(w0)) || tries > 60)
                    fail(Err::PathTooClose, "step size underflow near a singular point");
                const LocalGerm g = make_germ(ode, w0, y, kGermLen);
                const Complex w1 = seg.point(s + ds);
                if (germ_tail(g, std::abs(w1 - w0)) <= tol * (1.0 + scale)) {
                    y = germ_values(g, w1);
                    break;
                }
                ds *= 0.5;
            }
            s += ds;
        }
    }
    return y;
}

CMatrix integrate_system(const OdeSpec& ode, const CMatrix& y0, const Path& path, double tol) {
    if (y0.rows() != ode.dim) fail(Err::InvalidInput, "initial value has the wrong size");
    CMatrix out(y0.rows(), y0.cols());
    for (int j = 0; j < y0.cols(); ++j) {
        std::vector<Complex> col(size_t(y0.rows()));
        for (int i = 0; i < y0.rows(); ++i) col[size_t(i)] = y0(i, j);
        col = integrate_vector(ode, col, path, tol);
        for (int i = 0; i < y0.rows(); ++i) out(i, j) = col[size_t(i)];
    }
    return out;
}

CMatrix monodromy(const FuchsianSystem& sys, Complex base, const Contour& loop, double tol) {
    if (std::abs(loop.path.start() - base) > 1e-9 * (1.0 + std::abs(base)))
        fail(Err::InvalidInput, "loop is not based at the given point");
    if (!loop.path.closed()) fail(Err::InvalidInput, "loop does not close up");
    return integrate_system(ode_of(sys), CMatrix::identity(2), loop.path, tol);
}

MonodromyData monodromy_data(const FuchsianSystem& sys, double tol) {
    const std::vector<Complex> sings{0.0, 1.0, sys.t};
    MonodromyData m;
    m.base = choose_base(sings);
    m.m0 = monodromy(sys, m.base, simple_loop(0.0, m.base, sings), tol);
    m.m1 = monodromy(sys, m.base, simple_loop(1.0, m.base, sings), tol);
    m.mt = monodromy(sys, m.base, simple_loop(sys.t, m.base, sings), tol);
    // near infinity Y ~ z^{-Ainf}; the clockwise big circle therefore picks
    // up e^{2 pi i kappa} and closes the relation minf * mt * m1 * m0 = 1
    m.minf = integrate_system(ode_of(sys), CMatrix::identity(2),
                              big_loop(m.base, sings).path.reversed(), tol);
    return m;
}

// ---------------------------------------------------------------------------
// contour quadrature

namespace {

struct QuadContext {
    const ContourIntegrand* f = nullptr;
    Complex z;
    bool single_valued = false;
    long nu_int = 0;
    // running state along the path
    std::vector<Complex> y;
    double theta = 0.0;    // continued arg(z - w)
    double winding = 0.0;  // accumulated arg increments (radians)
    Complex integral = 0.0;
};

Complex kernel_value(const QuadContext& q, Complex w, double theta_w) {
    const Complex x = q.z - w;
    if (q.single_valued) return int_power(x, q.nu_int);
    return std::exp(q.f->nu * Complex(std::log(std::abs(x)), theta_w));
}

void quad_segment(QuadContext& q, const Segment& seg, double s0, double s1, double share,
                  int depth) {
    if (depth > 40) fail(Err::QuadratureError, "panel refinement failed to converge");
    const Complex w0 = seg.point(s0);
    const double d_ode = nearest_distance(w0, q.f->ode.sings);
    if (d_ode < 1e-9 * (1.0 + std::abs(w0)))
        fail(Err::PathTooClose, "contour touches a singular point");
    const double speed = std::abs(seg.velocity(0.5 * (s0 + s1))) + 1e-300;
    const double span = speed * (s1 - s0);
    const double dz = std::abs(q.z - w0);

    bool split = std::isfinite(d_ode) && span > 0.35 * d_ode;
    if (!q.single_valued && span > 0.45 * dz) split = true;

    if (!split) {
        const LocalGerm g = make_germ(q.f->ode, w0, q.y, kGermLen);
        const double mid = 0.5 * (s0 + s1), half = 0.5 * (s1 - s0);
        Complex ik = 0.0, ig = 0.0;
        double mass = 0.0;
        for (int i = 0; i < 15; ++i) {
            const int idx = i < 8 ? i : 14 - i;
            const double u = (i < 8 ? -kXgk[idx] : kXgk[idx]);
            const double s = mid + half * u;
            const Complex w = seg.point(s);
            const double th =
                q.single_valued ? 0.0 : q.theta + std::arg((q.z - w) / (q.z - w0));
            const Complex gi = q.f->weight(w, germ_values(g, w), germ_derivs(g, w)) *
                               kernel_value(q, w, th) * seg.velocity(s);
            ik += kWgk[idx] * gi;
            mass += kWgk[idx] * std::abs(gi);
            if (idx % 2 == 1) ig += kWg[idx / 2] * gi;
        }
        ik *= half;
        ig *= half;
        mass *= half;
        const double err = std::abs(ik - ig);
        const double tail = germ_tail(g, span) * span;
        // the mass term is the round-off attainable on this panel; without
        // it, large-magnitude kernels (exponents far below -1 close to their
        // branch point) bisect forever chasing noise
        const double floor = std::max(1e-15 * (1.0 + std::abs(ik)), 5e-14 * mass);
        if (err + tail <= std::max(share, floor)) {
            q.integral += ik;
            const Complex w1 = seg.point(s1);
            q.y = germ_values(g, w1);
            if (!q.single_valued) {
                const double dth = std::arg((q.z - w1) / (q.z - w0));
                q.theta += dth;
                q.winding += dth;
            }
            return;
        }
    }
    const double mid = 0.5 * (s0 + s1);
    quad_segment(q, seg, s0, mid, 0.5 * share, depth + 1);
    quad_segment(q, seg, mid, s1, 0.5 * share, depth + 1);
}

}  // namespace

ContourIntegral contour_transform(const ContourIntegrand& f, const Contour& c, Complex z,
                                  double tol) {
    if (int(f.y0.size()) != f.ode.dim) fail(Err::InvalidInput, "initial value has the wrong size");
    QuadContext q;
    q.f = &f;
    q.z = z;
    q.single_valued = near_integer(f.nu, q.nu_int);
    q.y = f.y0;
    const Complex w_start = c.path.start();
    if (!q.single_valued) {
        if (std::abs(z - w_start) < 1e-12 * (1.0 + std::abs(z)))
            fail(Err::InvalidInput,
                 "cycles based at the evaluation point need an integer kernel exponent");
        q.theta = std::arg(z - w_start);
    }

    const double total = c.path.length();
    for (const Segment& seg : c.path.segments)
        quad_segment(q, seg, 0.0, 1.0, tol * seg.length() / (total + 1e-300), 0);

    const double turns = q.winding / (2.0 * kPi);
    if (!q.single_valued) {
        for (const WindingPlan& plan : c.branch_log) {
            if (std::abs(plan.point - z) > 1e-9 * (1.0 + std::abs(z))) continue;
            if (std::abs(turns - double(plan.turns)) > 0.1)
                fail(Err::BranchError, "kernel winding does not match the contour plan");
        }
    }
    if (c.kind == Contour::Kind::Pochhammer) {
        double scale = 0.0, diff = 0.0;
        for (size_t i = 0; i < q.y.size(); ++i) {
            scale = std::max(scale, std::abs(f.y0[i]));
            diff = std::max(diff, std::abs(q.y[i] - f.y0[i]));
        }
        if (diff > 1e-5 * (1.0 + scale))
            fail(Err::BranchError, "solution does not close up along the commutator cycle");
    }
    return {q.integral, q.y, turns};
}

TransformSample transform_at(const ContourIntegrand& f, const Contour& c, Complex z,
                             int n_derivs, double tol) {
    if (n_derivs < 0 || n_derivs > 2) fail(Err::InvalidInput, "n_derivs must be 0, 1 or 2");
    const ContourIntegral base = contour_transform(f, c, z, tol);
    TransformSample out{base.value, 0.0, 0.0};

    long nu_int = 0;
    const bool integer_nu = near_integer(f.nu, nu_int);
    const bool bounded_cycle = c.kind == Contour::Kind::CpLoop;

    // germs of both solution branches at z, for the boundary terms of cycles
    // based there
    LocalGerm g_start, g_end;
    bool have_germs = false;
    auto branch_weight = [&](const LocalGerm& g, Complex w) {
        return f.weight(w, germ_values(g, w), germ_derivs(g, w));
    };

    Complex falling = 1.0;
    for (int m = 1; m <= n_derivs; ++m) {
        falling *= f.nu - double(m - 1);
        Complex im = 0.0;
        if (std::abs(falling) > 1e-13) {
            ContourIntegrand fm = f;
            fm.nu = f.nu - double(m);
            im = falling * contour_transform(fm, c, z, tol).value;
        }
        if (bounded_cycle && integer_nu && nu_int >= 0 && m >= nu_int + 1) {
            if (!have_germs) {
                g_start = make_germ(f.ode, z, f.y0, 12);
                g_end = make_germ(f.ode, z, base.y_end, 12);
                have_germs = true;
            }
            Complex fact = 1.0;
            for (long i = 2; i <= nu_int; ++i) fact *= double(i);
            const int order = m - int(nu_int) - 1;
            Complex delta;
            if (order == 0) {
                delta = branch_weight(g_end, z) - branch_weight(g_start, z);
            } else {
                // fourth-order stencil on the germ-continued branches
                const double h =
                    1e-3 * std::min(1.0, 0.05 * nearest_distance(z, f.ode.sings));
                auto d1 = [&](const LocalGerm& g) {
                    return (-branch_weight(g, z + 2.0 * h) + 8.0 * branch_weight(g, z + h) -
                            8.0 * branch_weight(g, z - h) + branch_weight(g, z - 2.0 * h)) /
                           (12.0 * h);
                };
                delta = d1(g_end) - d1(g_start);
            }
            im += fact * delta;
        }
        (m == 1 ? out.dy : out.d2y) = im;
    }
    return out;
}

}  // namespace heunmcv::analytic
