#include "heunmcv/sic.hpp"

#include <cmath>
#include <string>

namespace heunmcv::sic {

namespace {

void check_div(Complex d, const char* what) {
    if (d == 0.0) fail(Err::TransitionUndefined, std::string("transition divides by ") + what);
}

bool adjacent(Chart a, Chart b) {
    if (a == Chart::U0) return b == Chart::U1 || b == Chart::U2 || b == Chart::U3 || b == Chart::UInf;
    if (b == Chart::U0) return adjacent(b, a);
    return (a == Chart::UInf && b == Chart::U4) || (a == Chart::U4 && b == Chart::UInf);
}

Chart hub_towards(Chart from) {
    switch (from) {
        case Chart::U1:
        case Chart::U2:
        case Chart::U3:
        case Chart::UInf:
            return Chart::U0;
        case Chart::U4:
            return Chart::UInf;
        default:
            return Chart::U0;
    }
}

// The curves onto the starred and infinity lines push lambda against a
// singular point while mu blows up like the inverse curve parameter; in
// doubles the recovered offsets (lambda - 1 etc.) lose most of their bits
// and the extrapolated limit stalls around 1e-7. The sampling therefore
// runs in extended precision.
using LC = std::complex<long double>;

LC widen(Complex c) { return {(long double)c.real(), (long double)c.imag()}; }

LC lneville_to_zero(const std::vector<long double>& h, std::vector<LC> v) {
    const size_t n = v.size();
    for (size_t m = 1; m < n; ++m)
        for (size_t i = 0; i + m < n; ++i)
            v[i] = (h[i] * v[i + 1] - h[i + m] * v[i]) / (h[i] - h[i + m]);
    return v[0];
}

struct LPoint {
    LC lam, mu;
};

// (lambda, mu) of the moving point at curve parameter eps, per line.
LPoint lcurve(Line line, const ThetaParams& th, LC t, LC coord, long double eps) {
    const LC k1 = (widen(th.thinf) - widen(th.th0) - widen(th.th1) - widen(th.tht)) / 2.0L;
    switch (line) {
        case Line::L0star: return {(widen(th.th0) - coord * eps) * eps, LC(1.0L / eps)};
        case Line::L1star: return {1.0L + (widen(th.th1) - coord * eps) * eps, LC(1.0L / eps)};
        case Line::Ltstar: return {t + (widen(th.tht) - coord * eps) * eps, LC(1.0L / eps)};
        case Line::LInf: return {LC(1.0L / eps), (-k1 - coord * eps) * eps};
        default: {  // LInfstar, routed U4 -> UInf -> U0
            LC qi = ((1.0L - widen(th.thinf)) - coord * eps) * eps;
            LC pi = LC(1.0L / eps);
            return {1.0L / qi, (-k1 - qi * pi) * qi};
        }
    }
}

struct LPair {
    LC p1, p2;
};

// Scalar coefficients at z for the moving point (lam, mu), after the
// v = (z-c)^g substitution of the target family (g in {0, -1}).
LPair lscalar_gauged(const ThetaParams& th, LC t, LC lam, LC mu, LC z, int gauge_exponent,
                     LC gauge_center) {
    const LC th0 = widen(th.th0), th1 = widen(th.th1), tht = widen(th.tht), thinf = widen(th.thinf);
    const LC k1 = (thinf - th0 - th1 - tht) / 2.0L;
    const LC k2 = -(thinf + th0 + th1 + tht) / 2.0L;
    const LC h = (lam * (lam - 1.0L) * (lam - t) * mu * mu -
                  (th0 * (lam - 1.0L) * (lam - t) + th1 * lam * (lam - t) +
                   (tht - 1.0L) * lam * (lam - 1.0L)) *
                      mu +
                  k1 * (k2 + 1.0L) * (lam - t)) /
                 (t * (t - 1.0L));
    LC p1 = (1.0L - th0) / z + (1.0L - th1) / (z - 1.0L) + (1.0L - tht) / (z - t) - 1.0L / (z - lam);
    LC p2 = k1 * (k2 + 1.0L) / (z * (z - 1.0L)) +
            lam * (lam - 1.0L) * mu / (z * (z - 1.0L) * (z - lam)) -
            t * (t - 1.0L) * h / (z * (z - 1.0L) * (z - t));
    if (gauge_exponent != 0) {
        // v = (z-c)^{-1} y:  p1 -> p1 + 2/(z-c),  p2 -> p2 + p1/(z-c)
        LC d = z - gauge_center;
        p2 += p1 / d;
        p1 += 2.0L / d;
    }
    return {p1, p2};
}

}  // namespace

const char* chart_name(Chart c) {
    switch (c) {
        case Chart::U0: return "U0";
        case Chart::U1: return "U1";
        case Chart::U2: return "U2";
        case Chart::U3: return "U3";
        case Chart::U4: return "U4";
        case Chart::UInf: return "Uinf";
    }
    return "?";
}

const char* line_name(Line l) {
    switch (l) {
        case Line::L0: return "L0";
        case Line::L1: return "L1";
        case Line::Lt: return "Lt";
        case Line::LInf: return "Linf";
        case Line::L0star: return "L0*";
        case Line::L1star: return "L1*";
        case Line::Ltstar: return "Lt*";
        case Line::LInfstar: return "Linf*";
    }
    return "?";
}

SICPoint chart_transition(const SICPoint& x, Chart target, const ThetaParams& th, Complex t) {
    if (x.chart == target) return x;
    if (!adjacent(x.chart, target))
        fail(Err::NoGluing, std::string("no gluing data between ") + chart_name(x.chart) + " and " +
                                chart_name(target));
    const Complex k1 = th.kappa1();
    const Complex q = x.q, p = x.p;

    if (x.chart == Chart::U0) {
        switch (target) {
            case Chart::U1:
                check_div(p, "p0");
                return {target, (th.th0 - q * p) * p, 1.0 / p};
            case Chart::U2:
                check_div(p, "p0");
                return {target, (th.th1 - (q - 1.0) * p) * p, 1.0 / p};
            case Chart::U3:
                check_div(p, "p0");
                return {target, (th.tht - (q - t) * p) * p, 1.0 / p};
            default:  // UInf
                check_div(q, "q0");
                return {target, 1.0 / q, (-k1 - q * p) * q};
        }
    }
    if (target == Chart::U0) {
        switch (x.chart) {
            case Chart::U1:
                check_div(p, "p1");
                return {target, (th.th0 - q * p) * p, 1.0 / p};
            case Chart::U2:
                check_div(p, "p2");
                return {target, 1.0 + (th.th1 - q * p) * p, 1.0 / p};
            case Chart::U3:
                check_div(p, "p3");
                return {target, t + (th.tht - q * p) * p, 1.0 / p};
            default:  // UInf
                check_div(q, "qinf");
                return {target, 1.0 / q, (-k1 - q * p) * q};
        }
    }
    if (x.chart == Chart::UInf && target == Chart::U4) {
        check_div(p, "pinf");
        return {target, ((1.0 - th.thinf) - q * p) * p, 1.0 / p};
    }
    // U4 -> UInf
    check_div(p, "p4");
    return {Chart::UInf, ((1.0 - th.thinf) - q * p) * p, 1.0 / p};
}

SICPoint to_chart(const SICPoint& x, Chart target, const ThetaParams& th, Complex t) {
    SICPoint cur = x;
    for (int hop = 0; hop < 4 && cur.chart != target; ++hop) {
        Chart next = adjacent(cur.chart, target) ? target : hub_towards(cur.chart);
        if (next == cur.chart) next = (cur.chart == Chart::U0) ? Chart::UInf : Chart::U0;
        cur = chart_transition(cur, next, th, t);
    }
    return cur;
}

std::optional<Line> classify_point(const SICPoint& x, const ThetaParams& th, Complex t, double tol) {
    struct Home {
        Line line;
        Chart chart;
        bool on_q;     // hyperplane is q = value (else p = 0)
        Complex value;
    };
    const Home homes[] = {
        {Line::L0, Chart::U0, true, 0.0},      {Line::L1, Chart::U0, true, 1.0},
        {Line::Lt, Chart::U0, true, t},        {Line::LInf, Chart::UInf, true, 0.0},
        {Line::L0star, Chart::U1, false, 0.0}, {Line::L1star, Chart::U2, false, 0.0},
        {Line::Ltstar, Chart::U3, false, 0.0}, {Line::LInfstar, Chart::U4, false, 0.0},
    };
    const double scale = tol * (1.0 + std::abs(t));
    // the point's own chart first: its coordinates are authoritative there
    for (int pass = 0; pass < 2; ++pass) {
        for (const Home& h : homes) {
            bool own = (h.chart == x.chart);
            if (pass == 0 && !own) continue;
            if (pass == 1 && own) continue;
            SICPoint y;
            try {
                y = to_chart(x, h.chart, th, t);
            } catch (const Error&) {
                continue;
            }
            double d = h.on_q ? std::abs(y.q - h.value) : std::abs(y.p);
            if (d <= scale) return h.line;
        }
    }
    return std::nullopt;
}

LineFamily heun_on_line(Line line, const ThetaParams& th, Complex t, Complex coordinate) {
    if (std::abs(t) <= 1e-8 || std::abs(t - 1.0) <= 1e-8)
        fail(Err::InvalidInput, "t must stay away from 0 and 1");
    const Complex k1 = th.kappa1(), k2 = th.kappa2();
    const Complex one = 1.0;
    LineFamily f;
    HeunParams& hp = f.params;
    hp.t = t;
    switch (line) {
        case Line::L0:
            hp.gamma = -th.th0;
            hp.delta = one - th.th1;
            hp.epsilon = one - th.tht;
            hp.alpha = k1;
            hp.beta = k2 + 1.0;
            f.accessory_slope = -t * th.th0;
            hp.q = f.accessory_slope * coordinate;
            f.display_q = hp.q;
            break;
        case Line::L1:
            hp.gamma = one - th.th0;
            hp.delta = -th.th1;
            hp.epsilon = one - th.tht;
            hp.alpha = k1;
            hp.beta = k2 + 1.0;
            f.accessory_slope = -(1.0 - t) * th.th1;
            hp.q = k1 * (k2 + 1.0) + f.accessory_slope * coordinate;
            f.display_q = hp.q;
            break;
        case Line::Lt:
            hp.gamma = one - th.th0;
            hp.delta = one - th.th1;
            hp.epsilon = -th.tht;
            hp.alpha = k1;
            hp.beta = k2 + 1.0;
            f.accessory_slope = -t * (t - 1.0) * th.tht;
            hp.q = t * k1 * (k2 + 1.0) + f.accessory_slope * coordinate;
            f.display_q = hp.q;
            break;
        case Line::LInf:
            hp.gamma = one - th.th0;
            hp.delta = one - th.th1;
            hp.epsilon = one - th.tht;
            hp.alpha = k1;
            hp.beta = k2 + 2.0;
            f.accessory_slope = th.thinf - 1.0;
            hp.q = f.accessory_slope * coordinate +
                   k1 * (t * (k2 + th.tht + 1.0) + k2 + th.th1 + 1.0);
            f.display_q = hp.q;
            break;
        case Line::L0star:
            hp.gamma = 2.0 - th.th0;
            hp.delta = one - th.th1;
            hp.epsilon = one - th.tht;
            hp.alpha = k1 + 1.0;
            hp.beta = k2 + 2.0;
            f.accessory_slope = -t;
            f.display_q = -t * coordinate + (th.th0 - 1.0) * (t * (th.th1 - 1.0) + th.tht - 1.0);
            hp.q = f.display_q;
            f.gauge_exponent = -1;
            f.gauge_center = 0.0;
            break;
        case Line::L1star:
            hp.gamma = one - th.th0;
            hp.delta = 2.0 - th.th1;
            hp.epsilon = one - th.tht;
            hp.alpha = k1 + 1.0;
            hp.beta = k2 + 2.0;
            f.accessory_slope = t - 1.0;
            f.display_q = (t - 1.0) * coordinate -
                          (th.th1 - 1.0) * ((1.0 - t) * (th.th0 - 1.0) + th.tht - 1.0);
            hp.q = hp.alpha * hp.beta + f.display_q;
            f.gauge_exponent = -1;
            f.gauge_center = 1.0;
            break;
        case Line::Ltstar:
            hp.gamma = one - th.th0;
            hp.delta = one - th.th1;
            hp.epsilon = 2.0 - th.tht;
            hp.alpha = k1 + 1.0;
            hp.beta = k2 + 2.0;
            f.accessory_slope = t * (1.0 - t);
            f.display_q = t * (1.0 - t) * coordinate -
                          (th.tht - 1.0) * ((t - 1.0) * (th.th0 - 1.0) + t * (th.th1 - 1.0));
            hp.q = t * hp.alpha * hp.beta + f.display_q;
            f.gauge_exponent = -1;
            f.gauge_center = t;
            break;
        case Line::LInfstar:
            hp.gamma = one - th.th0;
            hp.delta = one - th.th1;
            hp.epsilon = one - th.tht;
            hp.alpha = k1 + 1.0;
            hp.beta = k2 + 1.0;
            f.accessory_slope = -1.0;
            hp.q = -coordinate + (k2 + 1.0) * (t * (k1 + th.tht) + k1 + th.th1);
            f.display_q = hp.q;
            break;
    }
    f.degenerate_accessory = std::abs(f.accessory_slope) <= 1e-10 * (1.0 + std::abs(t) * std::abs(t));
    return f;
}

FuchsianSystem realize_system_on_line(Line line, const ThetaParams& th, Complex t,
                                      Complex coordinate, Complex k) {
    if (std::abs(t) <= 1e-8 || std::abs(t - 1.0) <= 1e-8)
        fail(Err::InvalidInput, "t must stay away from 0 and 1");
    if (std::abs(k) <= 1e-12) fail(Err::InvalidInput, "k must be nonzero");
    const Complex k1 = th.kappa1(), k2 = th.kappa2(), thinf = th.thinf;
    if (std::abs(thinf) <= 1e-8)
        fail(Err::DegenerateThetaInf, "theta_inf vanishes; the realization is not determined");
    auto check_den = [](Complex d, const char* what) {
        if (std::abs(d) <= 1e-8)
            fail(Err::DegenerateDenominator, std::string("realization divides by ") + what);
    };
    auto corner = [](Complex theta, Complex v, bool starred) {
        CMatrix m(2, 2);
        if (starred) {  // [[theta, 0], [v, 0]]
            m(0, 0) = theta;
            m(1, 0) = v;
        } else {  // [[0, 0], [v, theta]]
            m(1, 0) = v;
            m(1, 1) = theta;
        }
        return m;
    };

    FuchsianSystem sys;
    sys.t = t;
    switch (line) {
        case Line::L0: {
            check_den(thinf - th.th0, "theta_inf - theta_0");
            Complex v = th.th0 * (t * (th.th0 - thinf) * coordinate +
                                  k1 * (k1 + th.th1 + t * (k1 + th.tht))) /
                        (k * thinf);
            Complex u1 = -th.th1 + (k * v / (t - 1.0) - k1 * (k1 + th.tht)) / (thinf - th.th0);
            Complex ut = -th.tht - (k * v / (t - 1.0) + k1 * (k1 + th.th1)) / (thinf - th.th0);
            sys.a0 = corner(th.th0, v, false);
            sys.a1 = residue_matrix(u1, th.th1, k / (t - 1.0));
            sys.at = residue_matrix(ut, th.tht, -k / (t - 1.0));
            break;
        }
        case Line::L0star: {
            check_den(thinf + th.th0, "theta_inf + theta_0");
            Complex v = (-t * (th.th0 + thinf) * coordinate +
                         th.th0 * (k1 + th.th0) * ((k2 + th.tht) + t * (k2 + th.th1))) /
                        (k * thinf);
            Complex u1 = (k * v / (t - 1.0) - k2 * (k2 + th.tht)) / (thinf + th.th0);
            Complex ut = -(k * v / (t - 1.0) + k2 * (k2 + th.th1)) / (thinf + th.th0);
            sys.a0 = corner(th.th0, v, true);
            sys.a1 = residue_matrix(u1, th.th1, k / (t - 1.0));
            sys.at = residue_matrix(ut, th.tht, -k / (t - 1.0));
            break;
        }
        case Line::L1: {
            check_den(thinf - th.th1, "theta_inf - theta_1");
            Complex v = th.th1 * ((1.0 - t) * (th.th1 - thinf) * coordinate -
                                  k1 * (k1 + th.th0 + (1.0 - t) * (k1 + th.tht))) /
                        (k * thinf);
            Complex u0 = -th.th0 + (k * v / t - k1 * (k1 + th.tht)) / (thinf - th.th1);
            Complex ut = -th.tht - (k * v / t + k1 * (k1 + th.th0)) / (thinf - th.th1);
            sys.a1 = corner(th.th1, v, false);
            sys.a0 = residue_matrix(u0, th.th0, k / t);
            sys.at = residue_matrix(ut, th.tht, -k / t);
            break;
        }
        case Line::L1star: {
            check_den(thinf + th.th1, "theta_inf + theta_1");
            Complex v = ((t - 1.0) * (th.th1 + thinf) * coordinate -
                         th.th1 * (k1 + th.th1) * ((k2 + th.tht) + (1.0 - t) * (k2 + th.th0))) /
                        (k * thinf);
            Complex u0 = (k * v / t - k2 * (k2 + th.tht)) / (thinf + th.th1);
            Complex ut = -(k * v / t + k2 * (k2 + th.th0)) / (thinf + th.th1);
            sys.a1 = corner(th.th1, v, true);
            sys.a0 = residue_matrix(u0, th.th0, k / t);
            sys.at = residue_matrix(ut, th.tht, -k / t);
            break;
        }
        case Line::Lt: {
            check_den(thinf - th.tht, "theta_inf - theta_t");
            Complex v = th.tht * (t * (t - 1.0) * (th.tht - thinf) * coordinate -
                                  k1 * (t * (k1 + th.th0) + (t - 1.0) * (k1 + th.th1))) /
                        (k * thinf);
            Complex u0 = -th.th0 + (k * v - k1 * (k1 + th.th1)) / (thinf - th.tht);
            Complex u1 = -th.th1 - (k * v + k1 * (k1 + th.th0)) / (thinf - th.tht);
            sys.at = corner(th.tht, v, false);
            sys.a0 = residue_matrix(u0, th.th0, k);
            sys.a1 = residue_matrix(u1, th.th1, -k);
            break;
        }
        case Line::Ltstar: {
            check_den(thinf + th.tht, "theta_inf + theta_t");
            Complex v = (t * (1.0 - t) * (th.tht + thinf) * coordinate -
                         th.tht * (k1 + th.tht) * (t * (k2 + th.th1) + (t - 1.0) * (k2 + th.th0))) /
                        (k * thinf);
            Complex u0 = (k * v - k2 * (k2 + th.th1)) / (thinf + th.tht);
            Complex u1 = -(k * v + k2 * (k2 + th.th0)) / (thinf + th.tht);
            sys.at = corner(th.tht, v, true);
            sys.a0 = residue_matrix(u0, th.th0, k);
            sys.a1 = residue_matrix(u1, th.th1, -k);
            break;
        }
        case Line::LInf: {
            const Complex l = coordinate;
            const Complex lt = l * l + (th.th1 + t * th.tht) * l + t * k1 * (k1 + th.th0);
            Complex u0 = -th.th0 - k1 + lt / (t * thinf);
            Complex u1 = -th.th1 + (lt - thinf * l) / ((1.0 - t) * thinf);
            Complex ut = -th.tht + (lt - t * thinf * l) / (t * (t - 1.0) * thinf);
            sys.a0 = residue_matrix(u0, th.th0, -k / t);
            sys.a1 = residue_matrix(u1, th.th1, k / (t - 1.0));
            sys.at = residue_matrix(ut, th.tht, -k / (t * (t - 1.0)));
            break;
        }
        case Line::LInfstar:
            fail(Err::NotRealizable,
                 "the mu = inf leaf over lambda = inf does not carry a residue-matrix realization");
    }
    return sys;
}

double restriction_consistency(Line line, const ThetaParams& th, Complex t, Complex coordinate,
                               const std::vector<Complex>& probes) {
    LineFamily fam = heun_on_line(line, th, t, coordinate);
    ScalarODE2 target = heun_ode(fam.params);

    // exact substitution where the interior formulas stay finite
    if (line == Line::L0 || line == Line::L1 || line == Line::Lt) {
        Complex lam = (line == Line::L0) ? Complex(0.0) : (line == Line::L1) ? Complex(1.0) : t;
        ScalarODE2 ode = scalar_ode_unguarded(th, SystemState{t, lam, coordinate, 1.0, false});
        double worst = 0.0;
        for (Complex z : probes) {
            worst = std::max(worst, std::abs(ode.p1.eval(z) - target.p1.eval(z)));
            worst = std::max(worst, std::abs(ode.p2.eval(z) - target.p2.eval(z)));
        }
        return worst;
    }

    // curve onto the line, extrapolating the chart coordinate eps to 0
    const bool at_infinity = (line == Line::LInf || line == Line::LInfstar);
    const long double eps0 = at_infinity ? 1e-2L : 4e-3L;
    const int n = at_infinity ? 6 : 7;
    std::vector<long double> nodes(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) nodes[size_t(i)] = eps0 / (long double)(1 << i);

    double worst = 0.0;
    for (Complex z : probes) {
        std::vector<LC> f1(static_cast<size_t>(n)), f2(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            LPoint m = lcurve(line, th, widen(t), widen(coordinate), nodes[size_t(i)]);
            LPair g = lscalar_gauged(th, widen(t), m.lam, m.mu, widen(z), fam.gauge_exponent,
                                     widen(fam.gauge_center));
            f1[size_t(i)] = g.p1;
            f2[size_t(i)] = g.p2;
        }
        const LC l1 = lneville_to_zero(nodes, f1), l2 = lneville_to_zero(nodes, f2);
        const Complex lim1{(double)l1.real(), (double)l1.imag()};
        const Complex lim2{(double)l2.real(), (double)l2.imag()};
        worst = std::max(worst, std::abs(lim1 - target.p1.eval(z)));
        worst = std::max(worst, std::abs(lim2 - target.p2.eval(z)));
    }
    return worst;
}

}  // namespace heunmcv::sic
