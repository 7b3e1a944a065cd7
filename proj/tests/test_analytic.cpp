#include "heunmcv/analytic.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "heunmcv/errors.hpp"
#include "heunmcv/fuchsian.hpp"
#include "oracles.hpp"

using namespace heunmcv;
namespace an = heunmcv::analytic;

namespace {

constexpr double kTau = 6.283185307179586476925287;

const ThetaParams kTheta{{0.31, 0.12}, {-0.44, 0.27}, {0.52, -0.19}, {0.83, 0.41}};
const SystemState kState{{1.9, 0.7}, {0.4, -0.55}, {0.3, 0.2}, {1.0, 0.0}};

HeunParams generic_heun() {
    HeunParams hp;
    hp.gamma = Complex(0.7, 0.1);
    hp.delta = Complex(0.45, -0.2);
    hp.epsilon = Complex(0.8, 0.3);
    hp.alpha = Complex(0.35, 0.15);
    hp.beta = hp.gamma + hp.delta + hp.epsilon - 1.0 - hp.alpha;
    hp.q = Complex(0.37, -0.22);
    hp.t = Complex(1.9, 0.55);
    return hp;
}

template <class F>
Err code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return Err::VerificationFailure;  // sentinel: nothing was thrown
}

mcv::GeneralSystem one_pole(Complex p, Complex res) {
    mcv::GeneralSystem s;
    s.poles = {p};
    s.residues = {CMatrix(1, 1, {res})};
    return s;
}

an::Path circle_path(Complex center, double radius) {
    an::Path p;
    p.segments.push_back(an::Segment::arc(center, radius, 0.0, kTau));
    return p;
}

double min_clearance(const an::Path& p, Complex q) {
    double d = 1e300;
    for (const an::Segment& s : p.segments)
        for (int i = 0; i <= 200; ++i) d = std::min(d, std::abs(s.point(i / 200.0) - q));
    return d;
}

// set comparison of two eigenvalue pairs
double pair_dist(const std::vector<Complex>& got, Complex e0, Complex e1) {
    const double d1 = std::max(std::abs(got[0] - e0), std::abs(got[1] - e1));
    const double d2 = std::max(std::abs(got[0] - e1), std::abs(got[1] - e0));
    return std::min(d1, d2);
}

}  // namespace

TEST_CASE("frobenius germs at the regular singular points") {
    const HeunParams hp = generic_heun();
    const ScalarODE2 ode = heun_ode(hp);

    const auto exps = indicial_exponents(ode, 0.0);
    const double match = std::min(std::abs(exps[0]) + std::abs(exps[1] - (1.0 - hp.gamma)),
                                  std::abs(exps[1]) + std::abs(exps[0] - (1.0 - hp.gamma)));
    CHECK(match < 1e-10);

    const std::vector<Complex> probes{Complex(0.05, 0.02), Complex(-0.03, 0.06),
                                      Complex(0.08, -0.04)};
    for (Complex rho : exps) {
        const an::FrobeniusGerm g = an::frobenius_series(ode, 0.0, rho, 40);
        CHECK(std::abs(g.series.c[0] - 1.0) == 0.0);
        CHECK(g.radius_hint == doctest::Approx(1.0));
        CHECK(an::frobenius_residual(ode, g, probes) < 1e-12);
    }

    // ordinary points produce plain Taylor germs through the same recurrence
    const an::FrobeniusGerm g = an::frobenius_series(ode, Complex(0.4, 0.3), 0.0, 40);
    CHECK(an::frobenius_residual(ode, g, {Complex(0.45, 0.32), Complex(0.34, 0.27)}) < 1e-12);
}

TEST_CASE("frobenius handles the apparent singular point") {
    // the reduced scalar equation carries an extra singularity at lambda with
    // exponents {0, 2} and no logarithm; both germs must come out clean
    const ScalarODE2 ode = scalar_ode_of_parameters(kTheta, kState);
    const Complex lam = kState.lambda;
    const auto exps = indicial_exponents(ode, lam);
    CHECK(pair_dist({exps[0], exps[1]}, 0.0, 2.0) < 1e-8);

    const std::vector<Complex> probes{lam + Complex(0.04, 0.01), lam + Complex(-0.02, 0.05)};
    for (Complex rho : {Complex(2.0), Complex(0.0)}) {
        const an::FrobeniusGerm g = an::frobenius_series(ode, lam, rho, 40);
        CHECK(an::frobenius_residual(ode, g, probes) < 1e-11);
    }
}

TEST_CASE("frobenius failure modes") {
    HeunParams hp = generic_heun();
    hp.gamma = 0.0;
    hp.beta = hp.delta + hp.epsilon - 1.0 - hp.alpha;
    const ScalarODE2 ode = heun_ode(hp);

    // exponents at 0 are {0, 1}; the lower one hits a true logarithmic case,
    // the upper one is unobstructed
    CHECK(code_of([&] { an::frobenius_series(ode, 0.0, 0.0, 12); }) == Err::LogarithmicCase);
    const an::FrobeniusGerm g = an::frobenius_series(ode, 0.0, 1.0, 40);
    CHECK(an::frobenius_residual(ode, g, {Complex(0.06, 0.03)}) < 1e-12);

    // exponent that does not solve the indicial equation
    CHECK(code_of([&] { an::frobenius_series(ode, 0.0, Complex(0.37), 12); }) ==
          Err::InvalidInput);

    // irregular singular point: p1 with a double pole
    ScalarODE2 bad;
    bad.p1 = CRational(CPoly::constant(1.0), CPoly({0.0, 0.0, 1.0}));
    CHECK(code_of([&] { an::frobenius_series(bad, 0.0, 0.0, 12); }) == Err::NotRegularSingular);
}

TEST_CASE("taylor germs of the scalar equation") {
    const ScalarODE2 ode = heun_ode(generic_heun());
    const Complex c(0.35, 0.3);
    const Complex y0(1.2, -0.4), dy0(0.3, 0.8);
    const PowerSeries y = an::scalar_taylor(ode, c, y0, dy0, 40);
    CHECK(y.c[0] == y0);
    CHECK(y.c[1] == dy0);
    CHECK(an::scalar_taylor_residual(ode, c, y, 30) < 1e-13);
    CHECK(code_of([&] { an::scalar_taylor(ode, 0.0, y0, dy0, 40); }) == Err::PoleError);
}

TEST_CASE("segment and path geometry") {
    const an::Segment l = an::Segment::line(Complex(1.0, 0.0), Complex(0.0, 2.0));
    CHECK(std::abs(l.point(0.5) - Complex(0.5, 1.0)) < 1e-15);
    CHECK(std::abs(l.velocity(0.3) - Complex(-1.0, 2.0)) < 1e-15);
    CHECK(l.length() == doctest::Approx(std::sqrt(5.0)));

    const an::Segment a = an::Segment::arc(Complex(0.0, 1.0), 2.0, 0.0, kTau / 4.0);
    CHECK(std::abs(a.start() - Complex(2.0, 1.0)) < 1e-15);
    CHECK(std::abs(a.end() - Complex(0.0, 3.0)) < 1e-14);
    CHECK(a.length() == doctest::Approx(kTau / 2.0));
    CHECK(std::abs(a.reversed().point(0.25) - a.point(0.75)) < 1e-14);

    an::Path p = an::line_path(0.0, Complex(1.0, 0.0));
    p += an::line_path(Complex(1.0, 0.0), Complex(1.0, 1.0));
    CHECK(p.length() == doctest::Approx(2.0));
    CHECK(std::abs(p.reversed().start() - Complex(1.0, 1.0)) < 1e-15);
    CHECK_FALSE(p.closed());
    p += an::line_path(Complex(1.0, 1.0), 0.0);
    CHECK(p.closed());
    CHECK(code_of([&] { p += an::line_path(Complex(5.0, 0.0), 0.0); }) == Err::InvalidInput);
}

TEST_CASE("safe paths detour around marked points") {
    const Complex a(-1.0, 0.0), b(2.0, 0.1);
    const std::vector<Complex> avoid{Complex(0.5, 0.0), Complex(1.2, 0.15)};
    const an::Path p = an::safe_path(a, b, avoid);
    CHECK(std::abs(p.start() - a) < 1e-15);
    CHECK(std::abs(p.end() - b) < 1e-15);
    for (Complex q : avoid) CHECK(min_clearance(p, q) > 0.05);

    // endpoints that sit deliberately close to a marked point stay reachable
    const an::Path direct = an::safe_path(Complex(2.0, 0.0), Complex(0.1, 0.0), {0.0});
    CHECK(direct.segments.size() == 1);

    const Complex base = an::choose_base({0.0, 1.0, kState.t, kState.lambda});
    for (Complex q : {Complex(0.0), Complex(1.0), kState.t, kState.lambda})
        CHECK(std::abs(base - q) > 0.2);
}

TEST_CASE("transport of constant systems") {
    const CMatrix a(1, 1, {1.0});
    const auto ve = an::integrate_vector(an::constant_ode(a), {1.0}, an::line_path(0.0, 1.0));
    CHECK(std::abs(ve[0] - std::exp(1.0)) < 1e-12);

    // rotation generator moves (1, 0) to (0, 1) over a quarter period
    const CMatrix rot(2, 2, {0.0, -1.0, 1.0, 0.0});
    const auto vr = an::integrate_vector(an::constant_ode(rot), {1.0, 0.0},
                                         an::line_path(0.0, kTau / 4.0));
    CHECK(std::abs(vr[0]) < 1e-12);
    CHECK(std::abs(vr[1] - 1.0) < 1e-12);

    CHECK(code_of([&] { an::integrate_vector(an::constant_ode(rot), {1.0}, an::line_path(0.0, 1.0)); }) ==
          Err::InvalidInput);
}

TEST_CASE("transport around a first order pole") {
    const auto sys = one_pole(0.0, Complex(1.0 / 3.0));
    const auto v = an::integrate_vector(an::ode_of(sys), {1.0}, circle_path(0.0, 1.0));
    CHECK(std::abs(v[0] - std::exp(Complex(0.0, kTau / 3.0))) < 1e-12);

    // radius must not matter
    const auto v2 = an::integrate_vector(an::ode_of(sys), {1.0}, circle_path(0.0, 0.15));
    CHECK(std::abs(v2[0] - v[0]) < 1e-11);
}

TEST_CASE("transport composes and reverses") {
    const FuchsianSystem sys = build_system(kTheta, kState);
    const an::OdeSpec ode = an::ode_of(sys);
    const Complex a(-0.6, -0.4), b(0.5, -0.9), c(1.6, -0.2);
    const CMatrix m_ab = an::integrate_system(ode, CMatrix::identity(2), an::line_path(a, b));
    const CMatrix m_bc = an::integrate_system(ode, CMatrix::identity(2), an::line_path(b, c));
    an::Path joined = an::line_path(a, b);
    joined += an::line_path(b, c);
    const CMatrix m_ac = an::integrate_system(ode, CMatrix::identity(2), joined);
    CHECK((m_ac - m_bc * m_ab).max_abs() < 1e-10);

    const CMatrix back =
        an::integrate_system(ode, m_ab, an::line_path(a, b).reversed());
    CHECK((back - CMatrix::identity(2)).max_abs() < 1e-10);

    CHECK(code_of([&] {
              an::integrate_vector(ode, {1.0, 0.0}, an::line_path(Complex(-0.5, 0.0), Complex(0.5, 0.0)));
          }) == Err::PathTooClose);
}

TEST_CASE("monodromy eigenvalues match the local exponents") {
    const FuchsianSystem sys = build_system(kTheta, kState);
    const an::MonodromyData m = an::monodromy_data(sys);

    const auto e0 = eigenvalues(m.m0);
    const auto e1 = eigenvalues(m.m1);
    const auto et = eigenvalues(m.mt);
    CHECK(pair_dist(e0, 1.0, std::exp(Complex(0.0, kTau) * kTheta.th0)) < 1e-9);
    CHECK(pair_dist(e1, 1.0, std::exp(Complex(0.0, kTau) * kTheta.th1)) < 1e-9);
    CHECK(pair_dist(et, 1.0, std::exp(Complex(0.0, kTau) * kTheta.tht)) < 1e-9);

    const auto ei = eigenvalues(m.minf);
    CHECK(pair_dist(ei, std::exp(Complex(0.0, kTau) * kTheta.kappa1()),
                    std::exp(Complex(0.0, kTau) * kTheta.kappa2())) < 1e-9);

    // the four loops compose to a contractible cycle
    CHECK((m.minf * m.mt * m.m1 * m.m0 - CMatrix::identity(2)).max_abs() < 1e-9);

    // loops around ordinary points are contractible
    const std::vector<Complex> sings{0.0, 1.0, kState.t};
    const CMatrix triv =
        an::monodromy(sys, m.base, an::simple_loop(Complex(0.5, -0.8), m.base, sings));
    CHECK((triv - CMatrix::identity(2)).max_abs() < 1e-10);

    // homotopy invariance: shrink the loop circle
    const CMatrix m0b = an::monodromy(sys, m.base, an::simple_loop(0.0, m.base, sings, 0.05));
    CHECK((m0b - m.m0).max_abs() < 1e-9);
}

TEST_CASE("pochhammer quadrature reproduces the beta function") {
    // int over the commutator cycle of w^{a-1} (1-w)^{b-1} at a = b = 1/2,
    // principal branches at the base 1/2, equals (1-e^{2 pi i a})(1-e^{2 pi i b})
    // B(a, b) = 4 pi
    an::ContourIntegrand f;
    f.ode = an::ode_of(one_pole(0.0, Complex(-0.5)));
    f.y0 = {std::pow(Complex(0.5), Complex(-0.5))};
    f.nu = Complex(-0.5);
    f.weight = [](Complex, const std::vector<Complex>& y, const std::vector<Complex>&) {
        return y[0];
    };
    const an::Contour c = an::pochhammer_contour(1.0, 0.0, 0.5, {0.0, 1.0});
    const an::ContourIntegral r = an::contour_transform(f, c, 1.0, 1e-12);
    CHECK(std::abs(r.value - 2.0 * kTau) < 1e-9);
    CHECK(std::abs(r.winding) < 0.05);
    CHECK(std::abs(r.y_end[0] - f.y0[0]) < 1e-9);
}

TEST_CASE("closed integrals of single valued integrands vanish") {
    an::ContourIntegrand f;
    f.ode = an::constant_ode(CMatrix(1, 1, {0.0}));
    f.y0 = {1.0};
    f.nu = 3.0;
    f.weight = [](Complex w, const std::vector<Complex>&, const std::vector<Complex>&) {
        return w * w;
    };
    const an::Contour c = an::simple_loop(Complex(0.3, 0.1), Complex(1.5, 0.9), {});
    const an::ContourIntegral r = an::contour_transform(f, c, Complex(-0.4, 0.7), 1e-12);
    CHECK(std::abs(r.value) < 1e-12);
}

TEST_CASE("integration by parts across the kernel exponent shift") {
    const FuchsianSystem sys = build_system(kTheta, kState);
    const Complex k2 = kTheta.kappa2();
    const Complex z(0.45, 0.3);
    std::vector<Complex> avoid{0.0, 1.0, kState.t, kState.lambda, z};
    const Complex base = an::choose_base(avoid);

    an::ContourIntegrand f;
    f.ode = an::ode_of(sys);
    f.y0 = {Complex(1.0, 0.2), Complex(0.3, -0.4)};
    f.nu = k2;
    f.weight = [](Complex, const std::vector<Complex>&, const std::vector<Complex>& dy) {
        return dy[0];
    };
    an::ContourIntegrand g = f;
    g.nu = k2 - 1.0;
    g.weight = [](Complex, const std::vector<Complex>& y, const std::vector<Complex>&) {
        return y[0];
    };

    SUBCASE("commutator cycle") {
        const an::Contour c = an::pochhammer_contour(z, 0.0, base, avoid);
        const Complex i1 = an::contour_transform(f, c, z, 1e-12).value;
        const Complex i2 = an::contour_transform(g, c, z, 1e-12).value;
        CHECK(std::abs(i1 - k2 * i2) / (1.0 + std::abs(i1)) < 1e-10);
    }
    SUBCASE("pole cycle with integer exponent") {
        an::ContourIntegrand fi = f, gi = g;
        fi.nu = 1.0;
        gi.nu = 0.0;
        const an::Contour c = an::cp_loop(z, 0.0, {0.0, 1.0, kState.t, kState.lambda});
        const Complex i1 = an::contour_transform(fi, c, z, 1e-12).value;
        const Complex i2 = an::contour_transform(gi, c, z, 1e-12).value;
        CHECK(std::abs(i1 - i2) / (1.0 + std::abs(i1)) < 1e-10);
    }
}

TEST_CASE("transform derivatives match fresh finite differences") {
    const FuchsianSystem sys = build_system(kTheta, kState);
    const Complex z(0.45, 0.3);
    const std::vector<Complex> sings{0.0, 1.0, kState.t, kState.lambda};

    an::ContourIntegrand f;
    f.ode = an::ode_of(sys);
    f.y0 = {Complex(1.0, 0.2), Complex(0.3, -0.4)};
    f.weight = [](Complex, const std::vector<Complex>&, const std::vector<Complex>& dy) {
        return dy[0];
    };

    SUBCASE("pole cycle, integer kernel") {
        f.nu = 1.0;
        const an::Contour c = an::cp_loop(z, 0.0, sings);
        const an::TransformSample s = an::transform_at(f, c, z, 2, 1e-12);
        const double h = 1e-5;
        auto val = [&](Complex zz) {
            an::ContourIntegrand fz = f;
            fz.y0 = an::integrate_vector(f.ode, f.y0, an::line_path(z, zz));
            return an::contour_transform(fz, an::cp_loop(zz, 0.0, sings), zz, 1e-12).value;
        };
        const Complex up = val(z + h), dn = val(z - h);
        CHECK(std::abs(s.dy - (up - dn) / (2.0 * h)) / (1.0 + std::abs(s.dy)) < 1e-7);
        CHECK(std::abs(s.d2y - (up - 2.0 * s.y + dn) / (h * h)) / (1.0 + std::abs(s.d2y)) <
              1e-4);
    }
    SUBCASE("commutator cycle, generic kernel") {
        f.nu = kTheta.kappa2();
        std::vector<Complex> avoid = sings;
        avoid.push_back(z);
        const Complex base = an::choose_base(avoid);
        const an::Contour c = an::pochhammer_contour(z, 0.0, base, avoid);
        const an::TransformSample s = an::transform_at(f, c, z, 1, 1e-12);
        const double h = 1e-5;
        auto val = [&](Complex zz) {
            std::vector<Complex> av = sings;
            av.push_back(zz);
            const an::Contour cc = an::pochhammer_contour(zz, 0.0, base, av);
            return an::contour_transform(f, cc, zz, 1e-12).value;
        };
        const Complex fd = (val(z + h) - val(z - h)) / (2.0 * h);
        CHECK(std::abs(s.dy - fd) / (1.0 + std::abs(s.dy)) < 1e-6);
    }
}

TEST_CASE("branch accounting failures are detected") {
    const auto sys = one_pole(Complex(3.7, 0.4), Complex(0.21));
    an::ContourIntegrand f;
    f.ode = an::ode_of(sys);
    f.y0 = {1.0};
    f.nu = Complex(0.5);
    f.weight = [](Complex, const std::vector<Complex>& y, const std::vector<Complex>&) {
        return y[0];
    };

    const Complex z(0.3, 0.1);
    // a cycle that claims zero net turns about z but loops it once
    an::Contour bad = an::simple_loop(z, Complex(1.5, 0.9), {});
    bad.kind = an::Contour::Kind::Pochhammer;
    bad.branch_log = {{z, 0}, {Complex(3.7, 0.4), 0}};
    CHECK(code_of([&] { an::contour_transform(f, bad, z, 1e-10); }) == Err::BranchError);

    // pole cycles start at z; fractional kernels cannot close up there
    const an::Contour cp = an::cp_loop(z, Complex(3.7, 0.4), {Complex(3.7, 0.4)});
    CHECK(code_of([&] { an::contour_transform(f, cp, z, 1e-10); }) == Err::InvalidInput);
}

TEST_CASE("frobenius germ agrees with transported values") {
    const ScalarODE2 ode = heun_ode(generic_heun());
    const an::FrobeniusGerm g = an::frobenius_series(ode, 0.0, 0.0, 60);
    const Complex z0(0.08, 0.03), z1(0.4, 0.22);
    const std::vector<Complex> start{an::eval(g, z0), an::eval_derivative(g, z0)};
    const auto got = an::integrate_vector(an::companion_ode(ode), start, an::line_path(z0, z1));
    CHECK(std::abs(got[0] - an::eval(g, z1)) < 1e-10);
    CHECK(std::abs(got[1] - an::eval_derivative(g, z1)) < 1e-10);
}
