#include "heunmcv/mcv.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "heunmcv/weyl.hpp"
#include "oracles.hpp"

using namespace heunmcv;
namespace mcv = heunmcv::mcv;

namespace {

const ThetaParams kTheta{{0.31, 0.12}, {-0.44, 0.27}, {0.52, -0.19}, {0.83, 0.41}};
const SystemState kState{{1.9, 0.7}, {0.4, -0.55}, {0.3, 0.2}, {1.1, -0.2}};
const Complex kCenter{-0.9, 0.35};

// Dyadic angle sums stay exact in binary, so forcing theta_inf pins the
// kappas to exact integers where the tests need them.
const Complex kSum = Complex(0.25, 0.125) + Complex(-0.5, 0.25) + Complex(0.375, -0.0625);

ThetaParams dyadic_theta(Complex thinf) {
    return ThetaParams{{0.25, 0.125}, {-0.5, 0.25}, {0.375, -0.0625}, thinf};
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

double system_dist(const FuchsianSystem& a, const FuchsianSystem& b) {
    return std::max({(a.a0 - b.a0).max_abs(), (a.a1 - b.a1).max_abs(), (a.at - b.at).max_abs()});
}

// Distance of v from the line spanned by w.
double off_span(const std::vector<Complex>& v, const std::vector<Complex>& w) {
    REQUIRE(v.size() == w.size());
    Complex num = 0.0;
    double den = 0.0;
    for (size_t i = 0; i < v.size(); ++i) {
        num += std::conj(w[i]) * v[i];
        den += std::norm(w[i]);
    }
    REQUIRE(den > 0.0);
    double r = 0.0;
    for (size_t i = 0; i < v.size(); ++i) r += std::norm(v[i] - w[i] * (num / den));
    return std::sqrt(r);
}

// Reads (theta; lambda, mu; k) back off a residue tuple through the defining
// relations, so the parameter comparison does not reuse the map under test.
weyl::ExtParams parameters_of(const FuchsianSystem& sys) {
    weyl::ExtParams p;
    p.state.t = sys.t;
    p.theta.th0 = sys.a0(0, 0) + sys.a0(1, 1);
    p.theta.th1 = sys.a1(0, 0) + sys.a1(1, 1);
    p.theta.tht = sys.at(0, 0) + sys.at(1, 1);
    const CMatrix ainf = sys.residue_sum_neg();
    p.theta.thinf = ainf(0, 0) - ainf(1, 1);
    const Complex w0 = -sys.a0(0, 1), w1 = -sys.a1(0, 1), wt = -sys.at(0, 1);
    p.state.k = (sys.t + 1.0) * w0 + sys.t * w1 + wt;
    p.state.lambda = sys.t * w0 / p.state.k;
    p.state.mu = sys.a0(0, 0) / p.state.lambda + sys.a1(0, 0) / (p.state.lambda - 1.0) +
                 sys.at(0, 0) / (p.state.lambda - sys.t);
    return p;
}

double ext_diff(const weyl::ExtParams& a, const weyl::ExtParams& b) {
    double r = 0.0;
    r = std::max(r, testutil::rel_diff(a.theta.th0, b.theta.th0));
    r = std::max(r, testutil::rel_diff(a.theta.th1, b.theta.th1));
    r = std::max(r, testutil::rel_diff(a.theta.tht, b.theta.tht));
    r = std::max(r, testutil::rel_diff(a.theta.thinf, b.theta.thinf));
    r = std::max(r, testutil::rel_diff(a.state.lambda, b.state.lambda));
    r = std::max(r, testutil::rel_diff(a.state.mu, b.state.mu));
    r = std::max(r, testutil::rel_diff(a.state.t, b.state.t));
    r = std::max(r, testutil::rel_diff(a.state.k, b.state.k));
    return r;
}

mcv::GeneralSystem random_general(std::mt19937_64& rng) {
    mcv::GeneralSystem sys;
    sys.poles = {Complex(0.3, 0.1), Complex(-0.7, 0.4), Complex(1.5, -0.6)};
    for (int j = 0; j < 3; ++j) {
        CMatrix a(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int q = 0; q < 3; ++q) a(i, q) = testutil::rnd_c(rng, 0.6);
        sys.residues.push_back(a);
    }
    return sys;
}

}  // namespace

TEST_CASE("convolution matrices have the block-row shape") {
    const Complex nu{0.37, -0.21};
    const FuchsianSystem sys = build_system(kTheta, kState);
    const mcv::ConvolutionSystem cs = mcv::convolution_matrices(sys, nu);
    CHECK(cs.b0.rows() == 6);
    CHECK(cs.nu == nu);

    const CMatrix* rows[3] = {&cs.b0, &cs.b1, &cs.bt};
    const CMatrix* res[3] = {&sys.a0, &sys.a1, &sys.at};
    for (int p = 0; p < 3; ++p) {
        for (int q = 0; q < 3; ++q) {
            CMatrix want = *res[q];
            if (p == q) {
                want(0, 0) += nu;
                want(1, 1) += nu;
            }
            CHECK((rows[p]->block(2 * p, 2 * q, 2, 2) - want).max_abs() == 0.0);
        }
        // everything off the block row vanishes
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                if (i / 2 != p) CHECK((*rows[p])(i, j) == 0.0);
        // trace = theta_p + 2 nu
        Complex tr = 0.0;
        for (int i = 0; i < 6; ++i) tr += (*rows[p])(i, i);
        const Complex thp = p == 0 ? kTheta.th0 : (p == 1 ? kTheta.th1 : kTheta.tht);
        CHECK(std::abs(tr - (thp + 2.0 * nu)) < 1e-12);
    }

    std::mt19937_64 rng(41);
    const mcv::GeneralSystem gen = random_general(rng);
    const auto b = mcv::convolution_matrices(gen, nu);
    REQUIRE(b.size() == 3);
    CHECK(b[0].rows() == 9);
    for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) {
            CMatrix want = gen.residues[size_t(q)];
            if (p == q)
                for (int i = 0; i < 3; ++i) want(i, i) += nu;
            CHECK((b[size_t(p)].block(3 * p, 3 * q, 3, 3) - want).max_abs() == 0.0);
        }

    mcv::GeneralSystem bad = gen;
    bad.poles[1] = bad.poles[0];
    CHECK(code_of([&] { mcv::convolution_matrices(bad, nu); }) == Err::InvalidInput);
    bad = gen;
    bad.residues[2] = CMatrix(2, 2);
    CHECK(code_of([&] { mcv::convolution_matrices(bad, nu); }) == Err::InvalidInput);
}

TEST_CASE("invariant subspaces detect the resonant parameters") {
    std::mt19937_64 rng(42);
    for (int it = 0; it < 12; ++it) {
        const testutil::Draw d = testutil::random_params(rng);
        const FuchsianSystem sys = build_system(d.theta, d.state);
        const Complex k1 = d.theta.kappa1(), k2 = d.theta.kappa2();

        auto dim = [&](Complex nu) {
            return mcv::invariant_subspaces(mcv::convolution_matrices(sys, nu)).quotient_dim;
        };
        CHECK(dim(k1) == 2);
        CHECK(dim(k2) == 2);
        CHECK(dim(0.0) == 2);
        CHECK(dim(k2 + 0.001) == 3);
        CHECK(dim(Complex(0.71, 0.23)) == 3);

        // at nu = kappa2 the common kernel is the alternating vector
        const auto is = mcv::invariant_subspaces(mcv::convolution_matrices(sys, k2));
        REQUIRE(is.k_basis.size() == 1);
        CHECK(off_span(is.k_basis[0], {0.0, 1.0, 0.0, 1.0, 0.0, 1.0}) < 1e-9);

        // the slot spaces are the residue kernels (w_p, u_p + theta_p)
        const SystemVariables v = solve_system_variables(d.theta, d.state);
        REQUIRE(is.l_basis.size() == 3);
        CHECK(off_span(is.l_basis[0], {v.w0, v.u0 + d.theta.th0, 0.0, 0.0, 0.0, 0.0}) < 1e-9);
        CHECK(off_span(is.l_basis[1], {0.0, 0.0, v.w1, v.u1 + d.theta.th1, 0.0, 0.0}) < 1e-9);
        CHECK(off_span(is.l_basis[2], {0.0, 0.0, 0.0, 0.0, v.wt, v.ut + d.theta.tht}) < 1e-9);
    }

    // nu = 0: the three kernel conditions coincide, K has dimension 4 and
    // contains the slot spaces
    const FuchsianSystem sys = build_system(kTheta, kState);
    const auto is0 = mcv::invariant_subspaces(mcv::convolution_matrices(sys, 0.0));
    CHECK(is0.k_basis.size() == 4);
    CHECK(is0.quotient_dim == 2);
}

TEST_CASE("gauge matrix matches the worked example and its determinant") {
    // theta = (0,0,0,2), lambda = 1/2, mu = 1, t = 2, k = 1: the moved point
    // is 3/2 and the (4,2) entry is 4.
    {
        const ThetaParams th{0.0, 0.0, 0.0, 2.0};
        const SystemState st{2.0, 0.5, 1.0, 1.0};
        const mcv::GaugeS g = mcv::gauge_s(th, st);
        CHECK(std::abs(g.lambda_tilde - 1.5) < 1e-14);
        CHECK(std::abs(g.s(3, 1) - 4.0) < 1e-13);
        // kappa1 = 1, kappa2 = -1
        CHECK(std::abs(g.s(3, 0) - (1.0 * (0.5 - 2.0) + 1.0) / 1.0) < 1e-14);
        CHECK(std::abs(g.s(5, 0) - 2.0 * (1.0 * (0.5 - 1.0) + 1.0) / 1.0) < 1e-14);
        CHECK(std::abs(g.s(5, 1) - 2.0 * 1.0 / (0.5 * (0.5 - 2.0) * -1.0)) < 1e-13);
    }

    std::mt19937_64 rng(43);
    for (int it = 0; it < 12; ++it) {
        const testutil::Draw d = testutil::random_params(rng);
        const mcv::GaugeS g = mcv::gauge_s(d.theta, d.state);
        const Complex k = d.state.k, t = d.state.t;
        const Complex formula = k * k * (g.lambda_tilde - d.state.lambda) /
                                (t * (1.0 - t) * d.theta.kappa2());
        const Complex dets = det(g.s);
        const double scale = 1.0 + std::abs(formula);
        CHECK(std::min(std::abs(dets - formula), std::abs(dets + formula)) < 1e-9 * scale);
        // recorded as a probe: the signed form has matched on every draw so
        // far, but only the up-to-sign statement is asserted above
        WARN_MESSAGE(std::abs(dets - formula) < 1e-9 * scale, "det(S) sign probe moved");
    }

    // guards
    const ThetaParams th = kTheta;
    CHECK(code_of([&] {
              mcv::gauge_s(dyadic_theta(kSum), kState);  // kappa1 = 0
          }) == Err::GaugeUndefined);
    CHECK(code_of([&] {
              mcv::gauge_s(dyadic_theta(-kSum), kState);  // kappa2 = 0
          }) == Err::GaugeUndefined);
    {
        // mu exactly on the critical level set: the moved point escapes
        SystemState st = kState;
        st.mu = th.th0 / st.lambda + th.th1 / (st.lambda - 1.0) + th.tht / (st.lambda - st.t);
        CHECK(code_of([&] { mcv::gauge_s(th, st); }) == Err::GaugeUndefined);
    }
    {
        SystemState st = kState;
        st.lambda = 1e-10;
        CHECK(code_of([&] { mcv::gauge_s(th, st); }) == Err::UseLineRealization);
    }
    CHECK(code_of([&] {
              mcv::gauge_s(ThetaParams{{0.3, 0.0}, {0.2, 0.0}, {-0.5, 0.0}, 0.0}, kState);
          }) == Err::DegenerateThetaInf);
}

TEST_CASE("middle convolution reproduces the moved system") {
    std::mt19937_64 rng(44);
    int done = 0;
    for (int it = 0; it < 20; ++it) {
        const testutil::Draw d = testutil::random_params(rng);
        weyl::ExtParams image;
        FuchsianSystem got;
        try {
            std::tie(image, got) = mcv::middle_convolution_kappa2(d.theta, d.state);
        } catch (const Error&) {
            continue;  // moved point collided with a singular point
        }
        ++done;
        // the residues realize exactly the mapped parameter tuple; read the
        // parameters back off the matrices rather than reusing the map
        CHECK(ext_diff(parameters_of(got), weyl::mc_kappa2_map(weyl::ExtParams{d.theta, d.state})) <
              1e-10);
        const FuchsianSystem want = build_system(image.theta, image.state);
        CHECK(system_dist(got, want) < 1e-8);
    }
    CHECK(done >= 15);
}

TEST_CASE("conjugated convolution matrices split as displayed") {
    std::mt19937_64 rng(45);
    for (int it = 0; it < 6; ++it) {
        const testutil::Draw d =
            it == 0 ? testutil::Draw{kTheta, kState} : testutil::random_params(rng);
        const ThetaParams& th = d.theta;
        const SystemState& st = d.state;
        const Complex t = st.t, lam = st.lambda, k = st.k;
        const Complex k1 = th.kappa1(), k2 = th.kappa2();

        const mcv::GaugeS g = mcv::gauge_s(th, st);
        const SystemVariables v = solve_system_variables(th, st);
        const mcv::ConvolutionSystem cs = mcv::convolution_matrices(build_system(th, st), k2);
        const CMatrix sinv = inverse(g.s);
        const CMatrix m0 = sinv * cs.b0 * g.s;
        const CMatrix m1 = sinv * cs.b1 * g.s;
        const CMatrix mt = sinv * cs.bt * g.s;

        const FuchsianSystem want =
            build_system(weyl::mc_kappa2_map(weyl::ExtParams{th, st}).theta,
                         weyl::mc_kappa2_map(weyl::ExtParams{th, st}).state);

        CMatrix e0(6, 6), e1(6, 6), et(6, 6);
        e0.set_block(0, 0, want.a0);
        e0(2, 0) = -(v.u0 + th.th0) * th.thinf * t / (k * k1 * lam);
        e0(2, 1) = g.lambda_tilde / lam;
        e0(3, 0) = t / (k * lam);
        e0(3, 3) = k2;
        e1.set_block(0, 0, want.a1);
        e1(4, 0) = (1.0 - t) / (k * (lam - 1.0));
        e1(4, 4) = k2;
        et.set_block(0, 0, want.at);
        et(5, 0) = t * (t - 1.0) / (k * (lam - t));
        et(5, 5) = k2;

        CHECK((m0 - e0).max_abs() < 1e-8);
        CHECK((m1 - e1).max_abs() < 1e-8);
        CHECK((mt - et).max_abs() < 1e-8);
    }
}

TEST_CASE("vanishing order parameter collapses the convolution to the identity") {
    const ThetaParams th = dyadic_theta(-kSum - Complex(2e-6, 0.0));  // kappa2 = 1e-6
    CHECK(std::abs(th.kappa2() - 1e-6) < 1e-15);
    const auto [image, got] = mcv::middle_convolution_kappa2(th, kState);
    CHECK(std::abs(image.state.lambda - kState.lambda) < 1e-5);
    CHECK(std::abs(image.state.mu - kState.mu) < 1e-4);
    CHECK(system_dist(got, build_system(th, kState)) < 1e-4);
}

TEST_CASE("integrand descriptors expose the convolution kernels") {
    const ThetaParams& th = kTheta;
    const SystemState& st = kState;
    const Complex k1 = th.kappa1(), k2 = th.kappa2();
    const Complex lam = st.lambda, t = st.t, mu = st.mu;

    const mcv::IntegrandsKappa2 i2 = mcv::transform_integrands_kappa2(th, st);
    CHECK(std::abs(i2.k1.exponent - k2) == 0.0);
    CHECK(std::abs(i2.k2.exponent - k2) == 0.0);
    CHECK(std::abs(i2.scalar.exponent - (k2 - 1.0)) == 0.0);
    CHECK(ext_diff(i2.image, weyl::mc_kappa2_map(weyl::ExtParams{th, st})) == 0.0);

    const mcv::SolutionSample s{{0.7, 0.2}, {-0.4, 0.6}, {0.15, -0.9}, {1.2, 0.05}};
    const Complex w{0.45, 0.3};
    CHECK(std::abs(i2.k1.weight(w, s) - s.dy1) == 0.0);
    CHECK(std::abs(i2.scalar.weight(w, s) - s.y1) == 0.0);
    const Complex pref =
        k2 * lam * (lam - 1.0) * (lam - t) / (st.k * (lam - i2.image.state.lambda));
    const Complex want2 = pref * ((s.dy1 - mu * s.y1) / (lam - w) + (mu / k1) * s.dy1);
    CHECK(std::abs(i2.k2.weight(w, s) - want2) < 1e-14 * (1.0 + std::abs(want2)));

    const mcv::IntegrandsKappa1 i1 = mcv::transform_integrands_kappa1(th, st);
    CHECK(std::abs(i1.k1.exponent - k1) == 0.0);
    CHECK(ext_diff(i1.image, weyl::mc_kappa1_map(weyl::ExtParams{th, st})) == 0.0);
    const Complex lt1 = i1.image.state.lambda;
    CHECK(std::abs(lt1 - (lam + k1 / mu)) < 1e-14 * (1.0 + std::abs(lt1)));
    const Complex want1 = (k1 * s.y1 + (w - lt1) * s.dy1) / (w - lam);
    CHECK(std::abs(i1.k1.weight(w, s) - want1) < 1e-14 * (1.0 + std::abs(want1)));
    CHECK(std::abs(i1.k2.weight(w, s) - (-th.thinf / k2) * s.dy2) < 1e-14);

    // degenerate kappas leave the kernels undefined
    CHECK(code_of([&] { mcv::transform_integrands_kappa2(dyadic_theta(kSum), st); }) ==
          Err::KernelUndefined);
    CHECK(code_of([&] { mcv::transform_integrands_kappa2(dyadic_theta(-kSum), st); }) ==
          Err::KernelUndefined);
    CHECK(code_of([&] { mcv::transform_integrands_kappa1(dyadic_theta(-kSum), st); }) ==
          Err::KernelUndefined);
}

TEST_CASE("taylor germs satisfy their system") {
    const FuchsianSystem sys = build_system(kTheta, kState);
    const mcv::SystemGerm germ =
        mcv::taylor_system_germ(sys, kCenter, {Complex(0.7, 0.2), Complex(-0.4, 0.6)}, 30);
    CHECK(mcv::germ_system_residual(sys, germ, 20) < 1e-13);

    // corrupting one coefficient is visible in the residual
    mcv::SystemGerm bad = germ;
    bad.y1.c[5] += 0.01;
    CHECK(mcv::germ_system_residual(sys, bad, 20) > 1e-4);

    std::mt19937_64 rng(46);
    const mcv::GeneralSystem gen = random_general(rng);
    const mcv::VectorGerm vg = mcv::taylor_germ(
        gen, Complex(-2.2, -0.9), {Complex(1.0, 0.0), Complex(0.3, -0.5), Complex(-0.2, 0.8)}, 30);
    CHECK(mcv::germ_residual(gen, vg, 20) < 1e-13);

    CHECK(code_of([&] { mcv::taylor_germ(gen, gen.poles[1], {1.0, 0.0, 0.0}, 10); }) ==
          Err::PoleError);
    CHECK(code_of([&] { mcv::taylor_germ(gen, Complex(-2.2, -0.9), {1.0, 0.0}, 10); }) ==
          Err::InvalidInput);
}

TEST_CASE("derivative branch realizes the integer-order convolution") {
    auto make_germ = [](const ThetaParams& th, int order) {
        return mcv::taylor_system_germ(build_system(th, kState), kCenter,
                                       {Complex(0.7, 0.2), Complex(-0.4, 0.6)}, order);
    };

    // kappa2 = -1: the first component is literally the derivative
    {
        const ThetaParams th = dyadic_theta(2.0 - kSum);
        const mcv::SystemGerm germ = make_germ(th, 40);
        const mcv::DerivativeImage img = mcv::derivative_transform(th, kState, germ, 8);
        CHECK(img.branch == mcv::IntegerBranch::OrderKappa2);
        const PowerSeries d1 = derivative(germ.y1);
        REQUIRE(img.germ.y1.len() == d1.len());
        for (int j = 0; j < d1.len(); ++j) CHECK(std::abs(img.germ.y1.at(j) - d1.at(j)) == 0.0);
        const FuchsianSystem dst = build_system(img.image.theta, img.image.state);
        CHECK(mcv::germ_system_residual(dst, img.germ, 15) < 1e-9);
    }

    // kappa2 = -2: fifteen coefficients of the image system's relation
    {
        const ThetaParams th = dyadic_theta(4.0 - kSum);
        const mcv::SystemGerm germ = make_germ(th, 40);
        const mcv::DerivativeImage img = mcv::derivative_transform(th, kState, germ, 8);
        CHECK(img.branch == mcv::IntegerBranch::OrderKappa2);
        CHECK(ext_diff(img.image, weyl::mc_kappa2_map(weyl::ExtParams{th, kState})) == 0.0);
        const FuchsianSystem dst = build_system(img.image.theta, img.image.state);
        CHECK(mcv::germ_system_residual(dst, img.germ, 15) < 1e-9);
    }

    // kappa2 = 0 fixes everything
    {
        const ThetaParams th = dyadic_theta(-kSum);
        const mcv::SystemGerm germ = make_germ(th, 20);
        const mcv::DerivativeImage img = mcv::derivative_transform(th, kState, germ, 8);
        CHECK(img.branch == mcv::IntegerBranch::Identity);
        CHECK(ext_diff(img.image, weyl::ExtParams{th, kState}) < 1e-14);
        for (int j = 0; j < germ.y1.len(); ++j)
            CHECK(std::abs(img.germ.y1.at(j) - germ.y1.at(j)) == 0.0);
    }

    // kappa1 = -1 and -2 run the other branch
    for (double m : {1.0, 2.0}) {
        const ThetaParams th = dyadic_theta(kSum - 2.0 * m);
        CHECK(std::abs(th.kappa1() + m) == 0.0);
        const mcv::SystemGerm germ = make_germ(th, 40);
        const mcv::DerivativeImage img = mcv::derivative_transform(th, kState, germ, 8);
        CHECK(img.branch == mcv::IntegerBranch::OrderKappa1);
        CHECK(ext_diff(img.image, weyl::mc_kappa1_map(weyl::ExtParams{th, kState})) == 0.0);
        const FuchsianSystem dst = build_system(img.image.theta, img.image.state);
        CHECK(mcv::germ_system_residual(dst, img.germ, 15) < 1e-9);
    }

    // guards: generic kappas, corrupted germ, center on the moving point
    {
        const mcv::SystemGerm germ = make_germ(kTheta, 20);
        CHECK(code_of([&] { mcv::derivative_transform(kTheta, kState, germ, 8); }) ==
              Err::WrongBranch);
    }
    {
        const ThetaParams th = dyadic_theta(4.0 - kSum);
        mcv::SystemGerm germ = make_germ(th, 20);
        germ.y2.c[4] += 0.02;
        CHECK(code_of([&] { mcv::derivative_transform(th, kState, germ, 8); }) == Err::BadGerm);
    }
    {
        const ThetaParams th = dyadic_theta(4.0 - kSum);
        const FuchsianSystem sys = build_system(th, kState);
        const mcv::SystemGerm at_lam =
            mcv::taylor_system_germ(sys, kState.lambda, {Complex(0.7, 0.2), Complex(-0.4, 0.6)}, 20);
        CHECK(code_of([&] { mcv::derivative_transform(th, kState, at_lam, 8); }) ==
              Err::InvalidInput);
    }
}

TEST_CASE("convolution vector of derivatives satisfies the size-6 system") {
    const std::vector<Complex> samples{kCenter + Complex(0.2, 0.0), kCenter + Complex(-0.15, 0.1),
                                       kCenter + Complex(0.1, -0.18)};
    const FuchsianSystem sys = build_system(kTheta, kState);
    const mcv::SystemGerm germ =
        mcv::taylor_system_germ(sys, kCenter, {Complex(0.7, 0.2), Complex(-0.4, 0.6)}, 40);

    CHECK(mcv::verify_convolution_vector(sys, Complex(-1.0, 0.0), germ, samples) < 1e-8);

    std::mt19937_64 rng(47);
    for (int it = 0; it < 5; ++it) {
        const testutil::Draw d = testutil::random_params(rng);
        const FuchsianSystem s2 = build_system(d.theta, d.state);
        const mcv::SystemGerm g2 = mcv::taylor_system_germ(
            s2, kCenter, {testutil::rnd_c(rng, 1.0), testutil::rnd_c(rng, 1.0)}, 40);
        CHECK(mcv::verify_convolution_vector(s2, Complex(-2.0, 0.0), g2, samples) < 1e-8);
    }

    // arbitrary size: 3x3 residues at three finite poles
    {
        const mcv::GeneralSystem gen = random_general(rng);
        const Complex c{-2.2, -0.9};
        const mcv::VectorGerm vg = mcv::taylor_germ(
            gen, c, {Complex(1.0, 0.0), Complex(0.3, -0.5), Complex(-0.2, 0.8)}, 40);
        const std::vector<Complex> far{c + Complex(0.3, 0.1), c + Complex(-0.2, -0.25)};
        CHECK(mcv::verify_convolution_vector(gen, Complex(-1.0, 0.0), vg, far) < 1e-8);
        CHECK(mcv::verify_convolution_vector(gen, Complex(-2.0, 0.0), vg, far) < 1e-8);
    }

    // guards
    CHECK(code_of([&] { mcv::verify_convolution_vector(sys, Complex(-1.5, 0.0), germ, samples); }) ==
          Err::WrongBranch);
    CHECK(code_of([&] { mcv::verify_convolution_vector(sys, Complex(1.0, 0.0), germ, samples); }) ==
          Err::WrongBranch);
    {
        mcv::SystemGerm bad = germ;
        bad.y1.c[3] += 0.5;
        CHECK(code_of([&] { mcv::verify_convolution_vector(sys, Complex(-1.0, 0.0), bad, samples); }) ==
              Err::BadGerm);
    }
}

TEST_CASE("evaluation route dispatch") {
    using mcv::ConvolutionRoute;
    CHECK(mcv::convolution_route(0.0) == ConvolutionRoute::Identity);
    CHECK(mcv::convolution_route(Complex(1e-12, 0.0)) == ConvolutionRoute::Identity);
    CHECK(mcv::convolution_route(Complex(-3.0, 0.0)) == ConvolutionRoute::DerivativeBranch);
    CHECK(mcv::convolution_route(Complex(-2.0, 1e-12)) == ConvolutionRoute::DerivativeBranch);
    CHECK(mcv::convolution_route(Complex(2.0, 0.0)) == ConvolutionRoute::ClosedContour);
    CHECK(mcv::convolution_route(Complex(0.5, 0.0)) == ConvolutionRoute::Pochhammer);
    CHECK(mcv::convolution_route(Complex(-2.0, 1e-3)) == ConvolutionRoute::Pochhammer);
    CHECK(mcv::convolution_route(Complex(1.3, -0.4)) == ConvolutionRoute::Pochhammer);
}
