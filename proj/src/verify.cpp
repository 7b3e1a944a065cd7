#include "heunmcv/verify.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "heunmcv/analytic.hpp"
#include "heunmcv/errors.hpp"
#include "heunmcv/mcv.hpp"
#include "heunmcv/parallel.hpp"
#include "heunmcv/sic.hpp"
#include "heunmcv/weyl.hpp"

namespace heunmcv::verify {

namespace an = heunmcv::analytic;

namespace {

constexpr double kTau = 6.283185307179586476925287;

bool finite_pole(Complex p) { return std::isfinite(p.real()) && std::isfinite(p.imag()); }

double int_dist(Complex v) { return std::hypot(v.real() - std::round(v.real()), v.imag()); }

// Frobenius germ at w = 0. The branch with non-integer exponent carries
// monodromy around the origin; cycles looping w = 0 need it (the analytic
// branch would make them homologous to zero and the transform trivial).
an::FrobeniusGerm germ_at_zero(const ScalarODE2& ode) {
    const auto exps = indicial_exponents(ode, 0.0);
    const int pick = int_dist(exps[0]) >= int_dist(exps[1]) ? 0 : 1;
    try {
        return an::frobenius_series(ode, 0.0, exps[size_t(pick)], 48);
    } catch (const Error&) {
        return an::frobenius_series(ode, 0.0, exps[size_t(1 - pick)], 48);
    }
}

// (value, derivative) of the germ solution continued to the base point
std::vector<Complex> continue_to_base(const ScalarODE2& ode, const an::FrobeniusGerm& germ,
                                      Complex base, const std::vector<Complex>& sings) {
    double r = germ.radius_hint;
    if (!std::isfinite(r) || r > 1.0) r = 1.0;
    const Complex wa = 0.3 * r * base / std::abs(base);
    std::vector<Complex> y{an::eval(germ, wa), an::eval_derivative(germ, wa)};
    return an::integrate_vector(an::companion_ode(ode), y, an::safe_path(wa, base, sings));
}

struct SystemSource {
    FuchsianSystem sys;
    Complex base;
    std::vector<Complex> y0;  // solution vector (y1, y2) at base
};

SystemSource system_source(const ThetaParams& th, const SystemState& st,
                           const std::vector<Complex>& zs) {
    SystemSource src{build_system(th, st), 0.0, {}};
    const ScalarODE2 sode = reduce_to_scalar(src.sys);
    const std::vector<Complex> sings{0.0, 1.0, st.t, st.lambda};
    std::vector<Complex> marked = sings;
    marked.insert(marked.end(), zs.begin(), zs.end());
    src.base = an::choose_base(marked);

    const auto y = continue_to_base(sode, germ_at_zero(sode), src.base, sings);
    const Complex a11 = src.sys.entry(0, 0).eval(src.base);
    const Complex a12 = src.sys.entry(0, 1).eval(src.base);
    if (std::abs(a12) < 1e-12)
        fail(Err::InvalidInput, "base point degenerate for the second component");
    src.y0 = {y[0], (y[1] - a11 * y[0]) / a12};
    return src;
}

// Cycle of the transform about `pole`. Pochhammer variants commute the z
// loop with the pole loop; pole cycles start at w = z. pole = infinity uses
// the composite of the finite cycles (no path through infinity).
an::Contour transform_cycle(bool pole_cycle, Complex z, Complex pole, Complex base, Complex t,
                            const std::vector<Complex>& avoid) {
    const std::vector<Complex> branch_pts{0.0, 1.0, t};
    if (finite_pole(pole)) {
        bool singular = false;
        for (Complex p : branch_pts) singular = singular || std::abs(pole - p) < 1e-9;
        if (!singular) fail(Err::InvalidInput, "transform pole must be one of 0, 1, t");
    }
    if (pole_cycle) {
        if (finite_pole(pole)) return an::cp_loop(z, pole, avoid);
        an::Contour c;
        c.kind = an::Contour::Kind::CpLoop;
        c.about = pole;
        c.branch_log = {{z, 0}};
        bool first = true;
        for (Complex p : branch_pts) {
            const an::Path rp = an::cp_loop(z, p, avoid).path.reversed();
            if (first) {
                c.path = rp;
                first = false;
            } else {
                c.path += rp;
            }
        }
        return c;
    }
    if (finite_pole(pole)) return an::pochhammer_contour(z, pole, base, avoid);
    // commutator of the z loop with a clockwise circle enclosing everything
    std::vector<Complex> others = avoid;
    others.push_back(z);
    const double rz = std::min(1e-2, an::loop_radius(z, avoid));
    const an::Path gz = an::simple_loop(z, base, avoid, rz).path;
    const an::Path ginf = an::big_loop(base, others).path.reversed();
    an::Contour c;
    c.kind = an::Contour::Kind::Pochhammer;
    c.about = pole;
    c.branch_log = {{z, 0}};
    c.path = gz;
    c.path += ginf;
    c.path += gz.reversed();
    c.path += ginf.reversed();
    return c;
}

an::ContourIntegrand wrap_kernel(const an::OdeSpec& ode, const std::vector<Complex>& y0,
                                 const mcv::ConvolutionKernel& k) {
    an::ContourIntegrand f;
    f.ode = ode;
    f.y0 = y0;
    f.nu = k.exponent;
    f.weight = [w = k.weight](Complex z, const std::vector<Complex>& y,
                              const std::vector<Complex>& dy) {
        return w(z, mcv::SolutionSample{y[0], y[1], dy[0], dy[1]});
    };
    return f;
}

double system_pair_residual(const SystemSource& src, const mcv::ConvolutionKernel& k1,
                            const mcv::ConvolutionKernel& k2, const weyl::ExtParams& image,
                            bool pole_cycle, Complex z, Complex pole, Complex lambda,
                            double quad_tol) {
    const std::vector<Complex> avoid{0.0, 1.0, src.sys.t, lambda};
    const an::Contour c = transform_cycle(pole_cycle, z, pole, src.base, src.sys.t, avoid);
    const an::OdeSpec ode = an::ode_of(src.sys);
    // pole cycles start at w = z, so hand them the solution there
    std::vector<Complex> y0 = src.y0;
    if (pole_cycle) y0 = an::integrate_vector(ode, y0, an::safe_path(src.base, z, avoid));
    const an::TransformSample s1 = an::transform_at(wrap_kernel(ode, y0, k1), c, z, 1, quad_tol);
    const an::TransformSample s2 = an::transform_at(wrap_kernel(ode, y0, k2), c, z, 1, quad_tol);

    const FuchsianSystem img = build_system(image.theta, image.state);
    const CMatrix a = img.coefficient_at(z);
    const Complex r1 = s1.dy - (a(0, 0) * s1.y + a(0, 1) * s2.y);
    const Complex r2 = s2.dy - (a(1, 0) * s1.y + a(1, 1) * s2.y);
    const double scale = 1.0 + std::max(std::abs(s1.y), std::abs(s2.y)) +
                         std::max(std::abs(s1.dy), std::abs(s2.dy));
    return std::max(std::abs(r1), std::abs(r2)) / scale;
}

double scalar_target_residual(const an::ContourIntegrand& f, const an::Contour& c,
                              const ScalarODE2& target, Complex z, double quad_tol) {
    const an::TransformSample s = an::transform_at(f, c, z, 2, quad_tol);
    const Complex r = s.d2y + target.p1.eval(z) * s.dy + target.p2.eval(z) * s.y;
    return std::abs(r) / (1.0 + std::abs(s.y) + std::abs(s.dy) + std::abs(s.d2y));
}

struct HeunPair {
    ScalarODE2 source;
    ScalarODE2 target;
    Complex exponent;  // kernel power of (z - w)
};

// Euler transform between the one-parameter Heun families cut out by the
// moving-pole line through lambda = 0: the source member at coordinate mu
// maps to the image-parameter member, with the kernel power kappa2 - 1.
HeunPair heun_pair(const ThetaParams& th, const SystemState& st) {
    const Complex k1 = th.kappa1(), k2 = th.kappa2();
    if (std::abs(th.th0) < 1e-10 || std::abs(k2 + th.th0) < 1e-10)
        fail(Err::KernelUndefined, "the target family coordinate needs theta0(theta0+kappa2) != 0");
    const sic::LineFamily from = sic::heun_on_line(sic::Line::L0, th, st.t, st.mu);
    const weyl::ExtParams image = weyl::mc_kappa2_map({th, st});
    const Complex mu_image =
        (st.t * th.th0 * st.mu + k2 * (k1 + th.th1 + st.t * (k1 + th.tht))) /
        (st.t * (k2 + th.th0));
    const sic::LineFamily to = sic::heun_on_line(sic::Line::L0, image.theta, st.t, mu_image);
    return {heun_ode(from.params), heun_ode(to.params), k2 - 1.0};
}

double heun_residual(const ThetaParams& th, const SystemState& st, bool pole_cycle, Complex z,
                     Complex pole, double quad_tol) {
    const HeunPair pair = heun_pair(th, st);
    const std::vector<Complex> sings{0.0, 1.0, st.t};
    std::vector<Complex> marked = sings;
    marked.push_back(z);
    const Complex base = an::choose_base(marked);

    an::ContourIntegrand f;
    f.ode = an::companion_ode(pair.source);
    f.y0 = continue_to_base(pair.source, germ_at_zero(pair.source), base, sings);
    f.nu = pair.exponent;
    f.weight = [](Complex, const std::vector<Complex>& y, const std::vector<Complex>&) {
        return y[0];
    };
    if (pole_cycle) f.y0 = an::integrate_vector(f.ode, f.y0, an::safe_path(base, z, sings));
    const an::Contour c = transform_cycle(pole_cycle, z, pole, base, st.t, sings);
    return scalar_target_residual(f, c, pair.target, z, quad_tol);
}

}  // namespace

const char* theorem_name(IntegralTheorem th) {
    switch (th) {
        case IntegralTheorem::SystemEulerK2: return "system-euler-k2";
        case IntegralTheorem::ScalarEulerK2: return "scalar-euler-k2";
        case IntegralTheorem::SystemEulerK1: return "system-euler-k1";
        case IntegralTheorem::HeunShift: return "heun-shift";
        case IntegralTheorem::SystemLoop: return "system-loop";
        case IntegralTheorem::HeunLoop: return "heun-loop";
    }
    return "?";
}

std::optional<IntegralTheorem> theorem_from_name(std::string_view name) {
    for (IntegralTheorem th : kAllTheorems)
        if (name == theorem_name(th)) return th;
    return std::nullopt;
}

bool is_pole_cycle(IntegralTheorem th) {
    return th == IntegralTheorem::SystemLoop || th == IntegralTheorem::HeunLoop;
}

const char* pole_name(PolePoint p) {
    switch (p) {
        case PolePoint::Zero: return "0";
        case PolePoint::One: return "1";
        case PolePoint::T: return "t";
        case PolePoint::Infinity: return "inf";
    }
    return "?";
}

std::optional<PolePoint> pole_from_name(std::string_view name) {
    if (name == "0") return PolePoint::Zero;
    if (name == "1") return PolePoint::One;
    if (name == "t") return PolePoint::T;
    if (name == "inf" || name == "infinity") return PolePoint::Infinity;
    return std::nullopt;
}

Complex pole_location(PolePoint p, Complex t) {
    switch (p) {
        case PolePoint::Zero: return 0.0;
        case PolePoint::One: return 1.0;
        case PolePoint::T: return t;
        case PolePoint::Infinity: break;
    }
    return Complex(std::numeric_limits<double>::infinity(), 0.0);
}

double integral_residual(IntegralTheorem th_id, const ThetaParams& theta,
                         const SystemState& state, Complex pole, const std::vector<Complex>& zs,
                         double quad_tol) {
    double worst = 0.0;
    switch (th_id) {
        case IntegralTheorem::SystemEulerK2:
        case IntegralTheorem::SystemLoop: {
            const mcv::IntegrandsKappa2 in = mcv::transform_integrands_kappa2(theta, state);
            const SystemSource src = system_source(theta, state, zs);
            for (Complex z : zs)
                worst = std::max(worst, system_pair_residual(src, in.k1, in.k2, in.image,
                                                             is_pole_cycle(th_id), z, pole,
                                                             state.lambda, quad_tol));
            return worst;
        }
        case IntegralTheorem::SystemEulerK1: {
            const mcv::IntegrandsKappa1 in = mcv::transform_integrands_kappa1(theta, state);
            const SystemSource src = system_source(theta, state, zs);
            for (Complex z : zs)
                worst = std::max(worst, system_pair_residual(src, in.k1, in.k2, in.image, false,
                                                             z, pole, state.lambda, quad_tol));
            return worst;
        }
        case IntegralTheorem::ScalarEulerK2: {
            const mcv::IntegrandsKappa2 in = mcv::transform_integrands_kappa2(theta, state);
            const SystemSource src = system_source(theta, state, zs);
            const ScalarODE2 target =
                reduce_to_scalar(build_system(in.image.theta, in.image.state));
            const std::vector<Complex> avoid{0.0, 1.0, state.t, state.lambda};
            const an::ContourIntegrand f =
                wrap_kernel(an::ode_of(src.sys), src.y0, in.scalar);
            for (Complex z : zs) {
                const an::Contour c =
                    transform_cycle(false, z, pole, src.base, state.t, avoid);
                worst = std::max(worst, scalar_target_residual(f, c, target, z, quad_tol));
            }
            return worst;
        }
        case IntegralTheorem::HeunShift:
        case IntegralTheorem::HeunLoop: {
            for (Complex z : zs)
                worst = std::max(worst, heun_residual(theta, state, is_pole_cycle(th_id), z,
                                                      pole, quad_tol));
            return worst;
        }
    }
    fail(Err::InvalidInput, "unknown theorem id");
}

namespace {

struct DrawSet {
    ThetaParams theta;
    SystemState state;
    std::vector<Complex> zs;
};

Complex rnd_c(std::mt19937& rng, double hw) {
    std::uniform_real_distribution<double> u(-hw, hw);
    const double re = u(rng);
    const double im = u(rng);
    return Complex(re, im);
}

std::vector<Complex> pick_zs(std::mt19937& rng, int n, const std::vector<Complex>& keep_away) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Complex> zs;
    for (int guard = 0; int(zs.size()) < n && guard < 500; ++guard) {
        const double rad = 0.35 + 0.6 * u(rng);
        const Complex z = Complex(0.5, 0.0) + rad * std::exp(Complex(0.0, kTau * u(rng)));
        bool ok = true;
        for (Complex q : keep_away) ok = ok && std::abs(z - q) > 0.22;
        for (Complex q : zs) ok = ok && std::abs(z - q) > 0.1;
        if (ok) zs.push_back(z);
    }
    if (int(zs.size()) < n) fail(Err::InvalidInput, "could not place the z samples");
    return zs;
}

// One admissible parameter draw for the theorem: generic complex angles,
// with theta_inf pinned so kappa2 is a small positive integer for the pole
// cycle variants. Draws violating the validity domain are rejected here.
DrawSet admissible_draw(IntegralTheorem th_id, std::mt19937& rng, int draw_index,
                        int z_samples) {
    const bool loop = is_pole_cycle(th_id);
    for (int attempt = 0; attempt < 200; ++attempt) {
        ThetaParams th{Complex(0.3) + rnd_c(rng, 0.55), Complex(-0.25) + rnd_c(rng, 0.55),
                       Complex(0.2) + rnd_c(rng, 0.55), Complex(0.85) + rnd_c(rng, 0.55)};
        if (loop) {
            const int n = 1 + ((draw_index + attempt) % 2);
            th.thinf = -(th.th0 + th.th1 + th.tht) - 2.0 * double(n);
        }
        SystemState st{Complex(1.7, 0.6) + rnd_c(rng, 0.45), Complex(0.4, -0.7) + rnd_c(rng, 0.4),
                       Complex(0.3, 0.2) + rnd_c(rng, 0.8), Complex(1.0)};
        const Complex k1 = th.kappa1(), k2 = th.kappa2();

        if (std::abs(k1) < 0.08 || std::abs(k2) < 0.08 || std::abs(th.thinf) < 0.05 ||
            std::abs(st.mu) < 0.1)
            continue;
        if (!loop && (int_dist(k1) < 0.08 || int_dist(k2) < 0.08)) continue;
        // keep the germ at w = 0 and the family coordinates non-resonant
        if (int_dist(th.th0) < 0.08 || std::abs(k2 + th.th0) < 0.08) continue;
        if (std::abs(st.lambda) < 0.25 || std::abs(st.lambda - 1.0) < 0.25 ||
            std::abs(st.lambda - st.t) < 0.25)
            continue;

        std::vector<Complex> keep{0.0, 1.0, st.t};
        const bool heun_level =
            th_id == IntegralTheorem::HeunShift || th_id == IntegralTheorem::HeunLoop;
        if (!heun_level) {
            keep.push_back(st.lambda);
            weyl::ExtParams image;
            try {
                image = th_id == IntegralTheorem::SystemEulerK1
                            ? weyl::mc_kappa1_map({th, st})
                            : weyl::mc_kappa2_map({th, st});
            } catch (const Error&) {
                continue;
            }
            const Complex lt = image.state.lambda;
            if (std::abs(lt) < 0.12 || std::abs(lt - 1.0) < 0.12 ||
                std::abs(lt - st.t) < 0.12 || std::abs(lt - st.lambda) < 0.12)
                continue;
            if (std::abs(lt) < 6.0) keep.push_back(lt);
        }
        return {th, st, pick_zs(rng, z_samples, keep)};
    }
    fail(Err::InvalidInput, "no admissible parameter draw found");
}

}  // namespace

VerifyReport verify_integral_theorem(IntegralTheorem th_id, const VerifyOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    VerifyReport report;
    report.theorem = th_id;
    report.tol = opt.tol;

    std::mt19937 rng(opt.seed);
    std::vector<DrawSet> draws;
    draws.reserve(size_t(opt.draws));
    for (int d = 0; d < opt.draws; ++d)
        draws.push_back(admissible_draw(th_id, rng, d, opt.z_samples));

    const int tasks = opt.draws * int(opt.poles.size());
    report.residuals.assign(size_t(tasks), 0.0);
    parallel_for(tasks, [&](int i) {
        const DrawSet& set = draws[size_t(i) / opt.poles.size()];
        const PolePoint pp = opt.poles[size_t(i) % opt.poles.size()];
        report.residuals[size_t(i)] =
            integral_residual(th_id, set.theta, set.state, pole_location(pp, set.state.t),
                              set.zs, opt.quad_tol);
    });

    report.samples = tasks;
    for (double r : report.residuals) report.max_residual = std::max(report.max_residual, r);
    report.pass = report.max_residual <= opt.tol;
    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace heunmcv::verify
