#include "heunmcv/mcv.hpp"

#include <algorithm>
#include <cmath>

#include "heunmcv/errors.hpp"

namespace heunmcv::mcv {

namespace {

constexpr double kGuard = 1e-8;

void check_general(const GeneralSystem& sys) {
    if (sys.poles.empty() || sys.poles.size() != sys.residues.size())
        fail(Err::InvalidInput, "need one square residue per pole");
    const int r = sys.residues[0].rows();
    if (r < 1) fail(Err::InvalidInput, "residues must be nonempty");
    for (const auto& a : sys.residues)
        if (a.rows() != r || a.cols() != r)
            fail(Err::InvalidInput, "residues must share one square size");
    for (size_t i = 0; i < sys.poles.size(); ++i)
        for (size_t j = i + 1; j < sys.poles.size(); ++j)
            if (std::abs(sys.poles[i] - sys.poles[j]) <= 1e-12 * (1.0 + std::abs(sys.poles[i])))
                fail(Err::InvalidInput, "poles must be distinct");
}

GeneralSystem to_general(const FuchsianSystem& sys) {
    return GeneralSystem{{Complex(0.0), Complex(1.0), sys.t}, {sys.a0, sys.a1, sys.at}};
}

VectorGerm to_vector(const SystemGerm& g) { return VectorGerm{g.center, {g.y1, g.y2}}; }

// Taylor coefficients of 1/(z - a) in powers of (z - center); a != center.
PowerSeries inv_linear(Complex center, Complex a, int len) {
    PowerSeries r;
    r.c.resize(size_t(std::max(len, 0)));
    const Complex d = a - center;
    Complex pw = -1.0 / d;
    for (int n = 0; n < len; ++n) {
        r.c[size_t(n)] = pw;
        pw /= d;
    }
    return r;
}

PowerSeries affine(Complex a0, Complex a1, int len) {
    PowerSeries r;
    r.c.assign(size_t(std::max(len, 0)), 0.0);
    if (len > 0) r.c[0] = a0;
    if (len > 1) r.c[1] = a1;
    return r;
}

PowerSeries nth_derivative(PowerSeries p, int n) {
    for (int i = 0; i < n; ++i) p = derivative(p);
    return p;
}

bool near_int(Complex v, double tol, long& out) {
    const double re = std::round(v.real());
    if (std::abs(v.real() - re) > tol || std::abs(v.imag()) > tol) return false;
    out = long(re);
    return true;
}

// Coefficient matrices of A(z) = sum_j residues[j]/(z - poles[j]) expanded
// in powers of (z - center), indices 0 .. len-1.
std::vector<CMatrix> coefficient_series(const GeneralSystem& sys, Complex center, int len) {
    const int r = sys.residues[0].rows();
    std::vector<CMatrix> an(size_t(std::max(len, 0)), CMatrix(r, r));
    for (size_t j = 0; j < sys.poles.size(); ++j) {
        const Complex d = sys.poles[j] - center;
        Complex pw = -1.0 / d;
        for (int n = 0; n < len; ++n) {
            an[size_t(n)] += sys.residues[j] * pw;
            pw /= d;
        }
    }
    return an;
}

void check_ordinary_center(const GeneralSystem& sys, Complex center) {
    for (Complex p : sys.poles)
        if (std::abs(center - p) <= kGuard * (1.0 + std::abs(p)))
            fail(Err::PoleError, "Taylor expansion requires an ordinary center");
}

int germ_size(const VectorGerm& g) {
    if (g.y.empty()) fail(Err::InvalidInput, "empty germ");
    int len = g.y[0].len();
    for (const auto& s : g.y) len = std::min(len, s.len());
    return len;
}

}  // namespace

std::vector<CMatrix> convolution_matrices(const GeneralSystem& sys, Complex nu) {
    check_general(sys);
    const int m = int(sys.poles.size());
    const int r = sys.residues[0].rows();
    std::vector<CMatrix> out;
    out.reserve(size_t(m));
    for (int j = 0; j < m; ++j) {
        CMatrix b(m * r, m * r);
        for (int q = 0; q < m; ++q) b.set_block(j * r, q * r, sys.residues[size_t(q)]);
        for (int i = 0; i < r; ++i) b(j * r + i, j * r + i) += nu;
        out.push_back(b);
    }
    return out;
}

ConvolutionSystem convolution_matrices(const FuchsianSystem& sys, Complex nu) {
    auto b = convolution_matrices(to_general(sys), nu);
    return ConvolutionSystem{nu, sys.t, b[0], b[1], b[2]};
}

InvariantSubspaces invariant_subspaces(const ConvolutionSystem& cs, double tol) {
    if (cs.b0.rows() != 6 || cs.b0.cols() != 6 || cs.b1.rows() != 6 || cs.bt.rows() != 6)
        fail(Err::InvalidInput, "convolution matrices must be 6x6");
    // The residues sit in the top block row of b0 (nu on the diagonal of the
    // first block).
    CMatrix a[3] = {cs.b0.block(0, 0, 2, 2), cs.b0.block(0, 2, 2, 2), cs.b0.block(0, 4, 2, 2)};
    a[0](0, 0) -= cs.nu;
    a[0](1, 1) -= cs.nu;

    InvariantSubspaces out;
    for (int p = 0; p < 3; ++p) {
        for (const auto& v : kernel_basis(a[p], tol)) {
            std::vector<Complex> e(6, 0.0);
            e[size_t(2 * p)] = v[0];
            e[size_t(2 * p + 1)] = v[1];
            out.l_basis.push_back(std::move(e));
        }
    }
    CMatrix stacked(18, 6);
    stacked.set_block(0, 0, cs.b0);
    stacked.set_block(6, 0, cs.b1);
    stacked.set_block(12, 0, cs.bt);
    out.k_basis = kernel_basis(stacked, tol);

    const int n = int(out.l_basis.size() + out.k_basis.size());
    CMatrix span(6, std::max(n, 1));
    int col = 0;
    for (const auto& v : out.l_basis) {
        for (int i = 0; i < 6; ++i) span(i, col) = v[size_t(i)];
        ++col;
    }
    for (const auto& v : out.k_basis) {
        for (int i = 0; i < 6; ++i) span(i, col) = v[size_t(i)];
        ++col;
    }
    out.quotient_dim = 6 - rank(span, tol);
    return out;
}

GaugeS gauge_s(const ThetaParams& th, const SystemState& st) {
    const SystemVariables v = solve_system_variables(th, st);
    const Complex t = st.t, lam = st.lambda, mu = st.mu, k = st.k;
    const Complex k1 = th.kappa1(), k2 = th.kappa2();
    if (std::abs(k1) <= kGuard)
        fail(Err::GaugeUndefined, "the first gauge column needs kappa1 != 0");
    if (std::abs(k2) <= kGuard)
        fail(Err::GaugeUndefined, "the second gauge column needs kappa2 != 0");
    const Complex den = mu - th.th0 / lam - th.th1 / (lam - 1.0) - th.tht / (lam - t);
    if (std::abs(den) <= kGuard * (1.0 + std::abs(mu)))
        fail(Err::GaugeUndefined, "the moved point is undefined for this moving data");
    const Complex lt = lam - k2 / den;

    GaugeS g;
    g.lambda_tilde = lt;
    g.s = CMatrix(6, 6);
    CMatrix& s = g.s;
    s(0, 3) = v.w0;
    s(1, 2) = 1.0;
    s(1, 3) = v.u0 + th.th0;
    s(2, 4) = v.w1;
    s(3, 0) = (mu * (lam - t) + k1) / (k * k1);
    s(3, 1) = (lt - lam) / (lam * (lam - 1.0) * k2);
    s(3, 2) = 1.0;
    s(3, 4) = v.u1 + th.th1;
    s(4, 5) = v.wt;
    s(5, 0) = t * (mu * (lam - 1.0) + k1) / (k * k1);
    s(5, 1) = t * (lt - lam) / (lam * (lam - t) * k2);
    s(5, 2) = 1.0;
    s(5, 5) = v.ut + th.tht;

    const Complex d = det(s);
    if (!(std::abs(d) > 0.0) || !std::isfinite(std::abs(d)))
        fail(Err::GaugeUndefined, "gauge matrix is singular");
    return g;
}

std::pair<weyl::ExtParams, FuchsianSystem> middle_convolution_kappa2(const ThetaParams& th,
                                                                     const SystemState& st) {
    const GaugeS g = gauge_s(th, st);
    const weyl::ExtParams image = weyl::mc_kappa2_map(weyl::ExtParams{th, st});
    const ConvolutionSystem cs = convolution_matrices(build_system(th, st), th.kappa2());
    const CMatrix sinv = inverse(g.s);
    FuchsianSystem out;
    out.t = st.t;
    out.a0 = (sinv * cs.b0 * g.s).block(0, 0, 2, 2);
    out.a1 = (sinv * cs.b1 * g.s).block(0, 0, 2, 2);
    out.at = (sinv * cs.bt * g.s).block(0, 0, 2, 2);
    return {image, out};
}

IntegrandsKappa2 transform_integrands_kappa2(const ThetaParams& th, const SystemState& st) {
    const Complex k1 = th.kappa1(), k2 = th.kappa2();
    if (std::abs(k1) <= kGuard)
        fail(Err::KernelUndefined, "the second kernel needs kappa1 != 0");
    if (std::abs(k2) <= kGuard)
        fail(Err::KernelUndefined, "the kernels degenerate at kappa2 = 0");
    IntegrandsKappa2 out;
    out.image = weyl::mc_kappa2_map(weyl::ExtParams{th, st});
    const Complex lam = st.lambda, mu = st.mu, t = st.t;
    const Complex pref = k2 * lam * (lam - 1.0) * (lam - t) / (st.k * (lam - out.image.state.lambda));
    out.k1 = {k2, [](Complex, const SolutionSample& s) { return s.dy1; }};
    out.k2 = {k2, [pref, lam, mu, k1](Complex w, const SolutionSample& s) {
                  return pref * ((s.dy1 - mu * s.y1) / (lam - w) + (mu / k1) * s.dy1);
              }};
    out.scalar = {k2 - 1.0, [](Complex, const SolutionSample& s) { return s.y1; }};
    return out;
}

IntegrandsKappa1 transform_integrands_kappa1(const ThetaParams& th, const SystemState& st) {
    const Complex k1 = th.kappa1(), k2 = th.kappa2();
    if (std::abs(k2) <= kGuard)
        fail(Err::KernelUndefined, "the second kernel needs kappa2 != 0");
    IntegrandsKappa1 out;
    out.image = weyl::mc_kappa1_map(weyl::ExtParams{th, st});
    const Complex lam = st.lambda;
    const Complex lt = out.image.state.lambda;
    const Complex c2 = -th.thinf / k2;
    out.k1 = {k1, [k1, lam, lt](Complex w, const SolutionSample& s) {
                  return (k1 * s.y1 + (w - lt) * s.dy1) / (w - lam);
              }};
    out.k2 = {k1, [c2](Complex, const SolutionSample& s) { return c2 * s.dy2; }};
    return out;
}

VectorGerm taylor_germ(const GeneralSystem& sys, Complex center, const std::vector<Complex>& y0,
                       int order) {
    check_general(sys);
    check_ordinary_center(sys, center);
    const int r = sys.residues[0].rows();
    if (int(y0.size()) != r) fail(Err::InvalidInput, "initial value size mismatch");
    if (order < 2) fail(Err::InvalidInput, "need at least two coefficients");

    const auto an = coefficient_series(sys, center, order - 1);
    std::vector<std::vector<Complex>> yc(size_t(order), std::vector<Complex>(size_t(r), 0.0));
    yc[0] = y0;
    for (int n = 0; n + 1 < order; ++n) {
        std::vector<Complex> acc(size_t(r), 0.0);
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i < r; ++i)
                for (int q = 0; q < r; ++q)
                    acc[size_t(i)] += an[size_t(j)](i, q) * yc[size_t(n - j)][size_t(q)];
        for (int i = 0; i < r; ++i) yc[size_t(n + 1)][size_t(i)] = acc[size_t(i)] / double(n + 1);
    }

    VectorGerm g;
    g.center = center;
    g.y.resize(size_t(r));
    for (int i = 0; i < r; ++i) {
        g.y[size_t(i)].c.resize(size_t(order));
        for (int n = 0; n < order; ++n) g.y[size_t(i)].c[size_t(n)] = yc[size_t(n)][size_t(i)];
    }
    return g;
}

SystemGerm taylor_system_germ(const FuchsianSystem& sys, Complex center, std::array<Complex, 2> y0,
                              int order) {
    VectorGerm g = taylor_germ(to_general(sys), center, {y0[0], y0[1]}, order);
    return SystemGerm{g.center, std::move(g.y[0]), std::move(g.y[1])};
}

double germ_residual(const GeneralSystem& sys, const VectorGerm& germ, int n_coeffs) {
    check_general(sys);
    check_ordinary_center(sys, germ.center);
    const int r = sys.residues[0].rows();
    if (int(germ.y.size()) != r) fail(Err::InvalidInput, "germ size mismatch");
    const int len = germ_size(germ);
    if (len < 2) fail(Err::InvalidInput, "germ too short");
    const int nc = std::min(n_coeffs, len - 1);
    if (nc < 1) fail(Err::InvalidInput, "nothing to check");

    const auto an = coefficient_series(sys, germ.center, nc);
    double worst = 0.0;
    for (int i = 0; i < r; ++i) {
        for (int m = 0; m < nc; ++m) {
            const Complex lhs = double(m + 1) * germ.y[size_t(i)].at(m + 1);
            Complex rhs = 0.0;
            for (int j = 0; j <= m; ++j)
                for (int q = 0; q < r; ++q)
                    rhs += an[size_t(j)](i, q) * germ.y[size_t(q)].at(m - j);
            worst = std::max(worst,
                             std::abs(lhs - rhs) / (1.0 + std::abs(lhs) + std::abs(rhs)));
        }
    }
    return worst;
}

double germ_system_residual(const FuchsianSystem& sys, const SystemGerm& germ, int n_coeffs) {
    return germ_residual(to_general(sys), to_vector(germ), n_coeffs);
}

DerivativeImage derivative_transform(const ThetaParams& th, const SystemState& st,
                                     const SystemGerm& germ, int order_check) {
    const FuchsianSystem src = build_system(th, st);
    const int len = std::min(germ.y1.len(), germ.y2.len());
    if (len < 3) fail(Err::InvalidInput, "germ too short");
    const double gres = germ_system_residual(src, germ, std::max(order_check, 2));
    if (!(gres <= 1e-6)) fail(Err::BadGerm, "germ does not satisfy the source system");

    const Complex k1 = th.kappa1(), k2 = th.kappa2();
    const Complex lam = st.lambda, mu = st.mu, t = st.t, k = st.k;
    long i2 = 0, i1 = 0;
    const bool k2_int = near_int(k2, 1e-9, i2) && i2 <= 0;
    const bool k1_int = near_int(k1, 1e-9, i1) && i1 <= 0;

    DerivativeImage out;
    if (k2_int) {
        out.image = weyl::mc_kappa2_map(weyl::ExtParams{th, st});
        if (i2 == 0) {
            out.branch = IntegerBranch::Identity;
            out.germ = germ;
            return out;
        }
        out.branch = IntegerBranch::OrderKappa2;
        const int m = int(-i2);
        if (len < m + 3) fail(Err::InvalidInput, "germ too short for the derivative order");
        if (std::abs(germ.center - lam) <= kGuard * (1.0 + std::abs(lam)))
            fail(Err::InvalidInput, "expand the germ away from lambda");
        if (std::abs(k1) <= kGuard)
            fail(Err::KernelUndefined, "the second component needs kappa1 != 0");
        const Complex pref =
            k2 * lam * (lam - 1.0) * (lam - t) / (k * (lam - out.image.state.lambda));
        const PowerSeries d1 = derivative(germ.y1);
        const PowerSeries inv_lam_z = inv_linear(germ.center, lam, len - 1).times(-1.0);
        const PowerSeries f =
            d1.minus(germ.y1.times(mu)).times(inv_lam_z).plus(d1.times(mu / k1));
        out.germ.center = germ.center;
        out.germ.y1 = nth_derivative(germ.y1, m);
        out.germ.y2 = nth_derivative(f, m - 1).times(pref);
        return out;
    }
    if (k1_int) {
        out.image = weyl::mc_kappa1_map(weyl::ExtParams{th, st});
        if (i1 == 0) {
            out.branch = IntegerBranch::Identity;
            out.germ = germ;
            return out;
        }
        out.branch = IntegerBranch::OrderKappa1;
        const int m = int(-i1);
        if (len < m + 3) fail(Err::InvalidInput, "germ too short for the derivative order");
        if (std::abs(germ.center - lam) <= kGuard * (1.0 + std::abs(lam)))
            fail(Err::InvalidInput, "expand the germ away from lambda");
        if (std::abs(k2) <= kGuard)
            fail(Err::KernelUndefined, "the second component needs kappa2 != 0");
        const Complex lt = out.image.state.lambda;
        const PowerSeries d1 = derivative(germ.y1);
        const PowerSeries inv_z_lam = inv_linear(germ.center, lam, len - 1);
        const PowerSeries g =
            germ.y1.times(k1).truncated(len - 1).plus(d1.times(affine(germ.center - lt, 1.0, len - 1)));
        out.germ.center = germ.center;
        out.germ.y1 = nth_derivative(g.times(inv_z_lam), m - 1);
        out.germ.y2 = nth_derivative(germ.y2, m).times(-th.thinf / k2);
        return out;
    }
    fail(Err::WrongBranch, "neither kappa is a nonpositive integer");
}

double verify_convolution_vector(const GeneralSystem& sys, Complex nu, const VectorGerm& germ,
                                 const std::vector<Complex>& samples) {
    check_general(sys);
    long i = 0;
    if (!near_int(nu, 1e-9, i) || i >= 0)
        fail(Err::WrongBranch, "the derivative vector is stated for negative integer parameters");
    const int n = int(-1 - i);
    const int r = sys.residues[0].rows();
    if (int(germ.y.size()) != r) fail(Err::InvalidInput, "germ size mismatch");
    const int len = germ_size(germ);
    if (len < n + 3) fail(Err::InvalidInput, "germ too short for the requested derivative order");
    const double gres = germ_residual(sys, germ, std::min(8, len - 1));
    if (!(gres <= 1e-6)) fail(Err::BadGerm, "germ does not satisfy the source system");

    const auto b = convolution_matrices(sys, nu);
    const int m = int(sys.poles.size());
    std::vector<PowerSeries> u(size_t(m * r)), du(size_t(m * r));
    for (int j = 0; j < m; ++j) {
        const PowerSeries geo = inv_linear(germ.center, sys.poles[size_t(j)], len);
        for (int q = 0; q < r; ++q) {
            u[size_t(j * r + q)] = nth_derivative(germ.y[size_t(q)].times(geo), n);
            du[size_t(j * r + q)] = derivative(u[size_t(j * r + q)]);
        }
    }

    double worst = 0.0;
    for (Complex z : samples) {
        const Complex dz = z - germ.center;
        std::vector<Complex> uv(size_t(m * r)), duv(size_t(m * r)), rhs(size_t(m * r), 0.0);
        for (int q = 0; q < m * r; ++q) {
            uv[size_t(q)] = eval(u[size_t(q)], dz);
            duv[size_t(q)] = eval(du[size_t(q)], dz);
        }
        for (int j = 0; j < m; ++j) {
            const Complex f = 1.0 / (z - sys.poles[size_t(j)]);
            for (int row = 0; row < m * r; ++row)
                for (int col = 0; col < m * r; ++col)
                    rhs[size_t(row)] += b[size_t(j)](row, col) * uv[size_t(col)] * f;
        }
        double num = 0.0, da = 0.0, ra = 0.0;
        for (int q = 0; q < m * r; ++q) {
            num = std::max(num, std::abs(duv[size_t(q)] - rhs[size_t(q)]));
            da = std::max(da, std::abs(duv[size_t(q)]));
            ra = std::max(ra, std::abs(rhs[size_t(q)]));
        }
        worst = std::max(worst, num / (1.0 + da + ra));
    }
    return worst;
}

double verify_convolution_vector(const FuchsianSystem& sys, Complex nu, const SystemGerm& germ,
                                 const std::vector<Complex>& samples) {
    return verify_convolution_vector(to_general(sys), nu, to_vector(germ), samples);
}

ConvolutionRoute convolution_route(Complex nu, double tol) {
    if (std::abs(nu) <= tol) return ConvolutionRoute::Identity;
    long i = 0;
    if (near_int(nu, tol, i)) {
        return i < 0 ? ConvolutionRoute::DerivativeBranch : ConvolutionRoute::ClosedContour;
    }
    return ConvolutionRoute::Pochhammer;
}

}  // namespace heunmcv::mcv
