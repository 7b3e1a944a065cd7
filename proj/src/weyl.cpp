#include "heunmcv/weyl.hpp"

#include <cmath>
#include <string>

namespace heunmcv::weyl {

namespace {

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void need_finite_lambda(const ExtParams& p, const char* who) {
    if (p.state.lambda_infinite)
        fail(Err::GeneratorUndefined, std::string(who) + " needs finite lambda");
}

void check_result(const ExtParams& p, const char* who) {
    if (!finite(p.state.lambda) || !finite(p.state.mu))
        fail(Err::GeneratorUndefined, std::string(who) + " produced a non-finite moving point");
}

}  // namespace

ExtParams apply_generator(int g, const ExtParams& p) {
    ExtParams out = p;
    switch (g) {
        case 0: {
            need_finite_lambda(p, "generator 0");
            if (p.state.lambda == p.state.t)
                fail(Err::GeneratorUndefined, "generator 0 needs lambda != t");
            out.theta.tht = -p.theta.tht;
            out.state.mu = p.state.mu - p.theta.tht / (p.state.lambda - p.state.t);
            break;
        }
        case 1: {
            out.theta.thinf = 2.0 - p.theta.thinf;
            break;
        }
        case 2: {
            const Complex k1 = p.theta.kappa1(), k2 = p.theta.kappa2();
            out.theta.th0 = p.theta.th0 + k1;
            out.theta.th1 = p.theta.th1 + k1;
            out.theta.tht = p.theta.tht + k1;
            out.theta.thinf = -k2;
            if (k1 != 0.0) {
                need_finite_lambda(p, "generator 2");
                if (p.state.mu == 0.0)
                    fail(Err::GeneratorUndefined, "generator 2 needs mu != 0 when kappa1 != 0");
                out.state.lambda = p.state.lambda + k1 / p.state.mu;
            }
            break;
        }
        case 3: {
            need_finite_lambda(p, "generator 3");
            if (p.state.lambda == 1.0)
                fail(Err::GeneratorUndefined, "generator 3 needs lambda != 1");
            out.theta.th1 = -p.theta.th1;
            out.state.mu = p.state.mu - p.theta.th1 / (p.state.lambda - 1.0);
            break;
        }
        case 4: {
            need_finite_lambda(p, "generator 4");
            if (p.state.lambda == 0.0)
                fail(Err::GeneratorUndefined, "generator 4 needs lambda != 0");
            out.theta.th0 = -p.theta.th0;
            out.state.mu = p.state.mu - p.theta.th0 / p.state.lambda;
            break;
        }
        default:
            fail(Err::InvalidInput, "generator index must be 0..4");
    }
    check_result(out, "generator");
    return out;
}

ExtParams apply_word(const std::vector<int>& word, const ExtParams& p) {
    ExtParams cur = p;
    for (size_t i = 0; i < word.size(); ++i) {
        try {
            cur = apply_generator(word[i], cur);
        } catch (const Error& e) {
            fail(e.code(), "word stage " + std::to_string(i) + ": " + e.what());
        }
    }
    return cur;
}

ExtParams mc_kappa2_map(const ExtParams& p) {
    const Complex k2 = p.theta.kappa2();
    if (k2 == 0.0) return p;
    if (p.state.lambda_infinite)
        fail(Err::MapUndefined, "the convolution map is stated for finite lambda");
    const Complex t = p.state.t, lam = p.state.lambda, mu = p.state.mu;
    if (lam == 0.0 || lam == 1.0 || lam == t)
        fail(Err::MapUndefined, "the convolution map needs lambda off {0, 1, t}");

    const Complex d = mu - p.theta.th0 / lam - p.theta.th1 / (lam - 1.0) - p.theta.tht / (lam - t);
    if (d == 0.0)
        fail(Err::MapUndefined, "the image of lambda is infinite for this moving point");
    const Complex lt = lam - k2 / d;
    if (lt == 0.0 || lt == 1.0 || lt == t)
        fail(Err::MapUndefined, "the image of lambda lands on a singular point");

    ExtParams out = p;
    out.theta.th0 = p.theta.th0 + k2;
    out.theta.th1 = p.theta.th1 + k2;
    out.theta.tht = p.theta.tht + k2;
    out.theta.thinf = p.theta.thinf + k2;
    out.state.lambda = lt;
    out.state.mu = (k2 + p.theta.th0) / lt + (k2 + p.theta.th1) / (lt - 1.0) +
                   (k2 + p.theta.tht) / (lt - t) + k2 / (lam - lt);
    if (!finite(out.state.lambda) || !finite(out.state.mu))
        fail(Err::MapUndefined, "the convolution map produced a non-finite moving point");
    return out;
}

ExtParams mc_kappa1_map(const ExtParams& p) {
    const Complex k1 = p.theta.kappa1();
    if (k1 == 0.0) return p;
    if (p.state.lambda_infinite)
        fail(Err::MapUndefined, "the convolution map is stated for finite lambda");
    if (p.state.mu == 0.0)
        fail(Err::MapUndefined, "the order-kappa1 convolution needs mu != 0");
    ExtParams out = p;
    out.theta.th0 = p.theta.th0 + k1;
    out.theta.th1 = p.theta.th1 + k1;
    out.theta.tht = p.theta.tht + k1;
    out.theta.thinf = -p.theta.kappa2();
    out.state.lambda = p.state.lambda + k1 / p.state.mu;
    if (!finite(out.state.lambda))
        fail(Err::MapUndefined, "the convolution map produced a non-finite moving point");
    return out;
}

}  // namespace heunmcv::weyl
