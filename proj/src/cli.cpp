#include "heunmcv/cli.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "heunmcv/analytic.hpp"
#include "heunmcv/errors.hpp"
#include "heunmcv/fuchsian.hpp"
#include "heunmcv/mcv.hpp"
#include "heunmcv/sic.hpp"
#include "heunmcv/verify.hpp"
#include "heunmcv/weyl.hpp"

namespace heunmcv::cli {

using nlohmann::json;

namespace {

constexpr double kTau = 6.283185307179586476925287;

// ---------------------------------------------------------------------------
// JSON encoding: complex numbers as [re, im], matrices row-major nested

// + 0.0 folds negative zeros away so reports are stable across algebraically
// equal evaluation orders
json cpx(Complex v) { return json::array({v.real() + 0.0, v.imag() + 0.0}); }

json mat(const CMatrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(cpx(m(i, j)));
        rows.push_back(row);
    }
    return rows;
}

json poly_coeffs(const CPoly& p) {
    json out = json::array();
    for (Complex c : p.coeffs()) out.push_back(cpx(c));
    return out;
}

json rational(const CRational& r) {
    return json{{"num", poly_coeffs(r.num())}, {"den", poly_coeffs(r.den())}};
}

json theta_json(const ThetaParams& th) {
    return json::array({cpx(th.th0), cpx(th.th1), cpx(th.tht), cpx(th.thinf)});
}

json state_json(const SystemState& st) {
    json out{{"t", cpx(st.t)}, {"lambda", cpx(st.lambda)}, {"mu", cpx(st.mu)}, {"k", cpx(st.k)}};
    if (st.lambda_infinite) out["lambda_infinite"] = true;
    return out;
}

// ---------------------------------------------------------------------------
// JSON decoding with diagnostics naming the offending field

[[noreturn]] void bad(const std::string& what) { fail(Err::InvalidInput, what); }

Complex as_complex(const json& j, const std::string& what) {
    if (j.is_number()) return Complex(j.get<double>(), 0.0);
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return Complex(j[0].get<double>(), j[1].get<double>());
    bad(what + " must be a number or a two-element array [re, im]");
}

CMatrix as_matrix(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) bad(what + " must be a nested array of rows");
    const int n = int(j.size());
    const int m = j[0].is_array() ? int(j[0].size()) : 0;
    if (m == 0) bad(what + " rows must be non-empty arrays");
    CMatrix out(n, m);
    for (int i = 0; i < n; ++i) {
        if (!j[size_t(i)].is_array() || int(j[size_t(i)].size()) != m)
            bad(what + " rows must all have the same length");
        for (int k = 0; k < m; ++k)
            out(i, k) = as_complex(j[size_t(i)][size_t(k)],
                                   what + "[" + std::to_string(i) + "][" + std::to_string(k) + "]");
    }
    return out;
}

const json& field(const json& j, const char* name, const std::string& where) {
    const auto it = j.find(name);
    if (it == j.end()) bad(where + " is missing required field \"" + name + "\"");
    return *it;
}

ThetaParams theta_of(const json& job) {
    const json& th = field(job, "theta", "job");
    if (!th.is_array() || th.size() != 4)
        bad("\"theta\" must list the four local exponents [theta0, theta1, thetat, thetainf]");
    return ThetaParams{as_complex(th[0], "theta[0]"), as_complex(th[1], "theta[1]"),
                       as_complex(th[2], "theta[2]"), as_complex(th[3], "theta[3]")};
}

SystemState state_of(const json& job) {
    const json& st = field(job, "state", "job");
    SystemState out;
    out.t = as_complex(field(st, "t", "state"), "state.t");
    out.lambda_infinite = st.value("lambda_infinite", false);
    out.lambda = out.lambda_infinite ? Complex(0.0)
                                     : as_complex(field(st, "lambda", "state"), "state.lambda");
    out.mu = as_complex(field(st, "mu", "state"), "state.mu");
    out.k = st.contains("k") ? as_complex(st["k"], "state.k") : Complex(1.0);
    return out;
}

Complex t_of(const json& job) {
    if (job.contains("state")) return as_complex(field(job["state"], "t", "state"), "state.t");
    if (job.contains("matrices"))
        return as_complex(field(job["matrices"], "t", "matrices"), "matrices.t");
    bad("job needs \"state\" (or \"matrices\") to provide t");
}

// the system under study: explicit residue matrices win over parameters, so
// `build` output can be fed straight back into `reduce`
FuchsianSystem system_of(const json& job) {
    if (job.contains("matrices")) {
        const json& m = job["matrices"];
        FuchsianSystem sys;
        sys.t = as_complex(field(m, "t", "matrices"), "matrices.t");
        sys.a0 = as_matrix(field(m, "a0", "matrices"), "matrices.a0");
        sys.a1 = as_matrix(field(m, "a1", "matrices"), "matrices.a1");
        sys.at = as_matrix(field(m, "at", "matrices"), "matrices.at");
        for (const CMatrix* a : {&sys.a0, &sys.a1, &sys.at})
            if (a->rows() != 2 || a->cols() != 2) bad("residue matrices must be 2x2");
        return sys;
    }
    return build_system(theta_of(job), state_of(job));
}

const json kEmpty = json::object();

const json& options_of(const json& job) {
    if (!job.contains("options")) return kEmpty;
    if (!job["options"].is_object()) bad("\"options\" must be an object");
    return job["options"];
}

// ---------------------------------------------------------------------------
// shared residual helpers

double matching_distance(const std::vector<Complex>& eigs, Complex e1, Complex e2) {
    if (eigs.size() != 2) return std::numeric_limits<double>::infinity();
    const double d1 = std::max(std::abs(eigs[0] - e1), std::abs(eigs[1] - e2));
    const double d2 = std::max(std::abs(eigs[0] - e2), std::abs(eigs[1] - e1));
    return std::min(d1, d2);
}

double system_distance(const FuchsianSystem& a, const FuchsianSystem& b) {
    return std::max({(a.a0 - b.a0).max_abs(), (a.a1 - b.a1).max_abs(), (a.at - b.at).max_abs(),
                     std::abs(a.t - b.t)});
}

// probe points for coefficient comparisons, kept away from the listed poles
std::vector<Complex> probe_points(const std::vector<Complex>& avoid) {
    static const Complex candidates[] = {{0.43, 0.37},  {-0.51, 0.22}, {1.31, -0.45},
                                         {0.17, -0.63}, {-0.29, -0.4}, {0.77, 0.58},
                                         {2.23, 0.31},  {-1.07, 0.83}};
    std::vector<Complex> out;
    for (Complex z : candidates) {
        bool ok = true;
        for (Complex p : avoid) ok = ok && std::abs(z - p) > 0.2;
        if (ok) out.push_back(z);
        if (out.size() == 4) break;
    }
    return out;
}

double coefficient_residual(const ScalarODE2& got, const ScalarODE2& want,
                            const std::vector<Complex>& probes) {
    double worst = 0.0;
    for (Complex z : probes) {
        const Complex w1 = want.p1.eval(z), w2 = want.p2.eval(z);
        worst = std::max(worst, std::abs(got.p1.eval(z) - w1) / (1.0 + std::abs(w1)));
        worst = std::max(worst, std::abs(got.p2.eval(z) - w2) / (1.0 + std::abs(w2)));
    }
    return worst;
}

double max_residual_of(const json& residuals) {
    double worst = 0.0;
    for (const auto& item : residuals.items()) {
        if (item.value().is_number())
            worst = std::max(worst, item.value().get<double>());
        else if (item.value().is_array())
            for (const json& v : item.value())
                if (v.is_number()) worst = std::max(worst, v.get<double>());
    }
    return worst;
}

// ---------------------------------------------------------------------------
// commands

json cmd_params(const json& job) {
    const ThetaParams th = theta_of(job);
    json out{{"command", "params"},
             {"theta", theta_json(th)},
             {"kappa1", cpx(th.kappa1())},
             {"kappa2", cpx(th.kappa2())},
             {"residuals", json::object()}};
    const json& opt = options_of(job);
    if (opt.contains("word")) {
        if (!opt["word"].is_array()) bad("options.word must be an array of generator indices");
        std::vector<int> word;
        for (const json& g : opt["word"]) {
            if (!g.is_number_integer()) bad("options.word entries must be integers 0..4");
            word.push_back(g.get<int>());
        }
        const weyl::ExtParams image = weyl::apply_word(word, {th, state_of(job)});
        out["image"] = {{"theta", theta_json(image.theta)},
                        {"state", state_json(image.state)},
                        {"kappa1", cpx(image.theta.kappa1())},
                        {"kappa2", cpx(image.theta.kappa2())}};
        // generators are involutions: applying the reversed word again must
        // restore the input
        std::vector<int> back(word.rbegin(), word.rend());
        const weyl::ExtParams again = weyl::apply_word(back, image);
        const double r = std::max(
            {std::abs(again.theta.th0 - th.th0), std::abs(again.theta.th1 - th.th1),
             std::abs(again.theta.tht - th.tht), std::abs(again.theta.thinf - th.thinf),
             std::abs(again.state.lambda - state_of(job).lambda),
             std::abs(again.state.mu - state_of(job).mu)});
        out["residuals"]["involution_defect"] = r;
    }
    return out;
}

json cmd_build(const json& job) {
    const ThetaParams th = theta_of(job);
    const SystemState st = state_of(job);
    const FuchsianSystem sys = build_system(th, st);
    const CMatrix ainf = sys.residue_sum_neg();

    double eig_defect = 0.0;
    const Complex zero = 0.0;
    eig_defect = std::max(eig_defect, matching_distance(eigenvalues(sys.a0), zero, th.th0));
    eig_defect = std::max(eig_defect, matching_distance(eigenvalues(sys.a1), zero, th.th1));
    eig_defect = std::max(eig_defect, matching_distance(eigenvalues(sys.at), zero, th.tht));
    CMatrix dk(2, 2);
    dk(0, 0) = th.kappa1();
    dk(1, 1) = th.kappa2();
    const double inf_defect = (ainf - dk).max_abs();

    return json{{"command", "build"},
                {"matrices",
                 {{"t", cpx(sys.t)},
                  {"a0", mat(sys.a0)},
                  {"a1", mat(sys.a1)},
                  {"at", mat(sys.at)}}},
                {"ainf", mat(ainf)},
                {"residuals",
                 {{"residue_eigenvalue_defect", eig_defect}, {"infinity_defect", inf_defect}}}};
}

json cmd_reduce(const json& job) {
    const FuchsianSystem sys = system_of(job);
    const ScalarODE2 ode = reduce_to_scalar(sys);
    json out{{"command", "reduce"},
             {"t", cpx(sys.t)},
             {"p1", rational(ode.p1)},
             {"p2", rational(ode.p2)},
             {"residuals", json::object()}};
    // with parameters at hand, cross-check the reduction against the closed
    // form of the scalar coefficients
    if (job.contains("theta") && job.contains("state")) {
        const SystemState st = state_of(job);
        const ScalarODE2 direct = scalar_ode_of_parameters(theta_of(job), st);
        const auto probes = probe_points({0.0, 1.0, st.t, st.lambda});
        out["residuals"]["coefficient_defect"] = coefficient_residual(ode, direct, probes);
    }
    return out;
}

json cmd_restrict(const json& job) {
    const ThetaParams th = theta_of(job);
    const Complex t = t_of(job);
    const json& opt = options_of(job);
    const std::string name = field(opt, "line", "options").get<std::string>();
    std::optional<sic::Line> line;
    for (sic::Line l : {sic::Line::L0, sic::Line::L1, sic::Line::Lt, sic::Line::LInf,
                        sic::Line::L0star, sic::Line::L1star, sic::Line::Ltstar,
                        sic::Line::LInfstar})
        if (name == sic::line_name(l)) line = l;
    if (!line) bad("options.line must be one of L0, L1, Lt, Linf, L0*, L1*, Lt*, Linf*");
    const Complex coord = as_complex(field(opt, "coordinate", "options"), "options.coordinate");

    const sic::LineFamily fam = sic::heun_on_line(*line, th, t, coord);
    json out{{"command", "restrict"},
             {"line", name},
             {"heun",
              {{"gamma", cpx(fam.params.gamma)},
               {"delta", cpx(fam.params.delta)},
               {"epsilon", cpx(fam.params.epsilon)},
               {"alpha", cpx(fam.params.alpha)},
               {"beta", cpx(fam.params.beta)},
               {"q", cpx(fam.params.q)},
               {"t", cpx(fam.params.t)}}},
             {"display_q", cpx(fam.display_q)},
             {"gauge_exponent", fam.gauge_exponent},
             {"gauge_center", cpx(fam.gauge_center)},
             {"accessory_slope", cpx(fam.accessory_slope)},
             {"degenerate_accessory", fam.degenerate_accessory},
             {"residuals", json::object()}};

    Complex k = 1.0;
    if (job.contains("state") && job["state"].contains("k"))
        k = as_complex(job["state"]["k"], "state.k");
    try {
        const FuchsianSystem sys = sic::realize_system_on_line(*line, th, t, coord, k);
        out["realization"] = {{"t", cpx(sys.t)},
                              {"a0", mat(sys.a0)},
                              {"a1", mat(sys.a1)},
                              {"at", mat(sys.at)}};
    } catch (const Error& e) {
        if (e.code() != Err::NotRealizable) throw;
        out["realization"] = nullptr;
    }

    out["residuals"]["fuchs_defect"] = std::abs(fam.params.fuchs_defect());
    out["residuals"]["restriction_defect"] =
        sic::restriction_consistency(*line, th, t, coord, probe_points({0.0, 1.0, t}));
    return out;
}

json cmd_mcv(const json& job) {
    const ThetaParams th = theta_of(job);
    const SystemState st = state_of(job);
    const json& opt = options_of(job);
    const std::string map = opt.value("map", "kappa2");
    if (map != "kappa1" && map != "kappa2") bad("options.map must be \"kappa1\" or \"kappa2\"");

    const weyl::ExtParams image = map == "kappa2" ? weyl::mc_kappa2_map({th, st})
                                                  : weyl::mc_kappa1_map({th, st});
    json out{{"command", "mcv"},
             {"map", map},
             {"order", cpx(map == "kappa2" ? th.kappa2() : th.kappa1())},
             {"image",
              {{"theta", theta_json(image.theta)},
               {"state", state_json(image.state)},
               {"kappa1", cpx(image.theta.kappa1())},
               {"kappa2", cpx(image.theta.kappa2())}}},
             {"lambda_tilde", cpx(image.state.lambda)},
             {"mu_tilde", cpx(image.state.mu)},
             {"residuals", json::object()}};

    // the size-6 construction reproduces the same image system after the
    // gauge splitting; compare it entry-wise against the parameter build
    if (opt.value("verify_blocks", false)) {
        if (map != "kappa2") bad("options.verify_blocks applies to the kappa2 map only");
        const auto [pimg, conj] = mcv::middle_convolution_kappa2(th, st);
        const double pd = std::max(
            {std::abs(pimg.theta.th0 - image.theta.th0), std::abs(pimg.theta.th1 - image.theta.th1),
             std::abs(pimg.theta.tht - image.theta.tht),
             std::abs(pimg.theta.thinf - image.theta.thinf),
             std::abs(pimg.state.lambda - image.state.lambda),
             std::abs(pimg.state.mu - image.state.mu)});
        out["residuals"]["parameter_map_defect"] = pd;
        out["residuals"]["block_map_defect"] =
            system_distance(build_system(pimg.theta, pimg.state), conj);
    }
    return out;
}

json cmd_monodromy(const json& job, double transport_tol) {
    const ThetaParams th = theta_of(job);
    const SystemState st = state_of(job);
    const FuchsianSystem sys = build_system(th, st);
    const analytic::MonodromyData md = analytic::monodromy_data(sys, transport_tol);

    const auto loop_json = [](const CMatrix& m) {
        json eigs = json::array();
        for (Complex e : eigenvalues(m)) eigs.push_back(cpx(e));
        return json{{"matrix", mat(m)}, {"eigenvalues", eigs}};
    };

    const Complex one = 1.0;
    const auto turn = [](Complex theta) { return std::exp(Complex(0.0, kTau) * theta); };
    double eig_defect = 0.0;
    eig_defect = std::max(eig_defect, matching_distance(eigenvalues(md.m0), one, turn(th.th0)));
    eig_defect = std::max(eig_defect, matching_distance(eigenvalues(md.m1), one, turn(th.th1)));
    eig_defect = std::max(eig_defect, matching_distance(eigenvalues(md.mt), one, turn(th.tht)));
    eig_defect = std::max(eig_defect,
                          matching_distance(eigenvalues(md.minf), turn(th.kappa1()), turn(th.kappa2())));
    const double relation =
        (md.minf * md.mt * md.m1 * md.m0 - CMatrix::identity(2)).max_abs();

    return json{{"command", "monodromy"},
                {"base", cpx(md.base)},
                {"loops",
                 {{"0", loop_json(md.m0)},
                  {"1", loop_json(md.m1)},
                  {"t", loop_json(md.mt)},
                  {"inf", loop_json(md.minf)}}},
                {"residuals",
                 {{"exponent_defect", eig_defect}, {"loop_relation_defect", relation}}}};
}

json cmd_verify(const json& job, const std::optional<std::string>& theorem_flag,
                const std::optional<long>& seed_flag, const std::optional<double>& tol_flag,
                int* exit_code) {
    const json& opt = options_of(job);
    std::string name;
    if (theorem_flag)
        name = *theorem_flag;
    else if (opt.contains("theorem"))
        name = opt["theorem"].get<std::string>();
    else
        bad("verify-integral needs a theorem id (--theorem or options.theorem)");

    const auto th = verify::theorem_from_name(name);
    if (!th) {
        std::string known;
        for (verify::IntegralTheorem t : verify::kAllTheorems)
            known += std::string(known.empty() ? "" : ", ") + verify::theorem_name(t);
        bad("unknown theorem \"" + name + "\" (known: " + known + ")");
    }

    verify::VerifyOptions vo;
    if (seed_flag)
        vo.seed = uint32_t(*seed_flag);
    else if (opt.contains("seed"))
        vo.seed = opt["seed"].get<uint32_t>();
    else
        bad("verification jobs must carry a seed (--seed or options.seed)");
    vo.draws = opt.value("draws", vo.draws);
    vo.z_samples = opt.value("z_samples", vo.z_samples);
    if (tol_flag)
        vo.tol = *tol_flag;
    else
        vo.tol = opt.value("tol", vo.tol);
    vo.quad_tol = opt.value("quad_tol", vo.quad_tol);
    if (opt.contains("poles")) {
        vo.poles.clear();
        for (const json& p : opt["poles"]) {
            const auto pp = verify::pole_from_name(p.get<std::string>());
            if (!pp) bad("options.poles entries must be one of 0, 1, t, inf");
            vo.poles.push_back(*pp);
        }
        if (vo.poles.empty()) bad("options.poles must not be empty");
    }
    if (vo.draws < 1 || vo.z_samples < 1) bad("draws and z_samples must be positive");

    const verify::VerifyReport report = verify::verify_integral_theorem(*th, vo);
    json poles = json::array();
    for (verify::PolePoint p : vo.poles) poles.push_back(verify::pole_name(p));
    json out{{"command", "verify-integral"},
             {"theorem", verify::theorem_name(*th)},
             {"parameters",
              {{"seed", vo.seed},
               {"draws", vo.draws},
               {"z_samples", vo.z_samples},
               {"poles", poles},
               {"tol", vo.tol},
               {"quad_tol", vo.quad_tol}}},
             {"samples", report.samples},
             {"max_residual", report.max_residual},
             {"elapsed_seconds", report.elapsed_seconds},
             {"pass", report.pass},
             {"residuals", {{"per_sample", report.residuals}, {"max", report.max_residual}}}};
    if (!report.pass) *exit_code = 2;
    return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fuchsian systems, middle convolution and Heun restrictions"};
    app.name("heunmcv");
    app.require_subcommand(1);

    std::string in_path, out_path;
    std::optional<double> tol_flag;
    std::optional<long> seed_flag;
    std::optional<std::string> theorem_flag;

    const char* names[] = {"params",        "build", "reduce",   "restrict",
                           "mcv",           "verify-integral",   "monodromy"};
    const char* descs[] = {"kappa values and Weyl word application",
                           "residue matrices from (theta; t, lambda, mu, k)",
                           "second order scalar reduction",
                           "Heun family and realization on an exceptional line",
                           "middle convolution parameter map",
                           "numerical check of one integral transformation theorem",
                           "monodromy matrices around 0, 1, t, infinity"};
    for (size_t i = 0; i < 7; ++i) {
        CLI::App* sub = app.add_subcommand(names[i], descs[i]);
        sub->add_option("--in", in_path, "job JSON file");
        sub->add_option("--out", out_path, "report file (default: stdout)");
        sub->add_option("--tol", tol_flag, "override the job tolerance");
        sub->add_option("--seed", seed_flag, "override the job seed");
        if (std::string(names[i]) == "verify-integral")
            sub->add_option("--theorem", theorem_flag, "theorem id to check");
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "heunmcv: " << e.what() << "\n";
        return 1;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    int exit_code = 0;
    try {
        json job = json::object();
        if (!in_path.empty()) {
            std::ifstream f(in_path);
            if (!f) bad("cannot open job file " + in_path);
            try {
                f >> job;
            } catch (const json::exception& e) {
                bad("job file is not valid JSON: " + std::string(e.what()));
            }
            if (!job.is_object()) bad("job must be a JSON object");
        } else if (command != "verify-integral") {
            bad(command + " requires --in with a job file");
        }
        if (job.contains("command") && job["command"].get<std::string>() != command)
            bad("job file says command \"" + job["command"].get<std::string>() +
                "\" but the command line asked for \"" + command + "\"");

        json report;
        if (command == "params")
            report = cmd_params(job);
        else if (command == "build")
            report = cmd_build(job);
        else if (command == "reduce")
            report = cmd_reduce(job);
        else if (command == "restrict")
            report = cmd_restrict(job);
        else if (command == "mcv")
            report = cmd_mcv(job);
        else if (command == "monodromy")
            report = cmd_monodromy(job, tol_flag.value_or(1e-12));
        else
            report = cmd_verify(job, theorem_flag, seed_flag, tol_flag, &exit_code);

        // a tolerance on a non-verify command turns its residuals block into
        // a gate
        if (command != "verify-integral") {
            double tol = -1.0;
            if (tol_flag)
                tol = *tol_flag;
            else if (options_of(job).contains("tol"))
                tol = options_of(job)["tol"].get<double>();
            if (tol >= 0.0 && max_residual_of(report["residuals"]) > tol) exit_code = 2;
        }

        const std::string text = report.dump(2);
        if (!out_path.empty()) {
            std::ofstream f(out_path);
            if (!f) bad("cannot open output file " + out_path);
            f << text << "\n";
        } else {
            out << text << "\n";
        }
    } catch (const Error& e) {
        err << "heunmcv: " << e.what() << "\n";
        return e.code() == Err::VerificationFailure ? 2 : 1;
    } catch (const json::exception& e) {
        err << "heunmcv: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "heunmcv: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}

}  // namespace heunmcv::cli
