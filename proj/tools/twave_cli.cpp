// twave: command-line front end for the traveling-wave solver.
#include <CLI11.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "twave/twave.hpp"

namespace fs = std::filesystem;
using namespace twave;

namespace {

constexpr const char* kOutputEnv = "TWAVE_OUTPUT_DIR";

struct Overrides {
    std::string config;
    std::optional<std::string> model;
    std::optional<double> c;
    std::optional<double> T;
    std::optional<double> h;
    std::optional<std::string> family;
    std::optional<double> tol;
    std::optional<int> max_iter;
    std::optional<std::string> out;
    std::optional<std::string> derivatives;
};

// Rejects keys the schema does not know, so typos fail loudly.
void check_keys(const Json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw Error(ErrorKind::config, where + " must be a JSON object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!ok.count(it.key())) throw Error(ErrorKind::config, "unknown key '" + it.key() + "' in " + where);
}

template <class T>
T get_or(const Json& obj, const char* key, T fallback) {
    if (!obj.contains(key) || obj[key].is_null()) return fallback;
    try {
        return obj[key].get<T>();
    } catch (const std::exception&) {
        throw Error(ErrorKind::config, std::string("field '") + key + "' has the wrong type");
    }
}

Json section(const Json& cfg, const char* key) {
    if (!cfg.contains(key) || cfg[key].is_null()) return Json::object();
    return cfg[key];
}

struct RunConfig {
    Json raw;
    std::string model = "bz-transformed";
    double c = 3.0;
    BuildOptions build;
    bool family_given = false;
    BZParams bz;
    LVParams lv;
    Json custom;
    Json candidates;
    Json verify;
    Json solve;
    Json simulate;
    Json scan;
    std::uint64_t seed = 20240611;
    fs::path out_dir = "twave-out";
};

RunConfig load_config(const Overrides& ov) {
    RunConfig rc;
    Json cfg = Json::object();
    if (!ov.config.empty()) {
        std::ifstream f(ov.config);
        if (!f) throw Error(ErrorKind::config, "config file not found: " + ov.config);
        try {
            cfg = Json::parse(f);
        } catch (const std::exception& e) {
            throw Error(ErrorKind::config, std::string("config is not valid JSON: ") + e.what());
        }
    }
    check_keys(cfg, "config", {"model", "params", "custom", "c", "grid", "candidates", "verify", "solve", "simulate",
                               "speed_scan", "output_dir", "seed"});
    rc.raw = cfg;
    rc.model = get_or<std::string>(cfg, "model", rc.model);
    rc.c = get_or<double>(cfg, "c", rc.c);
    rc.seed = get_or<std::uint64_t>(cfg, "seed", rc.seed);
    rc.out_dir = get_or<std::string>(cfg, "output_dir", rc.out_dir.string());

    const Json grid = section(cfg, "grid");
    check_keys(grid, "grid", {"T", "h"});
    rc.build.T = get_or<double>(grid, "T", rc.build.T);
    rc.build.h = get_or<double>(grid, "h", rc.build.h);

    rc.candidates = section(cfg, "candidates");
    check_keys(rc.candidates, "candidates",
               {"family", "delta", "k", "eps1", "eps2", "envelope_scale", "upper_csv", "lower_csv"});
    if (rc.candidates.contains("family")) {
        rc.family_given = true;
        const auto fam = get_or<std::string>(rc.candidates, "family", "envelope");
        if (fam != "paper" && fam != "envelope")
            throw Error(ErrorKind::config, "candidates.family must be 'paper' or 'envelope'");
        rc.build.family = fam == "paper" ? CandidateFamily::paper : CandidateFamily::envelope;
    }
    rc.build.delta = get_or<double>(rc.candidates, "delta", rc.build.delta);
    rc.build.k = get_or<double>(rc.candidates, "k", rc.build.k);
    rc.build.eps1 = get_or<double>(rc.candidates, "eps1", rc.build.eps1);
    rc.build.eps2 = get_or<double>(rc.candidates, "eps2", rc.build.eps2);
    rc.build.envelope_scale = get_or<double>(rc.candidates, "envelope_scale", rc.build.envelope_scale);

    const Json params = section(cfg, "params");
    rc.custom = section(cfg, "custom");
    rc.verify = section(cfg, "verify");
    check_keys(rc.verify, "verify", {"derivatives", "tol_margin", "tol_box", "tol_lim", "tol_kink", "boundary",
                                     "margins_csv", "samples", "lattice"});
    rc.solve = section(cfg, "solve");
    check_keys(rc.solve, "solve", {"tol", "max_iter", "omega", "stagnation_rel", "stagnation_window",
                                   "require_verified", "trace_csv"});
    rc.simulate = section(cfg, "simulate");
    check_keys(rc.simulate, "simulate", {"x_min", "x_max", "nx", "dt", "t_end", "record_stride", "seed", "x_seed",
                                         "record_csv", "record_every_node", "speed_tol", "drift_tol"});
    rc.scan = section(cfg, "speed_scan");
    check_keys(rc.scan, "speed_scan", {"c_min", "c_max", "count", "solve"});

    // Flags beat the file.
    if (ov.model) rc.model = *ov.model;
    if (ov.c) rc.c = *ov.c;
    if (ov.T) rc.build.T = *ov.T;
    if (ov.h) rc.build.h = *ov.h;
    if (ov.family) {
        if (*ov.family != "paper" && *ov.family != "envelope")
            throw Error(ErrorKind::config, "--family must be 'paper' or 'envelope'");
        rc.family_given = true;
        rc.build.family = *ov.family == "paper" ? CandidateFamily::paper : CandidateFamily::envelope;
    }
    if (ov.tol) rc.solve["tol"] = *ov.tol;
    if (ov.max_iter) rc.solve["max_iter"] = *ov.max_iter;
    if (ov.derivatives) rc.verify["derivatives"] = *ov.derivatives;
    if (const char* env = std::getenv(kOutputEnv); env && *env) rc.out_dir = env;
    if (ov.out) rc.out_dir = *ov.out;

    if (rc.model == "bz-transformed" || rc.model == "bz-literal") {
        check_keys(params, "params", {"r", "b", "tau1", "tau2"});
        rc.bz.r = get_or<double>(params, "r", rc.bz.r);
        rc.bz.b = get_or<double>(params, "b", rc.bz.b);
        rc.bz.tau1 = get_or<double>(params, "tau1", rc.bz.tau1);
        rc.bz.tau2 = get_or<double>(params, "tau2", rc.bz.tau2);
        rc.bz.variant = rc.model == "bz-literal" ? BZVariant::literal : BZVariant::transformed;
        // The literal system has no envelope pair; its own candidates are the printed ones.
        if (rc.model == "bz-literal" && !rc.family_given) rc.build.family = CandidateFamily::paper;
    } else if (rc.model == "lv-mutualistic") {
        check_keys(params, "params", {"r", "a1", "a2", "b1", "b2", "d1", "d2", "tau"});
        rc.lv.r = get_or<double>(params, "r", rc.lv.r);
        rc.lv.a1 = get_or<double>(params, "a1", rc.lv.a1);
        rc.lv.a2 = get_or<double>(params, "a2", rc.lv.a2);
        rc.lv.b1 = get_or<double>(params, "b1", rc.lv.b1);
        rc.lv.b2 = get_or<double>(params, "b2", rc.lv.b2);
        rc.lv.d1 = get_or<double>(params, "d1", rc.lv.d1);
        rc.lv.d2 = get_or<double>(params, "d2", rc.lv.d2);
        rc.lv.tau = get_or<double>(params, "tau", rc.lv.tau);
    } else if (rc.model == "custom") {
        if (rc.custom.empty()) throw Error(ErrorKind::config, "model 'custom' needs a 'custom' block");
    } else {
        throw Error(ErrorKind::config, "unknown model '" + rc.model +
                                           "' (expected bz-transformed, bz-literal, lv-mutualistic or custom)");
    }
    return rc;
}

std::vector<int> one_based_list(const Json& v, int n, const std::string& where) {
    std::vector<int> out;
    for (const auto& e : v) {
        if (!e.is_number_integer()) throw Error(ErrorKind::config, where + " must hold integers");
        const int k = e.get<int>();
        if (k < 1 || k > n) throw Error(ErrorKind::index, where + ": index " + std::to_string(k) + " out of range");
        out.push_back(k - 1);
    }
    return out;
}

std::vector<double> number_list(const Json& obj, const char* key, int n) {
    if (!obj.contains(key) || !obj[key].is_array())
        throw Error(ErrorKind::config, std::string("custom.") + key + " must be an array");
    std::vector<double> out;
    for (const auto& e : obj[key]) {
        if (!e.is_number()) throw Error(ErrorKind::config, std::string("custom.") + key + " must hold numbers");
        out.push_back(e.get<double>());
    }
    if (static_cast<int>(out.size()) != n)
        throw Error(ErrorKind::structural, std::string("custom.") + key + " needs " + std::to_string(n) + " entries");
    return out;
}

SystemSpec custom_system(const Json& cj) {
    check_keys(cj, "custom", {"name", "n", "diffusion", "delays", "k_state", "lipschitz", "split", "terms"});
    SystemSpec s;
    s.name = get_or<std::string>(cj, "name", "custom");
    s.n = get_or<int>(cj, "n", 0);
    if (s.n < 1) throw Error(ErrorKind::structural, "custom.n must be >= 1");
    s.diffusion = number_list(cj, "diffusion", s.n);
    s.delays = number_list(cj, "delays", s.n);
    s.k_state = number_list(cj, "k_state", s.n);
    s.lipschitz = number_list(cj, "lipschitz", s.n);
    s.zero_state.assign(static_cast<std::size_t>(s.n), 0.0);
    std::vector<PolynomialTerm> terms;
    if (!cj.contains("terms") || !cj["terms"].is_array()) throw Error(ErrorKind::config, "custom.terms must be an array");
    for (const auto& t : cj["terms"]) {
        check_keys(t, "custom.terms[]", {"component", "coef", "now", "delayed"});
        PolynomialTerm p;
        p.component = get_or<int>(t, "component", 0) - 1;
        p.coef = get_or<double>(t, "coef", 0.0);
        p.now_powers = get_or<std::vector<int>>(t, "now", std::vector<int>(static_cast<std::size_t>(s.n), 0));
        p.delayed_powers = get_or<std::vector<int>>(t, "delayed", std::vector<int>(static_cast<std::size_t>(s.n), 0));
        terms.push_back(p);
    }
    s.reaction = polynomial_reaction(s.n, terms);
    s.split = QuasimonotoneSplit::all_increasing(s.n);
    if (cj.contains("split")) {
        const Json& sp = cj["split"];
        check_keys(sp, "custom.split", {"inc_now", "dec_now", "inc_delayed", "dec_delayed"});
        auto rows = [&](const char* key) {
            std::vector<IndexSet> out(static_cast<std::size_t>(s.n));
            if (!sp.contains(key)) return out;
            if (!sp[key].is_array() || static_cast<int>(sp[key].size()) != s.n)
                throw Error(ErrorKind::structural, std::string("custom.split.") + key + " needs one list per component");
            for (int i = 0; i < s.n; ++i)
                out[static_cast<std::size_t>(i)] =
                    one_based_list(sp[key][static_cast<std::size_t>(i)], s.n, std::string("custom.split.") + key);
            return out;
        };
        s.split.inc_now = rows("inc_now");
        s.split.dec_now = rows("dec_now");
        s.split.inc_delayed = rows("inc_delayed");
        s.split.dec_delayed = rows("dec_delayed");
    }
    check_structure(s);
    return s;
}

BuiltModel build_model(const RunConfig& rc, double c) {
    if (rc.model == "bz-transformed" || rc.model == "bz-literal") return bz_build(rc.bz, c, rc.build);
    if (rc.model == "lv-mutualistic") return lv_build(rc.lv, c, rc.build);

    BuiltModel m;
    m.spec = custom_system(rc.custom);
    m.model_id = m.spec.name;
    m.c = c;
    m.critical_speed = NAN;
    if (!(c > 0)) throw Error(ErrorKind::parameter, "wave speed c must be > 0");
    m.kernel = make_kernel(m.spec, c);
    m.mode = m.spec.split.ordered() ? PairKind::ordered : PairKind::coupled;
    const auto upper_csv = get_or<std::string>(rc.candidates, "upper_csv", "");
    const auto lower_csv = get_or<std::string>(rc.candidates, "lower_csv", "");
    if (upper_csv.empty() != lower_csv.empty())
        throw Error(ErrorKind::config, "candidates.upper_csv and lower_csv go together");
    if (upper_csv.empty()) {
        m.pair = constant_pair(rc.build.T, rc.build.h, m.spec.zero_state, m.spec.k_state, m.mode);
        m.boundary = BoundaryMode::none;
        m.warnings.push_back("no candidate profiles given; using the constant pair (0, K)");
    } else {
        m.pair.upper = read_profile_csv(upper_csv, m.spec.zero_state, m.spec.k_state);
        m.pair.lower = read_profile_csv(lower_csv, m.spec.zero_state, m.spec.zero_state);
        m.pair.kind = m.mode;
        m.pair.smoothness = Smoothness::classical;
        m.pair.family = "csv";
        m.boundary = BoundaryMode::bracket_nontrivial;
    }
    return m;
}

VerifyOptions verify_options(const RunConfig& rc, const BuiltModel& m) {
    VerifyOptions vo;
    vo.tol_margin = get_or<double>(rc.verify, "tol_margin", vo.tol_margin);
    vo.tol_box = get_or<double>(rc.verify, "tol_box", vo.tol_box);
    vo.tol_lim = get_or<double>(rc.verify, "tol_lim", vo.tol_lim);
    vo.tol_kink = get_or<double>(rc.verify, "tol_kink", vo.tol_kink);
    vo.boundary = m.boundary;
    if (rc.verify.contains("boundary")) {
        const auto b = get_or<std::string>(rc.verify, "boundary", "");
        if (b == "strict-limits") vo.boundary = BoundaryMode::strict_limits;
        else if (b == "bracket-nontrivial") vo.boundary = BoundaryMode::bracket_nontrivial;
        else if (b == "none") vo.boundary = BoundaryMode::none;
        else throw Error(ErrorKind::config, "verify.boundary must be strict-limits, bracket-nontrivial or none");
    }
    vo.keep_nodes = get_or<bool>(rc.verify, "margins_csv", false);
    return vo;
}

DerivMode deriv_mode(const RunConfig& rc, const BuiltModel& m) {
    const auto d = get_or<std::string>(rc.verify, "derivatives", m.pair.has_analytic() ? "analytic" : "finite-difference");
    if (d == "analytic") return DerivMode::analytic;
    if (d == "finite-difference") return DerivMode::finite_difference;
    throw Error(ErrorKind::config, "verify.derivatives must be 'analytic' or 'finite-difference'");
}

SolveOptions solve_options(const RunConfig& rc) {
    SolveOptions so;
    so.tol = get_or<double>(rc.solve, "tol", so.tol);
    so.max_iter = get_or<int>(rc.solve, "max_iter", so.max_iter);
    so.omega = get_or<double>(rc.solve, "omega", so.omega);
    so.stagnation_rel = get_or<double>(rc.solve, "stagnation_rel", so.stagnation_rel);
    so.stagnation_window = get_or<int>(rc.solve, "stagnation_window", so.stagnation_window);
    if (so.stagnation_window < 1) throw Error(ErrorKind::config, "solve.stagnation_window must be >= 1");
    return so;
}

std::string g9(double v) { return format_g(v + 0.0, 9); }

void print_row(const std::vector<std::string>& cells, const std::vector<int>& widths) {
    std::string line;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        std::string c = cells[k];
        const int w = k < widths.size() ? widths[k] : 16;
        if (static_cast<int>(c.size()) < w) c = std::string(static_cast<std::size_t>(w) - c.size(), ' ') + c;
        line += (k ? "  " : "") + c;
    }
    std::cout << line << "\n";
}

struct Checks {
    ValidationReport validation;
    MonotonicityReport monotonicity;
    HStarReport hstar;
    VerificationReport verification;
    bool pass = false;
};

Checks run_checks(const RunConfig& rc, const BuiltModel& m) {
    Checks ck;
    ck.validation = validate_system(m.spec);
    ck.monotonicity = check_quasimonotone(m.spec, get_or<int>(rc.verify, "samples", 2000), rc.seed);
    ck.hstar = check_hstar(m.spec, get_or<int>(rc.verify, "lattice", 40));
    ck.verification = verify_pair(m.spec, m.kernel, m.pair, m.mode, deriv_mode(rc, m), verify_options(rc, m));
    ck.pass = ck.validation.pass && ck.monotonicity.pass() && ck.verification.verdict;
    return ck;
}

Json checks_json(const Checks& ck) {
    Json j;
    j["pass"] = ck.pass;
    j["validation"] = to_json(ck.validation);
    j["monotonicity"] = to_json(ck.monotonicity);
    Json hs;
    hs["pass"] = ck.hstar.pass;
    hs["lattice_resolution"] = ck.hstar.lattice_resolution;
    hs["points_checked"] = ck.hstar.points_checked;
    hs["interior_equilibria"] = ck.hstar.interior_equilibria;
    j["interior_equilibria_check"] = hs;
    j["verification"] = to_json(ck.verification);
    return j;
}

void print_checks(const BuiltModel& m, const Checks& ck) {
    std::cout << "model " << m.model_id << "  c = " << g9(m.c) << "  family " << m.pair.family << "  mode "
              << to_string(m.mode) << "\n";
    for (const auto& w : m.warnings) std::cout << "warning: " << w << "\n";
    if (!ck.validation.pass) {
        std::cout << "equilibrium residuals (|f(0,0)|, |f(K,K)|):\n";
        print_row({"component", "at 0", "at K"}, {9, 16, 16});
        for (std::size_t i = 0; i < ck.validation.residual_k.size(); ++i)
            print_row({std::to_string(i + 1), g9(ck.validation.residual_zero[i]), g9(ck.validation.residual_k[i])},
                      {9, 16, 16});
        for (const auto& s : ck.validation.split_messages) std::cout << "  " << s << "\n";
    }
    if (!ck.monotonicity.pass())
        std::cout << "quasimonotone split contradicted at " << ck.monotonicity.flags.size() << " samples\n";
    if (!ck.hstar.pass)
        std::cout << "interior constant equilibria found: " << ck.hstar.interior_equilibria.size() << "\n";
    const auto& v = ck.verification;
    print_row({"inequality", "min margin", "at t"}, {12, 16, 16});
    for (const auto& mr : v.margins) print_row({mr.name, g9(mr.min_margin), g9(mr.t_at_min)}, {12, 16, 16});
    for (const auto& k : v.kinks)
        if (!k.ok)
            std::cout << "kink " << k.name << " at t = " << g9(k.t) << ": value jump " << g9(k.value_jump)
                      << ", slope jump " << g9(k.slope_jump) << "\n";
    for (const auto& f : v.failures) std::cout << "failure: " << f << "\n";
    std::cout << "verdict: " << (ck.pass ? "PASS" : "FAIL") << "\n";
}

int cmd_roots(const Overrides& ov, std::optional<double> d, std::optional<double> beta) {
    std::vector<std::array<double, 3>> rows;  // d, beta, c
    if (d || beta) {
        if (!d || !beta || !ov.c) throw Error(ErrorKind::config, "roots needs --d, --beta and --c together");
        rows.push_back({*d, *beta, *ov.c});
    } else {
        const auto rc = load_config(ov);
        const double c = rc.c;
        SystemSpec spec = rc.model == "custom" ? custom_system(rc.custom)
                          : rc.model == "lv-mutualistic" ? lv_system(rc.lv)
                                                         : bz_system(rc.bz);
        for (int i = 0; i < spec.n; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            rows.push_back({spec.diffusion[ii], spec.lipschitz[ii], c});
        }
    }
    print_row({"comp", "d", "beta", "lambda1", "lambda2", "scale", "resid1", "resid2"}, {4, 16, 16, 16, 16, 16, 16, 16});
    int idx = 0;
    for (const auto& r : rows) {
        const auto k = make_component_kernel(r[0], r[2], r[1]);
        auto resid = [&](double l) {
            const double v = r[0] * l * l / (r[2] * r[2]) - l - r[1];
            return std::fabs(v) / std::max({r[0] * l * l / (r[2] * r[2]), std::fabs(l), r[1]});
        };
        print_row({std::to_string(++idx), g9(r[0]), g9(r[1]), g9(k.lambda1), g9(k.lambda2), g9(k.scale),
                   g9(resid(k.lambda1)), g9(resid(k.lambda2))},
                  {4, 16, 16, 16, 16, 16, 16, 16});
    }
    return 0;
}

int cmd_verify(const Overrides& ov) {
    const auto rc = load_config(ov);
    const auto m = build_model(rc, rc.c);
    const auto ck = run_checks(rc, m);
    print_checks(m, ck);
    Json rep;
    rep["command"] = "verify";
    rep["model"] = model_json(m);
    rep["checks"] = checks_json(ck);
    write_text(rc.out_dir / "verify.json", to_text(rep));
    if (ck.verification.nodes.t.size()) write_margins_csv(ck.verification, rc.out_dir / "margins.csv");
    return ck.pass ? 0 : 1;
}

// Profile boundary values against 0 at -T and K at +T.
Json limits_json(const ProfileGrid& p, const SystemSpec& spec, double tol, bool& ok) {
    Json j;
    std::vector<double> left, right;
    ok = true;
    for (int i = 0; i < p.n; ++i) {
        left.push_back(p.at(0, i));
        right.push_back(p.at(p.N, i));
        ok = ok && std::fabs(left.back()) <= tol &&
             std::fabs(right.back() - spec.k_state[static_cast<std::size_t>(i)]) <= tol;
    }
    j["at_minus_T"] = left;
    j["at_plus_T"] = right;
    j["tolerance"] = tol;
    j["connects_0_to_K"] = ok;
    return j;
}

struct SolveRun {
    BuiltModel model;
    Checks checks;
    std::optional<SolveResult> result;
    bool limits_ok = false;
    Json report;
};

SolveRun run_solve(const RunConfig& rc) {
    SolveRun run{build_model(rc, rc.c), {}, std::nullopt, false, Json::object()};
    run.checks = run_checks(rc, run.model);
    Json& rep = run.report;
    rep["model"] = model_json(run.model);
    rep["checks"] = checks_json(run.checks);
    const bool need = get_or<bool>(rc.solve, "require_verified", true);
    if (need && !run.checks.pass) {
        rep["solve"] = Json{{"skipped", "candidate pair failed verification; set solve.require_verified = false "
                                        "to iterate anyway"}};
        return run;
    }
    run.result = solve_wave(run.model.spec, run.model.kernel, run.model.pair, solve_options(rc));
    const auto& r = *run.result;
    Json s = to_json(r.report);
    s["monotonicity_defect"] = monotonicity_defect(r.profile);
    const auto res = ode_residual(run.model.spec, run.model.kernel, r.profile);
    double worst = 0;
    for (double v : res.values) worst = std::max(worst, std::fabs(v));
    s["ode_residual_sup"] = worst;
    s["limits"] = limits_json(r.profile, run.model.spec, 1e-3, run.limits_ok);
    rep["solve"] = s;
    return run;
}

void print_solve(const SolveRun& run) {
    print_checks(run.model, run.checks);
    if (!run.result) {
        std::cout << "solve skipped: the candidate pair did not verify\n";
        return;
    }
    const auto& r = run.result->report;
    std::cout << "solve: " << (r.converged ? "converged" : "not converged") << " in phase " << r.phase << " after "
              << r.sweeps << " sweeps and " << r.picard_steps << " Picard steps; residual "
              << g9(r.fixed_point_residual) << "\n";
    std::cout << "profile " << (run.limits_ok ? "connects" : "does not connect") << " 0 and K within 1e-3\n";
}

int cmd_solve(const Overrides& ov) {
    const auto rc = load_config(ov);
    auto run = run_solve(rc);
    print_solve(run);
    run.report["command"] = "solve";
    write_text(rc.out_dir / "solve.json", to_text(run.report));
    if (!run.result) return 1;
    write_profile_csv(run.result->profile, (rc.out_dir / "profile.csv").string());
    if (get_or<bool>(rc.solve, "trace_csv", true)) write_trace_csv(run.result->report, rc.out_dir / "trace.csv");
    return run.result->report.converged && run.limits_ok ? 0 : 1;
}

int cmd_simulate(const Overrides& ov) {
    const auto rc = load_config(ov);
    auto run = run_solve(rc);
    print_solve(run);
    Json& rep = run.report;
    rep["command"] = "simulate";
    if (!run.result || !run.result->report.converged) {
        rep["simulate"] = Json{{"skipped", "no converged profile to seed the simulation"}};
        write_text(rc.out_dir / "simulate.json", to_text(rep));
        return 1;
    }
    SimConfig cfg;
    const Json& sj = rc.simulate;
    cfg.x_min = get_or<double>(sj, "x_min", cfg.x_min);
    cfg.x_max = get_or<double>(sj, "x_max", cfg.x_max);
    cfg.nx = get_or<int>(sj, "nx", cfg.nx);
    cfg.dt = get_or<double>(sj, "dt", cfg.dt);
    cfg.t_end = get_or<double>(sj, "t_end", cfg.t_end);
    cfg.record_stride = get_or<int>(sj, "record_stride", cfg.record_stride);
    cfg.x_seed = get_or<double>(sj, "x_seed", cfg.x_min + 0.75 * (cfg.x_max - cfg.x_min));
    const auto seed = get_or<std::string>(sj, "seed", "wave");
    if (seed == "wave") cfg.seed = SeedKind::wave_profile;
    else if (seed == "step") cfg.seed = SeedKind::step;
    else throw Error(ErrorKind::config, "simulate.seed must be 'wave' or 'step'");
    const double speed_tol = get_or<double>(sj, "speed_tol", 0.05);
    const double drift_tol = get_or<double>(sj, "drift_tol", 1e-2);

    SpaceTimeRecord rec;
    const auto cv = crossvalidate(run.model.spec, run.result->profile, rc.c, cfg, &rec);
    const bool pass = cv.front_found && cv.speed_deviation <= speed_tol && cv.box_ok &&
                      (cfg.seed == SeedKind::step || cv.shape_drift <= drift_tol);
    Json s = to_json(cv);
    s["speed_tol"] = speed_tol;
    s["drift_tol"] = drift_tol;
    s["pass"] = pass;
    rep["simulate"] = s;
    write_text(rc.out_dir / "simulate.json", to_text(rep));
    write_profile_csv(run.result->profile, (rc.out_dir / "profile.csv").string());
    if (get_or<bool>(sj, "record_csv", false))
        write_record_csv(rec, rc.out_dir / "record.csv", get_or<int>(sj, "record_every_node", 10));

    std::cout << "simulate: speed " << g9(cv.measured_speed) << " (deviation " << g9(cv.speed_deviation)
              << "), shape drift " << g9(cv.shape_drift) << ", box " << (cv.box_ok ? "kept" : "left") << "\n";
    std::cout << "verdict: " << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? 0 : 1;
}

int cmd_speed_scan(const Overrides& ov) {
    const auto rc = load_config(ov);
    const double c_min = get_or<double>(rc.scan, "c_min", 2.1);
    const double c_max = get_or<double>(rc.scan, "c_max", 4.0);
    const int count = get_or<int>(rc.scan, "count", 5);
    const bool do_solve = get_or<bool>(rc.scan, "solve", true);
    if (count < 1 || !(c_max >= c_min) || !(c_min > 0))
        throw Error(ErrorKind::config, "speed_scan needs 0 < c_min <= c_max and count >= 1");
    Json rows = Json::array();
    print_row({"c", "status", "verify", "converged", "residual"}, {16, 12, 8, 10, 16});
    for (int k = 0; k < count; ++k) {
        const double c = count == 1 ? c_min : c_min + (c_max - c_min) * k / (count - 1);
        Json row;
        row["c"] = c;
        try {
            const auto m = build_model(rc, c);
            const auto ck = run_checks(rc, m);
            row["status"] = "built";
            row["verify_pass"] = ck.pass;
            Json fails = ck.verification.failures;
            row["failures"] = fails;
            std::string conv = "-", resid = "-";
            if (do_solve && ck.pass) {
                const auto r = solve_wave(m.spec, m.kernel, m.pair, solve_options(rc));
                row["converged"] = r.report.converged;
                row["fixed_point_residual"] = r.report.fixed_point_residual;
                row["iterations"] = r.report.iterations;
                conv = r.report.converged ? "yes" : "no";
                resid = g9(r.report.fixed_point_residual);
            }
            print_row({g9(c), "built", ck.pass ? "pass" : "fail", conv, resid}, {16, 12, 8, 10, 16});
        } catch (const Error& e) {
            if (!e.is_config_error() || e.kind() == ErrorKind::config) throw;
            row["status"] = to_string(e.kind());
            row["message"] = e.what();
            print_row({g9(c), to_string(e.kind()), "-", "-", "-"}, {16, 12, 8, 10, 16});
        }
        rows.push_back(row);
    }
    Json rep;
    rep["command"] = "speed-scan";
    rep["model"] = rc.model;
    rep["rows"] = rows;
    write_text(rc.out_dir / "speed_scan.json", to_text(rep));
    return 0;
}

void add_common(CLI::App* sub, Overrides& ov) {
    sub->add_option("--config", ov.config, "JSON run configuration");
    sub->add_option("--model", ov.model, "bz-transformed, bz-literal, lv-mutualistic or custom");
    sub->add_option("--half-width", ov.T, "profile half-width T");
    sub->add_option("--step", ov.h, "profile grid step h");
    sub->add_option("--family", ov.family, "candidate family: envelope or paper");
    sub->add_option("--tol", ov.tol, "fixed-point tolerance");
    sub->add_option("--max-iter", ov.max_iter, "sweeps plus Picard steps");
    sub->add_option("--derivatives", ov.derivatives, "analytic or finite-difference");
    sub->add_option("--out", ov.out, std::string("output directory (else $") + kOutputEnv + ", else config)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Traveling waves of delayed reaction-diffusion systems"};
    app.require_subcommand(1);
    Overrides ov;
    std::optional<double> d, beta;

    auto* roots = app.add_subcommand("roots", "characteristic roots of the kernel");
    add_common(roots, ov);
    roots->add_option("--c", ov.c, "wave speed");
    roots->add_option("--d", d, "diffusion coefficient (single component)");
    roots->add_option("--beta", beta, "Lipschitz shift (single component)");

    std::vector<CLI::App*> subs;
    for (auto [name, help] : {std::pair{"verify", "check the candidate pair"},
                              std::pair{"solve", "iterate to a wave profile"},
                              std::pair{"simulate", "solve, then cross-check with the delayed PDE"},
                              std::pair{"speed-scan", "verify and solve over a range of speeds"}}) {
        auto* s = app.add_subcommand(name, help);
        add_common(s, ov);
        s->add_option("--c", ov.c, "wave speed");
        subs.push_back(s);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*roots) return cmd_roots(ov, d, beta);
        if (*subs[0]) return cmd_verify(ov);
        if (*subs[1]) return cmd_solve(ov);
        if (*subs[2]) return cmd_simulate(ov);
        if (*subs[3]) return cmd_speed_scan(ov);
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return e.is_config_error() ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
