#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "candidate.hpp"
#include "error.hpp"
#include "kernel.hpp"
#include "system.hpp"
#include "verify.hpp"

namespace twave {

enum class BZVariant { literal, transformed };
enum class CandidateFamily { paper, envelope };

inline const char* to_string(BZVariant v) { return v == BZVariant::literal ? "literal" : "transformed"; }
inline const char* to_string(CandidateFamily f) { return f == CandidateFamily::paper ? "paper" : "envelope"; }

struct BZParams {
    double r = 0.5;
    double b = 1.0;
    double tau1 = 0.5;  // delay of u inside the second equation
    double tau2 = 0.5;  // delay of v (or w) inside the first equation
    BZVariant variant = BZVariant::transformed;
};

struct LVParams {
    double r = 1.0;
    double a1 = 2.0, a2 = 1.0;
    double b1 = 1.0, b2 = 1.0;
    double d1 = 1.0, d2 = 1.0;
    double tau = 0.5;
};

// Constants of the piecewise-exponential candidates.
struct CandidateParams {
    double lambda1 = 0, lambda2 = 0, lambda3 = 0;
    double delta = 1e-2;
    double k = 1e-2;
    double eps1 = 1e-3;
    double eps2 = 1e-3;
};

struct BuildOptions {
    CandidateFamily family = CandidateFamily::envelope;
    double T = 200;
    double h = 0.05;
    double delta = 1e-2;
    double k = 1e-2;
    double eps1 = 1e-3;
    double eps2 = 1e-3;
    // Amplitude of the envelope lower pulse relative to the upper. Kept small: the
    // pulse tail decays at the continuous rate, which the grid operator slowly amplifies.
    double envelope_scale = 0.01;
    // Replaces the computed paper-family rates (used to probe invalid choices).
    std::optional<CandidateParams> override_params;
    // Builds below the critical speed instead of rejecting (requires override_params).
    bool allow_subcritical = false;
};

struct BuiltModel {
    std::string model_id;
    SystemSpec spec;
    CandidatePair pair;
    KernelParams kernel;
    CandidateParams params;
    double c = 0;
    double critical_speed = 0;
    PairKind mode = PairKind::coupled;
    BoundaryMode boundary = BoundaryMode::bracket_nontrivial;
    std::vector<std::string> warnings;
    std::vector<std::pair<std::string, double>> constants;
};

namespace detail {

// a e^{lam t} for t <= 0 and b - e e^{-lam t} for t > 0.
struct TwoSidedExp {
    double a = 0, lam_left = 1, b = 0, e = 0, lam_right = 1;

    double operator()(double t, int order) const {
        if (t <= 0) return a * std::pow(lam_left, order) * std::exp(lam_left * t);
        const double x = e * std::exp(-lam_right * t);
        switch (order) {
        case 0: return b - x;
        case 1: return lam_right * x;
        default: return -lam_right * lam_right * x;
        }
    }
};

// min(cap, coef e^{mu t}).
struct CappedExp {
    double cap = 1, coef = 1, mu = 1;
    double kink() const { return std::log(cap / coef) / mu; }
    double operator()(double t, int order) const {
        if (t > kink()) return order == 0 ? cap : 0.0;
        return coef * std::pow(mu, order) * std::exp(mu * t);
    }
};

// scale * max(0, e^{mu t} - m e^{nu t}) with nu > mu.
struct Pulse {
    double scale = 1, mu = 1, m = 1, nu = 2;
    double zero() const { return -std::log(m) / (nu - mu); }
    double operator()(double t, int order) const {
        if (t >= zero()) return 0.0;
        return scale * (std::pow(mu, order) * std::exp(mu * t) - m * std::pow(nu, order) * std::exp(nu * t));
    }
};

// Roots of (d/c^2) x^2 - x + a = 0 (a > 0), i.e. x - d x^2 / c^2 = a.
inline std::pair<double, double> rate_roots(double d, double c, double a) {
    const double c2 = c * c;
    const double disc = 1.0 - 4.0 * a * d / c2;
    if (disc < 0) return {NAN, NAN};
    const double s = std::sqrt(disc);
    const double big = c2 * (1.0 + s) / (2.0 * d);
    return {a * c2 / (d * big), big};  // Vieta for the small root
}

// Growth factor of the discrete kernel on the grid mode e^{mu t}.
inline double discrete_gain(const ComponentKernel& k, double h, double mu) {
    const auto fw = cell_weights(k.lambda1, h);
    const auto bw = cell_weights(-k.lambda2, h);
    const double E = std::exp(mu * h);
    const double ell = (fw.a1 / h + (fw.a0 - fw.a1 / h) * E) / (E - fw.decay);
    const double rho = ((bw.a0 - bw.a1 / h) + (bw.a1 / h) * E) / (1.0 - bw.decay * E);
    return k.scale * (ell + rho);
}

// Smallest mu >= mu_lo at which the discrete map g -> G[(beta + a) g] does not
// grow e^{mu t}. The continuous answer is mu_lo; piecewise-linear interpolation
// overestimates convex forcings, which pushes the grid rate slightly up.
inline double grid_tail_rate(const ComponentKernel& k, double h, double a, double mu_lo, double mu_hi) {
    auto excess = [&](double mu) { return (k.beta + a) * discrete_gain(k, h, mu) - 1.0; };
    if (excess(mu_lo) <= 0) return mu_lo;
    double lo = mu_lo, hi = 0.5 * (mu_lo + mu_hi);
    if (excess(hi) > 0) throw Error(ErrorKind::parameter, "grid too coarse for the envelope tail rate");
    for (int it = 0; it < 200 && hi - lo > 0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (excess(mid) > 0 ? lo : hi) = mid;
    }
    // A relative nudge keeps the tail strictly non-growing under rounding.
    return hi * (1.0 + 1e-9);
}

// The envelope pulse sits between the two tail rates, so they must differ.
inline void require_gap(double mu0, double mup, const char* what) {
    if (!(mup - mu0 > 1e-6 * mup))
        throw Error(ErrorKind::parameter, std::string(what) +
                                              ": envelope candidates need c strictly above the linear spreading "
                                              "speed (the two tail rates coincide)");
}

// Linear interpolation factor of e^{mu (t - tau)} / e^{mu t} on the grid.
inline double delayed_factor(double mu, double tau, double h) {
    const double s = tau / h;
    const double m = std::floor(s);
    const double th = s - m;
    return (1 - th) * std::exp(-mu * m * h) + th * std::exp(-mu * (m + 1) * h);
}

// Actual node spacing of make_grid(T, h, .).
inline double grid_step(double T, double h) { return 2.0 * T / std::max(2.0, std::round(2.0 * T / h)); }

inline void check_grid_opts(const BuildOptions& o) {
    if (!(o.T > 0) || !(o.h > 0)) throw Error(ErrorKind::parameter, "grid needs T > 0 and h > 0");
    if (!(o.delta > 0 && o.delta < 1)) throw Error(ErrorKind::parameter, "delta must lie in (0, 1)");
    if (!(o.k > 0 && o.k < 1)) throw Error(ErrorKind::parameter, "k must lie in (0, 1)");
    if (!(o.eps1 > 0) || !(o.eps2 > 0)) throw Error(ErrorKind::parameter, "eps1 and eps2 must be > 0");
    if (!(o.envelope_scale > 0 && o.envelope_scale <= 1))
        throw Error(ErrorKind::parameter, "envelope_scale must lie in (0, 1]");
}

} // namespace detail

inline SystemSpec bz_system(const BZParams& p) {
    if (!(p.r > 0)) throw Error(ErrorKind::parameter, "BZ: r must be > 0");
    if (!(p.b > 0)) throw Error(ErrorKind::parameter, "BZ: b must be > 0");
    if (!(p.tau1 >= 0) || !(p.tau2 >= 0)) throw Error(ErrorKind::parameter, "BZ: delays must be >= 0");
    SystemSpec s;
    s.n = 2;
    s.diffusion = {1.0, 1.0};
    s.delays = {p.tau1, p.tau2};
    s.zero_state = {0.0, 0.0};
    s.k_state = {1.0, 1.0};
    s.lipschitz = {1.0 + 2.0 * p.r, 2.0 * p.b};
    const double r = p.r, b = p.b;
    if (p.variant == BZVariant::literal) {
        s.name = "bz-literal";
        s.reaction = [r, b](std::span<const double> u, std::span<const double> ud, std::span<double> out) {
            out[0] = u[0] * (1.0 - u[0] - r * ud[1]);
            out[1] = -b * ud[0] * u[1];
        };
        // f1 falls with delayed v, f2 falls with delayed u; unused arguments sit in the inc sets.
        s.split.inc_now = {{1}, {0}};
        s.split.dec_now = {{}, {}};
        s.split.inc_delayed = {{0}, {1}};
        s.split.dec_delayed = {{1}, {0}};
    } else {
        if (!(r < 1)) throw Error(ErrorKind::parameter, "BZ transformed variant needs r < 1");
        s.name = "bz-transformed";
        s.reaction = [r, b](std::span<const double> u, std::span<const double> ud, std::span<double> out) {
            out[0] = u[0] * (1.0 - r - u[0] + r * ud[1]);
            out[1] = b * ud[0] * (1.0 - u[1]);
        };
        s.split = QuasimonotoneSplit::all_increasing(2);
    }
    return s;
}

inline double lv_critical_speed(const LVParams& p) {
    return std::max(2.0 * std::sqrt(p.r * p.d1), std::sqrt(p.d1 * (p.r + p.a1 * p.b2 / p.a2 - 1.0)));
}

inline std::pair<double, double> lv_equilibrium(const LVParams& p) {
    for (double v : {p.r, p.a1, p.a2, p.b1, p.b2, p.d1, p.d2})
        if (!(v > 0)) throw Error(ErrorKind::parameter, "LV: rates and diffusivities must be > 0");
    if (!(p.tau >= 0)) throw Error(ErrorKind::parameter, "LV: tau must be >= 0");
    const double us = p.b2 / p.a2;
    const double vs = (p.a1 * p.b2 / p.a2 - 1.0) / p.b1;
    if (!(p.a1 * p.b2 > p.a2) || !(vs > 0))
        throw Error(ErrorKind::equilibrium,
                    "LV: v* = (a1*b2/a2 - 1)/b1 = " + format_g(vs, 9) +
                        " is not positive; the coexistence state needs a1*b2 > a2 (the printed condition "
                        "a2 > a1*b2 is the reverse and makes v* negative)");
    return {us, vs};
}

inline SystemSpec lv_system(const LVParams& p) {
    const auto [us, vs] = lv_equilibrium(p);
    SystemSpec s;
    s.name = "lv-mutualistic";
    s.n = 2;
    s.diffusion = {p.d1, p.d2};
    s.delays = {p.tau, 0.0};
    s.zero_state = {0.0, 0.0};
    s.k_state = {us, vs};
    s.lipschitz = {p.r * (1.0 + 2.0 * p.a1 * us + p.b1 * vs), p.a2 * us + p.b2 + p.a2 * vs};
    const double r = p.r, a1 = p.a1, a2 = p.a2, b1 = p.b1, b2 = p.b2;
    s.reaction = [=](std::span<const double> u, std::span<const double> ud, std::span<double> out) {
        out[0] = r * u[0] * (1.0 - a1 * u[0] + b1 * u[1]);
        out[1] = u[1] * (a2 * ud[0] - b2);
    };
    s.split = QuasimonotoneSplit::all_increasing(2);
    return s;
}

inline double critical_speed(const BZParams&) { return 2.0; }
inline double critical_speed(const LVParams& p) { return lv_critical_speed(p); }

inline double critical_speed(const std::string& model_id, const BZParams& bz, const LVParams& lv) {
    if (model_id == "bz-literal" || model_id == "bz-transformed") return critical_speed(bz);
    if (model_id == "lv-mutualistic") return critical_speed(lv);
    throw Error(ErrorKind::config, "unknown model id '" + model_id + "'");
}

namespace detail {

inline void speed_gate(BuiltModel& m, double c, double cstar, const BuildOptions& o, const char* what) {
    if (!(c > 0)) throw Error(ErrorKind::parameter, "wave speed c must be > 0");
    if (c < cstar && !(o.allow_subcritical && o.override_params))
        throw Error(ErrorKind::subcritical, std::string(what) + ": c = " + format_g(c, 9) +
                                                " is below the critical speed " + format_g(cstar, 9) +
                                                " (complex characteristic rates)");
    if (c == cstar)
        m.warnings.push_back("c equals the critical speed; inequality margins may vanish");
}

// Halve delta until the lower candidate's right branch satisfies its inequality at 0+.
inline double adapt_delta(double delta, const std::function<double(double)>& lambda3_of,
                          const std::function<bool(double, double)>& ok, std::vector<std::string>& warnings) {
    const double start = delta;
    for (int it = 0; it < 60 && !ok(delta, lambda3_of(delta)); ++it) delta *= 0.5;
    if (delta != start)
        warnings.push_back("delta reduced from " + format_g(start, 9) + " to " + format_g(delta, 9) +
                           " so the lower candidate stays a subsolution right of 0");
    return delta;
}

} // namespace detail

inline BuiltModel bz_build(const BZParams& p, double c, const BuildOptions& o = {}) {
    detail::check_grid_opts(o);
    BuiltModel m;
    m.spec = bz_system(p);
    m.model_id = m.spec.name;
    m.c = c;
    m.critical_speed = 2.0;
    detail::speed_gate(m, c, 2.0, o, "BZ");
    m.kernel = make_kernel(m.spec, c);
    m.mode = p.variant == BZVariant::literal ? PairKind::coupled : PairKind::ordered;
    m.boundary = BoundaryMode::bracket_nontrivial;
    const double c2 = c * c;
    const double T = o.T, h = o.h;

    CandidatePair& pair = m.pair;
    pair.kind = m.mode;
    pair.smoothness = Smoothness::quasi;

    if (o.family == CandidateFamily::paper) {
        CandidateParams cp;
        cp.delta = o.delta;
        cp.k = o.k;
        cp.eps1 = o.eps1;
        cp.eps2 = o.eps2;
        const double disc = 1.0 - 4.0 / c2;
        cp.lambda1 = disc >= 0 ? c2 * (1.0 - std::sqrt(disc)) / 2.0 : NAN;
        if (p.variant == BZVariant::literal) {
            cp.lambda2 = cp.eps1;
            cp.lambda3 = cp.lambda1 - cp.eps2;
        } else {
            // The w inequality right of 0 needs lambda2 + lambda2^2/c^2 >= b.
            cp.lambda2 = c2 * (std::sqrt(1.0 + 4.0 * p.b / c2) - 1.0) / 2.0;
            // The u inequality of the lower left of 0 needs the fast root of
            // lambda - lambda^2/c^2 = 1 - r - delta k.
            const double r = p.r;
            auto l3 = [&](double dl) {
                return detail::rate_roots(1.0, c, 1.0 - r - dl * cp.k).second + cp.eps2;
            };
            auto ok = [&](double dl, double lam) {
                return dl * lam * (1.0 + lam / c2) <= 0.5 * (1.0 - dl) * (1.0 - r - cp.k);
            };
            cp.delta = detail::adapt_delta(cp.delta, l3, ok, m.warnings);
            cp.lambda3 = l3(cp.delta);
        }
        if (o.override_params) cp = *o.override_params;
        if (!(cp.lambda1 > 0) || !(cp.lambda2 > 0) || !(cp.lambda3 > 0))
            throw Error(ErrorKind::parameter, "BZ: candidate rates must be positive and real");
        m.params = cp;
        const detail::TwoSidedExp u1{0.5, cp.lambda1, 1.0, 0.5, cp.lambda1};
        const detail::TwoSidedExp u2{0.5, cp.lambda2, 1.0, 0.5, cp.lambda2};
        const double dk = cp.delta * cp.k;
        const detail::TwoSidedExp l1{dk, cp.lambda3, cp.k, dk, cp.lambda3};
        AnalyticProfile up, lo;
        up.fn = [u1, u2](int i, double t, int order) { return i == 0 ? u1(t, order) : u2(t, order); };
        lo.fn = [l1](int i, double t, int order) { return i == 0 ? l1(t, order) : 0.0; };
        up.kinks = {{0.0}, {0.0}};
        lo.kinks = {{0.0}, {}};
        pair.upper = sample_profile(up.fn, 2, T, h, {0, 0}, {1, 1});
        pair.lower = sample_profile(lo.fn, 2, T, h, {0, 0}, {cp.k, 0});
        pair.upper_fn = std::move(up);
        pair.lower_fn = std::move(lo);
        pair.family = "paper";
        m.constants = {{"lambda1", cp.lambda1}, {"lambda2", cp.lambda2}, {"lambda3", cp.lambda3},
                       {"delta", cp.delta},     {"k", cp.k},             {"eps1", cp.eps1},
                       {"eps2", cp.eps2}};
        return m;
    }

    if (p.variant == BZVariant::literal)
        throw Error(ErrorKind::config, "envelope candidates exist for the transformed BZ variant only");
    const double a = 1.0 - p.r;
    const auto [mu0, mup] = detail::rate_roots(1.0, c, a);
    detail::require_gap(mu0, mup, "BZ");
    const double hh = detail::grid_step(T, h);
    const double mu = detail::grid_tail_rate(m.kernel.comp[0], hh, a, mu0, mup);
    auto g2 = [&](double x) { return x - x * x / c2; };
    // w upper A e^{mu t}: linear part of the w inequality, continuous and on the grid.
    const double A_cont = p.b * std::exp(-mu * p.tau1) / g2(mu);
    const double S2 = detail::discrete_gain(m.kernel.comp[1], hh, mu);
    const double A_grid =
        p.b * detail::delayed_factor(mu, p.tau1, hh) * S2 / (1.0 - m.kernel.comp[1].beta * S2);
    const double A = std::max({1.0, A_cont, A_grid});
    const double cross = p.r * A * std::exp(-mu * p.tau2);
    if (!(cross < 1.0))
        throw Error(ErrorKind::parameter, "BZ envelope: r A e^{-mu tau2} = " + format_g(cross, 9) +
                                              " must stay below 1 (delay tau2 too short for this b)");
    const double eta = 0.5 * std::min(mu0, mup - mu0);
    const double nu = mu0 + eta;
    const double scale = o.envelope_scale * std::min(1.0, std::exp(-(mu - mu0) * T));
    const double M = std::max(1.0, 2.0 * scale / (g2(nu) - a));

    const detail::CappedExp u1{1.0, 1.0, mu}, u2{1.0, A, mu};
    const detail::Pulse l1{scale, mu0, M, nu};
    AnalyticProfile up, lo;
    up.fn = [u1, u2](int i, double t, int order) { return i == 0 ? u1(t, order) : u2(t, order); };
    lo.fn = [l1](int i, double t, int order) { return i == 0 ? l1(t, order) : 0.0; };
    up.kinks = {{u1.kink()}, {u2.kink()}};
    lo.kinks = {{l1.zero()}, {}};
    pair.upper = sample_profile(up.fn, 2, T, h, {0, 0}, {1, 1});
    pair.lower = sample_profile(lo.fn, 2, T, h, {0, 0}, {0, 0});
    pair.upper_fn = std::move(up);
    pair.lower_fn = std::move(lo);
    pair.family = "envelope";
    m.params = CandidateParams{mu, mu, mu0, 0, 0, 0, 0};
    m.constants = {{"mu_continuous", mu0}, {"mu_grid", mu},   {"A", A},         {"eta", eta},
                   {"M", M},               {"pulse_scale", scale}, {"cross_term", cross}};
    return m;
}

inline BuiltModel lv_build(const LVParams& p, double c, const BuildOptions& o = {}) {
    detail::check_grid_opts(o);
    BuiltModel m;
    m.spec = lv_system(p);
    m.model_id = m.spec.name;
    m.c = c;
    m.critical_speed = lv_critical_speed(p);
    detail::speed_gate(m, c, m.critical_speed, o, "LV");
    m.kernel = make_kernel(m.spec, c);
    m.mode = PairKind::ordered;
    m.boundary = BoundaryMode::bracket_nontrivial;
    const double us = m.spec.k_state[0], vs = m.spec.k_state[1];
    const double c2 = c * c;
    const double T = o.T, h = o.h;
    const double hh = detail::grid_step(T, h);

    CandidatePair& pair = m.pair;
    pair.kind = PairKind::ordered;
    pair.smoothness = Smoothness::quasi;

    if (o.family == CandidateFamily::paper) {
        CandidateParams cp;
        cp.delta = o.delta;
        cp.k = o.k;
        cp.eps1 = o.eps1;
        cp.eps2 = o.eps2;
        cp.lambda1 = detail::rate_roots(p.d1, c, p.r).second;
        // The u inequality left of 0 compares a1 u* e^{l1 t} with b1 v* e^{l2 t}; it
        // holds for all t <= 0 only when l2 >= l1.
        cp.lambda2 = cp.lambda1;
        auto l3 = [&](double dl) {
            return detail::rate_roots(p.d1, c, p.r * (1.0 - p.a1 * dl * cp.k)).second + cp.eps2;
        };
        auto ok = [&](double dl, double lam) {
            return dl * lam * (1.0 + p.d1 * lam / c2) <= 0.5 * p.r * (1.0 - dl) * (1.0 - p.a1 * cp.k);
        };
        if (!(p.a1 * cp.k < 1.0)) throw Error(ErrorKind::parameter, "LV: k must satisfy a1 k < 1");
        cp.delta = detail::adapt_delta(cp.delta, l3, ok, m.warnings);
        cp.lambda3 = l3(cp.delta);
        if (o.override_params) cp = *o.override_params;
        if (!(cp.lambda1 > 0) || !(cp.lambda2 > 0) || !(cp.lambda3 > 0))
            throw Error(ErrorKind::parameter, "LV: candidate rates must be positive and real");
        m.params = cp;
        const detail::TwoSidedExp u1{0.5 * us, cp.lambda1, us, 0.5 * us, cp.lambda1};
        const detail::TwoSidedExp u2{0.5 * vs, cp.lambda2, vs, 0.5 * vs, cp.lambda2};
        const double dk = cp.delta * cp.k;
        const detail::TwoSidedExp l1{dk, cp.lambda3, cp.k, dk, cp.lambda3};
        AnalyticProfile up, lo;
        up.fn = [u1, u2](int i, double t, int order) { return i == 0 ? u1(t, order) : u2(t, order); };
        lo.fn = [l1](int i, double t, int order) { return i == 0 ? l1(t, order) : 0.0; };
        up.kinks = {{0.0}, {0.0}};
        lo.kinks = {{0.0}, {}};
        pair.upper = sample_profile(up.fn, 2, T, h, {0, 0}, {us, vs});
        pair.lower = sample_profile(lo.fn, 2, T, h, {0, 0}, {cp.k, 0});
        pair.upper_fn = std::move(up);
        pair.lower_fn = std::move(lo);
        pair.family = "paper";
        m.constants = {{"u_star", us},         {"v_star", vs},   {"lambda1", cp.lambda1},
                       {"lambda2", cp.lambda2}, {"lambda3", cp.lambda3}, {"delta", cp.delta},
                       {"k", cp.k}};
        return m;
    }

    const double a = p.r;
    const auto [mu0, mup] = detail::rate_roots(p.d1, c, a);
    detail::require_gap(mu0, mup, "LV");
    const double mu = detail::grid_tail_rate(m.kernel.comp[0], hh, a, mu0, mup);
    auto g1 = [&](double x) { return x - p.d1 * x * x / c2; };
    const double g2mu = mu - p.d2 * mu * mu / c2;
    if (g2mu + p.b2 * (1.0 - std::exp(-mu * p.tau)) < 0)
        m.warnings.push_back("v envelope has negative linear margin; expect verification to fail");
    const double eta = 0.5 * std::min(mu0, mup - mu0);
    const double nu = mu0 + eta;
    const double scale = o.envelope_scale * std::min(1.0, std::exp(-(mu - mu0) * T));
    const double M = std::max(1.0, 2.0 * p.r * p.a1 * scale * us / (g1(nu) - a));

    const detail::CappedExp u1{us, us, mu}, u2{vs, vs, mu};
    const detail::Pulse l1{scale * us, mu0, M, nu};
    AnalyticProfile up, lo;
    up.fn = [u1, u2](int i, double t, int order) { return i == 0 ? u1(t, order) : u2(t, order); };
    lo.fn = [l1](int i, double t, int order) { return i == 0 ? l1(t, order) : 0.0; };
    up.kinks = {{u1.kink()}, {u2.kink()}};
    lo.kinks = {{l1.zero()}, {}};
    pair.upper = sample_profile(up.fn, 2, T, h, {0, 0}, {us, vs});
    pair.lower = sample_profile(lo.fn, 2, T, h, {0, 0}, {0, 0});
    pair.upper_fn = std::move(up);
    pair.lower_fn = std::move(lo);
    pair.family = "envelope";
    m.params = CandidateParams{mu, mu, mu0, 0, 0, 0, 0};
    m.constants = {{"u_star", us}, {"v_star", vs}, {"mu_continuous", mu0}, {"mu_grid", mu},
                   {"eta", eta},   {"M", M},       {"pulse_scale", scale}};
    return m;
}

// f_i = sum over terms of coef * prod_j u_j^p_j * prod_j u_j(t - tau_j)^q_j.
struct PolynomialTerm {
    int component = 0;
    double coef = 0;
    std::vector<int> now_powers;
    std::vector<int> delayed_powers;
};

inline Reaction polynomial_reaction(int n, std::vector<PolynomialTerm> terms) {
    for (const auto& t : terms) {
        if (t.component < 0 || t.component >= n)
            throw Error(ErrorKind::config, "polynomial term targets a missing component");
        if (static_cast<int>(t.now_powers.size()) != n || static_cast<int>(t.delayed_powers.size()) != n)
            throw Error(ErrorKind::config, "polynomial term power lists must have n entries");
        for (int pw : t.now_powers)
            if (pw < 0) throw Error(ErrorKind::config, "polynomial powers must be >= 0");
        for (int pw : t.delayed_powers)
            if (pw < 0) throw Error(ErrorKind::config, "polynomial powers must be >= 0");
    }
    return [terms = std::move(terms)](std::span<const double> u, std::span<const double> ud, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        for (const auto& t : terms) {
            double v = t.coef;
            for (std::size_t j = 0; j < u.size(); ++j) {
                for (int k = 0; k < t.now_powers[j]; ++k) v *= u[j];
                for (int k = 0; k < t.delayed_powers[j]; ++k) v *= ud[j];
            }
            out[static_cast<std::size_t>(t.component)] += v;
        }
    };
}

} // namespace twave
