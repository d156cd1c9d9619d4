#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "candidate.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "iterate.hpp"
#include "kernel.hpp"
#include "system.hpp"

namespace twave {

enum class DerivMode { analytic, finite_difference };
enum class BoundaryMode { strict_limits, bracket_nontrivial, none };

inline const char* to_string(DerivMode d) { return d == DerivMode::analytic ? "analytic" : "finite-difference"; }
inline const char* to_string(BoundaryMode b) {
    switch (b) {
    case BoundaryMode::strict_limits: return "strict-limits";
    case BoundaryMode::bracket_nontrivial: return "bracket-nontrivial";
    default: return "none";
    }
}

struct MarginResult {
    std::string name;  // "upper_1", "lower_2", ...
    int component = 0;
    bool upper = true;
    double min_margin = INFINITY;  // >= 0 means the inequality holds
    double t_at_min = 0;
    int nodes_checked = 0;
};

struct KinkResult {
    std::string name;
    int component = 0;
    bool upper = true;
    double t = 0;
    double value_jump = 0;  // phi(t+) - phi(t-)
    double slope_jump = 0;  // phi'(t+) - phi'(t-)
    bool ok = true;
};

struct LimitReport {
    BoundaryMode mode = BoundaryMode::bracket_nontrivial;
    std::vector<double> upper_left_gap;   // |upper(t_min)|
    std::vector<double> lower_right_gap;  // |lower(t_max) - K|
    bool strict_ok = false;
    bool ordering_ok = false;
    bool box_ok = false;
    bool lower_nonzero = false;  // lower not identically 0
    bool upper_not_k = false;    // upper not identically K
    bool bracket_ok = false;
    bool pass = false;
};

struct NodeMargins {
    std::vector<double> t;
    std::vector<std::vector<double>> upper, lower;  // [component][node], NaN where skipped
};

struct VerificationReport {
    PairKind mode = PairKind::coupled;
    DerivMode deriv = DerivMode::analytic;
    double tol_margin = 0;
    std::vector<MarginResult> margins;
    std::vector<KinkResult> kinks;
    bool margins_ok = false;
    bool kinks_ok = true;
    bool ordering_ok = false;
    double ordering_worst = 0;  // max(lower - upper)
    double ordering_t = 0;
    bool box_ok = false;
    double box_worst = 0;  // largest excursion outside [0, K]
    LimitReport limits;
    bool verdict = false;
    std::vector<std::string> failures;
    NodeMargins nodes;
};

struct VerifyOptions {
    double tol_margin = -1;  // < 0: 1e-8 analytic, 1e-4 (1 + |f|_sup) finite differences
    double tol_box = 1e-9;
    double tol_lim = 1e-3;
    double tol_kink = 1e-7;
    BoundaryMode boundary = BoundaryMode::bracket_nontrivial;
    bool keep_nodes = false;
};

inline LimitReport check_limits(const CandidatePair& pair, const SystemSpec& spec, BoundaryMode mode,
                                double tol_lim = 1e-3, double tol_box = 1e-9) {
    LimitReport r;
    r.mode = mode;
    const auto& U = pair.upper;
    const auto& L = pair.lower;
    r.strict_ok = true;
    for (int i = 0; i < spec.n; ++i) {
        const double K = spec.k_state[static_cast<std::size_t>(i)];
        r.upper_left_gap.push_back(std::fabs(U.at(0, i)));
        r.lower_right_gap.push_back(std::fabs(L.at(L.N, i) - K));
        if (r.upper_left_gap.back() > tol_lim || r.lower_right_gap.back() > tol_lim) r.strict_ok = false;
    }
    r.ordering_ok = detail::ordering_excess(L, U) <= tol_box;
    r.box_ok = true;
    for (std::size_t j = 0; j < U.nodes(); ++j)
        for (int i = 0; i < spec.n; ++i) {
            const double K = spec.k_state[static_cast<std::size_t>(i)];
            if (L.at(j, i) < -tol_box || U.at(j, i) > K + tol_box) r.box_ok = false;
            if (L.at(j, i) > tol_box) r.lower_nonzero = true;
            if (U.at(j, i) < K - tol_box) r.upper_not_k = true;
        }
    r.bracket_ok = r.ordering_ok && r.box_ok && r.lower_nonzero && r.upper_not_k;
    switch (mode) {
    case BoundaryMode::strict_limits: r.pass = r.strict_ok; break;
    case BoundaryMode::bracket_nontrivial: r.pass = r.bracket_ok; break;
    case BoundaryMode::none: r.pass = true; break;
    }
    return r;
}

namespace detail {

inline bool kink_inside(const std::vector<double>& kinks, double a, double b) {
    for (double k : kinks)
        if (k > a && k < b) return true;
    return false;
}

// First and second derivative of component i at node j from grid values,
// one-sided when a kink sits inside the central stencil.
inline bool fd_derivs(const ProfileGrid& p, int i, std::size_t j, const std::vector<double>& kinks, double& d1,
                      double& d2) {
    const double h = p.h();
    const double pad = 1e-9 * h;
    auto v = [&](std::size_t m) { return p.at(m, i); };
    const double t = p.t(j);
    if (j >= 1 && j + 1 <= p.N && !kink_inside(kinks, t - h + pad, t + h - pad)) {
        d1 = (v(j + 1) - v(j - 1)) / (2 * h);
        d2 = (v(j + 1) - 2 * v(j) + v(j - 1)) / (h * h);
        return true;
    }
    const bool kink_left = kink_inside(kinks, t - h + pad, t - pad);
    if (kink_left && j + 3 <= p.N && !kink_inside(kinks, t + pad, t + 3 * h - pad)) {
        d1 = (-3 * v(j) + 4 * v(j + 1) - v(j + 2)) / (2 * h);
        d2 = (2 * v(j) - 5 * v(j + 1) + 4 * v(j + 2) - v(j + 3)) / (h * h);
        return true;
    }
    if (!kink_left && j >= 3 && !kink_inside(kinks, t - 3 * h + pad, t - pad)) {
        d1 = (3 * v(j) - 4 * v(j - 1) + v(j - 2)) / (2 * h);
        d2 = (2 * v(j) - 5 * v(j - 1) + 4 * v(j - 2) - v(j - 3)) / (h * h);
        return true;
    }
    return false;
}

// Quadratic extrapolation of value and slope to t from three nodes on one side.
inline void one_sided_limit(const ProfileGrid& p, int i, double t, bool right, double& val, double& slope,
                            double& d3) {
    const double h = p.h();
    std::size_t j0;
    if (right) {
        j0 = p.nearest(t);
        if (p.t(j0) <= t + 1e-9 * h) ++j0;
    } else {
        j0 = p.nearest(t);
        if (p.t(j0) >= t - 1e-9 * h) --j0;
    }
    const std::size_t j1 = right ? j0 + 1 : j0 - 1;
    const std::size_t j2 = right ? j0 + 2 : j0 - 2;
    const double x0 = p.t(j0), x1 = p.t(j1), x2 = p.t(j2);
    const double y0 = p.at(j0, i), y1 = p.at(j1, i), y2 = p.at(j2, i);
    // Lagrange basis evaluated at t and differentiated.
    const double l0 = (t - x1) * (t - x2) / ((x0 - x1) * (x0 - x2));
    const double l1 = (t - x0) * (t - x2) / ((x1 - x0) * (x1 - x2));
    const double l2 = (t - x0) * (t - x1) / ((x2 - x0) * (x2 - x1));
    const double m0 = ((t - x1) + (t - x2)) / ((x0 - x1) * (x0 - x2));
    const double m1 = ((t - x0) + (t - x2)) / ((x1 - x0) * (x1 - x2));
    const double m2 = ((t - x0) + (t - x1)) / ((x2 - x0) * (x2 - x1));
    val = l0 * y0 + l1 * y1 + l2 * y2;
    slope = m0 * y0 + m1 * y1 + m2 * y2;
    // The next node's third difference sizes the extrapolation error (roughly h^3 times phi_ttt).
    const std::size_t j3 = right ? j0 + 3 : j0 - 3;
    d3 = std::fabs(p.at(j3, i) - 3 * y2 + 3 * y1 - y0);
}

} // namespace detail

inline VerificationReport verify_pair(const SystemSpec& spec, const KernelParams& kp, const CandidatePair& pair,
                                      PairKind mode, DerivMode deriv, const VerifyOptions& opt = {}) {
    if (deriv == DerivMode::analytic && !pair.has_analytic())
        throw Error(ErrorKind::config, "verify_pair: analytic derivatives requested but the pair has none");
    const auto& U = pair.upper;
    const auto& L = pair.lower;
    if (U.n != spec.n || L.n != spec.n || U.N != L.N || U.T != L.T)
        throw Error(ErrorKind::structural, "verify_pair: pair profiles do not share a grid");

    const auto n = static_cast<std::size_t>(spec.n);
    const double c2 = kp.c * kp.c;
    VerificationReport rep;
    rep.mode = mode;
    rep.deriv = deriv;

    // Kink locations per profile and component.
    auto kinks_of = [&](const std::optional<AnalyticProfile>& a) {
        std::vector<std::vector<double>> k(n);
        if (a) {
            for (std::size_t i = 0; i < n && i < a->kinks.size(); ++i) k[i] = a->kinks[i];
        } else if (pair.smoothness == Smoothness::quasi) {
            for (auto& v : k) v = {0.0};
        }
        return k;
    };
    const auto ku = kinks_of(pair.upper_fn);
    const auto kl = kinks_of(pair.lower_fn);
    auto skipped = [&](const std::vector<double>& kinks, std::size_t j, const ProfileGrid& p) {
        for (double k : kinks)
            if (p.nearest(k) == j) return true;
        return false;
    };

    const auto masks = detail::arg_masks(spec, mode);
    std::vector<double> u(n), l(n), ud(n), ld(n), now(n), del(n), f(n);
    std::vector<double> upd1(n), upd2(n), lod1(n), lod2(n);
    std::vector<char> uok(n), lok(n);

    for (std::size_t i = 0; i < n; ++i) {
        rep.margins.push_back({"upper_" + std::to_string(i + 1), static_cast<int>(i), true});
    }
    for (std::size_t i = 0; i < n; ++i) {
        rep.margins.push_back({"lower_" + std::to_string(i + 1), static_cast<int>(i), false});
    }
    if (opt.keep_nodes) {
        rep.nodes.upper.assign(n, std::vector<double>(U.nodes(), NAN));
        rep.nodes.lower.assign(n, std::vector<double>(U.nodes(), NAN));
        for (std::size_t j = 0; j < U.nodes(); ++j) rep.nodes.t.push_back(U.t(j));
    }

    double f_sup = 0;
    std::vector<std::vector<double>> mu_all(n, std::vector<double>(U.nodes(), NAN)), ml_all = mu_all;
    for (std::size_t j = 1; j + 1 < U.nodes(); ++j) {
        const double t = U.t(j);
        for (std::size_t k = 0; k < n; ++k) {
            const int kk = static_cast<int>(k);
            const double tau = spec.delays[k];
            if (deriv == DerivMode::analytic) {
                u[k] = pair.upper_fn->fn(kk, t, 0);
                l[k] = pair.lower_fn->fn(kk, t, 0);
                ud[k] = pair.upper_fn->fn(kk, t - tau, 0);
                ld[k] = pair.lower_fn->fn(kk, t - tau, 0);
            } else {
                u[k] = U.at(j, kk);
                l[k] = L.at(j, kk);
                ud[k] = delayed_eval(U, kk, t, tau);
                ld[k] = delayed_eval(L, kk, t, tau);
            }
            uok[k] = !skipped(ku[k], j, U);
            lok[k] = !skipped(kl[k], j, L);
            if (deriv == DerivMode::analytic) {
                upd1[k] = pair.upper_fn->fn(kk, t, 1);
                upd2[k] = pair.upper_fn->fn(kk, t, 2);
                lod1[k] = pair.lower_fn->fn(kk, t, 1);
                lod2[k] = pair.lower_fn->fn(kk, t, 2);
            } else {
                if (uok[k]) uok[k] = detail::fd_derivs(U, kk, j, ku[k], upd1[k], upd2[k]);
                if (lok[k]) lok[k] = detail::fd_derivs(L, kk, j, kl[k], lod1[k], lod2[k]);
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double dc = spec.diffusion[i] / c2;
            if (uok[i]) {
                for (std::size_t k = 0; k < n; ++k) {
                    now[k] = masks.now[i][k] ? u[k] : l[k];
                    del[k] = masks.del[i][k] ? ud[k] : ld[k];
                }
                spec.reaction(now, del, f);
                f_sup = std::max(f_sup, std::fabs(f[i]));
                mu_all[i][j] = upd1[i] - dc * upd2[i] - f[i];
            }
            if (lok[i]) {
                for (std::size_t k = 0; k < n; ++k) {
                    now[k] = masks.now[i][k] ? l[k] : u[k];
                    del[k] = masks.del[i][k] ? ld[k] : ud[k];
                }
                spec.reaction(now, del, f);
                f_sup = std::max(f_sup, std::fabs(f[i]));
                ml_all[i][j] = f[i] - (lod1[i] - dc * lod2[i]);
            }
        }
    }
    rep.tol_margin = opt.tol_margin >= 0 ? opt.tol_margin
                     : deriv == DerivMode::analytic ? 1e-8
                                                    : 1e-4 * (1 + f_sup);

    rep.margins_ok = true;
    for (auto& m : rep.margins) {
        const auto& arr = m.upper ? mu_all[static_cast<std::size_t>(m.component)]
                                  : ml_all[static_cast<std::size_t>(m.component)];
        for (std::size_t j = 0; j < arr.size(); ++j) {
            if (std::isnan(arr[j])) continue;
            ++m.nodes_checked;
            if (arr[j] < m.min_margin) {
                m.min_margin = arr[j];
                m.t_at_min = U.t(j);
            }
        }
        if (!(m.min_margin >= -rep.tol_margin)) {
            rep.margins_ok = false;
            rep.failures.push_back(m.name + " inequality violated: margin " + format_g(m.min_margin, 9) +
                                   " at t = " + format_g(m.t_at_min, 9));
        }
    }
    if (opt.keep_nodes) {
        rep.nodes.upper = mu_all;
        rep.nodes.lower = ml_all;
    }

    // Corners: values must match; slopes may only drop for an upper and rise for a lower.
    const double tol_k = deriv == DerivMode::analytic ? opt.tol_kink : std::max(opt.tol_kink, rep.tol_margin);
    auto check_kinks = [&](const std::optional<AnalyticProfile>& a, const ProfileGrid& p,
                           const std::vector<std::vector<double>>& ks, bool upper) {
        for (std::size_t i = 0; i < n; ++i)
            for (double tk : ks[i]) {
                if (tk <= p.t_min() + 4 * p.h() || tk >= p.t_max() - 4 * p.h()) continue;
                KinkResult kr;
                kr.name = std::string(upper ? "upper_" : "lower_") + std::to_string(i + 1);
                kr.component = static_cast<int>(i);
                kr.upper = upper;
                kr.t = tk;
                double vm, vp, sm, sp;
                double tol_v = tol_k, tol_s = tol_k;
                if (deriv == DerivMode::analytic && a) {
                    const int ii = static_cast<int>(i);
                    const double e = 1e-6 * std::max(1.0, std::fabs(tk));
                    vp = a->fn(ii, tk + e, 0) - e * a->fn(ii, tk + e, 1);
                    vm = a->fn(ii, tk - e, 0) + e * a->fn(ii, tk - e, 1);
                    sp = a->fn(ii, tk + e, 1) - e * a->fn(ii, tk + e, 2);
                    sm = a->fn(ii, tk - e, 1) + e * a->fn(ii, tk - e, 2);
                } else {
                    double d3m, d3p;
                    detail::one_sided_limit(p, static_cast<int>(i), tk, false, vm, sm, d3m);
                    detail::one_sided_limit(p, static_cast<int>(i), tk, true, vp, sp, d3p);
                    // Sampled data cannot resolve a corner better than its own extrapolation error.
                    tol_v += 2 * (d3m + d3p);
                    tol_s += 2 * (d3m + d3p) / p.h();
                }
                kr.value_jump = vp - vm;
                kr.slope_jump = sp - sm;
                const bool value_ok = std::fabs(kr.value_jump) <= tol_v;
                const bool slope_ok = upper ? kr.slope_jump <= tol_s : kr.slope_jump >= -tol_s;
                kr.ok = value_ok && slope_ok;
                if (!kr.ok) {
                    rep.kinks_ok = false;
                    rep.failures.push_back(kr.name + " corner at t = " + format_g(tk, 9) +
                                           (value_ok ? " bends the wrong way: slope jump "
                                                     : " is discontinuous: value jump ") +
                                           format_g(value_ok ? kr.slope_jump : kr.value_jump, 9));
                }
                rep.kinks.push_back(kr);
            }
    };
    check_kinks(pair.upper_fn, U, ku, true);
    check_kinks(pair.lower_fn, L, kl, false);

    rep.ordering_worst = -INFINITY;
    rep.box_worst = 0;
    for (std::size_t j = 0; j < U.nodes(); ++j)
        for (int i = 0; i < spec.n; ++i) {
            const double K = spec.k_state[static_cast<std::size_t>(i)];
            const double gap = L.at(j, i) - U.at(j, i);
            if (gap > rep.ordering_worst) {
                rep.ordering_worst = gap;
                rep.ordering_t = U.t(j);
            }
            rep.box_worst = std::max({rep.box_worst, -L.at(j, i), -U.at(j, i), L.at(j, i) - K, U.at(j, i) - K});
        }
    rep.ordering_worst = std::max(rep.ordering_worst, detail::ordering_excess(L, U));
    rep.ordering_ok = rep.ordering_worst <= opt.tol_box;
    rep.box_ok = rep.box_worst <= opt.tol_box;
    if (!rep.ordering_ok)
        rep.failures.push_back("lower exceeds upper by " + format_g(rep.ordering_worst, 9));
    if (!rep.box_ok) rep.failures.push_back("profiles leave [0, K] by " + format_g(rep.box_worst, 9));

    rep.limits = check_limits(pair, spec, opt.boundary, opt.tol_lim, opt.tol_box);
    if (!rep.limits.pass)
        rep.failures.push_back(std::string("boundary mode ") + to_string(opt.boundary) + " not satisfied");

    rep.verdict = rep.margins_ok && rep.kinks_ok && rep.ordering_ok && rep.box_ok && rep.limits.pass;
    return rep;
}

struct HStarReport {
    int lattice_resolution = 0;
    int points_checked = 0;
    std::vector<std::vector<double>> interior_equilibria;
    bool pass = true;
};

// Constant states on an interior lattice of (0, K); flags those where f vanishes.
inline HStarReport check_hstar(const SystemSpec& spec, int lattice_resolution, double tol_eq = 1e-12) {
    check_structure(spec);
    if (lattice_resolution < 2) throw Error(ErrorKind::parameter, "check_hstar: lattice_resolution must be >= 2");
    HStarReport rep;
    rep.lattice_resolution = lattice_resolution;
    const auto n = static_cast<std::size_t>(spec.n);
    const int m = lattice_resolution - 1;  // interior points per axis
    std::vector<int> idx(n, 1);
    std::vector<double> state(n), f(n);
    while (true) {
        for (std::size_t i = 0; i < n; ++i)
            state[i] = spec.k_state[i] * static_cast<double>(idx[i]) / static_cast<double>(lattice_resolution);
        spec.reaction(state, state, f);
        ++rep.points_checked;
        double worst = 0;
        for (double v : f) worst = std::max(worst, std::fabs(v));
        if (worst <= tol_eq) {
            rep.interior_equilibria.push_back(state);
            rep.pass = false;
        }
        std::size_t k = 0;
        while (k < n && idx[k] == m) idx[k++] = 1;
        if (k == n) break;
        ++idx[k];
    }
    return rep;
}

// Largest |analytic - finite-difference| margin over the nodes of a coarser grid with
// spacing `coarse_h`, staying `clearance` away from every kink and its delayed image.
// Evaluated on grids h, h/2, ... it exposes the order of the difference stencils.
inline double margin_discrepancy(const SystemSpec& spec, const KernelParams& kp, const CandidatePair& pair,
                                 PairKind mode, double coarse_h, double clearance) {
    if (!pair.has_analytic()) throw Error(ErrorKind::config, "margin_discrepancy needs an analytic pair");
    VerifyOptions vo;
    vo.keep_nodes = true;
    const auto a = verify_pair(spec, kp, pair, mode, DerivMode::analytic, vo);
    const auto f = verify_pair(spec, kp, pair, mode, DerivMode::finite_difference, vo);
    std::vector<double> kinks;
    for (const auto* p : {&*pair.upper_fn, &*pair.lower_fn})
        for (const auto& v : p->kinks)
            for (double k : v) {
                kinks.push_back(k);
                for (double tau : spec.delays) kinks.push_back(k + tau);
            }
    const double h = pair.upper.h();
    const auto stride = static_cast<std::size_t>(std::max(1L, std::lround(coarse_h / h)));
    double worst = 0;
    for (std::size_t j = 0; j < a.nodes.t.size(); j += stride) {
        const double t = a.nodes.t[j];
        bool near = false;
        for (double k : kinks) near = near || std::fabs(t - k) < clearance;
        if (near) continue;
        for (int i = 0; i < spec.n; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            for (const auto* side : {&a.nodes.upper, &a.nodes.lower}) {
                const auto* other = side == &a.nodes.upper ? &f.nodes.upper : &f.nodes.lower;
                const double d = (*side)[ii][j] - (*other)[ii][j];
                if (std::isfinite(d)) worst = std::max(worst, std::fabs(d));
            }
        }
    }
    return worst;
}

} // namespace twave
