#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "candidate.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "kernel.hpp"
#include "system.hpp"

namespace twave {

namespace detail {

// use_own[i][k]: argument k of f_i comes from the side being updated.
struct ArgMasks {
    std::vector<std::vector<char>> now, del;
};

inline ArgMasks arg_masks(const SystemSpec& spec, PairKind kind) {
    const auto n = static_cast<std::size_t>(spec.n);
    ArgMasks m;
    m.now.assign(n, std::vector<char>(n, 1));
    m.del.assign(n, std::vector<char>(n, 1));
    if (kind == PairKind::ordered) return m;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            const int kk = static_cast<int>(k);
            m.now[i][k] = (k == i || contains(spec.split.inc_now[i], kk)) ? 1 : 0;
            m.del[i][k] = contains(spec.split.inc_delayed[i], kk) ? 1 : 0;
        }
    return m;
}

// Sweep forcing beta_i * own_i + f_i(assembled arguments) for every component of one side.
inline void side_forcing(const SystemSpec& spec, const ArgMasks& m, std::span<const double> own,
                         std::span<const double> other, std::span<const double> own_d,
                         std::span<const double> other_d, std::vector<double>& now,
                         std::vector<double>& del, std::vector<double>& f, std::span<double> out) {
    const auto n = static_cast<std::size_t>(spec.n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            now[k] = m.now[i][k] ? own[k] : other[k];
            del[k] = m.del[i][k] ? own_d[k] : other_d[k];
        }
        spec.reaction(now, del, f);
        out[i] = f[i] + spec.lipschitz[i] * own[i];
    }
}

inline double ordering_excess(const ProfileGrid& lo, const ProfileGrid& hi) {
    double worst = -INFINITY;
    for (std::size_t k = 0; k < lo.values.size(); ++k) worst = std::max(worst, lo.values[k] - hi.values[k]);
    for (std::size_t i = 0; i < lo.left_asym.size(); ++i) {
        worst = std::max(worst, lo.left_asym[i] - hi.left_asym[i]);
        worst = std::max(worst, lo.right_asym[i] - hi.right_asym[i]);
    }
    return worst;
}

// Largest upper - lower over the nodes. The asymptotes stay out: a lower that
// vanishes at +inf keeps its limit at 0 for good.
inline double node_gap(const ProfileGrid& up, const ProfileGrid& lo) {
    double worst = 0;
    for (std::size_t k = 0; k < up.values.size(); ++k) worst = std::max(worst, up.values[k] - lo.values[k]);
    return worst;
}

} // namespace detail

struct SweepOutcome {
    CandidatePair pair;
    // Largest of new_upper - old_upper, old_lower - new_lower, new_lower - new_upper.
    double violation = 0;
};

inline SweepOutcome sweep_with_violation(const SystemSpec& spec, const KernelParams& kp,
                                         const CandidatePair& pair, double integrity_tol = 1e-6,
                                         double tol_box = 1e-9) {
    const ProfileGrid& U = pair.upper;
    const ProfileGrid& L = pair.lower;
    if (U.n != spec.n || L.n != spec.n || U.N != L.N || U.T != L.T)
        throw Error(ErrorKind::structural, "coupled_sweep: pair profiles do not share a grid");
    check_box(spec, U, tol_box, "upper profile");
    check_box(spec, L, tol_box, "lower profile");
    if (detail::ordering_excess(L, U) > integrity_tol)
        throw Error(ErrorKind::integrity, "coupled_sweep: input pair is not ordered (lower > upper)");

    const auto n = static_cast<std::size_t>(spec.n);
    const auto masks = detail::arg_masks(spec, pair.kind);
    std::vector<std::vector<double>> HU(n, std::vector<double>(U.nodes())), HL = HU;
    std::vector<double> u(n), l(n), ud(n), ld(n), now(n), del(n), f(n), hu(n), hl(n);
    for (std::size_t j = 0; j < U.nodes(); ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            u[k] = U.at(j, static_cast<int>(k));
            l[k] = L.at(j, static_cast<int>(k));
        }
        delayed_row(spec, U, j, ud);
        delayed_row(spec, L, j, ld);
        detail::side_forcing(spec, masks, u, l, ud, ld, now, del, f, hu);
        detail::side_forcing(spec, masks, l, u, ld, ud, now, del, f, hl);
        for (std::size_t i = 0; i < n; ++i) {
            HU[i][j] = hu[i];
            HL[i][j] = hl[i];
        }
    }
    std::vector<double> hu_l(n), hu_r(n), hl_l(n), hl_r(n);
    detail::side_forcing(spec, masks, U.left_asym, L.left_asym, U.left_asym, L.left_asym, now, del, f, hu_l);
    detail::side_forcing(spec, masks, U.right_asym, L.right_asym, U.right_asym, L.right_asym, now, del, f, hu_r);
    detail::side_forcing(spec, masks, L.left_asym, U.left_asym, L.left_asym, U.left_asym, now, del, f, hl_l);
    detail::side_forcing(spec, masks, L.right_asym, U.right_asym, L.right_asym, U.right_asym, now, del, f, hl_r);

    SweepOutcome out;
    out.pair = pair;
    out.pair.upper_fn.reset();
    out.pair.lower_fn.reset();
    out.pair.smoothness = Smoothness::classical;
    out.pair.family = "sweep";
    ProfileGrid& NU = out.pair.upper;
    ProfileGrid& NL = out.pair.lower;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& k = kp.comp[i];
        const int ii = static_cast<int>(i);
        NU.set_column(ii, apply_green(k, U.h(), HU[i], hu_l[i], hu_r[i]));
        NL.set_column(ii, apply_green(k, U.h(), HL[i], hl_l[i], hl_r[i]));
        NU.left_asym[i] = hu_l[i] / k.beta;
        NU.right_asym[i] = hu_r[i] / k.beta;
        NL.left_asym[i] = hl_l[i] / k.beta;
        NL.right_asym[i] = hl_r[i] / k.beta;
    }
    out.violation = std::max({detail::ordering_excess(NU, U), detail::ordering_excess(L, NL),
                              detail::ordering_excess(NL, NU)});
    if (out.violation > integrity_tol)
        throw Error(ErrorKind::integrity,
                    "coupled_sweep broke the sandwich ordering by " + format_g(out.violation, 9) +
                        " (check the Lipschitz bounds and the candidate pair)");
    return out;
}

namespace detail {

// True when every component varies by less than 1e-3 over the nodes: a constant
// state, which is a fixed point but not a wave.
inline bool is_flat(const ProfileGrid& p) {
    for (int i = 0; i < p.n; ++i) {
        double lo = INFINITY, hi = -INFINITY;
        for (std::size_t j = 0; j < p.nodes(); ++j) {
            lo = std::min(lo, p.at(j, i));
            hi = std::max(hi, p.at(j, i));
        }
        if (hi - lo > 1e-3) return false;
    }
    return true;
}

inline void project_chain(CandidatePair& next, const CandidatePair& prev) {
    auto& U = next.upper.values;
    auto& L = next.lower.values;
    for (std::size_t k = 0; k < U.size(); ++k) {
        U[k] = std::min(U[k], prev.upper.values[k]);
        L[k] = std::min(std::max(L[k], prev.lower.values[k]), U[k]);
    }
}

} // namespace detail

inline CandidatePair coupled_sweep(const SystemSpec& spec, const KernelParams& kp, const CandidatePair& pair) {
    return sweep_with_violation(spec, kp, pair).pair;
}

// One sweep turns a quasi pair into a classical one.
inline CandidatePair smooth_pair(const SystemSpec& spec, const KernelParams& kp, const CandidatePair& pair) {
    if (pair.smoothness != Smoothness::quasi)
        throw Error(ErrorKind::parameter, "smooth_pair expects a quasi pair");
    auto out = coupled_sweep(spec, kp, pair);
    out.smoothness = Smoothness::classical;
    out.family = "smoothed";
    return out;
}

struct SolveOptions {
    double tol = 1e-6;
    int max_iter = 500;  // sweeps and Picard steps together
    double omega = 0.5;
    double stagnation_rel = 1e-3;
    int stagnation_window = 10;
    double integrity_tol = 1e-6;
};

struct IterationReport {
    int iterations = 0;
    int sweeps = 0;
    int picard_steps = 0;
    std::string phase;  // "sweep" or "picard"
    std::vector<double> sup_deltas;
    std::vector<double> rho_deltas;
    std::vector<double> gap_history;
    std::vector<double> sandwich_violations;
    std::vector<double> residual_history;  // Picard phase
    double fixed_point_residual = INFINITY;
    double rho = 0;
    bool converged = false;
};

struct SolveResult {
    ProfileGrid profile;
    IterationReport report;
    CandidatePair bracket;  // last sweep pair
};

inline double fixed_point_residual(const SystemSpec& spec, const KernelParams& kp, const ProfileGrid& phi) {
    return sup_distance(apply_F(spec, kp, phi), phi);
}

inline SolveResult solve_wave(const SystemSpec& spec, const KernelParams& kp, const CandidatePair& pair,
                              const SolveOptions& opt = {}) {
    if (!(opt.tol > 0)) throw Error(ErrorKind::parameter, "solve_wave: tol must be > 0");
    if (opt.max_iter < 1) throw Error(ErrorKind::parameter, "solve_wave: max_iter must be >= 1");
    if (!(opt.omega > 0 && opt.omega <= 1)) throw Error(ErrorKind::parameter, "solve_wave: omega must lie in (0, 1]");

    SolveResult res;
    IterationReport& rep = res.report;
    rep.rho = kp.default_rho();
    const NormConfig ncfg{rep.rho};
    CandidatePair cur = pair;
    bool to_picard = false;

    rep.phase = "sweep";
    while (rep.iterations < opt.max_iter) {
        auto sw = sweep_with_violation(spec, kp, cur, opt.integrity_tol);
        ++rep.iterations;
        ++rep.sweeps;
        const auto dU = difference(sw.pair.upper, cur.upper);
        const auto dL = difference(sw.pair.lower, cur.lower);
        rep.sup_deltas.push_back(std::max(norm_sup(dU), norm_sup(dL)));
        rep.rho_deltas.push_back(std::max(norm_rho(dU, ncfg), norm_rho(dL, ncfg)));
        rep.sandwich_violations.push_back(sw.violation);
        // Rounding noise in the far tails is amplified by later sweeps, so the chain is
        // re-imposed exactly; the recorded violation is the one before this projection.
        detail::project_chain(sw.pair, cur);
        const double gap = detail::node_gap(sw.pair.upper, sw.pair.lower);
        rep.gap_history.push_back(gap);
        cur = std::move(sw.pair);

        // In the ordered case a sweep applies F to each member, so a member that stopped
        // moving is itself a fixed point; the bracket may still be wide open around it
        // (the lower pulse keeps travelling in the flat tail).
        if (pair.kind == PairKind::ordered) {
            const ProfileGrid* settled = nullptr;
            if (norm_sup(dU) <= opt.tol && !detail::is_flat(cur.upper)) settled = &cur.upper;
            else if (norm_sup(dL) <= opt.tol && !detail::is_flat(cur.lower)) settled = &cur.lower;
            if (settled) {
                const double r = fixed_point_residual(spec, kp, *settled);
                if (r <= opt.tol) {
                    res.profile = *settled;
                    rep.fixed_point_residual = r;
                    rep.converged = true;
                    res.bracket = std::move(cur);
                    return res;
                }
            }
        }

        if (gap < opt.tol) {
            auto mid = midpoint(cur.upper, cur.lower);
            const double r = fixed_point_residual(spec, kp, mid);
            if (r <= opt.tol) {
                res.profile = std::move(mid);
                rep.fixed_point_residual = r;
                rep.converged = true;
                res.bracket = std::move(cur);
                return res;
            }
            to_picard = true;
            break;
        }
        const auto m = rep.gap_history.size();
        const auto w = static_cast<std::size_t>(opt.stagnation_window);
        if (m > w) {
            const double old = rep.gap_history[m - 1 - w];
            // A bracket whose members still move by more than the same fraction is
            // travelling, not stuck (a lower pulse spreading under a fixed upper).
            const double moved = *std::max_element(rep.sup_deltas.end() - static_cast<std::ptrdiff_t>(w),
                                                    rep.sup_deltas.end());
            if (std::fabs(gap - old) < opt.stagnation_rel * old && moved < opt.stagnation_rel * gap) {
                to_picard = true;
                break;
            }
        }
    }

    ProfileGrid phi = midpoint(cur.upper, cur.lower);
    if (to_picard) {
        rep.phase = "picard";
        const ProfileGrid& lo = cur.lower;
        const ProfileGrid& hi = cur.upper;
        const double om = opt.omega;
        while (true) {
            ProfileGrid Fphi = apply_F(spec, kp, phi);
            const auto d = difference(Fphi, phi);
            const double r = norm_sup(d);
            rep.residual_history.push_back(r);
            rep.fixed_point_residual = r;
            if (r <= opt.tol) {
                rep.converged = true;
                break;
            }
            if (rep.iterations >= opt.max_iter) break;
            ProfileGrid next = phi;
            for (std::size_t k = 0; k < next.values.size(); ++k)
                next.values[k] = (1 - om) * phi.values[k] + om * std::clamp(Fphi.values[k], lo.values[k], hi.values[k]);
            for (std::size_t i = 0; i < next.left_asym.size(); ++i) {
                next.left_asym[i] = (1 - om) * phi.left_asym[i] +
                                    om * std::clamp(Fphi.left_asym[i], lo.left_asym[i], hi.left_asym[i]);
                next.right_asym[i] = (1 - om) * phi.right_asym[i] +
                                     om * std::clamp(Fphi.right_asym[i], lo.right_asym[i], hi.right_asym[i]);
            }
            const auto step = difference(next, phi);
            rep.sup_deltas.push_back(norm_sup(step));
            rep.rho_deltas.push_back(norm_rho(step, ncfg));
            phi = std::move(next);
            ++rep.iterations;
            ++rep.picard_steps;
        }
    } else {
        rep.fixed_point_residual = fixed_point_residual(spec, kp, phi);
    }
    res.profile = std::move(phi);
    res.bracket = std::move(cur);
    return res;
}

// phi' - (d/c^2) phi'' - f(phi, phi_tau) with central differences; endpoints left at 0.
inline ProfileGrid ode_residual(const SystemSpec& spec, const KernelParams& kp, const ProfileGrid& phi) {
    if (phi.nodes() < 3) throw Error(ErrorKind::parameter, "ode_residual needs at least 3 nodes");
    const auto n = static_cast<std::size_t>(spec.n);
    ProfileGrid res = same_shape(phi);
    const double h = phi.h();
    const double c2 = kp.c * kp.c;
    std::vector<double> u(n), ud(n), f(n);
    for (std::size_t j = 1; j + 1 < phi.nodes(); ++j) {
        for (std::size_t i = 0; i < n; ++i) u[i] = phi.at(j, static_cast<int>(i));
        delayed_row(spec, phi, j, ud);
        spec.reaction(u, ud, f);
        for (std::size_t i = 0; i < n; ++i) {
            const int ii = static_cast<int>(i);
            const double d1 = (phi.at(j + 1, ii) - phi.at(j - 1, ii)) / (2 * h);
            const double d2 = (phi.at(j + 1, ii) - 2 * phi.at(j, ii) + phi.at(j - 1, ii)) / (h * h);
            res.at(j, ii) = d1 - spec.diffusion[i] / c2 * d2 - f[i];
        }
    }
    return res;
}

// Largest drop phi(t_j) - phi(t_{j+1}); <= 0 for a nondecreasing profile.
inline double monotonicity_defect(const ProfileGrid& p) {
    double worst = -INFINITY;
    for (std::size_t j = 0; j + 1 < p.nodes(); ++j)
        for (int i = 0; i < p.n; ++i) worst = std::max(worst, p.at(j, i) - p.at(j + 1, i));
    return worst;
}

} // namespace twave
