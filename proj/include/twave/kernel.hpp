#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "error.hpp"
#include "grid.hpp"
#include "system.hpp"

namespace twave {

struct ComponentKernel {
    double lambda1 = 0;  // negative root
    double lambda2 = 0;  // positive root
    double scale = 0;    // c^2 / (d (lambda2 - lambda1))
    double beta = 0;
    double d = 0;
};

struct KernelParams {
    double c = 0;
    std::vector<ComponentKernel> comp;

    // Weight for the |.|_rho norm: 0.9 of the slowest kernel decay rate.
    double default_rho() const {
        double m = INFINITY;
        for (const auto& k : comp) m = std::min({m, -k.lambda1, k.lambda2});
        return 0.9 * m;
    }
};

// Roots of (d/c^2) l^2 - l - beta = 0.
inline std::pair<double, double> char_roots(double d, double c, double beta) {
    if (!(d > 0)) throw Error(ErrorKind::parameter, "char_roots: d must be > 0");
    if (!(c > 0)) throw Error(ErrorKind::parameter, "char_roots: c must be > 0");
    if (!(beta > 0)) throw Error(ErrorKind::parameter, "char_roots: beta must be > 0");
    const double c2 = c * c;
    const double s = std::sqrt(1.0 + 4.0 * beta * d / c2);
    const double l2 = c2 * (1.0 + s) / (2.0 * d);
    // The small-magnitude root from Vieta avoids cancellation in 1 - s.
    const double l1 = -beta * c2 / (d * l2);
    return {l1, l2};
}

inline ComponentKernel make_component_kernel(double d, double c, double beta) {
    auto [l1, l2] = char_roots(d, c, beta);
    return {l1, l2, c * c / (d * (l2 - l1)), beta, d};
}

inline KernelParams make_kernel(const SystemSpec& spec, double c) {
    check_structure(spec);
    KernelParams kp;
    kp.c = c;
    for (int i = 0; i < spec.n; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        kp.comp.push_back(make_component_kernel(spec.diffusion[ii], c, spec.lipschitz[ii]));
    }
    return kp;
}

namespace detail {

// Exact cell integrals of e^{lambda s} against the two hat functions on [0, h]:
// A0 = int e^{lambda s}, A1 = int s e^{lambda s}.
struct CellWeights {
    double decay;  // e^{lambda h}
    double a0, a1;
};

inline CellWeights cell_weights(double lambda, double h) {
    const double x = lambda * h;
    CellWeights w{};
    w.decay = std::exp(x);
    if (std::fabs(x) < 0.5) {
        // a0 = h sum x^k/(k+1)!, a1 = h^2 sum x^k/(k! (k+2)); the closed form cancels here.
        double term = 1.0, s0 = 0.0, s1 = 0.0;
        for (int k = 0; k < 30; ++k) {
            s0 += term / (k + 1);
            s1 += term / (k + 2);
            term *= x / (k + 1);
        }
        w.a0 = h * s0;
        w.a1 = h * h * s1;
    } else {
        const double em = std::expm1(x);
        w.a0 = em / lambda;
        w.a1 = (x * (em + 1.0) - em) / (lambda * lambda);
    }
    return w;
}

} // namespace detail

// scale * (int_{-inf}^t e^{l1 (t-s)} g + int_t^inf e^{l2 (t-s)} g) at every node,
// g piecewise linear on the nodes and constant beyond them.
inline std::vector<double> apply_green(const ComponentKernel& k, double h, std::span<const double> g,
                                       double g_left, double g_right) {
    const std::size_t nn = g.size();
    if (nn < 2) throw Error(ErrorKind::structural, "apply_green needs at least two nodes");
    std::vector<double> left(nn), out(nn);

    const auto fw = detail::cell_weights(k.lambda1, h);
    const double fw_old = fw.a1 / h;           // weight of g_j
    const double fw_new = fw.a0 - fw.a1 / h;   // weight of g_{j+1}
    left[0] = g_left / (-k.lambda1);
    for (std::size_t j = 0; j + 1 < nn; ++j)
        left[j + 1] = fw.decay * left[j] + fw_old * g[j] + fw_new * g[j + 1];

    const auto bw = detail::cell_weights(-k.lambda2, h);
    const double bw_near = bw.a0 - bw.a1 / h;  // weight of g_j
    const double bw_far = bw.a1 / h;           // weight of g_{j+1}
    double right = g_right / k.lambda2;
    out[nn - 1] = k.scale * (left[nn - 1] + right);
    for (std::size_t j = nn - 1; j-- > 0;) {
        right = bw.decay * right + bw_near * g[j] + bw_far * g[j + 1];
        out[j] = k.scale * (left[j] + right);
    }
    return out;
}

// Grid form: single-component forcing in, single-component profile out.
inline ProfileGrid apply_green(const ComponentKernel& k, const ProfileGrid& forcing) {
    if (forcing.n != 1) throw Error(ErrorKind::structural, "apply_green expects a single component");
    ProfileGrid out = forcing;
    out.values = apply_green(k, forcing.h(), forcing.values, forcing.left_asym[0], forcing.right_asym[0]);
    out.left_asym[0] = forcing.left_asym[0] / k.beta;
    out.right_asym[0] = forcing.right_asym[0] / k.beta;
    return out;
}

inline void check_box(const SystemSpec& spec, const ProfileGrid& phi, double tol_box, const char* what) {
    auto bad = [&](double v, int i) {
        return !(v >= -tol_box && v <= spec.k_state[static_cast<std::size_t>(i)] + tol_box);
    };
    for (std::size_t j = 0; j < phi.nodes(); ++j)
        for (int i = 0; i < phi.n; ++i)
            if (bad(phi.at(j, i), i))
                throw Error(ErrorKind::domain, std::string(what) + " leaves the [0, K] box at t = " +
                                                   format_g(phi.t(j), 9) + ", component " +
                                                   std::to_string(i + 1) + ", value " +
                                                   format_g(phi.at(j, i), 9));
    for (int i = 0; i < phi.n; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        if (bad(phi.left_asym[ii], i) || bad(phi.right_asym[ii], i))
            throw Error(ErrorKind::domain, std::string(what) + " asymptote outside the [0, K] box");
    }
}

// Delayed state at node j: component k read at t_j - tau_k.
inline void delayed_row(const SystemSpec& spec, const ProfileGrid& p, std::size_t j, std::vector<double>& out) {
    const double t = p.t(j);
    for (int k = 0; k < p.n; ++k)
        out[static_cast<std::size_t>(k)] = delayed_eval(p, k, t, spec.delays[static_cast<std::size_t>(k)]);
}

inline ProfileGrid apply_F(const SystemSpec& spec, const KernelParams& kp, const ProfileGrid& phi,
                           double tol_box = 1e-9) {
    if (phi.n != spec.n || static_cast<int>(kp.comp.size()) != spec.n)
        throw Error(ErrorKind::structural, "apply_F: component counts disagree");
    check_box(spec, phi, tol_box, "apply_F input");
    const auto n = static_cast<std::size_t>(spec.n);
    std::vector<std::vector<double>> H(n, std::vector<double>(phi.nodes()));
    std::vector<double> u(n), ud(n), f(n);
    for (std::size_t j = 0; j < phi.nodes(); ++j) {
        for (std::size_t i = 0; i < n; ++i) u[i] = phi.at(j, static_cast<int>(i));
        delayed_row(spec, phi, j, ud);
        spec.reaction(u, ud, f);
        for (std::size_t i = 0; i < n; ++i) H[i][j] = f[i] + spec.lipschitz[i] * u[i];
    }
    std::vector<double> HL(n), HR(n);
    spec.reaction(phi.left_asym, phi.left_asym, f);
    for (std::size_t i = 0; i < n; ++i) HL[i] = f[i] + spec.lipschitz[i] * phi.left_asym[i];
    spec.reaction(phi.right_asym, phi.right_asym, f);
    for (std::size_t i = 0; i < n; ++i) HR[i] = f[i] + spec.lipschitz[i] * phi.right_asym[i];

    ProfileGrid out = same_shape(phi);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& k = kp.comp[i];
        out.set_column(static_cast<int>(i), apply_green(k, phi.h(), H[i], HL[i], HR[i]));
        out.left_asym[i] = HL[i] / k.beta;
        out.right_asym[i] = HR[i] / k.beta;
    }
    return out;
}

} // namespace twave
