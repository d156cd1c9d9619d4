#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "grid.hpp"

namespace twave {

enum class PairKind { coupled, ordered };
enum class Smoothness { classical, quasi };

inline const char* to_string(PairKind k) { return k == PairKind::coupled ? "coupled" : "ordered"; }
inline const char* to_string(Smoothness s) { return s == Smoothness::classical ? "classical" : "quasi"; }

// Value (order 0), first or second derivative of component i at t.
using ProfileFn = std::function<double(int i, double t, int order)>;

struct AnalyticProfile {
    ProfileFn fn;
    // Per component: points where the second derivative jumps (and possibly the first).
    std::vector<std::vector<double>> kinks;
};

struct CandidatePair {
    ProfileGrid upper;
    ProfileGrid lower;
    PairKind kind = PairKind::coupled;
    Smoothness smoothness = Smoothness::classical;
    std::optional<AnalyticProfile> upper_fn;
    std::optional<AnalyticProfile> lower_fn;
    std::string family;  // "paper", "envelope", "constant", "sweep", ...

    bool has_analytic() const { return upper_fn.has_value() && lower_fn.has_value(); }
};

// Samples an analytic profile on a T/h grid; tails take the supplied limits.
inline ProfileGrid sample_profile(const ProfileFn& fn, int n, double T, double h,
                                  const std::vector<double>& left, const std::vector<double>& right) {
    auto g = make_grid(T, h, n);
    for (std::size_t j = 0; j < g.nodes(); ++j)
        for (int i = 0; i < n; ++i) g.at(j, i) = fn(i, g.t(j), 0);
    g.left_asym = left;
    g.right_asym = right;
    return g;
}

inline CandidatePair constant_pair(double T, double h, const std::vector<double>& lower,
                                   const std::vector<double>& upper, PairKind kind) {
    CandidatePair p;
    p.upper = constant_profile(T, h, upper);
    p.lower = constant_profile(T, h, lower);
    p.kind = kind;
    p.smoothness = Smoothness::classical;
    p.family = "constant";
    auto make_fn = [](std::vector<double> state) {
        AnalyticProfile a;
        a.fn = [state](int i, double, int order) { return order == 0 ? state[static_cast<std::size_t>(i)] : 0.0; };
        a.kinks.assign(state.size(), {});
        return a;
    };
    p.upper_fn = make_fn(upper);
    p.lower_fn = make_fn(lower);
    return p;
}

inline ProfileGrid midpoint(const ProfileGrid& a, const ProfileGrid& b) {
    ProfileGrid m = a;
    for (std::size_t k = 0; k < m.values.size(); ++k) m.values[k] = 0.5 * (a.values[k] + b.values[k]);
    for (std::size_t i = 0; i < m.left_asym.size(); ++i) {
        m.left_asym[i] = 0.5 * (a.left_asym[i] + b.left_asym[i]);
        m.right_asym[i] = 0.5 * (a.right_asym[i] + b.right_asym[i]);
    }
    return m;
}

} // namespace twave
