#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace twave {

// f(u, u_delayed) -> out; u_delayed[j] holds component j at t - tau_j.
using Reaction = std::function<void(std::span<const double> u,
                                    std::span<const double> u_delayed,
                                    std::span<double> out)>;

using IndexSet = std::vector<int>;

struct QuasimonotoneSplit {
    // Per component i; indices are zero-based.
    std::vector<IndexSet> inc_now, dec_now, inc_delayed, dec_delayed;

    bool ordered() const {
        for (const auto& s : dec_now)
            if (!s.empty()) return false;
        for (const auto& s : dec_delayed)
            if (!s.empty()) return false;
        return true;
    }

    // Everything nondecreasing: the split of a quasimonotone system.
    static QuasimonotoneSplit all_increasing(int n) {
        QuasimonotoneSplit s;
        for (int i = 0; i < n; ++i) {
            IndexSet now, del;
            for (int j = 0; j < n; ++j) {
                if (j != i) now.push_back(j);
                del.push_back(j);
            }
            s.inc_now.push_back(now);
            s.dec_now.emplace_back();
            s.inc_delayed.push_back(del);
            s.dec_delayed.emplace_back();
        }
        return s;
    }
};

inline bool contains(const IndexSet& s, int j) {
    return std::find(s.begin(), s.end(), j) != s.end();
}

struct SystemSpec {
    std::string name;
    int n = 0;
    std::vector<double> diffusion;
    std::vector<double> delays;
    Reaction reaction;
    QuasimonotoneSplit split;
    std::vector<double> zero_state;
    std::vector<double> k_state;
    std::vector<double> lipschitz;

    double max_delay() const {
        return delays.empty() ? 0.0 : *std::max_element(delays.begin(), delays.end());
    }

    std::vector<double> eval(std::span<const double> u, std::span<const double> ud) const {
        std::vector<double> out(static_cast<std::size_t>(n), 0.0);
        reaction(u, ud, out);
        return out;
    }
};

// Portable uniform draws: mt19937_64 is fully specified, the distributions are not.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::mt19937_64 gen_;
};

inline void check_structure(const SystemSpec& s) {
    const auto n = static_cast<std::size_t>(s.n);
    if (s.n < 1) throw Error(ErrorKind::structural, "system needs at least one component");
    auto need = [&](std::size_t got, const char* what) {
        if (got != n)
            throw Error(ErrorKind::structural,
                        std::string(what) + " has " + std::to_string(got) + " entries, expected " +
                            std::to_string(n));
    };
    need(s.diffusion.size(), "diffusion");
    need(s.delays.size(), "delays");
    need(s.zero_state.size(), "zero_state");
    need(s.k_state.size(), "k_state");
    need(s.lipschitz.size(), "lipschitz");
    need(s.split.inc_now.size(), "split.inc_now");
    need(s.split.dec_now.size(), "split.dec_now");
    need(s.split.inc_delayed.size(), "split.inc_delayed");
    need(s.split.dec_delayed.size(), "split.dec_delayed");
    if (!s.reaction) throw Error(ErrorKind::structural, "reaction evaluator missing");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(s.diffusion[i] > 0))
            throw Error(ErrorKind::parameter, "diffusion d_" + std::to_string(i + 1) + " must be > 0");
        if (!(s.delays[i] >= 0))
            throw Error(ErrorKind::parameter, "delay tau_" + std::to_string(i + 1) + " must be >= 0");
        if (!(s.lipschitz[i] > 0))
            throw Error(ErrorKind::parameter, "lipschitz beta_" + std::to_string(i + 1) + " must be > 0");
        if (!(s.k_state[i] > 0))
            throw Error(ErrorKind::parameter, "K_" + std::to_string(i + 1) + " must be > 0");
    }
}

struct ValidationReport {
    std::vector<double> residual_zero;  // |f_i(0,0)|
    std::vector<double> residual_k;     // |f_i(K,K)|
    bool split_ok = true;
    std::vector<std::string> split_messages;
    bool pass = false;
};

inline ValidationReport validate_system(const SystemSpec& spec, double tol_eq = 1e-12) {
    check_structure(spec);
    const auto n = static_cast<std::size_t>(spec.n);
    ValidationReport rep;
    auto probe = [&](const std::vector<double>& state) {
        std::vector<double> out(n, 0.0);
        spec.reaction(state, state, out);
        for (double& v : out) v = std::fabs(v);
        return out;
    };
    // The evaluator may return a wrong-size vector only through its span; guard
    // against nonfinite output instead.
    rep.residual_zero = probe(spec.zero_state);
    rep.residual_k = probe(spec.k_state);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(rep.residual_zero[i]) || !std::isfinite(rep.residual_k[i]))
            throw Error(ErrorKind::structural, "reaction returned a nonfinite value at an endpoint");
    }

    const int ni = spec.n;
    for (int i = 0; i < ni; ++i) {
        const auto& a = spec.split.inc_now[static_cast<std::size_t>(i)];
        const auto& b = spec.split.dec_now[static_cast<std::size_t>(i)];
        const auto& c = spec.split.inc_delayed[static_cast<std::size_t>(i)];
        const auto& d = spec.split.dec_delayed[static_cast<std::size_t>(i)];
        auto label = "component " + std::to_string(i + 1) + ": ";
        for (int j = 0; j < ni; ++j) {
            int hits_now = static_cast<int>(contains(a, j)) + static_cast<int>(contains(b, j));
            int hits_del = static_cast<int>(contains(c, j)) + static_cast<int>(contains(d, j));
            if (j == i && hits_now != 0) {
                rep.split_ok = false;
                rep.split_messages.push_back(label + "own index listed in a current-state set");
            }
            if (j != i && hits_now != 1) {
                rep.split_ok = false;
                rep.split_messages.push_back(label + "current argument " + std::to_string(j + 1) +
                                             " must appear in exactly one of inc_now/dec_now");
            }
            if (hits_del != 1) {
                rep.split_ok = false;
                rep.split_messages.push_back(label + "delayed argument " + std::to_string(j + 1) +
                                             " must appear in exactly one of inc_delayed/dec_delayed");
            }
        }
        for (const auto* set : {&a, &b, &c, &d})
            for (int j : *set)
                if (j < 0 || j >= ni) {
                    rep.split_ok = false;
                    rep.split_messages.push_back(label + "index out of range");
                }
    }

    rep.pass = rep.split_ok;
    for (std::size_t i = 0; i < n; ++i)
        if (rep.residual_zero[i] > tol_eq || rep.residual_k[i] > tol_eq) rep.pass = false;
    return rep;
}

struct MonotonicityFlag {
    int component = 0;  // zero-based
    int argument = 0;
    bool delayed = false;
    double difference = 0;
    std::vector<double> u, u_delayed;
};

struct MonotonicityReport {
    int samples = 0;
    std::vector<MonotonicityFlag> flags;
    bool pass() const { return flags.empty(); }
};

inline MonotonicityReport check_quasimonotone(const SystemSpec& spec, int sample_count,
                                              std::uint64_t rng_seed, double tol_mono = 1e-10,
                                              double h_fd = -1) {
    check_structure(spec);
    if (sample_count < 1) throw Error(ErrorKind::parameter, "sample_count must be >= 1");
    const auto n = static_cast<std::size_t>(spec.n);
    if (h_fd <= 0) h_fd = 1e-6 * *std::max_element(spec.k_state.begin(), spec.k_state.end());

    MonotonicityReport rep;
    rep.samples = sample_count;
    Rng rng(rng_seed);
    std::vector<double> u(n), ud(n), out0(n), out1(n);
    for (int s = 0; s < sample_count; ++s) {
        for (std::size_t j = 0; j < n; ++j) {
            u[j] = rng.uniform(0, spec.k_state[j]);
            ud[j] = rng.uniform(0, spec.k_state[j]);
        }
        spec.reaction(u, ud, out0);
        for (int i = 0; i < spec.n; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            for (int j = 0; j < spec.n; ++j) {
                for (bool delayed : {false, true}) {
                    if (!delayed && j == i) continue;
                    const IndexSet& inc = delayed ? spec.split.inc_delayed[ii] : spec.split.inc_now[ii];
                    const IndexSet& dec = delayed ? spec.split.dec_delayed[ii] : spec.split.dec_now[ii];
                    auto& x = delayed ? ud : u;
                    const auto jj = static_cast<std::size_t>(j);
                    const double saved = x[jj];
                    // Step inward so the probe stays inside the box.
                    const double step = (saved + h_fd <= spec.k_state[jj]) ? h_fd : -h_fd;
                    x[jj] = saved + step;
                    spec.reaction(u, ud, out1);
                    x[jj] = saved;
                    const double diff = (out1[ii] - out0[ii]) * (step > 0 ? 1.0 : -1.0);
                    bool bad = false;
                    if (contains(inc, j) && diff < -tol_mono) bad = true;
                    if (contains(dec, j) && diff > tol_mono) bad = true;
                    if (bad) rep.flags.push_back({i, j, delayed, diff, u, ud});
                }
            }
        }
    }
    return rep;
}

// Largest sampled quotient |f_i(x) - f_i(y)| / |x - y|_inf over random pairs
// in the box (current and delayed arguments perturbed together).
inline std::vector<double> sample_lipschitz(const SystemSpec& spec, int sample_count,
                                            std::uint64_t rng_seed) {
    check_structure(spec);
    const auto n = static_cast<std::size_t>(spec.n);
    std::vector<double> best(n, 0.0);
    Rng rng(rng_seed);
    std::vector<double> u(n), ud(n), v(n), vd(n), fu(n), fv(n);
    for (int s = 0; s < sample_count; ++s) {
        double dist = 0;
        for (std::size_t j = 0; j < n; ++j) {
            const double K = spec.k_state[j];
            u[j] = rng.uniform(0, K);
            ud[j] = rng.uniform(0, K);
            v[j] = std::clamp(u[j] + rng.uniform(-1e-3, 1e-3) * K, 0.0, K);
            vd[j] = std::clamp(ud[j] + rng.uniform(-1e-3, 1e-3) * K, 0.0, K);
            dist = std::max({dist, std::fabs(u[j] - v[j]), std::fabs(ud[j] - vd[j])});
        }
        if (dist == 0) continue;
        spec.reaction(u, ud, fu);
        spec.reaction(v, vd, fv);
        for (std::size_t i = 0; i < n; ++i)
            best[i] = std::max(best[i], std::fabs(fu[i] - fv[i]) / dist);
    }
    return best;
}

} // namespace twave
