#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"

namespace twave {

// Profile sampled on t_j = (2j - N) T / N, j = 0..N, with constant tails.
struct ProfileGrid {
    double T = 0;
    std::size_t N = 0;
    int n = 0;
    std::vector<double> values;  // row-major (N+1) x n
    std::vector<double> left_asym, right_asym;

    double h() const { return 2.0 * T / static_cast<double>(N); }
    double t_min() const { return -T; }
    double t_max() const { return T; }
    std::size_t nodes() const { return N + 1; }
    double t(std::size_t j) const {
        return (2.0 * static_cast<double>(j) - static_cast<double>(N)) * T / static_cast<double>(N);
    }
    double& at(std::size_t j, int i) { return values[j * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)]; }
    double at(std::size_t j, int i) const {
        return values[j * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)];
    }
    std::vector<double> column(int i) const {
        std::vector<double> c(nodes());
        for (std::size_t j = 0; j < nodes(); ++j) c[j] = at(j, i);
        return c;
    }
    void set_column(int i, const std::vector<double>& c) {
        for (std::size_t j = 0; j < nodes(); ++j) at(j, i) = c[j];
    }
    // Index of the node closest to t (clamped to the grid).
    std::size_t nearest(double tt) const {
        const double s = (tt + T) / h();
        const double r = std::clamp(std::round(s), 0.0, static_cast<double>(N));
        return static_cast<std::size_t>(r);
    }
};

inline ProfileGrid make_grid(double T, double h, int n) {
    if (!(T > 0) || !(h > 0)) throw Error(ErrorKind::parameter, "grid needs T > 0 and h > 0");
    if (n < 1) throw Error(ErrorKind::structural, "grid needs at least one component");
    ProfileGrid g;
    g.T = T;
    g.N = static_cast<std::size_t>(std::max(2.0, std::round(2.0 * T / h)));
    g.n = n;
    g.values.assign(g.nodes() * static_cast<std::size_t>(n), 0.0);
    g.left_asym.assign(static_cast<std::size_t>(n), 0.0);
    g.right_asym.assign(static_cast<std::size_t>(n), 0.0);
    return g;
}

// Same layout as `like`, zero values.
inline ProfileGrid same_shape(const ProfileGrid& like) {
    ProfileGrid g = like;
    std::fill(g.values.begin(), g.values.end(), 0.0);
    std::fill(g.left_asym.begin(), g.left_asym.end(), 0.0);
    std::fill(g.right_asym.begin(), g.right_asym.end(), 0.0);
    return g;
}

inline ProfileGrid constant_profile(double T, double h, const std::vector<double>& state) {
    auto g = make_grid(T, h, static_cast<int>(state.size()));
    for (std::size_t j = 0; j < g.nodes(); ++j)
        for (int i = 0; i < g.n; ++i) g.at(j, i) = state[static_cast<std::size_t>(i)];
    g.left_asym = state;
    g.right_asym = state;
    return g;
}

inline double eval(const ProfileGrid& p, int component, double t) {
    if (component < 0 || component >= p.n)
        throw Error(ErrorKind::index, "component " + std::to_string(component) + " out of range");
    const auto i = static_cast<std::size_t>(component);
    if (t < p.t_min()) return p.left_asym[i];
    if (t > p.t_max()) return p.right_asym[i];
    const double s = (t + p.T) / p.h();
    const double r = std::round(s);
    // Snap to the node when t is a node up to rounding in (t + T) / h.
    if (std::fabs(s - r) <= 1e-9) return p.at(static_cast<std::size_t>(r), component);
    const double fl = std::floor(s);
    auto j = static_cast<std::size_t>(fl);
    if (j >= p.N) return p.at(p.N, component);
    const double theta = s - fl;
    return p.at(j, component) + theta * (p.at(j + 1, component) - p.at(j, component));
}

inline double delayed_eval(const ProfileGrid& p, int component, double t, double tau) {
    if (!(tau >= 0)) throw Error(ErrorKind::parameter, "delay must be >= 0");
    return eval(p, component, t - tau);
}

struct NormConfig {
    double rho = 1.0;
};

inline double norm_rho(const ProfileGrid& p, const NormConfig& cfg) {
    if (!(cfg.rho > 0)) throw Error(ErrorKind::parameter, "rho must be > 0");
    double best = 0;
    for (std::size_t j = 0; j < p.nodes(); ++j) {
        const double w = std::exp(-cfg.rho * std::fabs(p.t(j)));
        for (int i = 0; i < p.n; ++i) best = std::max(best, std::fabs(p.at(j, i)) * w);
    }
    const double wT = std::exp(-cfg.rho * p.T);
    for (int i = 0; i < p.n; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        best = std::max(best, std::max(std::fabs(p.left_asym[ii]), std::fabs(p.right_asym[ii])) * wT);
    }
    return best;
}

inline double norm_sup(const ProfileGrid& p) {
    double best = 0;
    for (double v : p.values) best = std::max(best, std::fabs(v));
    for (double v : p.left_asym) best = std::max(best, std::fabs(v));
    for (double v : p.right_asym) best = std::max(best, std::fabs(v));
    return best;
}

// a - b on a shared layout (values and asymptotes).
inline ProfileGrid difference(const ProfileGrid& a, const ProfileGrid& b) {
    if (a.N != b.N || a.n != b.n || a.T != b.T)
        throw Error(ErrorKind::structural, "profiles live on different grids");
    ProfileGrid d = a;
    for (std::size_t k = 0; k < d.values.size(); ++k) d.values[k] -= b.values[k];
    for (std::size_t i = 0; i < d.left_asym.size(); ++i) {
        d.left_asym[i] -= b.left_asym[i];
        d.right_asym[i] -= b.right_asym[i];
    }
    return d;
}

inline double sup_distance(const ProfileGrid& a, const ProfileGrid& b) {
    return norm_sup(difference(a, b));
}

inline std::string format_g(double v, int digits) {
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

inline void write_profile_csv(const ProfileGrid& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::config, "cannot open " + path + " for writing");
    out.precision(17);
    out << "t";
    for (int i = 0; i < p.n; ++i) out << ",phi_" << (i + 1);
    out << "\n";
    for (std::size_t j = 0; j < p.nodes(); ++j) {
        out << p.t(j);
        for (int i = 0; i < p.n; ++i) out << "," << p.at(j, i);
        out << "\n";
    }
}

// Reads a profile CSV written by write_profile_csv; T and the asymptotes come
// from the sidecar, so callers pass them in.
inline ProfileGrid read_profile_csv(const std::string& path, const std::vector<double>& left,
                                    const std::vector<double>& right) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::config, "cannot open profile " + path);
    std::string line;
    std::getline(in, line);
    const int n = static_cast<int>(std::count(line.begin(), line.end(), ','));
    if (n < 1) throw Error(ErrorKind::config, "profile " + path + " has no components");
    std::vector<double> ts, vals;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        int col = 0;
        while (std::getline(ss, cell, ',')) {
            const double v = std::stod(cell);
            if (col == 0) ts.push_back(v);
            else vals.push_back(v);
            ++col;
        }
        if (col != n + 1) throw Error(ErrorKind::config, "ragged row in " + path);
    }
    if (ts.size() < 3) throw Error(ErrorKind::config, "profile " + path + " too short");
    ProfileGrid g;
    g.T = ts.back();
    g.N = ts.size() - 1;
    g.n = n;
    g.values = std::move(vals);
    if (std::fabs(ts.front() + g.T) > 1e-9 * std::max(1.0, g.T))
        throw Error(ErrorKind::config, "profile " + path + " is not on a symmetric grid");
    g.left_asym = left;
    g.right_asym = right;
    if (left.size() != static_cast<std::size_t>(n) || right.size() != static_cast<std::size_t>(n))
        throw Error(ErrorKind::config, "asymptote size does not match profile " + path);
    return g;
}

} // namespace twave
