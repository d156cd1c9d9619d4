#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "grid.hpp"
#include "system.hpp"

namespace twave {

enum class SeedKind { wave_profile, step };

struct SimConfig {
    double x_min = 0;
    double x_max = 800;
    int nx = 8001;
    double dt = -1;  // < 0: largest stable step times 0.95
    double t_end = 50;
    int record_stride = -1;  // < 0: one snapshot per time unit
    SeedKind seed = SeedKind::wave_profile;
    // Seed u(x, t) = phi(t + (x - x_seed) / c); for the step seed, K for x >= x_seed and 0 below.
    double x_seed = 600;
    double safety = 0.4;
};

struct SpaceTimeRecord {
    std::vector<double> x;
    std::vector<double> times;
    int n = 0;
    // fields[s][i * nx + j]
    std::vector<std::vector<double>> fields;

    std::size_t nx() const { return x.size(); }
    double at(std::size_t s, int i, std::size_t j) const { return fields[s][static_cast<std::size_t>(i) * nx() + j]; }
};

inline double stable_dt(const SystemSpec& spec, const SimConfig& cfg) {
    const double hx = (cfg.x_max - cfg.x_min) / (cfg.nx - 1);
    const double dmax = *std::max_element(spec.diffusion.begin(), spec.diffusion.end());
    return cfg.safety * hx * hx / (2.0 * dmax);
}

inline void check_sim_config(const SystemSpec& spec, const SimConfig& cfg) {
    check_structure(spec);
    if (!(cfg.x_max > cfg.x_min)) throw Error(ErrorKind::config, "simulation needs x_max > x_min");
    if (cfg.nx < 3) throw Error(ErrorKind::config, "simulation needs nx >= 3");
    if (!(cfg.safety > 0 && cfg.safety <= 0.5)) throw Error(ErrorKind::config, "safety must lie in (0, 0.5]");
    if (!(cfg.t_end > spec.max_delay()))
        throw Error(ErrorKind::config, "t_end must exceed the largest delay " + format_g(spec.max_delay(), 9));
    if (cfg.dt > stable_dt(spec, cfg))
        throw Error(ErrorKind::config, "dt = " + format_g(cfg.dt, 9) + " exceeds the stability limit " +
                                           format_g(stable_dt(spec, cfg), 9));
    if (cfg.dt == 0) throw Error(ErrorKind::config, "dt must be > 0");
}

using SeedFn = std::function<double(int i, double x, double t)>;

// Explicit Euler with a three-point Laplacian and mirrored ghost nodes.
inline SpaceTimeRecord simulate(const SystemSpec& spec, const SimConfig& cfg, const SeedFn& seed) {
    check_sim_config(spec, cfg);
    const int n = spec.n;
    const auto nn = static_cast<std::size_t>(n);
    const auto nx = static_cast<std::size_t>(cfg.nx);
    const double hx = (cfg.x_max - cfg.x_min) / (cfg.nx - 1);
    const double dt = cfg.dt > 0 ? cfg.dt : 0.95 * stable_dt(spec, cfg);
    const auto steps = static_cast<long>(std::ceil(cfg.t_end / dt - 1e-9));
    const long stride = cfg.record_stride > 0 ? cfg.record_stride : std::max(1L, std::lround(1.0 / dt));

    // Ring buffer of past levels; level n sits in slot n mod depth.
    const auto depth = static_cast<std::size_t>(std::ceil(spec.max_delay() / dt)) + 2;
    const std::size_t width = nn * nx;
    std::vector<double> ring(depth * width);
    auto slot = [&](long level) {
        const auto d = static_cast<long>(depth);
        return &ring[static_cast<std::size_t>(((level % d) + d) % d) * width];
    };

    SpaceTimeRecord rec;
    rec.n = n;
    rec.x.resize(nx);
    for (std::size_t j = 0; j < nx; ++j) rec.x[j] = cfg.x_min + hx * static_cast<double>(j);
    for (long lv = -static_cast<long>(depth) + 1; lv <= 0; ++lv) {
        double* u = slot(lv);
        const double t = static_cast<double>(lv) * dt;
        for (int i = 0; i < n; ++i)
            for (std::size_t j = 0; j < nx; ++j) u[static_cast<std::size_t>(i) * nx + j] = seed(i, rec.x[j], t);
    }

    // Delay of component k: tau_k = (m_k + th_k) dt.
    std::vector<long> m(nn);
    std::vector<double> th(nn);
    for (std::size_t k = 0; k < nn; ++k) {
        const double s = spec.delays[k] / dt;
        double fl = std::floor(s);
        if (s - fl > 1.0 - 1e-9) fl += 1.0;
        m[k] = static_cast<long>(fl);
        th[k] = std::max(0.0, s - fl);
    }

    auto record = [&](long level) {
        const double* u = slot(level);
        rec.times.push_back(static_cast<double>(level) * dt);
        rec.fields.emplace_back(u, u + width);
    };
    record(0);

    std::vector<double> now(nn), del(nn), f(nn);
    const double inv_h2 = 1.0 / (hx * hx);
    for (long step = 0; step < steps; ++step) {
        const double* u = slot(step);
        std::vector<const double*> a(nn), b(nn);
        for (std::size_t k = 0; k < nn; ++k) {
            a[k] = slot(step - m[k]) + k * nx;
            b[k] = slot(step - m[k] - 1) + k * nx;
        }
        double* out = slot(step + 1);
        for (std::size_t j = 0; j < nx; ++j) {
            for (std::size_t k = 0; k < nn; ++k) {
                now[k] = u[k * nx + j];
                del[k] = th[k] == 0 ? a[k][j] : (1 - th[k]) * a[k][j] + th[k] * b[k][j];
            }
            spec.reaction(now, del, f);
            for (std::size_t i = 0; i < nn; ++i) {
                const double* ui = u + i * nx;
                const double left = j == 0 ? ui[1] : ui[j - 1];
                const double right = j + 1 == nx ? ui[nx - 2] : ui[j + 1];
                const double lap = (left - 2.0 * ui[j] + right) * inv_h2;
                const double v = ui[j] + dt * (spec.diffusion[i] * lap + f[i]);
                if (!std::isfinite(v))
                    throw Error(ErrorKind::blow_up, "non-finite value at t = " +
                                                        format_g(static_cast<double>(step + 1) * dt, 9) +
                                                        ", x = " + format_g(rec.x[j], 9));
                out[i * nx + j] = v;
            }
        }
        if ((step + 1) % stride == 0 || step + 1 == steps) record(step + 1);
    }
    return rec;
}

// Trapezoid mass; with mirrored boundaries this is what the diffusion step conserves.
inline double mass(const SpaceTimeRecord& rec, std::size_t snapshot, int component) {
    const std::size_t nx = rec.nx();
    const double hx = rec.x[1] - rec.x[0];
    double s = 0.5 * (rec.at(snapshot, component, 0) + rec.at(snapshot, component, nx - 1));
    for (std::size_t j = 1; j + 1 < nx; ++j) s += rec.at(snapshot, component, j);
    return s * hx;
}

// Leftmost crossing of `level`, linear between nodes; empty when the snapshot never crosses.
inline std::vector<std::optional<double>> front_position(const SpaceTimeRecord& rec, int component, double level) {
    std::vector<std::optional<double>> pos(rec.times.size());
    for (std::size_t s = 0; s < rec.times.size(); ++s) {
        for (std::size_t j = 0; j + 1 < rec.nx(); ++j) {
            const double a = rec.at(s, component, j) - level;
            const double b = rec.at(s, component, j + 1) - level;
            if (a == 0) {
                pos[s] = rec.x[j];
                break;
            }
            if ((a < 0) != (b < 0) && b != a) {
                pos[s] = rec.x[j] + (rec.x[j + 1] - rec.x[j]) * a / (a - b);
                break;
            }
        }
    }
    return pos;
}

struct CrossValidationReport {
    double c = 0;
    double measured_speed = NAN;
    double speed_deviation = NAN;  // |measured - c| / c
    double shape_drift = NAN;
    double best_shift = NAN;
    bool front_found = false;
    double dt = 0;
    double t_end = 0;
    double field_min = 0, field_max = 0;
    bool box_ok = true;
    std::vector<double> times;
    std::vector<std::optional<double>> positions;
};

inline double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sx += x[k];
        sy += y[k];
    }
    const double mx = sx / n, my = sy / n;
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
    }
    return sxy / sxx;
}

inline SeedFn wave_seed(const ProfileGrid& phi, double c, double x_seed) {
    return [&phi, c, x_seed](int i, double x, double t) { return eval(phi, i, t + (x - x_seed) / c); };
}

inline SeedFn step_seed(const SystemSpec& spec, double x_seed) {
    auto K = spec.k_state;
    return [K, x_seed](int i, double x, double) { return x >= x_seed ? K[static_cast<std::size_t>(i)] : 0.0; };
}

// Seeds the PDE with phi(t + (x - x_seed)/c), measures the level-0.5 front speed of
// the first component and how far the final snapshot is from a translate of phi.
inline CrossValidationReport crossvalidate(const SystemSpec& spec, const ProfileGrid& phi, double c,
                                           SimConfig cfg, SpaceTimeRecord* keep = nullptr) {
    if (!(c > 0)) throw Error(ErrorKind::parameter, "crossvalidate: c must be > 0");
    if (phi.n != spec.n) throw Error(ErrorKind::structural, "crossvalidate: profile has the wrong component count");
    if (cfg.dt <= 0) cfg.dt = 0.95 * stable_dt(spec, cfg);
    auto rec = cfg.seed == SeedKind::wave_profile ? simulate(spec, cfg, wave_seed(phi, c, cfg.x_seed))
                                                  : simulate(spec, cfg, step_seed(spec, cfg.x_seed));
    CrossValidationReport rep;
    rep.c = c;
    rep.dt = cfg.dt;
    rep.t_end = rec.times.back();
    rep.times = rec.times;
    const double level = 0.5 * spec.k_state[0];
    rep.positions = front_position(rec, 0, level);

    rep.field_min = INFINITY;
    rep.field_max = -INFINITY;
    for (const auto& fld : rec.fields)
        for (int i = 0; i < spec.n; ++i)
            for (std::size_t j = 0; j < rec.nx(); ++j) {
                const double v = fld[static_cast<std::size_t>(i) * rec.nx() + j];
                rep.field_min = std::min(rep.field_min, v);
                rep.field_max = std::max(rep.field_max, v);
                if (v < -1e-9 || v > spec.k_state[static_cast<std::size_t>(i)] + 1e-9) rep.box_ok = false;
            }

    const double L = cfg.x_max - cfg.x_min;
    const double margin = std::max(10.0 * (rec.x[1] - rec.x[0]), 0.02 * L);
    std::vector<double> ts, xs;
    bool seen = false;
    for (std::size_t s = 0; s < rec.times.size(); ++s) {
        if (!rep.positions[s]) {
            if (seen)
                throw Error(ErrorKind::domain_too_small,
                            "front left the domain at t = " + format_g(rec.times[s], 9) +
                                "; enlarge [x_min, x_max], move x_seed or shorten t_end");
            continue;
        }
        seen = true;
        const double x = *rep.positions[s];
        if (x < cfg.x_min + margin || x > cfg.x_max - margin)
            throw Error(ErrorKind::domain_too_small,
                        "front at x = " + format_g(x, 9) + " reached the boundary layer at t = " +
                            format_g(rec.times[s], 9) + "; enlarge [x_min, x_max], move x_seed or shorten t_end");
        ts.push_back(rec.times[s]);
        xs.push_back(x);
    }
    rep.front_found = ts.size() >= 2;
    if (rep.front_found) {
        rep.measured_speed = -least_squares_slope(ts, xs);
        rep.speed_deviation = std::fabs(rep.measured_speed - c) / c;
    }

    // Final snapshot against phi((x - x_seed)/c + sigma): whole-cell offsets first, then a finer pass.
    const std::size_t last = rec.times.size() - 1;
    const double cell = (rec.x[1] - rec.x[0]) / c;
    auto drift_at = [&](double sigma) {
        double worst = 0;
        for (std::size_t j = 0; j < rec.nx(); ++j) {
            const double arg = (rec.x[j] - cfg.x_seed) / c + sigma;
            if (arg < -phi.T || arg > phi.T) continue;
            for (int i = 0; i < spec.n; ++i) worst = std::max(worst, std::fabs(rec.at(last, i, j) - eval(phi, i, arg)));
        }
        return worst;
    };
    const double t_end = rec.times[last];
    const long span = std::lround(20.0 / cell);
    double best = INFINITY, best_sigma = t_end;
    for (long k = -span; k <= span; ++k) {
        const double sigma = t_end + static_cast<double>(k) * cell;
        const double d = drift_at(sigma);
        if (d < best) {
            best = d;
            best_sigma = sigma;
        }
    }
    const double centre = best_sigma;
    for (int k = -20; k <= 20; ++k) {
        const double sigma = centre + k * cell / 20.0;
        const double d = drift_at(sigma);
        if (d < best) {
            best = d;
            best_sigma = sigma;
        }
    }
    rep.shape_drift = best;
    rep.best_shift = best_sigma - t_end;
    if (keep) *keep = std::move(rec);
    return rep;
}

} // namespace twave
