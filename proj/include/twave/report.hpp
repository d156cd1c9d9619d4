#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "iterate.hpp"
#include "models.hpp"
#include "pdesim.hpp"
#include "system.hpp"
#include "verify.hpp"

namespace twave {

using Json = nlohmann::ordered_json;

namespace detail {

inline void escape_into(std::string& out, const std::string& s) {
    out += '"';
    for (unsigned char ch : s) {
        switch (ch) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default:
            if (ch < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof buf, "\\u%04x", ch);
                out += buf;
            } else {
                out += static_cast<char>(ch);
            }
        }
    }
    out += '"';
}

inline void emit(std::string& out, const Json& j, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(indent * depth), ' ');
    switch (j.type()) {
    case Json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out += ",\n";
            first = false;
            out += pad;
            escape_into(out, it.key());
            out += ": ";
            emit(out, it.value(), indent, depth + 1);
        }
        out += "\n" + close + "}";
        return;
    }
    case Json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        // Flat numeric arrays stay on one line.
        bool flat = true;
        for (const auto& v : j) flat = flat && (v.is_number() || v.is_null());
        out += flat ? "[" : "[\n";
        bool first = true;
        for (const auto& v : j) {
            if (!first) out += flat ? ", " : ",\n";
            first = false;
            if (!flat) out += pad;
            emit(out, v, indent, depth + 1);
        }
        out += flat ? "]" : "\n" + close + "]";
        return;
    }
    case Json::value_t::number_float: {
        const double v = j.get<double>();
        if (!std::isfinite(v)) {
            out += "null";
            return;
        }
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out += buf;
        return;
    }
    case Json::value_t::string: escape_into(out, j.get<std::string>()); return;
    default: out += j.dump(); return;
    }
}

} // namespace detail

// JSON text with every float at 17 significant digits; NaN and infinities become null.
inline std::string to_text(const Json& j, int indent = 2) {
    std::string out;
    detail::emit(out, j, indent, 0);
    out += '\n';
    return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::config, "cannot write " + path.string());
    f << text;
}

inline Json to_json(const ValidationReport& r) {
    Json j;
    j["pass"] = r.pass;
    j["residual_zero"] = r.residual_zero;
    j["residual_k"] = r.residual_k;
    j["split_ok"] = r.split_ok;
    j["split_messages"] = r.split_messages;
    return j;
}

inline Json to_json(const MonotonicityReport& r) {
    Json j;
    j["pass"] = r.pass();
    j["samples"] = r.samples;
    Json flags = Json::array();
    for (const auto& f : r.flags) {
        Json e;
        e["component"] = f.component + 1;
        e["argument"] = f.argument + 1;
        e["delayed"] = f.delayed;
        e["difference"] = f.difference;
        e["u"] = f.u;
        e["u_delayed"] = f.u_delayed;
        flags.push_back(e);
    }
    j["flags"] = flags;
    return j;
}

inline Json to_json(const VerificationReport& r) {
    Json j;
    j["verdict"] = r.verdict;
    j["mode"] = to_string(r.mode);
    j["derivatives"] = to_string(r.deriv);
    j["tol_margin"] = r.tol_margin;
    j["margins_ok"] = r.margins_ok;
    Json ms = Json::array();
    for (const auto& m : r.margins) {
        Json e;
        e["name"] = m.name;
        e["min_margin"] = m.min_margin;
        e["t_at_min"] = m.t_at_min;
        e["nodes_checked"] = m.nodes_checked;
        ms.push_back(e);
    }
    j["margins"] = ms;
    j["kinks_ok"] = r.kinks_ok;
    Json ks = Json::array();
    for (const auto& k : r.kinks) {
        Json e;
        e["name"] = k.name;
        e["t"] = k.t;
        e["value_jump"] = k.value_jump;
        e["slope_jump"] = k.slope_jump;
        e["ok"] = k.ok;
        ks.push_back(e);
    }
    j["kinks"] = ks;
    j["ordering_ok"] = r.ordering_ok;
    j["ordering_worst"] = r.ordering_worst;
    j["box_ok"] = r.box_ok;
    j["box_worst"] = r.box_worst;
    Json lim;
    lim["mode"] = to_string(r.limits.mode);
    lim["upper_left_gap"] = r.limits.upper_left_gap;
    lim["lower_right_gap"] = r.limits.lower_right_gap;
    lim["strict_ok"] = r.limits.strict_ok;
    lim["lower_nonzero"] = r.limits.lower_nonzero;
    lim["upper_not_k"] = r.limits.upper_not_k;
    lim["bracket_ok"] = r.limits.bracket_ok;
    lim["pass"] = r.limits.pass;
    j["limits"] = lim;
    j["failures"] = r.failures;
    return j;
}

inline Json to_json(const IterationReport& r) {
    Json j;
    j["converged"] = r.converged;
    j["phase"] = r.phase;
    j["iterations"] = r.iterations;
    j["sweeps"] = r.sweeps;
    j["picard_steps"] = r.picard_steps;
    j["fixed_point_residual"] = r.fixed_point_residual;
    j["rho"] = r.rho;
    j["gap_history"] = r.gap_history;
    j["sup_deltas"] = r.sup_deltas;
    j["rho_deltas"] = r.rho_deltas;
    j["sandwich_violations"] = r.sandwich_violations;
    j["residual_history"] = r.residual_history;
    return j;
}

inline Json to_json(const CrossValidationReport& r) {
    Json j;
    j["c"] = r.c;
    j["front_found"] = r.front_found;
    j["measured_speed"] = r.measured_speed;
    j["speed_deviation"] = r.speed_deviation;
    j["shape_drift"] = r.shape_drift;
    j["best_shift"] = r.best_shift;
    j["dt"] = r.dt;
    j["t_end"] = r.t_end;
    j["field_min"] = r.field_min;
    j["field_max"] = r.field_max;
    j["box_ok"] = r.box_ok;
    Json pos = Json::array();
    for (std::size_t s = 0; s < r.times.size(); ++s) {
        Json e;
        e["t"] = r.times[s];
        e["x"] = r.positions[s] ? Json(*r.positions[s]) : Json(nullptr);
        pos.push_back(e);
    }
    j["front"] = pos;
    return j;
}

inline Json model_json(const BuiltModel& m) {
    Json j;
    j["id"] = m.model_id;
    j["c"] = m.c;
    j["critical_speed"] = m.critical_speed;
    j["family"] = m.pair.family;
    j["mode"] = to_string(m.mode);
    j["diffusion"] = m.spec.diffusion;
    j["delays"] = m.spec.delays;
    j["k_state"] = m.spec.k_state;
    j["beta"] = m.spec.lipschitz;
    j["grid"] = Json{{"T", m.pair.upper.T}, {"N", m.pair.upper.N}, {"h", m.pair.upper.h()}};
    Json k = Json::array();
    for (const auto& ck : m.kernel.comp)
        k.push_back(Json{{"lambda1", ck.lambda1}, {"lambda2", ck.lambda2}, {"scale", ck.scale}});
    j["kernel"] = k;
    Json cst;
    for (const auto& [name, v] : m.constants) cst[name] = v;
    j["constants"] = cst;
    j["warnings"] = m.warnings;
    return j;
}

// Long format: t, x, component, value.
inline void write_record_csv(const SpaceTimeRecord& rec, const std::filesystem::path& path, int every_node = 1) {
    std::string out = "t,x,component,value\n";
    char buf[128];
    const auto step = static_cast<std::size_t>(std::max(1, every_node));
    for (std::size_t s = 0; s < rec.times.size(); ++s)
        for (int i = 0; i < rec.n; ++i)
            for (std::size_t j = 0; j < rec.nx(); j += step) {
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d,%.17g\n", rec.times[s], rec.x[j], i + 1,
                              rec.at(s, i, j));
                out += buf;
            }
    write_text(path, out);
}

inline void write_margins_csv(const VerificationReport& r, const std::filesystem::path& path) {
    std::string out = "t";
    for (std::size_t i = 0; i < r.nodes.upper.size(); ++i) out += ",upper_" + std::to_string(i + 1);
    for (std::size_t i = 0; i < r.nodes.lower.size(); ++i) out += ",lower_" + std::to_string(i + 1);
    out += "\n";
    char buf[40];
    for (std::size_t j = 0; j < r.nodes.t.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", r.nodes.t[j]);
        out += buf;
        for (const auto* side : {&r.nodes.upper, &r.nodes.lower})
            for (const auto& col : *side) {
                if (std::isfinite(col[j])) {
                    std::snprintf(buf, sizeof buf, ",%.17g", col[j]);
                    out += buf;
                } else {
                    out += ",";
                }
            }
        out += "\n";
    }
    write_text(path, out);
}

inline void write_trace_csv(const IterationReport& r, const std::filesystem::path& path) {
    std::string out = "iteration,phase,gap,residual,sup_delta\n";
    char buf[160];
    const std::size_t total = r.sup_deltas.size();
    for (std::size_t k = 0; k < total; ++k) {
        const bool sweep = k < r.gap_history.size();
        const double gap = sweep ? r.gap_history[k] : NAN;
        const std::size_t pk = k - (sweep ? 0 : r.gap_history.size());
        const double res = !sweep && pk < r.residual_history.size() ? r.residual_history[pk] : NAN;
        std::snprintf(buf, sizeof buf, "%zu,%s,%.17g,%.17g,%.17g\n", k + 1, sweep ? "sweep" : "picard", gap, res,
                      r.sup_deltas[k]);
        out += buf;
    }
    write_text(path, out);
}

} // namespace twave
