#pragma once

/// \file serialize.hpp
/// Deterministic output: a small JSON emitter (17 significant digits,
/// insertion-ordered keys), CSV writers for trajectories / comparison
/// profiles / eigenfunctions, and whitespace-column plot data.
///
/// Emission is deliberately in-house so that byte-identical reports come out
/// of repeated runs on the same input; floating-point values are printed with
/// printf "%.17g", which round-trips IEEE doubles.

#include <cstdio>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "comparison.hpp"
#include "eigen.hpp"
#include "errors.hpp"
#include "pde.hpp"
#include "report.hpp"
#include "verify.hpp"

namespace qcomp {

/// Format one double with 17 significant digits (round-trip exact).
/// Non-finite values are rejected: reports and curves are required to be
/// finite, and JSON has no literal for inf/nan.
inline std::string fmt_g17(double v) {
    if (!std::isfinite(v)) throw IOError("fmt_g17: non-finite value");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
}

/// Minimal JSON document tree. Object keys keep insertion order so the
/// emitted bytes are a pure function of the build-up sequence.
class JsonValue {
  public:
    enum class Kind { null_v, bool_v, number, string, array, object };

    JsonValue() : kind_(Kind::null_v) {}

    static JsonValue boolean(bool b) {
        JsonValue v;
        v.kind_ = Kind::bool_v;
        v.bool_ = b;
        return v;
    }
    static JsonValue number(double x) {
        JsonValue v;
        v.kind_ = Kind::number;
        v.num_ = x;
        return v;
    }
    static JsonValue text(std::string s) {
        JsonValue v;
        v.kind_ = Kind::string;
        v.str_ = std::move(s);
        return v;
    }
    static JsonValue array() {
        JsonValue v;
        v.kind_ = Kind::array;
        return v;
    }
    static JsonValue object() {
        JsonValue v;
        v.kind_ = Kind::object;
        return v;
    }

    /// Append to an array value.
    JsonValue& push(JsonValue v) {
        if (kind_ != Kind::array) throw IOError("JsonValue::push on non-array");
        arr_.push_back(std::move(v));
        return *this;
    }

    /// Set (append) a key on an object value.
    JsonValue& set(const std::string& key, JsonValue v) {
        if (kind_ != Kind::object) throw IOError("JsonValue::set on non-object");
        members_.emplace_back(key, std::move(v));
        return *this;
    }
    JsonValue& set(const std::string& key, double x) { return set(key, number(x)); }
    JsonValue& set(const std::string& key, bool b) { return set(key, boolean(b)); }
    JsonValue& set(const std::string& key, const char* s) { return set(key, text(s)); }
    JsonValue& set(const std::string& key, const std::string& s) { return set(key, text(s)); }

    /// Serialize with two-space indentation and a trailing newline.
    std::string dump() const {
        std::string out;
        emit(out, 0);
        out.push_back('\n');
        return out;
    }

  private:
    static void escape_into(std::string& out, const std::string& s) {
        out.push_back('"');
        for (unsigned char c : s) {
            switch (c) {
                case '"': out += "\\\""; break;
                case '\\': out += "\\\\"; break;
                case '\n': out += "\\n"; break;
                case '\t': out += "\\t"; break;
                case '\r': out += "\\r"; break;
                default:
                    if (c < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof buf, "\\u%04x", c);
                        out += buf;
                    } else {
                        out.push_back(static_cast<char>(c));
                    }
            }
        }
        out.push_back('"');
    }

    void emit(std::string& out, int depth) const {
        const std::string pad(2 * static_cast<std::size_t>(depth), ' ');
        const std::string pad_in(2 * static_cast<std::size_t>(depth + 1), ' ');
        switch (kind_) {
            case Kind::null_v: out += "null"; break;
            case Kind::bool_v: out += bool_ ? "true" : "false"; break;
            case Kind::number: out += fmt_g17(num_); break;
            case Kind::string: escape_into(out, str_); break;
            case Kind::array:
                if (arr_.empty()) {
                    out += "[]";
                    break;
                }
                out += "[\n";
                for (std::size_t i = 0; i < arr_.size(); ++i) {
                    out += pad_in;
                    arr_[i].emit(out, depth + 1);
                    if (i + 1 < arr_.size()) out.push_back(',');
                    out.push_back('\n');
                }
                out += pad + "]";
                break;
            case Kind::object:
                if (members_.empty()) {
                    out += "{}";
                    break;
                }
                out += "{\n";
                for (std::size_t i = 0; i < members_.size(); ++i) {
                    out += pad_in;
                    escape_into(out, members_[i].first);
                    out += ": ";
                    members_[i].second.emit(out, depth + 1);
                    if (i + 1 < members_.size()) out.push_back(',');
                    out.push_back('\n');
                }
                out += pad + "}";
                break;
        }
    }

    Kind kind_;
    bool bool_ = false;
    double num_ = 0.0;
    std::string str_;
    std::vector<JsonValue> arr_;
    std::vector<std::pair<std::string, JsonValue>> members_;
};

/// Write a whole text file, throwing IOError on any failure.
inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IOError("cannot open for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IOError("short write: " + path);
}

/// CheckReport as a JSON object (name, verdict, worst violation + location,
/// tolerance, and any metadata in insertion order).
inline JsonValue to_json(const CheckReport& r) {
    JsonValue o = JsonValue::object();
    o.set("name", r.name);
    o.set("passed", r.passed);
    o.set("worst_violation", r.worst_violation);
    JsonValue loc = JsonValue::object();
    loc.set("index", static_cast<double>(r.worst_location.index));
    loc.set("s", r.worst_location.s);
    loc.set("t", r.worst_location.t);
    o.set("worst_location", std::move(loc));
    o.set("tolerance_used", r.tolerance_used);
    if (!r.metadata.empty()) {
        JsonValue meta = JsonValue::object();
        for (const auto& kv : r.metadata) meta.set(kv.first, kv.second);
        o.set("metadata", std::move(meta));
    }
    return o;
}

/// HypothesisReport as a JSON object with per-hypothesis sub-reports.
inline JsonValue to_json(const HypothesisReport& r) {
    JsonValue o = JsonValue::object();
    o.set("name", r.name);
    o.set("passed", r.passed);
    JsonValue checks = JsonValue::array();
    for (const auto& h : r.hypotheses) checks.push(to_json(h));
    o.set("hypotheses", std::move(checks));
    return o;
}

/// Eigenvalue result summary (the eigenfunction itself goes to CSV).
inline JsonValue to_json(const EigenResult& r) {
    JsonValue o = JsonValue::object();
    o.set("lambda", r.lambda);
    o.set("residual", r.residual);
    o.set("iterations", static_cast<double>(r.iterations));
    o.set("bc", to_string(r.bc));
    JsonValue br = JsonValue::object();
    br.set("lo", r.bracket.lo);
    br.set("hi", r.bracket.hi);
    o.set("bracket", std::move(br));
    o.set("matching_gap", r.matching_gap);
    o.set("grid_points", static_cast<double>(r.s.size()));
    return o;
}

/// Trajectory CSV: one row per (snapshot, node) with columns t,s,u.
inline std::string trajectory_csv(const Trajectory& traj) {
    std::string out = "t,s,u\n";
    for (const auto& field : traj) {
        const auto grid = field.grid();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            out += fmt_g17(field.time);
            out.push_back(',');
            out += fmt_g17(grid[i]);
            out.push_back(',');
            out += fmt_g17(field.values[i]);
            out.push_back('\n');
        }
    }
    return out;
}

/// Comparison-profile CSV: one row per (slice, node) with columns t,s,phi,phi_s.
inline std::string profile_csv(const ComparisonProfile& prof) {
    std::string out = "t,s,phi,phi_s\n";
    for (std::size_t k = 0; k < prof.t_grid.size(); ++k) {
        for (std::size_t i = 0; i < prof.s_grid.size(); ++i) {
            out += fmt_g17(prof.t_grid[k]);
            out.push_back(',');
            out += fmt_g17(prof.s_grid[i]);
            out.push_back(',');
            out += fmt_g17(prof.values[k][i]);
            out.push_back(',');
            out += fmt_g17(prof.phi_s[k][i]);
            out.push_back('\n');
        }
    }
    return out;
}

/// Eigenfunction CSV with columns s,phi,dphi,d2phi.
inline std::string eigen_csv(const EigenResult& r) {
    std::string out = "s,phi,dphi,d2phi\n";
    for (std::size_t i = 0; i < r.s.size(); ++i) {
        out += fmt_g17(r.s[i]);
        out.push_back(',');
        out += fmt_g17(r.phi[i]);
        out.push_back(',');
        out += fmt_g17(r.dphi[i]);
        out.push_back(',');
        out += fmt_g17(r.d2phi[i]);
        out.push_back('\n');
    }
    return out;
}

/// Plot data: whitespace-separated columns preceded by a single comment line
/// naming them. All columns must share one length.
inline std::string plot_data(const std::vector<std::string>& names,
                             const std::vector<std::vector<double>>& columns) {
    if (names.size() != columns.size() || columns.empty())
        throw IOError("plot_data: column/name mismatch");
    const std::size_t rows = columns.front().size();
    for (const auto& c : columns)
        if (c.size() != rows) throw IOError("plot_data: ragged columns");
    std::string out = "#";
    for (const auto& n : names) {
        out.push_back(' ');
        out += n;
    }
    out.push_back('\n');
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j) {
            if (j) out.push_back(' ');
            out += fmt_g17(columns[j][i]);
        }
        out.push_back('\n');
    }
    return out;
}

inline void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    write_text_file(path, trajectory_csv(traj));
}

inline void write_profile_csv(const ComparisonProfile& prof, const std::string& path) {
    write_text_file(path, profile_csv(prof));
}

inline void write_eigen_csv(const EigenResult& r, const std::string& path) {
    write_text_file(path, eigen_csv(r));
}

inline void emit_plot_data(const std::string& path, const std::vector<std::string>& names,
                           const std::vector<std::vector<double>>& columns) {
    write_text_file(path, plot_data(names, columns));
}

}  // namespace qcomp
