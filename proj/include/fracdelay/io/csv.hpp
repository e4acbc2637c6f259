#pragma once

// Text outputs. Every number goes through format_number, the shortest
// decimal that parses back to the same double, so identical runs produce
// identical bytes.

#include <array>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fracdelay/errors.hpp"
#include "fracdelay/hypotheses.hpp"
#include "fracdelay/problem.hpp"
#include "fracdelay/residual.hpp"

namespace fracdelay::io {

inline std::string format_number(double x) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    if (ec != std::errc()) {
        throw Error("format_number: conversion failed");
    }
    return std::string(buf.data(), ptr);
}

inline double parse_number(std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError("not a number: '" + std::string(s) + "'");
    }
    return v;
}

/// The middle dot marks nodes away from impulse times.
inline constexpr std::string_view kPlainSide = "\xC2\xB7";

inline std::string_view side_label(Side s) {
    switch (s) {
    case Side::Left:
        return "L";
    case Side::Right:
        return "R";
    case Side::Plain:
        break;
    }
    return kPlainSide;
}

inline Side parse_side(std::string_view s) {
    if (s == "L") return Side::Left;
    if (s == "R") return Side::Right;
    if (s == kPlainSide || s == ".") return Side::Plain;
    throw ParseError("unknown side label '" + std::string(s) + "'");
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,side";
    for (std::size_t c = 0; c < traj.dimension(); ++c) {
        os << ",u_" << c + 1;
    }
    os << '\n';
    for (std::size_t i = 0; i < traj.size(); ++i) {
        os << format_number(traj.times[i]) << ',' << side_label(traj.sides[i]);
        for (double x : traj.values[i]) {
            os << ',' << format_number(x);
        }
        os << '\n';
    }
}

namespace csv_detail {

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) {
            return out;
        }
        start = comma + 1;
    }
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw Error("cannot write '" + path + "'");
    }
    return os;
}

}  // namespace csv_detail

/// Reads a trajectory written by write_trajectory_csv. The CSV carries no
/// model data, so u'(0), alpha and the spectrum come from the problem.
inline Trajectory read_trajectory_csv(std::istream& is, const ProblemSpec& prob) {
    std::string line;
    if (!std::getline(is, line)) {
        throw ParseError("trajectory csv: empty input");
    }
    const auto header = csv_detail::split(line);
    if (header.size() < 3 || header[0] != "t" || header[1] != "side") {
        throw ParseError("trajectory csv: header must start with 't,side,u_1'");
    }
    const std::size_t dim = header.size() - 2;
    if (dim != prob.dimension()) {
        std::ostringstream os;
        os << "trajectory csv: " << dim << " coordinates but the problem has " << prob.dimension();
        throw ShapeError(os.str());
    }
    std::vector<double> times;
    std::vector<Side> sides;
    std::vector<State> values;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto cells = csv_detail::split(line);
        if (cells.size() != dim + 2) {
            throw ParseError("trajectory csv: row " + std::to_string(row) + " has the wrong number of columns");
        }
        times.push_back(parse_number(cells[0]));
        sides.push_back(parse_side(cells[1]));
        State v(dim);
        for (std::size_t c = 0; c < dim; ++c) {
            v[c] = parse_number(cells[c + 2]);
        }
        values.push_back(std::move(v));
    }
    return Trajectory::from_nodes(std::move(times), std::move(sides), std::move(values), prob.varphi0(), prob.alpha,
                                  std::vector<double>(prob.op.eigenvalues().begin(), prob.op.eigenvalues().end()));
}

inline void save_trajectory_csv(const std::string& path, const Trajectory& traj) {
    auto os = csv_detail::open_out(path);
    write_trajectory_csv(os, traj);
}

inline Trajectory load_trajectory_csv(const std::string& path, const ProblemSpec& prob) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw ParseError("cannot open trajectory '" + path + "'");
    }
    return read_trajectory_csv(is, prob);
}

/// Flat `key=value` lines in insertion order.
class KeyValueFile {
public:
    KeyValueFile& set(std::string key, std::string value) {
        entries_.emplace_back(std::move(key), std::move(value));
        return *this;
    }
    KeyValueFile& set(std::string key, double value) { return set(std::move(key), format_number(value)); }
    KeyValueFile& set(std::string key, std::size_t value) { return set(std::move(key), std::to_string(value)); }
    KeyValueFile& set(std::string key, bool value) { return set(std::move(key), std::string(value ? "pass" : "fail")); }

    void write(std::ostream& os) const {
        for (const auto& [k, v] : entries_) {
            os << k << '=' << v << '\n';
        }
    }

    void save(const std::string& path) const {
        auto os = csv_detail::open_out(path);
        write(os);
    }

    static std::map<std::string, std::string> read(std::istream& is) {
        std::map<std::string, std::string> out;
        std::string line;
        while (std::getline(is, line)) {
            const auto eq = line.find('=');
            if (eq != std::string::npos) {
                out[line.substr(0, eq)] = line.substr(eq + 1);
            }
        }
        return out;
    }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

inline KeyValueFile hypotheses_report(const HypothesisReport& r) {
    KeyValueFile kv;
    kv.set("delta", r.contraction.delta);
    kv.set("contraction", r.contraction.pass);
    kv.set("theta", r.krasnoselskii.theta);
    kv.set("r_min", r.krasnoselskii.r_min ? format_number(*r.krasnoselskii.r_min) : std::string("none"));
    kv.set("krasnoselskii", r.krasnoselskii.pass);
    kv.set("C_prime", r.leray_schauder.C_prime);
    kv.set("ls_lhs", r.leray_schauder.lhs);
    kv.set("ls_rhs", r.leray_schauder.rhs_infinite ? std::string("inf") : format_number(r.leray_schauder.rhs));
    kv.set("ls_rhs_truncated", r.leray_schauder.rhs);
    kv.set("ls_s_max", r.leray_schauder.s_max);
    kv.set("leray_schauder", r.leray_schauder.pass);
    kv.set("any", r.any_pass());
    return kv;
}

inline void write_compare_csv(std::ostream& os, const std::vector<std::pair<double, double>>& rows) {
    os << "h,sup_gap\n";
    for (const auto& [h, gap] : rows) {
        os << format_number(h) << ',' << format_number(gap) << '\n';
    }
}

inline void write_residual_csv(std::ostream& os, const ResidualReport& report) {
    os << "piece,start,end,nodes,skipped,max_residual\n";
    // Row 0 is the history condition u = phi on [-d, 0].
    for (std::size_t p = 0; p <= report.pieces.size(); ++p) {
        const auto& piece = p == 0 ? report.history : report.pieces[p - 1];
        os << p << ',' << format_number(piece.start) << ',' << format_number(piece.end) << ',' << piece.nodes
           << ',' << piece.skipped << ',' << format_number(piece.max_residual) << '\n';
    }
}

}  // namespace fracdelay::io
