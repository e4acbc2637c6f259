#pragma once

// Sectioned key = value problem files.
//
//   [problem]   alpha, T, d
//   [operator]  type = heat|diagonal|scalar, modes, eigenvalues, eigenvalue,
//               sector_M, sector_theta, sector_mu
//   [history]   phi, varphi            comma-separated expressions in t, one
//                                      per coordinate; missing ones are zero
//   [forcing]   f = zero | constant(c) | linear-delay(k)
//   [delay]     form = none|constant|state, tau, rho1 (in t), rho2 (in x = |u|)
//   [impulses]  mode = direction|coordinatewise, t<k>, I<k>, Q<k>
//               with maps constant(c) | saturating(a, b)
//   [solver]    h, tol, max_iter, quad_refine
//   [lipschitz] M, m, l_f, l_i, l_j, m_f, C_i, C_j, Omega_f (in s), s_max,
//               phi0_norm, varphi0_norm
//
// Numeric values accept constant expressions ("1/256"). '#' starts a comment.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fracdelay/errors.hpp"
#include "fracdelay/hypotheses.hpp"
#include "fracdelay/io/expression.hpp"
#include "fracdelay/operators.hpp"
#include "fracdelay/problem.hpp"
#include "fracdelay/state.hpp"

namespace fracdelay::io {

/// `name` or `name(arg, ...)` with constant arguments.
struct BuiltinCall {
    std::string name;
    std::vector<double> args;

    static BuiltinCall parse(std::string_view text) {
        BuiltinCall call;
        const auto open = text.find('(');
        if (open == std::string_view::npos) {
            call.name = trim(text);
            return call;
        }
        if (text.back() != ')') {
            throw ParseError("builtin '" + std::string(text) + "': expected closing ')'");
        }
        call.name = trim(text.substr(0, open));
        const std::string_view inner = text.substr(open + 1, text.size() - open - 2);
        for (const std::string& arg : split_list(inner)) {
            call.args.push_back(Expression::constant(arg));
        }
        return call;
    }

    static std::string trim(std::string_view s) {
        std::size_t a = 0;
        std::size_t b = s.size();
        while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
        return std::string(s.substr(a, b - a));
    }

    /// Splits on commas outside parentheses.
    static std::vector<std::string> split_list(std::string_view s) {
        std::vector<std::string> out;
        int depth = 0;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= s.size(); ++i) {
            if (i == s.size() || (s[i] == ',' && depth == 0)) {
                std::string item = trim(s.substr(start, i - start));
                if (item.empty()) {
                    throw ParseError("empty entry in list '" + std::string(s) + "'");
                }
                out.push_back(std::move(item));
                start = i + 1;
            } else if (s[i] == '(') {
                ++depth;
            } else if (s[i] == ')') {
                --depth;
            }
        }
        return out;
    }
};

enum class ImpulseMode { Direction, Coordinatewise };

struct ImpulseEntry {
    double time = 0.0;
    BuiltinCall jump;
    BuiltinCall derivative_jump;
};

/// Raw [lipschitz] block; unset fields fall back to defaults or to values
/// derived from the problem.
struct LipschitzBlock {
    std::optional<double> M;
    std::optional<std::size_t> m;
    std::string l_f = "0";
    double l_i = 0.0;
    double l_j = 0.0;
    std::string m_f = "0";
    double C_i = 0.0;
    double C_j = 0.0;
    std::string Omega_f = "1 + s";
    double s_max = kDefaultSMax;
    std::optional<double> phi0_norm;
    std::optional<double> varphi0_norm;
};

class ProblemFile {
public:
    double alpha = 1.5;
    double T = 1.0;
    double d = 0.0;

    std::string op_type = "scalar";
    std::size_t modes = 1;
    std::vector<double> eigenvalues{0.0};
    std::optional<SectorialParams> sectorial;

    std::vector<std::string> phi{"0"};
    std::vector<std::string> varphi{"0"};

    BuiltinCall forcing{"zero", {}};

    std::string delay_form = "none";
    double tau = 0.0;
    std::string rho1 = "0";
    std::string rho2 = "1";

    ImpulseMode impulse_mode = ImpulseMode::Direction;
    std::vector<ImpulseEntry> impulses;

    SolverConfig solver;
    std::optional<LipschitzBlock> lipschitz;

    /// Unknown keys tolerated in non-strict mode.
    std::vector<std::string> warnings;

    static ProblemFile load(const std::string& path, bool strict = true) {
        std::ifstream in(path);
        if (!in) {
            throw ParseError("cannot open problem file '" + path + "'");
        }
        std::stringstream buf;
        buf << in.rdbuf();
        return parse(buf.str(), strict);
    }

    static ProblemFile parse(std::string_view text, bool strict = true) {
        ProblemFile pf;
        std::map<std::string, std::map<std::string, std::pair<std::string, int>>> sections;
        std::string section;
        int line_no = 0;
        std::istringstream in{std::string(text)};
        std::string line;
        while (std::getline(in, line)) {
            ++line_no;
            if (const auto hash = line.find('#'); hash != std::string::npos) {
                line.erase(hash);
            }
            const std::string s = BuiltinCall::trim(line);
            if (s.empty()) {
                continue;
            }
            if (s.front() == '[') {
                if (s.back() != ']') {
                    throw ParseError(where(line_no) + "malformed section header '" + s + "'");
                }
                section = BuiltinCall::trim(std::string_view(s).substr(1, s.size() - 2));
                if (!known_section(section)) {
                    if (strict) {
                        throw ParseError(where(line_no) + "unknown section [" + section + "]");
                    }
                    pf.warnings.push_back("ignored section [" + section + "]");
                }
                if (section == "lipschitz") {
                    pf.lipschitz.emplace();
                }
                sections[section];
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos) {
                throw ParseError(where(line_no) + "expected 'key = value'");
            }
            if (section.empty()) {
                throw ParseError(where(line_no) + "key outside of any section");
            }
            const std::string key = BuiltinCall::trim(std::string_view(s).substr(0, eq));
            const std::string value = BuiltinCall::trim(std::string_view(s).substr(eq + 1));
            if (value.empty()) {
                throw ParseError(where(line_no) + "empty value for '" + key + "'");
            }
            auto& sec = sections[section];
            if (sec.count(key)) {
                throw ParseError(where(line_no) + "duplicate key '" + key + "' in [" + section + "]");
            }
            sec[key] = {value, line_no};
        }

        for (const auto& [name, keys] : sections) {
            if (!known_section(name)) {
                continue;
            }
            for (const auto& [key, entry] : keys) {
                try {
                    if (!pf.assign(name, key, entry.first)) {
                        if (strict) {
                            throw ParseError("unknown key '" + key + "' in [" + name + "]");
                        }
                        pf.warnings.push_back("ignored key '" + key + "' in [" + name + "]");
                    }
                } catch (const ParseError& e) {
                    throw ParseError(where(entry.second) + e.what());
                }
            }
        }
        pf.finish_impulses();
        pf.check();
        return pf;
    }

    /// Operator after applying the type and any mode override.
    SpectralOperator make_operator() const {
        if (op_type == "heat") {
            SpectralOperator heat = make_heat_operator(modes);
            return SpectralOperator(std::vector<double>(heat.eigenvalues().begin(), heat.eigenvalues().end()), "heat",
                                    sectorial);
        }
        return SpectralOperator(eigenvalues, op_type, sectorial);
    }

    ProblemSpec build() const {
        SpectralOperator op = make_operator();
        const std::size_t dim = op.size();
        std::vector<Impulse> maps;
        for (const auto& e : impulses) {
            maps.push_back(Impulse{e.time, make_impulse_map(e.jump, dim), make_impulse_map(e.derivative_jump, dim)});
        }
        ProblemSpec prob{.alpha = alpha,
                         .horizon = T,
                         .depth = d,
                         .op = std::move(op),
                         .phi = history(phi, dim, "phi"),
                         .varphi = history(varphi, dim, "varphi"),
                         .forcing = make_forcing(dim),
                         .delay = make_delay(),
                         .impulses = std::move(maps)};
        try {
            prob.validate();
        } catch (const Error& e) {
            throw ParseError(std::string("invalid problem: ") + e.what());
        }
        return prob;
    }

    /// Constants for the hypothesis checks. `scanned_M` is used when the file
    /// gives no M.
    LipschitzData lipschitz_data(const ProblemSpec& prob, double scanned_M) const {
        const LipschitzBlock block = lipschitz.value_or(LipschitzBlock{});
        LipschitzData data;
        const Expression lf = Expression::parse(block.l_f, "t");
        const Expression mf = Expression::parse(block.m_f, "t");
        const Expression om = Expression::parse(block.Omega_f, "s");
        data.l_f = lf;
        data.m_f = mf;
        data.Omega_f = om;
        data.l_i = block.l_i;
        data.l_j = block.l_j;
        data.C_i = block.C_i;
        data.C_j = block.C_j;
        data.m = block.m.value_or(prob.impulses.size());
        data.M = block.M.value_or(scanned_M);
        data.phi0_norm = block.phi0_norm.value_or(euclidean_norm(prob.phi0()));
        data.varphi0_norm = block.varphi0_norm.value_or(euclidean_norm(prob.varphi0()));
        return data;
    }

private:
    static std::string where(int line) { return "line " + std::to_string(line) + ": "; }

    static bool known_section(const std::string& s) {
        static const std::set<std::string> names{"problem", "operator", "history", "forcing",
                                                 "delay",   "impulses", "solver",  "lipschitz"};
        return names.count(s) > 0;
    }

    static double number(const std::string& v) { return Expression::constant(v); }

    static std::size_t count(const std::string& v) {
        const double x = number(v);
        if (!(x >= 0.0) || x != std::floor(x) || x > 1e9) {
            throw ParseError("expected a non-negative integer, got '" + v + "'");
        }
        return static_cast<std::size_t>(x);
    }

    SectorialParams& sector() {
        if (!sectorial) {
            sectorial = SectorialParams{};
            sectorial->alpha = alpha;
        }
        return *sectorial;
    }

    bool assign(const std::string& sec, const std::string& key, const std::string& v) {
        if (sec == "problem") {
            if (key == "alpha") alpha = number(v);
            else if (key == "T") T = number(v);
            else if (key == "d") d = number(v);
            else return false;
            if (sectorial) sectorial->alpha = alpha;
            return true;
        }
        if (sec == "operator") {
            if (key == "type") op_type = v;
            else if (key == "modes") modes = count(v);
            else if (key == "eigenvalues") {
                eigenvalues.clear();
                for (const auto& item : BuiltinCall::split_list(v)) eigenvalues.push_back(number(item));
            } else if (key == "eigenvalue") eigenvalues = {number(v)};
            else if (key == "sector_M") sector().M = number(v);
            else if (key == "sector_theta") sector().theta = number(v);
            else if (key == "sector_mu") sector().mu = number(v);
            else return false;
            return true;
        }
        if (sec == "history") {
            if (key == "phi") phi = BuiltinCall::split_list(v);
            else if (key == "varphi") varphi = BuiltinCall::split_list(v);
            else return false;
            return true;
        }
        if (sec == "forcing") {
            if (key != "f") return false;
            forcing = BuiltinCall::parse(v);
            return true;
        }
        if (sec == "delay") {
            if (key == "form") delay_form = v;
            else if (key == "tau") tau = number(v);
            else if (key == "rho1") rho1 = v;
            else if (key == "rho2") rho2 = v;
            else return false;
            return true;
        }
        if (sec == "impulses") {
            if (key == "mode") {
                if (v == "direction") impulse_mode = ImpulseMode::Direction;
                else if (v == "coordinatewise") impulse_mode = ImpulseMode::Coordinatewise;
                else throw ParseError("impulse mode must be 'direction' or 'coordinatewise'");
                return true;
            }
            if (key.size() < 2 || (key[0] != 't' && key[0] != 'I' && key[0] != 'Q')) return false;
            const std::string idx = key.substr(1);
            if (!std::all_of(idx.begin(), idx.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
                return false;
            }
            const std::size_t k = std::stoul(idx);
            if (k == 0) throw ParseError("impulse indices start at 1");
            auto& raw = raw_impulses_[k];
            if (key[0] == 't') raw.time = v;
            else if (key[0] == 'I') raw.jump = v;
            else raw.derivative_jump = v;
            return true;
        }
        if (sec == "solver") {
            if (key == "h") solver.h = number(v);
            else if (key == "tol") solver.tol = number(v);
            else if (key == "max_iter") solver.max_iter = count(v);
            else if (key == "quad_refine") solver.quad_refine = count(v);
            else return false;
            return true;
        }
        if (sec == "lipschitz") {
            LipschitzBlock& b = *lipschitz;
            if (key == "M") b.M = number(v);
            else if (key == "m") b.m = count(v);
            else if (key == "l_f") b.l_f = v;
            else if (key == "l_i") b.l_i = number(v);
            else if (key == "l_j") b.l_j = number(v);
            else if (key == "m_f") b.m_f = v;
            else if (key == "C_i") b.C_i = number(v);
            else if (key == "C_j") b.C_j = number(v);
            else if (key == "Omega_f") b.Omega_f = v;
            else if (key == "s_max") b.s_max = number(v);
            else if (key == "phi0_norm") b.phi0_norm = number(v);
            else if (key == "varphi0_norm") b.varphi0_norm = number(v);
            else return false;
            // Expressions are checked eagerly so errors carry the line number.
            if (key == "l_f" || key == "m_f") Expression::parse(v, "t");
            if (key == "Omega_f") Expression::parse(v, "s");
            return true;
        }
        return false;
    }

    void finish_impulses() {
        std::size_t expect = 1;
        for (const auto& [k, raw] : raw_impulses_) {
            if (k != expect) {
                throw ParseError("impulses must be numbered 1, 2, ... without gaps (missing " + std::to_string(expect) +
                                 ")");
            }
            if (raw.time.empty() || raw.jump.empty() || raw.derivative_jump.empty()) {
                throw ParseError("impulse " + std::to_string(k) + " needs t" + std::to_string(k) + ", I" +
                                 std::to_string(k) + " and Q" + std::to_string(k));
            }
            impulses.push_back(
                ImpulseEntry{number(raw.time), BuiltinCall::parse(raw.jump), BuiltinCall::parse(raw.derivative_jump)});
            ++expect;
        }
    }

    void check() const {
        if (!(alpha > 1.0 && alpha < 2.0)) {
            throw ParseError("[problem] alpha must lie in (1,2)");
        }
        if (!(T > 0.0)) {
            throw ParseError("[problem] T must be positive");
        }
        if (!(d >= 0.0)) {
            throw ParseError("[problem] d must be non-negative");
        }
        if (op_type != "heat" && op_type != "diagonal" && op_type != "scalar") {
            throw ParseError("[operator] type must be heat, diagonal or scalar");
        }
        if (op_type == "heat" && modes == 0) {
            throw ParseError("[operator] modes must be at least 1");
        }
        if (op_type == "scalar" && eigenvalues.size() != 1) {
            throw ParseError("[operator] scalar operator takes exactly one eigenvalue");
        }
        if (op_type != "heat" && eigenvalues.empty()) {
            throw ParseError("[operator] eigenvalues must not be empty");
        }
        double prev = 0.0;
        for (std::size_t k = 0; k < impulses.size(); ++k) {
            const double t = impulses[k].time;
            if (!(t > prev) || !(t < T)) {
                std::ostringstream os;
                os << "[impulses] invariant 0 < t_1 < ... < t_m < T violated by t" << k + 1 << " = " << t
                   << " (T = " << T << ")";
                throw ParseError(os.str());
            }
            prev = t;
        }
        static const std::set<std::string> forcings{"zero", "constant", "linear-delay"};
        if (!forcings.count(forcing.name)) {
            throw ParseError("[forcing] unknown builtin '" + forcing.name + "'");
        }
        if (delay_form != "none" && delay_form != "constant" && delay_form != "state") {
            throw ParseError("[delay] form must be none, constant or state");
        }
        if (delay_form == "constant" && !(tau >= 0.0 && tau <= d)) {
            throw ParseError("[delay] constant delay tau must lie in [0, d]");
        }
        try {
            solver.validate();
        } catch (const Error& e) {
            throw ParseError(std::string("[solver] ") + e.what());
        }
        if (lipschitz && !(lipschitz->s_max > 0.0)) {
            throw ParseError("[lipschitz] s_max must be positive");
        }
    }

    static HistoryFn history(const std::vector<std::string>& entries, std::size_t dim, const char* name) {
        if (entries.size() > dim) {
            std::ostringstream os;
            os << "[history] " << name << " lists " << entries.size() << " coordinates but the operator has " << dim;
            throw ParseError(os.str());
        }
        std::vector<Expression> exprs;
        for (const auto& e : entries) {
            exprs.push_back(Expression::parse(e, "t"));
        }
        return [exprs, dim](double theta) {
            State v(dim, 0.0);
            for (std::size_t n = 0; n < exprs.size(); ++n) {
                v[n] = exprs[n](theta);
            }
            return v;
        };
    }

    static void expect_args(const BuiltinCall& c, std::size_t n, const char* where) {
        if (c.args.size() != n) {
            std::ostringstream os;
            os << where << " builtin '" << c.name << "' takes " << n << " argument(s), got " << c.args.size();
            throw ParseError(os.str());
        }
    }

    Forcing make_forcing(std::size_t dim) const {
        const BuiltinCall& c = forcing;
        if (c.name == "zero") {
            expect_args(c, 0, "[forcing]");
            return [dim](double, std::span<const double>) { return State(dim, 0.0); };
        }
        if (c.name == "constant") {
            expect_args(c, 1, "[forcing]");
            const double value = c.args[0];
            return [dim, value](double, std::span<const double>) { return State(dim, value); };
        }
        expect_args(c, 1, "[forcing]");
        const double k = c.args[0];
        return [k](double, std::span<const double> delayed) {
            State v(delayed.begin(), delayed.end());
            for (double& x : v) {
                x *= k;
            }
            return v;
        };
    }

    DelaySpec make_delay() const {
        if (delay_form == "none") {
            return DelaySpec::none();
        }
        if (delay_form == "constant") {
            return DelaySpec::constant(tau);
        }
        const Expression r1 = Expression::parse(rho1, "t");
        const Expression r2 = Expression::parse(rho2, "x");
        return DelaySpec::state_dependent(r1, r2);
    }

    StateMap make_impulse_map(const BuiltinCall& c, std::size_t dim) const {
        const bool direction = impulse_mode == ImpulseMode::Direction;
        if (c.name == "constant") {
            expect_args(c, 1, "[impulses]");
            const double value = c.args[0];
            return [=](std::span<const double>) {
                State v(dim, direction ? 0.0 : value);
                if (direction) v[0] = value;
                return v;
            };
        }
        if (c.name == "saturating") {
            expect_args(c, 2, "[impulses]");
            const double a = c.args[0];
            const double b = c.args[1];
            if (!(b > 0.0)) {
                throw ParseError("[impulses] saturating(a, b) needs b > 0");
            }
            return [=](std::span<const double> u) {
                State v(dim, 0.0);
                if (direction) {
                    const double norm = euclidean_norm(u);
                    v[0] = a * norm / (b + norm);
                } else {
                    for (std::size_t n = 0; n < dim; ++n) {
                        v[n] = a * std::abs(u[n]) / (b + std::abs(u[n]));
                    }
                }
                return v;
            };
        }
        throw ParseError("[impulses] unknown map builtin '" + c.name + "'");
    }

    struct RawImpulse {
        std::string time;
        std::string jump;
        std::string derivative_jump;
    };
    std::map<std::size_t, RawImpulse> raw_impulses_;
};

}  // namespace fracdelay::io
