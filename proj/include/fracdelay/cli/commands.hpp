#pragma once

// Subcommands behind the fracdelay executable. Each returns a process exit
// code and writes its files into Options::out_dir.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fracdelay/errors.hpp"
#include "fracdelay/hypotheses.hpp"
#include "fracdelay/io/csv.hpp"
#include "fracdelay/io/problem_file.hpp"
#include "fracdelay/mittag_leffler.hpp"
#include "fracdelay/operators.hpp"
#include "fracdelay/oracle.hpp"
#include "fracdelay/problem.hpp"
#include "fracdelay/residual.hpp"
#include "fracdelay/solver.hpp"

namespace fracdelay::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kParse = 2,
    kNoConvergence = 3,
    kNoExistence = 4,
    kOracleMismatch = 5,
    kResidual = 6,
};

/// Residual ceiling for verify-residual. The shipped problems stay below
/// 2e-3 from h = 1/64 on; a trajectory scaled by 2 misses its history by
/// order one.
inline constexpr double kDefaultResidualThreshold = 1e-2;

/// Required shrink factor of the oracle gap per refinement step.
inline constexpr double kOracleRatio = 1.5;

struct Options {
    std::optional<double> h;
    std::optional<double> tol;
    std::optional<std::size_t> max_iter;
    std::optional<std::size_t> modes;
    std::optional<double> M;
    bool strict = true;
    std::string out_dir = ".";
    /// Sample count of the x-grid on [0, pi] for field.csv (heat only).
    std::optional<std::size_t> reconstruct;
    std::vector<double> h_list{1.0 / 64, 1.0 / 128, 1.0 / 256, 1.0 / 512};
    double threshold = kDefaultResidualThreshold;
};

namespace detail {

struct Loaded {
    io::ProblemFile file;
    ProblemSpec prob;
    SolverConfig cfg;
};

inline Loaded load(const std::string& path, const Options& opt) {
    io::ProblemFile pf = io::ProblemFile::load(path, opt.strict);
    if (opt.modes) {
        if (pf.op_type != "heat") {
            throw ParseError("--modes applies to heat operators only");
        }
        if (*opt.modes == 0) {
            throw ParseError("--modes must be at least 1");
        }
        pf.modes = *opt.modes;
    }
    SolverConfig cfg = pf.solver;
    if (opt.h) cfg.h = *opt.h;
    if (opt.tol) cfg.tol = *opt.tol;
    if (opt.max_iter) cfg.max_iter = *opt.max_iter;
    try {
        cfg.validate();
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
    ProblemSpec prob = pf.build();
    return {std::move(pf), std::move(prob), cfg};
}

inline std::string out_path(const Options& opt, const std::string& name) {
    std::filesystem::create_directories(opt.out_dir);
    return (std::filesystem::path(opt.out_dir) / name).string();
}

inline std::ofstream open(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw Error("cannot write '" + path + "'");
    }
    return os;
}

/// Runs `body`, mapping library errors onto exit codes.
template <class Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kParse;
    } catch (const ConvergenceError& e) {
        err << "no convergence: " << e.what() << '\n';
        return kNoConvergence;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
}

/// u(t, x) = sqrt(2/pi) sum_n c_n sin(n x) on an x-grid of [0, pi].
inline void write_field_csv(std::ostream& os, const Trajectory& traj, std::size_t samples) {
    const std::size_t dim = traj.dimension();
    const double scale = std::sqrt(2.0 / std::numbers::pi);
    std::vector<double> xs(samples);
    for (std::size_t j = 0; j < samples; ++j) {
        xs[j] = samples == 1 ? 0.0 : std::numbers::pi * static_cast<double>(j) / static_cast<double>(samples - 1);
    }
    os << "t,side";
    for (double x : xs) {
        os << ",x=" << io::format_number(x);
    }
    os << '\n';
    for (std::size_t i = 0; i < traj.size(); ++i) {
        os << io::format_number(traj.times[i]) << ',' << io::side_label(traj.sides[i]);
        for (double x : xs) {
            double u = 0.0;
            for (std::size_t n = 0; n < dim; ++n) {
                u += traj.values[i][n] * std::sin(static_cast<double>(n + 1) * x);
            }
            os << ',' << io::format_number(scale * u);
        }
        os << '\n';
    }
}

}  // namespace detail

/// Empirical Lipschitz quotients from random state pairs. A hint only: the
/// sample supremum bounds the true constant from below.
struct LipschitzHint {
    double l_f = 0.0;
    double l_i = 0.0;
    double l_j = 0.0;
};

inline LipschitzHint estimate_lipschitz(const ProblemSpec& prob, std::size_t pairs = 2000, unsigned seed = 20240917u) {
    std::mt19937 gen(seed);
    const std::size_t dim = prob.dimension();
    const double radius = std::max(1.0, 2.0 * max_abs(prob.phi0()));
    std::uniform_real_distribution<double> coord(-radius, radius);
    std::uniform_real_distribution<double> time(0.0, prob.horizon);
    auto draw = [&] {
        State v(dim);
        for (double& x : v) x = coord(gen);
        return v;
    };
    auto quotient = [](const State& fx, const State& fy, const State& x, const State& y) {
        State dx(x.size());
        State df(fx.size());
        for (std::size_t c = 0; c < x.size(); ++c) dx[c] = x[c] - y[c];
        for (std::size_t c = 0; c < fx.size(); ++c) df[c] = fx[c] - fy[c];
        const double den = euclidean_norm(dx);
        return den > 0.0 ? euclidean_norm(df) / den : 0.0;
    };
    LipschitzHint hint;
    for (std::size_t p = 0; p < pairs; ++p) {
        const State x = draw();
        const State y = draw();
        const double t = time(gen);
        hint.l_f = std::max(hint.l_f, quotient(prob.forcing(t, x), prob.forcing(t, y), x, y));
        for (const Impulse& imp : prob.impulses) {
            hint.l_i = std::max(hint.l_i, quotient(imp.jump(x), imp.jump(y), x, y));
            hint.l_j = std::max(hint.l_j, quotient(imp.derivative_jump(x), imp.derivative_jump(y), x, y));
        }
    }
    return hint;
}

inline int cmd_solve(const std::string& file, const Options& opt, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        const detail::Loaded in = detail::load(file, opt);
        const auto start = std::chrono::steady_clock::now();
        const SolveResult res = picard_solve(in.prob, in.cfg);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        {
            auto os = detail::open(detail::out_path(opt, "trajectory.csv"));
            io::write_trajectory_csv(os, res.trajectory);
        }
        io::KeyValueFile meta;
        meta.set("iterations", res.iterations)
            .set("final_delta", res.final_delta)
            .set("final_update", res.differences.empty() ? 0.0 : res.differences.back())
            .set("h", in.cfg.h)
            .set("tol", in.cfg.tol)
            .set("dimension", in.prob.dimension())
            .set("wall_time", wall);
        meta.save(detail::out_path(opt, "run.meta"));

        if (opt.reconstruct) {
            if (in.file.op_type != "heat") {
                throw ParseError("--reconstruct applies to heat operators only");
            }
            auto os = detail::open(detail::out_path(opt, "field.csv"));
            detail::write_field_csv(os, res.trajectory, *opt.reconstruct);
        }
        out << "converged in " << res.iterations << " iterations, last ratio " << io::format_number(res.final_delta)
            << '\n';
        return static_cast<int>(kOk);
    });
}

inline int cmd_check(const std::string& file, const Options& opt, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        const detail::Loaded in = detail::load(file, opt);
        if (!in.file.lipschitz) {
            throw ParseError("check needs a [lipschitz] block");
        }
        const double scanned = bound_M(in.prob.op, in.prob.alpha, in.prob.horizon, {OpKind::S, OpKind::K, OpKind::T});
        LipschitzData data = in.file.lipschitz_data(in.prob, scanned);
        if (opt.M) {
            data.M = *opt.M;
        }
        const HypothesisReport report = check_all(data, in.prob.horizon, in.file.lipschitz->s_max);
        const LipschitzHint hint = estimate_lipschitz(in.prob);

        io::KeyValueFile kv = io::hypotheses_report(report);
        kv.set("M", data.M)
            .set("M_source", std::string(opt.M ? "override" : in.file.lipschitz->M ? "file" : "scan"))
            .set("m", data.m)
            .set("hint_l_f", hint.l_f)
            .set("hint_l_i", hint.l_i)
            .set("hint_l_j", hint.l_j);
        kv.save(detail::out_path(opt, "hypotheses.report"));
        kv.write(out);
        return static_cast<int>(report.any_pass() ? kOk : kNoExistence);
    });
}

inline int cmd_oracle_compare(const std::string& file, const Options& opt, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        const detail::Loaded in = detail::load(file, opt);
        if (opt.h_list.size() < 2) {
            throw ParseError("--h-list needs at least two step sizes");
        }
        std::vector<double> hs = opt.h_list;
        std::sort(hs.begin(), hs.end(), std::greater<>());
        std::vector<std::pair<double, double>> rows;
        for (double h : hs) {
            SolverConfig cfg = in.cfg;
            cfg.h = h;
            OracleConfig ocfg;
            ocfg.h = h;
            const Trajectory a = picard_solve(in.prob, cfg).trajectory;
            const Trajectory b = volterra_solve(in.prob, ocfg);
            rows.emplace_back(h, compare(a, b).sup_gap);
        }
        {
            auto os = detail::open(detail::out_path(opt, "compare.csv"));
            io::write_compare_csv(os, rows);
        }
        io::write_compare_csv(out, rows);
        bool ok = true;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const double ratio = rows[i - 1].second / rows[i].second;
            if (!(ratio >= kOracleRatio)) {
                err << "gap ratio " << io::format_number(ratio) << " between h=" << io::format_number(rows[i - 1].first)
                    << " and h=" << io::format_number(rows[i].first) << " is below " << kOracleRatio << '\n';
                ok = false;
            }
        }
        return static_cast<int>(ok ? kOk : kOracleMismatch);
    });
}

inline int cmd_ml_eval(double alpha, double beta, double z, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        out << io::format_number(ml_e(MLParams(alpha, beta), z)) << '\n';
        return static_cast<int>(kOk);
    });
}

inline int cmd_verify_residual(const std::string& file, const std::string& trajectory, const Options& opt,
                               std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        const detail::Loaded in = detail::load(file, opt);
        const Trajectory traj = io::load_trajectory_csv(trajectory, in.prob);
        const ResidualReport report = verify_residual(in.prob, traj);
        {
            auto os = detail::open(detail::out_path(opt, "residual.csv"));
            io::write_residual_csv(os, report);
        }
        io::write_residual_csv(out, report);
        if (report.max_residual() > opt.threshold) {
            err << "max residual " << io::format_number(report.max_residual()) << " exceeds threshold "
                << io::format_number(opt.threshold) << '\n';
            return static_cast<int>(kResidual);
        }
        return static_cast<int>(kOk);
    });
}

}  // namespace fracdelay::cli
