#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fracdelay/cli/commands.hpp"
#include "fracdelay/io/expression.hpp"
#include "fracdelay/io/problem_file.hpp"

namespace {

using fracdelay::cli::Options;

/// Numeric flags accept constant expressions such as 1/256.
std::optional<double> constant_flag(const std::string& text) {
    if (text.empty()) {
        return std::nullopt;
    }
    return fracdelay::io::Expression::constant(text);
}

struct RawFlags {
    std::string grid;
    std::string tol;
    std::string M;
    std::string h_list;
    std::string threshold;
};

void add_common(CLI::App* cmd, Options& opt, RawFlags& raw) {
    cmd->add_option("--grid", raw.grid, "step size h (expression, e.g. 1/256)");
    cmd->add_option("--tol", raw.tol, "Picard tolerance");
    cmd->add_option("--max-iter", opt.max_iter, "Picard iteration cap");
    cmd->add_option("--modes", opt.modes, "number of heat modes");
    cmd->add_option("--out-dir", opt.out_dir, "directory for output files");
    cmd->add_flag("--strict,!--no-strict", opt.strict, "reject unknown keys (default on)");
}

}  // namespace

int main(int argc, char** argv) {
    namespace cli = fracdelay::cli;
    CLI::App app{"Impulsive fractional delay equations: mild-solution solver and hypothesis checks"};
    app.require_subcommand(1);

    Options opt;
    RawFlags raw;
    std::string file;
    std::string trajectory;
    double alpha = 0.0;
    double beta = 0.0;
    double z = 0.0;

    auto* solve = app.add_subcommand("solve", "solve a problem file, write trajectory.csv and run.meta");
    solve->add_option("file", file, "problem file")->required();
    solve->add_option("--reconstruct", opt.reconstruct, "write field.csv on this many x samples (heat only)");
    add_common(solve, opt, raw);

    auto* check = app.add_subcommand("check", "evaluate the existence hypotheses, write hypotheses.report");
    check->add_option("file", file, "problem file")->required();
    check->add_option("--M", raw.M, "override the operator-function bound M");
    add_common(check, opt, raw);

    auto* compare = app.add_subcommand("oracle-compare", "compare solver and Volterra oracle, write compare.csv");
    compare->add_option("file", file, "problem file")->required();
    compare->add_option("--h-list", raw.h_list, "comma-separated step sizes (default 1/64,1/128,1/256,1/512)");
    add_common(compare, opt, raw);

    auto* ml = app.add_subcommand("ml-eval", "print E_{alpha,beta}(z)");
    ml->add_option("alpha", alpha)->required();
    ml->add_option("beta", beta)->required();
    ml->add_option("z", z)->required()->allow_extra_args(false);

    auto* verify = app.add_subcommand("verify-residual", "residual of the differential form, write residual.csv");
    verify->add_option("file", file, "problem file")->required();
    verify->add_option("trajectory", trajectory, "trajectory.csv from solve")->required();
    verify->add_option("--threshold", raw.threshold, "maximum accepted residual");
    add_common(verify, opt, raw);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kParse;
    }

    try {
        opt.h = constant_flag(raw.grid);
        opt.tol = constant_flag(raw.tol);
        opt.M = constant_flag(raw.M);
        if (const auto t = constant_flag(raw.threshold)) {
            opt.threshold = *t;
        }
        if (!raw.h_list.empty()) {
            opt.h_list.clear();
            for (const auto& item : fracdelay::io::BuiltinCall::split_list(raw.h_list)) {
                opt.h_list.push_back(fracdelay::io::Expression::constant(item));
            }
        }
    } catch (const fracdelay::Error& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return cli::kParse;
    }

    if (*solve) return cli::cmd_solve(file, opt, std::cout, std::cerr);
    if (*check) return cli::cmd_check(file, opt, std::cout, std::cerr);
    if (*compare) return cli::cmd_oracle_compare(file, opt, std::cout, std::cerr);
    if (*ml) return cli::cmd_ml_eval(alpha, beta, z, std::cout, std::cerr);
    return cli::cmd_verify_residual(file, trajectory, opt, std::cout, std::cerr);
}
