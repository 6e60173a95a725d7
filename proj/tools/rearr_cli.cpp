// Command-line front end: fixtures, symmetrisation, single checks, solves,
// comparisons and configured suites.

#include "rearr/rearr.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace rearr;

struct Common {
    std::string config;
    std::string out;
    int jobs = 1;
    bool strict = false;
    std::uint64_t seed = 1;
    double h = 1.0 / 64.0;
    std::string shape = "disk 1";
    std::string split = "none";
    std::string function = "cone";
};

void add_domain(CLI::App* app, Common& c)
{
    app->add_option("--shape", c.shape, "shape spec, e.g. 'disk 1', 'square', 'lshape'");
    auto spacing = [&c](const std::string& v) {
        try {
            c.h = detail::parse_real(v);
        } catch (const Error& e) {
            throw CLI::ValidationError("--h", e.what());
        }
    };
    app->add_option_function<std::string>("--h", spacing, "grid spacing, e.g. 0.0625 or 1/16");
    app->add_option("--split", c.split, "codimension split: 'none', '1 1' or '2 0'");
    app->add_option("--function", c.function, "function spec, e.g. 'cone', 'tent-sum 3'");
    app->add_option("--seed", c.seed, "fixture seed");
    app->add_option("--out", c.out, "output file or directory");
}

GridPtr domain(const Common& c) { return grid_for(parse_shape(c.shape), c.h, parse_split(c.split)); }

/// Writes to the --out file, or stdout when it is empty.
template <class F>
void emit(const std::string& path, F&& f)
{
    if (path.empty()) {
        f(std::cout);
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    f(os);
    if (!os) throw Error("write to '" + path + "' failed");
}

GridFunction read_function(const std::string& path, const std::string& split)
{
    std::ifstream is(path);
    if (!is) throw Error("cannot open '" + path + "'");
    return read_grid_function(is, parse_split(split));
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Rearrangements, symmetrisations and rearrangement inequalities on grids"};
    app.set_help_flag("--help", "print this help and exit"); // -h would clash with --h
    app.require_subcommand(1);
    Common c;

    auto* gen = app.add_subcommand("gen", "sample a fixture on a masked grid");
    add_domain(gen, c);

    std::string in, mode = "schwarz", profile_out;
    auto* sym = app.add_subcommand("symmetrize", "Schwarz or Steiner symmetrisation of a grid function");
    add_domain(sym, c);
    sym->add_option("--in", in, "grid function file (default: generate from --shape/--function)");
    sym->add_option("--mode", mode, "schwarz or steiner")->check(CLI::IsMember({"schwarz", "steiner"}));
    sym->add_option("--profile", profile_out, "also write the decreasing rearrangement as CSV");

    std::string w_function, W = "ustar", checks = "hl ps";
    double p = 2.0;
    auto* ver = app.add_subcommand("verify", "run inequality checks on one case");
    add_domain(ver, c);
    ver->add_option("--w-function", w_function, "second function (default: the extremal for W)");
    ver->add_option("--W", W, "W spec: ustar, square, 'min c', 'scale a', 'power q'");
    ver->add_option("--p", p, "exponent for nonlinear-ps");
    ver->add_option("--checks", checks, "space-separated check kinds");
    ver->add_flag("--strict", c.strict, "treat unmet hypotheses as failures");

    bool radial = false;
    auto* sol = app.add_subcommand("solve", "solve -div(|grad u|^(p-2) grad u) = f with zero boundary values");
    add_domain(sol, c);
    sol->add_flag("--radial", radial, "solve the radial problem with datum f* on the ball of equal measure");
    sol->add_option("--p", p, "exponent (radial solves only for p != 2)");

    std::string kind = "talenti-schwarz";
    auto* cmp = app.add_subcommand("compare", "comparison checks for the Poisson problem with datum f");
    add_domain(cmp, c);
    cmp->add_option("--kind", kind, "talenti-schwarz, gradient, talenti-steiner or dual");

    bool no_timing = false;
    auto* suite = app.add_subcommand("suite", "run a configured suite and write reports");
    suite->add_option("--config", c.config, "suite config file")->required();
    suite->add_option("--out", c.out, "report directory")->required();
    suite->add_option("--jobs", c.jobs, "cases run concurrently")->check(CLI::PositiveNumber);
    suite->add_flag("--strict", c.strict, "treat unmet hypotheses as failures");
    suite->add_flag("--no-timing", no_timing, "omit wall-clock times from summary.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2; // --help is the only zero
    }

    try {
        if (gen->parsed()) {
            const auto u = gen_fixture(c.function, domain(c), c.seed);
            emit(c.out, [&](std::ostream& os) { write_grid_function(os, u); });
            return 0;
        }
        if (sym->parsed()) {
            const auto u = in.empty() ? gen_fixture(c.function, domain(c), c.seed) : read_function(in, c.split);
            const auto lay = mode == "schwarz" ? schwarz_layout(u.grid_ptr()) : steiner_layout(u.grid_ptr());
            const auto s = symmetrize(u, lay);
            emit(c.out, [&](std::ostream& os) { write_grid_function(os, s); });
            if (!profile_out.empty())
                emit(profile_out, [&](std::ostream& os) { write_step_profile(os, decreasing_rearrangement(u)); });
            return 0;
        }
        if (ver->parsed() || cmp->parsed()) {
            SuiteConfig cfg;
            CaseConfig cc;
            cc.id = "cli";
            cc.shape = c.shape;
            cc.h = c.h;
            cc.split = c.split;
            cc.function = c.function;
            cc.w_function = w_function;
            cc.W = W;
            cc.p = p;
            cc.seed = c.seed;
            cc.checks = ver->parsed() ? detail::tokens(checks) : std::vector<std::string>{kind};
            for (const auto& k : cc.checks)
                if (std::find(check_kinds().begin(), check_kinds().end(), k) == check_kinds().end())
                    throw Error("unknown check '" + k + "'");
            cfg.cases.push_back(cc);
            const auto results = run_cases(cfg, 1);
            emit(c.out, [&](std::ostream& os) { write_rows_csv(os, results.front().rows); });
            for (const auto& e : results.front().errors) std::cerr << "error: " << e << '\n';
            for (const auto& d : results.front().details)
                if (cmp->parsed()) std::cerr << d.content;
            return exit_status(results, c.strict);
        }
        if (sol->parsed()) {
            const auto grid = domain(c);
            const auto f = gen_fixture(c.function, grid, c.seed);
            if (radial) {
                const int n = grid->dim();
                const auto v = solve_radial_plaplacian(decreasing_rearrangement(f), n, p,
                                                       ball_radius(grid->measure(), n));
                emit(c.out, [&](std::ostream& os) { write_radial_profile(os, v.v); });
                return 0;
            }
            if (p != 2.0) throw Error("masked solves exist for p = 2 only; use --radial");
            const auto s = solve_poisson(f);
            std::cerr << "solver iterations=" << s.iterations << " residual=" << format_real(s.relative_residual)
                      << '\n';
            emit(c.out, [&](std::ostream& os) { write_grid_function(os, s.u); });
            return 0;
        }
        if (suite->parsed()) {
            std::ifstream is(c.config);
            if (!is) {
                std::cerr << "error: cannot open config '" << c.config << "'\n";
                return 2;
            }
            SuiteConfig cfg;
            try {
                cfg = parse_config(is);
            } catch (const ConfigError& e) {
                std::cerr << c.config << ": " << e.what() << '\n';
                return 2;
            }
            const int status = run_suite(cfg, c.out, c.jobs, EmitOptions{c.strict, !no_timing});
            std::cerr << "suite finished with status " << status << '\n';
            return status;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
