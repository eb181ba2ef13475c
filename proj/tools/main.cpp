#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>

#include "commands.hpp"
#include "qrect/util.hpp"

using qrect::cli::RunConfig;

int main(int argc, char** argv) {
    CLI::App app{"Multiscale flatness coefficients on discretized regular sets"};
    app.require_subcommand(1);
    app.fallthrough();
    RunConfig cfg;
    cfg.threads = qrect::default_threads();
    app.add_option("--seed", cfg.seed, "Random seed");
    app.add_option("--threads", cfg.threads, "Concurrent per-cube work items")->check(CLI::PositiveNumber);
    app.add_option("--out-dir", cfg.out_dir, "Directory for report files");

    auto& g = cfg.generator;
    auto* gen = app.add_subcommand("gen", "Generate a weighted point cloud");
    gen->set_help_flag("--help", "Print this help message and exit");
    gen->add_option("--family", cfg.family, "segment|kplane_patch|circle|parallel_lines|lipschitz_graph|"
                                            "turning_curve|heis_horizontal_line|heis_lift")
        ->required();
    gen->add_option("--h", g.h, "Sampling step");
    gen->add_option("--n", g.n, "Ambient dimension (Heisenberg n for Heisenberg families)");
    gen->add_option("--k", g.k, "Patch dimension");
    gen->add_option("--length", g.length, "Segment, patch or line length");
    gen->add_option("--radius", g.radius, "Circle radius");
    gen->add_option("--eps", g.eps, "Parallel lines gap factor");
    gen->add_option("--r", g.r, "Parallel lines half-length");
    gen->add_option("--lipschitz", g.lipschitz, "Lipschitz constant");
    gen->add_option("--terms", g.terms, "Sinusoid count");
    gen->add_option("--turn-c", g.turn_c, "Turning angle scale");
    gen->add_option("--turn-p", g.turn_p, "Turning angle decay exponent");
    gen->add_option("--generations", g.generations, "Turning curve generations");
    gen->add_option("--angles", g.angles, "Explicit turning angles");
    gen->add_option("--curve", g.curve, "Lifted curve: circle|segment");
    gen->add_option("-o,--output", cfg.output, "Cloud file (.csv or .json)")->required();

    auto* cubes = app.add_subcommand("cubes", "Build a dyadic cube tree");
    cubes->add_option("-i,--input", cfg.input, "Cloud file")->required();
    cubes->add_option("--depth", cfg.depth, "Finest level")->check(CLI::NonNegativeNumber);
    cubes->add_option("-o,--output", cfg.output, "Tree JSON file");

    auto* analyze = app.add_subcommand("analyze", "Coefficients and Carleson sums");
    analyze->add_option("-i,--input", cfg.input, "Cloud file")->required();
    analyze->add_option("--depth", cfg.depth, "Finest level")->check(CLI::NonNegativeNumber);
    analyze->add_option("--coef", cfg.coefficients, "KIND[:q[:p]] with KIND in beta_p|beta_inf|iota_p|iota_map");
    analyze->add_option("--k", cfg.k, "Plane dimension");
    analyze->add_option("--pair-budget", cfg.pair_budget, "Exact pair sums up to this many pairs");
    analyze->add_option("--starts", cfg.starts, "Optimizer starts")->check(CLI::PositiveNumber);
    analyze->add_flag("--svg", cfg.emit_svg, "Write SVG plots");

    auto* verify = app.add_subcommand("verify", "Verification suites");
    verify->add_option("--suite", cfg.suite, "pythagoras|bracket|small_angle|iota_beta|tilting|packing|embedding|all");
    verify->add_option("--trials", cfg.trials, "Trials per check");
    verify->add_option("-i,--input", cfg.input, "Cloud file for tilting and packing");
    verify->add_option("--depth", cfg.depth, "Finest level for tilting and packing");
    verify->add_option("--n", cfg.heis_n, "Heisenberg target dimension for embedding");
    verify->add_option("--p", cfg.p, "Exponent for tilting and packing");
    verify->add_option("--pair-budget", cfg.pair_budget, "Pair budget for iota evaluations");

    auto* scaling = app.add_subcommand("scaling", "Parallel-lines scaling table");
    scaling->add_option("--eps", cfg.eps_list, "Gap values");
    scaling->add_option("--q", cfg.q, "Exponent");
    scaling->add_option("--pair-budget", cfg.pair_budget, "Pair budget for infimum estimators");
    scaling->add_flag("--svg", cfg.emit_svg, "Write an SVG plot");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        if (*gen) return qrect::cli::cmd_gen(cfg);
        if (*cubes) return qrect::cli::cmd_cubes(cfg);
        if (*analyze) return qrect::cli::cmd_analyze(cfg);
        if (*verify) return qrect::cli::cmd_verify(cfg);
        if (*scaling) return qrect::cli::cmd_scaling(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
