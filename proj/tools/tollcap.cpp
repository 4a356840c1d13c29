// Command-line front end: tollcap <command> [--instance FILE | --preset NAME] [options]

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tollcap/cli.hpp"

namespace {

const char* describe(const std::string& name) {
    if (name == "wardrop") return "equilibrium flow under given tolls";
    if (name == "optimal-flow") return "cost-minimizing flow";
    if (name == "spne") return "toll equilibrium at a cap";
    if (name == "best-response") return "best response of one firm";
    if (name == "optimal-cap") return "cost-minimizing cap (affine, full support)";
    if (name == "sweep") return "equilibrium over a range of caps";
    if (name == "duopoly-search") return "grid search for duopoly equilibria";
    if (name == "verify") return "deviation gains of a toll vector";
    if (name == "bounds") return "efficiency bounds by degree";
    return "bundle of the analyses for one instance";
}

}  // namespace

int main(int argc, char** argv) {
    using namespace tollcap;
    cli::RunConfig cfg;

    CLI::App app{"Uniform price caps for toll competition on parallel links"};
    app.require_subcommand(1);

    std::string instance, preset, tolls, cap, result, output;
    double a2 = 0.0, a3 = 0.5, c_lo = 0.0, c_hi = 0.0;
    int n = 2, d = 3;

    for (const auto& name : cli::commands()) {
        auto* sub = app.add_subcommand(name, describe(name));
        if (name != "bounds") {
            sub->add_option("--instance", instance, "instance JSON file");
            sub->add_option("--preset", preset, "fig-alg | fig-bad | fig-mul | fig-non | fig-aff | fig-poly");
            sub->add_option("--a2", a2, "slope of link 2 (fig-bad, fig-non)");
            sub->add_option("--a3", a3, "slope of link 3 (fig-mul)");
            sub->add_option("--n", n, "number of links (fig-aff)");
            sub->add_option("--d", d, "polynomial degree (fig-poly)");
            sub->add_option("--tolls", tolls, "comma-separated tolls");
            sub->add_option("--cap", cap, "price cap, a number or inf");
            sub->add_option("--firm", cfg.firm, "firm index, 1-based")->capture_default_str();
            sub->add_option("--grid-n", cfg.grid_n, "grid cells of numeric searches")->capture_default_str();
            sub->add_option("--refine-iters", cfg.refine_iters, "golden-section iterations")->capture_default_str();
            sub->add_option("--eps", cfg.eps, "deviation-gain threshold")->capture_default_str();
            sub->add_option("--c-lo", c_lo, "sweep: lowest cap");
            sub->add_option("--c-hi", c_hi, "sweep: highest cap");
            sub->add_option("--steps", cfg.steps, "sweep: number of caps")->capture_default_str();
            sub->add_option("--result", result, "verify: read tolls and cap from a result document");
        } else {
            sub->add_option("--d-max", cfg.d_max, "largest degree")->capture_default_str();
        }
        sub->add_option("--format", cfg.format, "json or csv")->capture_default_str();
        sub->add_option("--output", output, "output file (default: standard output)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kParseFailure;
    }

    const auto* sub = app.get_subcommands().front();
    cfg.command = sub->get_name();
    auto given = [&](const char* flag) { return sub->get_option_no_throw(flag) && sub->count(flag) > 0; };

    try {
        if (given("--instance"))
            cfg.instance_path = instance;
        if (given("--preset"))
            cfg.preset = preset;
        if (given("--a2"))
            cfg.preset_params.a2 = a2;
        if (given("--a3"))
            cfg.preset_params.a3 = a3;
        if (given("--n"))
            cfg.preset_params.n = n;
        if (given("--d"))
            cfg.preset_params.d = d;
        if (given("--tolls"))
            cfg.tolls = io::parse_list(tolls);
        if (given("--cap"))
            cfg.cap = io::parse_cap(cap);
        if (given("--result"))
            cfg.result_path = result;
        if (given("--c-lo"))
            cfg.c_lo = c_lo;
        if (given("--c-hi"))
            cfg.c_hi = c_hi;
        if (given("--output"))
            cfg.output = output;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kParseFailure;
    }

    return cli::run(cfg, std::cout, std::cerr);
}
