#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "twrc/cli.hpp"

namespace {

using namespace twrc;
using namespace twrc::cli;

struct RawArgs {
    std::string config;
    std::string tuple;
    std::string grid = "1..6,1..14";
    std::string output = "json";
    std::uint64_t seed = 0;
    bool seed_set = false;
    double tol_rank = Tolerance{}.rel_rank_tol;
    double tol_residual = Tolerance{}.residual_tol;
    double p_low = 1e6;
    double p_high = 1e8;
};

void add_common(CLI::App* sub, RawArgs& a, bool needs_config, bool takes_tuple) {
    if (needs_config) sub->add_option("--config", a.config, "M1,M2,M3,M4,N")->required();
    if (takes_tuple) sub->add_option("--tuple", a.tuple, "d1,d2,d3,d4 (integers or p/q)")->required();
    sub->add_option("--output", a.output, "json, csv or text")->check(CLI::IsMember({"json", "csv", "text"}));
    sub->add_option("--tol-rank", a.tol_rank, "relative singular-value threshold for rank decisions");
    sub->add_option("--tol-residual", a.tol_residual, "residual threshold for solves and verification");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DoF region, sum DoF and signal-alignment synthesis for the two-pair MIMO two-way relay channel"};
    app.require_subcommand(1);
    RawArgs a;

    auto* region = app.add_subcommand("region", "print the region's twelve constraints");
    add_common(region, a, true, false);
    auto* sumdof = app.add_subcommand("sumdof", "optimal sum DoF, regime and achieving vertices");
    add_common(sumdof, a, true, false);
    auto* check = app.add_subcommand("check", "region membership and alignment feasibility of a tuple");
    add_common(check, a, true, true);
    auto* synth = app.add_subcommand("synth", "synthesize the alignment design on seeded random channels");
    add_common(synth, a, true, true);
    auto* verify = app.add_subcommand("verify", "synthesize, then run noiseless recovery and a DoF slope estimate");
    add_common(verify, a, true, true);
    verify->add_option("--p-low", a.p_low, "lower transmit power for the slope estimate");
    verify->add_option("--p-high", a.p_high, "upper transmit power for the slope estimate");
    auto* sweep = app.add_subcommand("sweep", "closed form vs. vertex-enumeration oracle over a config grid");
    add_common(sweep, a, false, false);
    sweep->add_option("--grid", a.grid, "Mlo..Mhi,Nlo..Nhi");
    for (auto* sub : {synth, verify}) {
        sub->add_option_function<std::uint64_t>(
            "--seed",
            [&a](const std::uint64_t& s) {
                a.seed = s;
                a.seed_set = true;
            },
            std::string("channel seed (default $") + kSeedEnv + " or 0)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitMalformed;
    }

    RunSpec spec;
    try {
        CLI::App* sub = app.get_subcommands().front();
        spec.command = *parse_command(sub->get_name());
        spec.output = *parse_output_format(a.output);
        spec.tol.rel_rank_tol = a.tol_rank;
        spec.tol.residual_tol = a.tol_residual;
        spec.slope_p_low = a.p_low;
        spec.slope_p_high = a.p_high;
        spec.seed = a.seed_set ? a.seed : default_seed();
        if (!a.config.empty()) spec.config = parse_config(a.config);
        if (!a.tuple.empty()) spec.tuple = parse_tuple(a.tuple);
        if (spec.command == Command::Sweep) spec.grid = parse_grid(a.grid);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    }
    return run(spec, std::cout, std::cerr);
}
