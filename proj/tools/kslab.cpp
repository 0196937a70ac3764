// Command line front end. All heavy lifting lives in the core library; this
// file only parses arguments, loads the scenario and maps errors to exit
// codes (0 ok, 1 failure, 2 parse, 3 validation, 4 solver).

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "kslab/acceptance.hpp"
#include "kslab/errors.hpp"
#include "kslab/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"verification laboratory for radial chemotaxis blow-up"};
    app.require_subcommand(1);

    std::string config;
    std::string out = "out";
    kslab::CmdOptions opt;

    auto add_common = [&](CLI::App* sub, bool need_config) {
        auto* c = sub->add_option("--config", config, "scenario file, flat key=value lines");
        if (need_config) c->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "directory the artifacts are written into");
        sub->add_option("--jobs", opt.jobs, "worker threads (sweep cells run in parallel)");
        sub->add_option("--seed", opt.seed, "seed for every randomized ingredient");
    };

    CLI::App* c_exp = app.add_subcommand("exponents", "derive the exponent battery for a model");
    CLI::App* c_sim = app.add_subcommand("simulate", "run one scenario and write its artifacts");
    CLI::App* c_twin = app.add_subcommand("twin", "perturbed trajectory pair on a fixed time grid");
    CLI::App* c_sweep = app.add_subcommand("sweep", "run a grid of scenarios over mass/width/m/q");
    CLI::App* c_ver = app.add_subcommand("verify", "run the built-in verification battery");
    add_common(c_exp, true);
    add_common(c_sim, true);
    add_common(c_twin, true);
    add_common(c_sweep, true);
    add_common(c_ver, false);

    CLI11_PARSE(app, argc, argv);
    opt.out_dir = out;

    try {
        if (c_ver->parsed()) return kslab::cmd_verify(opt, std::cout);
        const kslab::Scenario sc = kslab::load_scenario(config);
        if (c_exp->parsed()) return kslab::cmd_exponents(sc, opt, std::cout);
        if (c_sim->parsed()) return kslab::cmd_simulate(sc, opt, std::cout);
        if (c_twin->parsed()) return kslab::cmd_twin(sc, opt, std::cout);
        if (c_sweep->parsed()) return kslab::cmd_sweep(sc, opt, std::cout);
    } catch (const kslab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.code()) {
            case kslab::errc::parse_error:
                return kslab::kExitParse;
            case kslab::errc::validation_error:
                return kslab::kExitValidation;
            case kslab::errc::linear_solve_failure:
            case kslab::errc::positivity_violation:
            case kslab::errc::non_finite_state:
                return kslab::kExitSolver;
            default:
                return kslab::kExitFailure;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kslab::kExitFailure;
    }
    return kslab::kExitFailure;
}
