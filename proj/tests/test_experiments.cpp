#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "kslab/errors.hpp"
#include "kslab/experiments.hpp"
#include "kslab/grid.hpp"
#include "kslab/kinetics.hpp"
#include "kslab/textio.hpp"

using namespace kslab;
namespace fs = std::filesystem;

TEST_CASE("noise shape is seed-deterministic with unit sup") {
    const auto a = smooth_noise(64, 7);
    const auto b = smooth_noise(64, 7);
    const auto c = smooth_noise(64, 8);
    CHECK(a == b);
    CHECK(a != c);
    double sup = 0.0;
    for (double x : a) sup = std::max(sup, std::abs(x));
    CHECK(sup == 1.0);
    CHECK(smooth_noise(1, 3).size() == 1);
    CHECK_THROWS_AS(smooth_noise(0, 3), Error);
}

TEST_CASE("zero perturbation keeps the twins glued to the base") {
    const RadialGrid g = build_graded_grid(3, 1.0, 32, 1.0);
    const KineticFunctions kin = prototype_kinetics(1.0, 1.0);
    const FieldState base = make_bump_initial(g, 0.5, 0.2, 0.0, 0.0);
    const TwinReport rep = run_twin(g, kin, base, 0.0, 1e-4, 0.01, 10, 99, SolverConfig{});
    for (const auto& e : rep.series) {
        CHECK(e.du_delta == 0.0);
        CHECK(e.du_half == 0.0);
        CHECK(e.ratio_u == 0.0);
    }
    CHECK(rep.c_hat_delta == 0.0);
    CHECK(rep.amp_delta == 0.0);
}

TEST_CASE("small perturbations respond linearly") {
    const RadialGrid g = build_graded_grid(3, 1.0, 48, 1.0);
    const KineticFunctions kin = prototype_kinetics(2.0, 1.0);
    const FieldState base = make_bump_initial(g, 0.5, 0.2, 0.0, 0.0);
    const TwinReport rep = run_twin(g, kin, base, 1e-4, 5e-5, 0.01, 20, 42, SolverConfig{});
    CHECK(rep.steps == 200);
    CHECK(rep.min_cfl_margin >= 1.0);
    REQUIRE(rep.series.size() >= 3);
    CHECK(rep.series.front().t == 0.0);
    // Recorded times sit on the fixed grid.
    CHECK(rep.series[1].t == doctest::Approx(20 * 5e-5).epsilon(1e-12));
    // Even at t = 0 the half perturbation produces half the gap.
    CHECK(rep.series.front().ratio_u == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(rep.ratio_min > 0.4);
    CHECK(rep.ratio_max < 0.6);
    CHECK(rep.c_hat_delta == doctest::Approx(rep.c_hat_half).epsilon(1e-2));

    CHECK_THROWS_AS(run_twin(g, kin, base, 1e-4, 0.5, 1.0, 1, 42, SolverConfig{}), Error);
    CHECK_THROWS_AS(run_twin(g, kin, base, 1.5, 1e-4, 0.01, 1, 42, SolverConfig{}), Error);
}

TEST_CASE("simulate command writes byte-identical artifacts on reruns") {
    const Scenario sc = parse_scenario("grid.cells = 32\n"
                                       "init.mass = 0.5\n"
                                       "init.width = 0.2\n"
                                       "model.m = 2\n"
                                       "solver.t_end = 0.002\n"
                                       "solver.dt_max = 1e-4\n"
                                       "analysis.alpha = 1.5\n");
    const fs::path base = fs::temp_directory_path() / "kslab_cmd_test";
    fs::remove_all(base);
    CmdOptions o1;
    o1.out_dir = base / "a";
    CmdOptions o2;
    o2.out_dir = base / "b";
    std::ostringstream log;
    CHECK(cmd_simulate(sc, o1, log) == 0);
    CHECK(cmd_simulate(sc, o2, log) == 0);
    CHECK(read_text_file(o1.out_dir / "report.txt") == read_text_file(o2.out_dir / "report.txt"));
    CHECK(read_text_file(o1.out_dir / "series.csv") == read_text_file(o2.out_dir / "series.csv"));
    const std::string rep = read_text_file(o1.out_dir / "report.txt");
    CHECK(rep.find("verdict=Completed\n") != std::string::npos);
    CHECK(rep.find("model.m=2\n") != std::string::npos);
    fs::remove_all(base);
}

TEST_CASE("exponents command reports the ladder and flags inadmissible models") {
    const Scenario good = parse_scenario("");
    const fs::path base = fs::temp_directory_path() / "kslab_exp_test";
    fs::remove_all(base);
    CmdOptions opt;
    opt.out_dir = base;
    std::ostringstream log;
    CHECK(cmd_exponents(good, opt, log) == 0);
    const std::string rep = read_text_file(base / "report.txt");
    CHECK(rep.find("critical_alpha=6\n") != std::string::npos);
    CHECK(rep.find("admissible_ks=true\n") != std::string::npos);

    // m - q outside the window: the report still lands, the status does not.
    const Scenario bad = parse_scenario("model.m = 1\nmodel.q = 3/2\nanalysis.alpha = 4\n");
    CHECK(cmd_exponents(bad, opt, log) == kExitFailure);
    CHECK(read_text_file(base / "report.txt").find("admissible_ks=false\n") != std::string::npos);
    fs::remove_all(base);
}
