#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "kslab/errors.hpp"
#include "kslab/exponents.hpp"
#include "kslab/grid.hpp"
#include "kslab/kinetics.hpp"
#include "kslab/solver.hpp"

using namespace kslab;

namespace {

KineticFunctions diffusion_only() {
    KineticFunctions k;
    k.m = 1.0;
    k.q = 1.0;
    k.K_S = 0.0;
    k.D = [](double, double) { return 1.0; };
    k.S = [](double, double) { return 0.0; };
    k.g = [](double u) { return u; };
    k.mobility = [](double, double) { return 0.0; };
    return k;
}

} // namespace

TEST_CASE("bump initial data hits the requested mass and levels") {
    const RadialGrid g = build_graded_grid(3, 1.0, 128, 1.0);
    const FieldState s = make_bump_initial(g, 2.0, 0.15, 0.3, 0.01);
    CHECK(reduced_mass(g, s.u) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(*std::min_element(s.u.begin(), s.u.end()) >= 0.01);
    for (double v : s.v) CHECK(v == 0.3);
    CHECK(s.u[0] > s.u[64]);  // concentrated at the origin
    CHECK_NOTHROW(validate_state(g, s));
    CHECK_THROWS_AS(make_bump_initial(g, -1.0, 0.1, 0.0, 0.0), Error);
    CHECK_THROWS_AS(make_bump_initial(g, 0.001, 0.1, 0.0, 1.0), Error);  // floor outweighs mass
}

TEST_CASE("state validation catches shape, sign and finiteness") {
    const RadialGrid g = build_graded_grid(3, 1.0, 16, 1.0);
    FieldState s = make_bump_initial(g, 1.0, 0.2, 0.0, 0.0);
    CHECK_NOTHROW(validate_state(g, s));
    FieldState bad = s;
    bad.u.pop_back();
    CHECK_THROWS_AS(validate_state(g, bad), Error);
    bad = s;
    bad.u[3] = -1e-3;
    CHECK_THROWS_AS(validate_state(g, bad), Error);
    bad = s;
    bad.v[3] = std::nan("");
    CHECK_THROWS_AS(validate_state(g, bad), Error);
}

TEST_CASE("solver config validation") {
    SolverConfig cfg;
    CHECK_NOTHROW(cfg.validate(1.0));
    cfg.snapshot_factor = 1.0;
    CHECK_THROWS_AS(cfg.validate(1.0), Error);
    cfg = SolverConfig{};
    cfg.dt_min = 1e-2;
    CHECK_THROWS_AS(cfg.validate(1.0), Error);
    cfg = SolverConfig{};
    CHECK_THROWS_AS(cfg.validate(1e12), Error);  // threshold below the initial sup
}

TEST_CASE("pure diffusion obeys the discrete max principle and conserves mass") {
    const RadialGrid g = build_graded_grid(3, 1.0, 64, 1.05);
    const KineticFunctions kin = diffusion_only();
    FieldState s;
    s.u.resize(64);
    s.v.assign(64, 0.0);
    for (int k = 0; k < 64; ++k) s.u[k] = 1.5 + std::sin(13.0 * (k + 1));
    const double lo0 = *std::min_element(s.u.begin(), s.u.end());
    const double hi0 = *std::max_element(s.u.begin(), s.u.end());
    const double mass0 = reduced_mass(g, s.u);

    const SolverConfig cfg;
    for (int i = 0; i < 200; ++i) s = step(g, kin, nullptr, s, 1e-4, cfg);

    const double lo1 = *std::min_element(s.u.begin(), s.u.end());
    const double hi1 = *std::max_element(s.u.begin(), s.u.end());
    CHECK(lo1 >= lo0 - 1e-12);
    CHECK(hi1 <= hi0 + 1e-12);
    CHECK(hi1 - lo1 < hi0 - lo0);  // strictly contracting
    CHECK(reduced_mass(g, s.u) == doctest::Approx(mass0).epsilon(1e-13));
    for (double v : s.v) CHECK(v >= 0.0);
}

TEST_CASE("coupled step conserves mass to rounding") {
    const RadialGrid g = build_graded_grid(3, 1.0, 32, 1.0);
    const KineticFunctions kin = prototype_kinetics(1.0, 1.0);
    FieldState s = make_bump_initial(g, 0.5, 0.2, 0.0, 0.0);
    const double mass0 = reduced_mass(g, s.u);
    const SolverConfig cfg;
    StepStats st;
    for (int i = 0; i < 200; ++i) s = step(g, kin, nullptr, s, 1e-5, cfg, &st);
    CHECK(reduced_mass(g, s.u) == doctest::Approx(mass0).epsilon(1e-13));
    CHECK(st.cfl_dt > 0.0);
    for (double u : s.u) CHECK(u >= 0.0);
    for (double v : s.v) CHECK(v >= 0.0);
}

TEST_CASE("step rejects mismatched shapes") {
    const RadialGrid g = build_graded_grid(3, 1.0, 16, 1.0);
    FieldState s = make_bump_initial(g, 1.0, 0.2, 0.0, 0.0);
    s.u.pop_back();
    CHECK_THROWS_AS(step(g, prototype_kinetics(1.0, 1.0), nullptr, s, 1e-5, SolverConfig{}),
                    Error);
}

TEST_CASE("bounded run completes and reports a consistent series") {
    const RadialGrid g = build_graded_grid(3, 1.0, 48, 1.0);
    const KineticFunctions kin = prototype_kinetics(2.0, 1.0);
    const FieldState init = make_bump_initial(g, 0.5, 0.2, 0.0, 0.0);
    SolverConfig cfg;
    cfg.t_end = 0.01;
    cfg.dt_max = 1e-4;
    AnalysisSpec spec;
    spec.alphas = {1.0, 2.0};
    const RunReport rep = run(g, kin, nullptr, init, cfg, spec);

    CHECK(rep.verdict == Verdict::Completed);
    CHECK(rep.t_final == doctest::Approx(0.01).epsilon(1e-9));
    REQUIRE(!rep.series.empty());
    for (size_t i = 1; i < rep.series.size(); ++i)
        CHECK(rep.series[i].t > rep.series[i - 1].t);
    for (const auto& e : rep.series) REQUIRE(e.wsup.size() == 2);
    CHECK(rep.mass_final == doctest::Approx(rep.mass_initial).epsilon(1e-12));
    CHECK(rep.max_mass_drift_rel < 1e-12);
    CHECK(rep.min_u_seen >= 0.0);
    CHECK(rep.min_v_seen >= 0.0);
    REQUIRE(!rep.snapshots.empty());
    CHECK(rep.snapshots.back().t == rep.series.back().t);
    CHECK(rep.final_state.u == rep.snapshots.back().u);
    // No blow-up bracket on a completed run.
    CHECK_THROWS_AS(estimate_blowup_time(rep), Error);
}

TEST_CASE("concentrated supercritical data blows up with a tight bracket") {
    const RadialGrid g = build_graded_grid(3, 1.0, 128, 1.02);
    const KineticFunctions kin = prototype_kinetics(1.0, 1.0);
    const FieldState init = make_bump_initial(g, 2.0, 0.1, 0.0, 0.0);
    SolverConfig cfg;
    cfg.dt_init = 1e-6;
    cfg.dt_min = 1e-13;
    cfg.dt_max = 1e-4;
    cfg.blowup_threshold = 1e8;
    cfg.t_end = 1.0;
    AnalysisSpec spec;
    spec.alphas = {6.5};
    const RunReport rep = run(g, kin, nullptr, init, cfg, spec);

    CHECK(rep.verdict == Verdict::BlownUp);
    CHECK(rep.sup_final >= 1e8);
    CHECK(rep.t_low == rep.series.back().t);
    CHECK(rep.t_high > rep.t_low);
    // Deep in the cascade the extrapolated tail is small next to the elapsed time.
    CHECK(rep.t_high - rep.t_low < 0.15 * rep.t_low);
    CHECK(rep.snapshots.size() >= 3);
}

TEST_CASE("blow-up bracket on a synthetic halving cascade") {
    RunReport rep;
    rep.verdict = Verdict::BlownUp;
    for (int k = 1; k <= 20; ++k) {
        SeriesEntry e;
        e.dt = std::ldexp(1.0, -k);
        e.t = 1.0 - std::ldexp(1.0, -k);
        rep.series.push_back(e);
    }
    const auto [lo, hi] = estimate_blowup_time(rep);
    // Remaining true time is exactly 2^-20; the tail doubles it for safety.
    CHECK(lo == 1.0 - std::ldexp(1.0, -20));
    CHECK(hi == 1.0 + std::ldexp(1.0, -20));
}

TEST_CASE("blow-up bracket on a flat cascade sums the trailing run") {
    RunReport rep;
    rep.verdict = Verdict::BlownUp;
    for (int k = 1; k <= 10; ++k) {
        SeriesEntry e;
        e.dt = 1e-3;
        e.t = 1e-3 * k;
        rep.series.push_back(e);
    }
    const auto [lo, hi] = estimate_blowup_time(rep);
    CHECK(lo == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(hi == doctest::Approx(0.01 + 2 * 9e-3).epsilon(1e-9));

    rep.series.resize(1);
    CHECK_THROWS_AS(estimate_blowup_time(rep), Error);
}

TEST_CASE("run twice with identical inputs agrees bitwise") {
    const RadialGrid g = build_graded_grid(3, 1.0, 32, 1.0);
    const KineticFunctions kin = prototype_kinetics(2.0, 1.0);
    const FieldState init = make_bump_initial(g, 0.5, 0.2, 0.0, 0.0);
    SolverConfig cfg;
    cfg.t_end = 0.005;
    cfg.dt_max = 1e-4;
    AnalysisSpec spec;
    spec.alphas = {1.5};
    const RunReport a = run(g, kin, nullptr, init, cfg, spec);
    const RunReport b = run(g, kin, nullptr, init, cfg, spec);
    const AgreementSummary agr = compare_runs(a, b, kInf);
    CHECK(agr.max_deviation == 0.0);
    CHECK(agr.points == static_cast<long>(a.series.size()));
    CHECK(agr.t_eps == a.series.back().t);
}

TEST_CASE("regularized run is bitwise identical while the cutoff sleeps") {
    const RadialGrid g = build_graded_grid(3, 1.0, 32, 1.0);
    const KineticFunctions kin = prototype_kinetics(2.0, 1.0);
    const FieldState init = make_bump_initial(g, 0.5, 0.2, 0.0, 0.0);
    SolverConfig cfg;
    cfg.t_end = 0.005;
    cfg.dt_max = 1e-4;
    AnalysisSpec spec;
    spec.alphas = {1.5};
    const RunReport plain = run(g, kin, nullptr, init, cfg, spec);
    double max_sup = 0.0;
    for (const auto& e : plain.series) max_sup = std::max(max_sup, e.sup_u);
    const RegularizationParams reg{1.0 / (4.0 * max_sup)};
    const RunReport regd = run(g, kin, &reg, init, cfg, spec);
    const AgreementSummary agr = compare_runs(regd, plain, 4.0 * max_sup);
    CHECK(agr.max_deviation == 0.0);
    CHECK(agr.points > 0);
}
