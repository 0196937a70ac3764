#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "kslab/errors.hpp"
#include "kslab/grid.hpp"
#include "kslab/profile.hpp"

using namespace kslab;

namespace {

template <class F>
errc thrown_code(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected a kslab::Error");
    return errc::validation_error;
}

std::vector<double> power_field(const RadialGrid& g, double c, double p) {
    std::vector<double> u(g.cells());
    for (int k = 0; k < g.cells(); ++k) u[k] = c * std::pow(g.centers[k], -p);
    return u;
}

RunReport fake_blowup(const RadialGrid& g, const std::vector<double>& prev_scale_u,
                      const std::vector<double>& last_u) {
    RunReport rep;
    rep.verdict = Verdict::BlownUp;
    const std::vector<double> v(g.cells(), 1.0);
    Snapshot s0{0, 0.1, power_field(g, 1.0, 2.0), v};
    Snapshot s1{1, 0.2, prev_scale_u, v};
    Snapshot s2{2, 0.3, last_u, v};
    rep.snapshots = {s0, s1, s2};
    return rep;
}

} // namespace

TEST_CASE("profile distance is a metric on the annulus") {
    const RadialGrid g = build_graded_grid(3, 1.0, 48, 1.0);
    std::mt19937_64 rng(7);
    auto draw = [&] {
        std::vector<double> x(48);
        for (double& e : x) e = static_cast<double>(rng() >> 11) * 0x1p-52 - 0.5;
        return x;
    };
    const auto a = draw(), b = draw(), c = draw();
    const double dab = profile_distance(g, a, b, 0.2, 1.0);
    const double dba = profile_distance(g, b, a, 0.2, 1.0);
    const double dac = profile_distance(g, a, c, 0.2, 1.0);
    const double dcb = profile_distance(g, c, b, 0.2, 1.0);
    CHECK(profile_distance(g, a, a, 0.2, 1.0) == 0.0);
    CHECK(dab == dba);
    CHECK(dab > 0.0);
    CHECK(dab <= dac + dcb + 1e-12);
    CHECK(thrown_code([&] { profile_distance(g, a, b, 0.5, 0.2); }) == errc::range_violation);
}

TEST_CASE("log-log fit recovers an exact power law") {
    const RadialGrid g = build_graded_grid(3, 1.0, 256, 1.0);
    const auto u = power_field(g, 5.0, 2.0);
    const ProfileFit fit = fit_decay_exponent(g, u, 0.1, 0.9, 2.0);
    CHECK(fit.p_star == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(fit.max_residual < 1e-12);
    CHECK(fit.log_c == doctest::Approx(std::log(5.0)).epsilon(1e-10));
    CHECK(fit.cells_used >= 8);
    CHECK(fit.alpha == 2.0);
    // u * r^2 is identically 5, so the weighted amplitude is too.
    CHECK(fit.c_alpha == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("log-log fit tolerates a small multiplicative ripple") {
    const RadialGrid g = build_graded_grid(3, 1.0, 256, 1.0);
    auto u = power_field(g, 5.0, 2.0);
    for (int k = 0; k < g.cells(); ++k) u[k] *= 1.0 + 0.01 * std::sin(40.0 * g.centers[k]);
    const ProfileFit fit = fit_decay_exponent(g, u, 0.1, 0.9, 2.0);
    CHECK(fit.p_star > 1.95);
    CHECK(fit.p_star < 2.05);
    CHECK(fit.max_residual < 0.02);
}

TEST_CASE("a flat profile fits slope zero") {
    const RadialGrid g = build_graded_grid(2, 1.0, 128, 1.0);
    const std::vector<double> u(128, 3.0);
    const ProfileFit fit = fit_decay_exponent(g, u, 0.1, 0.9, 0.0);
    CHECK(fit.p_star == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fit.c_alpha == 3.0);
}

TEST_CASE("fit rejections") {
    const RadialGrid g = build_graded_grid(3, 1.0, 64, 1.0);
    auto u = power_field(g, 1.0, 2.0);
    CHECK(thrown_code([&] { fit_decay_exponent(g, u, 0.5, 0.52, 1.0); }) == errc::empty_annulus);
    CHECK(thrown_code([&] { fit_decay_exponent(g, u, 0.0, 0.9, 1.0); }) == errc::range_violation);
    CHECK(thrown_code([&] { fit_decay_exponent(g, u, 0.1, 0.9, -1.0); }) == errc::range_violation);
    u[32] = 0.0;
    CHECK(thrown_code([&] { fit_decay_exponent(g, u, 0.1, 0.9, 1.0); }) ==
          errc::nonpositive_profile);
}

TEST_CASE("tail gap sees the relative drift between the last two snapshots") {
    const RadialGrid g = build_graded_grid(3, 1.0, 64, 1.0);
    std::vector<double> prev = power_field(g, 1.0 + 2e-5, 2.0);
    std::vector<double> last = power_field(g, 1.0 + 1e-5, 2.0);
    RunReport rep = fake_blowup(g, prev, last);

    // diff is an exact scalar multiple of the final field, so all three
    // component ratios collapse to the same number.
    const double gap = profile_tail_gap(g, rep, 0.2);
    CHECK(gap == doctest::Approx(1e-5 / (1.0 + 1e-5)).epsilon(1e-9));

    const ProfilePair prof = extract_profile(g, rep, 0.2, 1e-3);
    CHECK(prof.u == last);
    CHECK(prof.t_profile == 0.3);
    CHECK(prof.cauchy_rel == gap);

    rep.snapshots.resize(1);
    CHECK(thrown_code([&] { profile_tail_gap(g, rep, 0.2); }) == errc::validation_error);
}

TEST_CASE("extract_profile refuses drifting tails and wrong verdicts") {
    const RadialGrid g = build_graded_grid(3, 1.0, 64, 1.0);
    RunReport rep = fake_blowup(g, power_field(g, 1.0, 2.0), power_field(g, 1.1, 2.0));
    CHECK(thrown_code([&] { extract_profile(g, rep, 0.2, 1e-3); }) == errc::not_cauchy);

    rep = fake_blowup(g, power_field(g, 1.0 + 2e-5, 2.0), power_field(g, 1.0 + 1e-5, 2.0));
    rep.verdict = Verdict::Completed;
    CHECK(thrown_code([&] { extract_profile(g, rep, 0.2, 1e-3); }) == errc::wrong_verdict);

    rep.verdict = Verdict::BlownUp;
    rep.snapshots.resize(2);
    CHECK(thrown_code([&] { extract_profile(g, rep, 0.2, 1e-3); }) == errc::validation_error);
    rep.snapshots.resize(3);
    CHECK(thrown_code([&] { extract_profile(g, rep, 0.2, 0.0); }) == errc::validation_error);
}

TEST_CASE("profile bounds compare the fitted slope against the model window") {
    ModelParams p;  // n = 3, m = q = 1: cap 6, floor 2
    ProfileFit fit;
    fit.p_star = 2.0;
    ProfileBounds b = check_profile_bounds(fit, p);
    CHECK(b.decay_cap == 6.0);
    CHECK(b.decay_floor == 2.0);
    CHECK(b.upper_ok);
    CHECK(b.lower_ok);
    CHECK(b.ok());

    fit.p_star = 7.0;  // above cap + margin
    b = check_profile_bounds(fit, p);
    CHECK(!b.upper_ok);
    CHECK(b.lower_ok);
    CHECK(!b.ok());

    fit.p_star = 1.4;  // below floor - margin
    b = check_profile_bounds(fit, p);
    CHECK(b.upper_ok);
    CHECK(!b.lower_ok);

    fit.p_star = 6.5;  // sits exactly on cap + margin
    b = check_profile_bounds(fit, p);
    CHECK(b.upper_ok);

    CHECK(thrown_code([&] { check_profile_bounds(fit, p, -0.1); }) == errc::validation_error);
}

TEST_CASE("an infinite decay floor never rejects") {
    ModelParams p;
    p.m = Rational(2);
    p.q = Rational(1);
    ProfileFit fit;
    fit.p_star = 0.0;
    const ProfileBounds b = check_profile_bounds(fit, p);
    CHECK(b.decay_floor == kInf);
    CHECK(b.lower_ok);
    CHECK(b.decay_cap == doctest::Approx(1.5));
}
