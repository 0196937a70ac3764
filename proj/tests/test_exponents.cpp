#include "doctest.h"

#include <cmath>

#include "kslab/errors.hpp"
#include "kslab/exponents.hpp"

using namespace kslab;

namespace {

ModelParams make_params(int n, Rational m, Rational q) {
    ModelParams p;
    p.n = n;
    p.m = m;
    p.q = q;
    return p;
}

} // namespace

TEST_CASE("critical alpha: hand-computed values") {
    // n(n-1)/((m-q)n + 1)
    CHECK(critical_alpha(make_params(3, Rational(1), Rational(1))) == 6.0);
    CHECK(critical_alpha(make_params(2, Rational(1), Rational(1))) == 2.0);
    CHECK(critical_alpha(make_params(3, Rational(4, 3), Rational(1))) == 3.0);  // d = 1/3
    // Denominator 0 has no critical exponent at all.
    CHECK_THROWS_AS(critical_alpha(make_params(3, Rational(1), Rational(4, 3))), Error);
    CHECK(critical_alpha_rational(make_params(5, Rational(3, 2), Rational(1))) ==
          Rational(40, 7));  // 20 / (5/2 + 1)
    CHECK_THROWS_AS(critical_alpha(make_params(3, Rational(0), Rational(1))), Error);
}

TEST_CASE("decay floor: min of the two positive-part rates") {
    CHECK(lower_bound_alpha(Rational(1), Rational(1)) == 2.0);          // 2/(1+0), 1/0 -> inf
    CHECK(lower_bound_alpha(Rational(1), Rational(3, 2)) == 4.0 / 3.0); // min{4/3, 2}
    CHECK(lower_bound_alpha(Rational(2), Rational(1)) == kInf);         // both parts vanish
    CHECK(lower_bound_alpha(Rational(1, 2), Rational(1)) == doctest::Approx(4.0 / 3.0));
}

TEST_CASE("admissibility windows decide endpoints exactly") {
    // KS window: m - q in (-1/n, (n-2)/n], m > (n-2)/n.
    CHECK(admissible_ks(make_params(3, Rational(1), Rational(1))));
    CHECK(admissible_ks(make_params(3, Rational(4, 3), Rational(1))));  // d = 1/3, right endpoint in
    CHECK_FALSE(admissible_ks(make_params(3, Rational(3, 2), Rational(1))));  // d = 1/2 > 1/3
    CHECK_FALSE(admissible_ks(make_params(3, Rational(2, 3), Rational(1))));  // d = -1/3, open end out
    CHECK(admissible_ks(make_params(3, Rational(1), Rational(13, 10))));      // d = -3/10 > -1/3
    CHECK_FALSE(admissible_ks(make_params(3, Rational(1, 3), Rational(0))));  // m at the floor, out

    // Scalar window with the default p=1, theta=12, beta=5/2 at n=3:
    // d in (1/12 - 1/3, 1/12 + 1/2] = (-1/4, 7/12].
    CHECK(admissible_scalar(make_params(3, Rational(1), Rational(1))));
    CHECK(admissible_scalar(make_params(3, Rational(19, 12), Rational(1))));        // d = 7/12
    CHECK_FALSE(admissible_scalar(make_params(3, Rational(19, 12) + Rational(1, 1000),
                                              Rational(1))));                       // just past
    CHECK_FALSE(admissible_scalar(make_params(3, Rational(3, 4), Rational(1))));    // d = -1/4, open
}

TEST_CASE("scalar alpha threshold") {
    // beta / (d + p/n - p/theta) = (5/2) / (0 + 1/3 - 1/12) = 10.
    CHECK(scalar_alpha_threshold(make_params(3, Rational(1), Rational(1))) == 10.0);
    // d = 1/3: (5/2) / (7/12) = 30/7.
    CHECK(scalar_alpha_threshold(make_params(3, Rational(4, 3), Rational(1))) ==
          doctest::Approx(30.0 / 7.0).epsilon(1e-15));
    ModelParams bad = make_params(3, Rational(3, 4), Rational(1));  // d = -1/4 kills the denominator
    CHECK_THROWS_AS(scalar_alpha_threshold(bad), Error);
}

TEST_CASE("iteration exponents at n=3, m=q=1, alpha=15") {
    const ModelParams p = make_params(3, Rational(1), Rational(1));
    const IterationExponents it = iteration_exponents(p, 15.0);
    CHECK(it.beta_effective == 2.5);  // d*alpha = 0 < beta, no enlargement
    CHECK(it.mu[0] == 2.0);           // (m-1)alpha + 2
    CHECK(it.mu[1] == 5.0);           // (2q-m-1)alpha + 2beta
    CHECK(it.mu[2] == 3.5);           // (q-1)alpha + 1 + beta
    CHECK(it.gamma[0] == 0.0);
    CHECK(it.gamma[1] == 0.0);
    CHECK(it.gamma[2] == 0.0);
    CHECK(it.kappa[0] == 1.0);
    CHECK(it.kappa[1] == doctest::Approx(1.2).epsilon(1e-15));
    CHECK(it.kappa[2] == doctest::Approx(12.0 / 11.0).epsilon(1e-15));
    CHECK(it.lambda[0] == 7.5);  // 15 / (1 * 2)
    CHECK(it.lambda[1] == 2.5);  // 15 / (1.2 * 5)
    CHECK(it.lambda[2] == doctest::Approx(55.0 / 14.0).epsilon(1e-14));
    // mu_i - alpha*gamma_i collapses to (2, 2 beta, 1 + beta).
    for (int i = 0; i < 3; ++i)
        CHECK(it.mu[i] - it.alpha * it.gamma[i] ==
              doctest::Approx(std::array<double, 3>{2.0, 5.0, 3.5}[i]).epsilon(1e-14));
}

TEST_CASE("beta enlargement keeps the ladder finite") {
    // d = 1/3, alpha = 9: d*alpha = 3 >= beta = 5/2, so beta grows to
    // alpha*(d + (p/n - p/theta)/2) = 9 * 11/24 = 33/8.
    const ModelParams p = make_params(3, Rational(4, 3), Rational(1));
    const IterationExponents it = iteration_exponents(p, 9.0);
    CHECK(it.beta_effective == doctest::Approx(4.125).epsilon(1e-14));
    CHECK(it.mu[0] == doctest::Approx(5.0).epsilon(1e-14));    // 3 + 2
    CHECK(it.mu[1] == doctest::Approx(5.25).epsilon(1e-13));   // -3 + 33/4
    CHECK(it.mu[2] == doctest::Approx(5.125).epsilon(1e-13));  // 1 + 33/8
    for (int i = 0; i < 3; ++i) {
        CHECK(it.lambda[i] > 1.0);
        CHECK(std::isfinite(it.lambda[i]));
    }
    CHECK(it.lambda[0] == doctest::Approx(4.5).epsilon(1e-14));
    CHECK(it.lambda[1] == doctest::Approx(10.0 / 3.0).epsilon(1e-13));
    CHECK(it.lambda[2] == doctest::Approx(99.0 / 25.5).epsilon(1e-13));

    // Without enlargement the second channel degenerates (beta - d*alpha < 0)
    // while the third survives on 1 + beta - d*alpha = 1/2.
    const IterationExponents raw = iteration_exponents(p, 9.0, false);
    CHECK(raw.lambda[1] == kInf);
    CHECK(raw.lambda[2] == doctest::Approx(16.5).epsilon(1e-13));
}

TEST_CASE("iteration exponents reject out-of-range requests") {
    const ModelParams p = make_params(3, Rational(1), Rational(1));
    CHECK_THROWS_AS(iteration_exponents(p, 10.0), Error);  // threshold itself is excluded
    CHECK_THROWS_AS(iteration_exponents(make_params(3, Rational(3, 4), Rational(1)), 20.0), Error);
}

TEST_CASE("sobolev limit") {
    CHECK(sobolev_limit(2) == kInf);
    CHECK(sobolev_limit(3) == 6.0);
    CHECK(sobolev_limit(4) == 4.0);
    CHECK_THROWS_AS(sobolev_limit(1), Error);
}

TEST_CASE("ehrling exponent") {
    CHECK(ehrling_exponent(2, 1.0, 2.0) == 0.5);
    CHECK(ehrling_exponent(3, 1.0, 2.0) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK_THROWS_AS(ehrling_exponent(3, 1.0, 6.0), Error);  // r at the Sobolev limit
    CHECK_THROWS_AS(ehrling_exponent(3, 2.0, 1.0), Error);  // r <= s
    CHECK_THROWS_AS(ehrling_exponent(3, 0.0, 1.0), Error);
}

TEST_CASE("moser step cap") {
    CHECK(moser_s_cap(1.0) == 0.5);
    CHECK(moser_s_cap(2.0) == 0.5);
    CHECK(moser_s_cap(3.0) == 0.25);
    CHECK(moser_s_cap(0.5) == 0.5);
}

TEST_CASE("moser schedule: m=1, s=1/2, p~=2 gives 2, 6, 14, 30") {
    const MoserSchedule ms = moser_schedule(1.0, 0.5, 2.0, 3);
    REQUIRE(ms.p.size() == 4);
    CHECK(ms.p0 == 2.0);
    CHECK(ms.p[0] == 2.0);
    CHECK(ms.p[1] == 6.0);
    CHECK(ms.p[2] == 14.0);
    CHECK(ms.p[3] == 30.0);
    CHECK(ms.s0 == kInf);  // n=2 default and m=1: both caps infinite
}

TEST_CASE("moser schedule: p0 picks the larger of p~ and 1-(m-1)s") {
    CHECK(moser_schedule(0.5, 0.5, 1.1, 1).p0 == 1.25);  // 1 + 0.25 beats 1.1
    CHECK(moser_schedule(0.5, 0.5, 1.5, 1).p0 == 1.5);
    CHECK(moser_schedule(3.0, 0.25, 2.0, 1, 3).s0 == doctest::Approx(0.5));  // 1/(m-1)
}

TEST_CASE("moser schedule: dyadic steps invert exactly on small ladders") {
    const MoserSchedule ms = moser_schedule(2.0, 0.5, 2.0, 10);
    for (size_t j = 1; j < ms.p.size(); ++j) {
        const double back = ms.p[j] * 0.5 - 1.0 + (2.0 - 1.0) * 0.5;
        CHECK(back == ms.p[j - 1]);
    }
}

TEST_CASE("moser schedule rejects bad arguments") {
    CHECK_THROWS_AS(moser_schedule(3.0, 0.5, 2.0, 4), Error);  // s above the cap
    CHECK_THROWS_AS(moser_schedule(1.0, 0.5, 1.0, 4), Error);  // p~ must exceed 1
    CHECK_THROWS_AS(moser_schedule(1.0, 0.5, 2.0, 0), Error);
}

TEST_CASE("derive_exponents bundles the whole battery") {
    ModelParams p = make_params(3, Rational(1), Rational(1));
    const DerivedExponents d = derive_exponents(p);
    REQUIRE(d.critical_alpha.has_value());
    CHECK(*d.critical_alpha == 6.0);
    CHECK(d.lower_bound_alpha == 2.0);
    CHECK(d.admissible_ks);
    CHECK(d.admissible_scalar);
    REQUIRE(d.threshold.has_value());
    CHECK(*d.threshold == 10.0);
    REQUIRE(d.iter.has_value());
    CHECK(d.iter->alpha == 15.0);  // 1.5 * threshold by default
    CHECK(d.moser.s == 0.5);
    CHECK(d.moser.a.has_value());
    CHECK(*d.moser.a == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(*d.moser.nu == doctest::Approx(6.0).epsilon(1e-14));

    // Deep in the inadmissible zone everything optional is absent.
    ModelParams q = make_params(3, Rational(1), Rational(2));  // d = -1, (m-q)n+1 = -2
    const DerivedExponents dq = derive_exponents(q);
    CHECK_FALSE(dq.critical_alpha.has_value());
    CHECK_FALSE(dq.admissible_ks);
    CHECK_FALSE(dq.admissible_scalar);
    CHECK_FALSE(dq.threshold.has_value());
    CHECK_FALSE(dq.iter.has_value());
}

TEST_CASE("model validation") {
    ModelParams p;
    p.n = 1;
    CHECK_THROWS_AS(p.validate(), Error);
    p.n = 3;
    p.theta = Rational(3);
    CHECK_THROWS_AS(p.validate(), Error);
    p.theta = Rational(12);
    p.eta = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
    p.eta = 1e-12;
    CHECK_NOTHROW(p.validate());
}
