#pragma once

#include <array>
#include <limits>
#include <optional>
#include <vector>

#include "kslab/rational.hpp"

namespace kslab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Parameters of the radial chemotaxis model on the ball of radius R in
// dimension n. Diffusion scales like u^{m-1}, the sensitivity like u^q.
// p_mass, theta and beta are the integrability exponents of the weighted
// functionals the bound machinery runs on; M and L bound the initial mass
// and data size; eta is the diffusivity floor (kept tiny by default so the
// prototype kinetics are unchanged; raised for nondegenerate experiments).
struct ModelParams {
    int n = 3;
    double R = 1.0;
    Rational m{1};
    Rational q{1};
    Rational p_mass{1};
    Rational theta{12};
    Rational beta{5, 2};
    double M = 1.0;
    double L = 1.0;
    double eta = 1e-12;

    void validate() const;  // throws ValidationError
};

// Critical decay exponent n(n-1)/((m-q)n + 1). Every weighted-sup bound with
// alpha above this value is attainable; the denominator must be positive.
double critical_alpha(const ModelParams& p);
Rational critical_alpha_rational(const ModelParams& p);

// Decay floor min{2/(1+q-m)_+, 1/(q-m)_+}; +inf when both positive parts
// vanish. Profiles cannot decay slower than this rate.
double lower_bound_alpha(const Rational& m, const Rational& q);

// Membership of m-q in the admissible window, endpoints decided exactly.
bool admissible_scalar(const ModelParams& p);
bool admissible_ks(const ModelParams& p);

// Smallest alpha (exclusive) for which the scalar machinery closes:
// beta / (m - q + p/n - p/theta). Throws NonpositiveDenominator.
double scalar_alpha_threshold(const ModelParams& p);

// The three-channel exponent ladder driving the d/dt estimate of the
// weighted L^p functional. lambda entries are +inf when the corresponding
// positive part vanishes (only reachable with enlarge_beta = false).
struct IterationExponents {
    std::array<double, 3> mu{};
    std::array<double, 3> gamma{};
    std::array<double, 3> kappa{};
    std::array<double, 3> lambda{};
    double alpha = 0.0;
    double beta_effective = 0.0;
};

// Requires admissible_scalar and alpha > scalar_alpha_threshold. When
// (m-q)*alpha >= beta the working beta is enlarged into the open interval
// (alpha*(m-q), alpha*(m-q + p/n - p/theta)), which preserves admissibility
// and the threshold condition; beta_effective records the value used.
IterationExponents iteration_exponents(const ModelParams& p, double alpha,
                                       bool enlarge_beta = true);

// 2n/(n-2), +inf for n = 2.
double sobolev_limit(int n);

// Interpolation exponent (1/s - 1/r) / (1/s + 1/n - 1/2) for
// 0 < s < r < sobolev_limit(n); always lands in (0,1).
double ehrling_exponent(int n, double s, double r);

// Geometric p-ladder of the sup-norm bootstrap. p_0 = max{p_tilde, 1-(m-1)s},
// p_j = (p_{j-1} + 1 - (m-1)s)/s, which doubles at least once per rung.
struct MoserSchedule {
    double m = 1.0;
    double s = 0.5;
    double s0 = kInf;       // min{2n/(n-2), 1/(m-1)_+}
    double p0 = 2.0;
    std::vector<double> p;  // p_0 .. p_J
    std::optional<double> a;   // Ehrling exponent, when a pair was supplied
    std::optional<double> nu;  // 4a/(1-a)
};

// Largest admissible s: half of min{1/(m-1)_+, 1}.
double moser_s_cap(double m);

MoserSchedule moser_schedule(double m, double s, double p_tilde, int J, int n = 2,
                             std::optional<double> ehrling_r = std::nullopt);

// Everything the `exponents` command reports, derived in one sweep.
struct DerivedExponents {
    std::optional<double> critical_alpha;  // absent when (m-q)n + 1 <= 0
    double lower_bound_alpha = 0.0;
    bool admissible_ks = false;
    bool admissible_scalar = false;
    std::optional<double> threshold;       // absent when the denominator is nonpositive
    std::optional<IterationExponents> iter;  // absent when scalar side inadmissible
    MoserSchedule moser;
};

struct DeriveOptions {
    std::optional<double> alpha;  // default 1.5 * threshold
    double ehrling_s = 1.0;
    double ehrling_r = 2.0;
    double moser_p_tilde = 2.0;
    std::optional<double> moser_s;  // default: the cap
    int moser_J = 8;
};

DerivedExponents derive_exponents(const ModelParams& p, const DeriveOptions& opt = {});

} // namespace kslab
