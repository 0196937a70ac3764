#include "kslab/exponents.hpp"

#include <cmath>
#include <string>

#include "kslab/errors.hpp"

namespace kslab {

namespace {

double inv_positive_part(double x) { return x > 0.0 ? 1.0 / x : kInf; }

} // namespace

void ModelParams::validate() const {
    if (n < 2) fail(errc::validation_error, "dimension n must be >= 2, got " + std::to_string(n));
    if (!(R > 0.0) || !std::isfinite(R)) fail(errc::validation_error, "radius R must be positive");
    if (p_mass < Rational(1)) fail(errc::validation_error, "p_mass must be >= 1");
    if (theta <= Rational(n)) fail(errc::validation_error, "theta must exceed n");
    if (!beta.positive()) fail(errc::validation_error, "beta must be positive");
    if (!(M > 0.0)) fail(errc::validation_error, "mass bound M must be positive");
    if (!(L > 0.0)) fail(errc::validation_error, "data bound L must be positive");
    if (!(eta > 0.0)) fail(errc::validation_error, "diffusivity floor eta must be positive");
}

Rational critical_alpha_rational(const ModelParams& p) {
    const Rational den = (p.m - p.q) * Rational(p.n) + Rational(1);
    if (!den.positive())
        fail(errc::degenerate_denominator,
             "(m-q)n + 1 = " + den.str() + " must be positive for the critical exponent");
    return Rational(static_cast<long long>(p.n) * (p.n - 1)) / den;
}

double critical_alpha(const ModelParams& p) { return critical_alpha_rational(p).value(); }

double lower_bound_alpha(const Rational& m, const Rational& q) {
    const Rational t1 = Rational(1) + q - m;
    const Rational t2 = q - m;
    const double a = t1.positive() ? (Rational(2) / t1).value() : kInf;
    const double b = t2.positive() ? (Rational(1) / t2).value() : kInf;
    return a < b ? a : b;
}

bool admissible_scalar(const ModelParams& p) {
    const Rational d = p.m - p.q;
    const Rational n{p.n};
    const Rational lo = p.p_mass / p.theta - p.p_mass / n;
    const Rational hi = p.p_mass / p.theta + (p.beta * p.p_mass - p.p_mass) / n;
    const Rational m_floor = (n - Rational(2) * p.p_mass) / n;
    return d > lo && d <= hi && p.m > m_floor;
}

bool admissible_ks(const ModelParams& p) {
    const Rational d = p.m - p.q;
    const Rational n{p.n};
    const Rational lo = Rational(-1) / n;
    const Rational hi = Rational(p.n - 2) / n;
    return d > lo && d <= hi && p.m > hi;
}

double scalar_alpha_threshold(const ModelParams& p) {
    const Rational den = (p.m - p.q) + p.p_mass / Rational(p.n) - p.p_mass / p.theta;
    if (!den.positive())
        fail(errc::nonpositive_denominator,
             "m - q + p/n - p/theta = " + den.str() + " must be positive");
    return (p.beta / den).value();
}

IterationExponents iteration_exponents(const ModelParams& p, double alpha, bool enlarge_beta) {
    if (!admissible_scalar(p))
        fail(errc::inadmissible_params, "iteration exponents need admissible scalar parameters");
    const double threshold = scalar_alpha_threshold(p);
    if (!(alpha > threshold) || !std::isfinite(alpha))
        fail(errc::inadmissible_params,
             "alpha must exceed the scalar threshold " + std::to_string(threshold));

    const double m = p.m.value();
    const double q = p.q.value();
    const double d = m - q;
    const double pm = p.p_mass.value();
    const double th = p.theta.value();
    const double n = static_cast<double>(p.n);

    double beta = p.beta.value();
    if (enlarge_beta && d * alpha >= beta) {
        // Midpoint of the window (alpha*d, alpha*(d + p/n - p/theta)); nonempty
        // because theta > n. Keeps alpha above the threshold for the new beta.
        beta = alpha * (d + 0.5 * (pm / n - pm / th));
    }

    IterationExponents out;
    out.alpha = alpha;
    out.beta_effective = beta;
    out.mu = {(m - 1.0) * alpha + 2.0, (2.0 * q - m - 1.0) * alpha + 2.0 * beta,
              (q - 1.0) * alpha + 1.0 + beta};
    out.gamma = {m - 1.0, 2.0 * q - m - 1.0, q - 1.0};
    out.kappa = {1.0, th / (th - 2.0), th / (th - 1.0)};

    // mu_i - (m-1) alpha, written in cancellation-free form.
    const std::array<double, 3> dens = {2.0, 2.0 * (beta - d * alpha), 1.0 + beta - d * alpha};
    for (int i = 0; i < 3; ++i) {
        out.lambda[i] = dens[i] > 0.0 ? alpha * pm / (out.kappa[i] * dens[i]) : kInf;
    }
    return out;
}

double sobolev_limit(int n) {
    if (n < 2) fail(errc::range_violation, "sobolev_limit needs n >= 2");
    return n == 2 ? kInf : 2.0 * n / (n - 2.0);
}

double ehrling_exponent(int n, double s, double r) {
    const double lim = sobolev_limit(n);
    if (!(s > 0.0) || !(r > s) || !(r < lim))
        fail(errc::range_violation, "ehrling_exponent needs 0 < s < r < 2n/(n-2)");
    return (1.0 / s - 1.0 / r) / (1.0 / s + 1.0 / n - 0.5);
}

double moser_s_cap(double m) {
    const double a = inv_positive_part(m - 1.0);
    return 0.5 * (a < 1.0 ? a : 1.0);
}

MoserSchedule moser_schedule(double m, double s, double p_tilde, int J, int n,
                             std::optional<double> ehrling_r) {
    if (!(s > 0.0) || s > moser_s_cap(m))
        fail(errc::range_violation,
             "s must lie in (0, " + std::to_string(moser_s_cap(m)) + "] for m = " + std::to_string(m));
    if (!(p_tilde > 1.0)) fail(errc::range_violation, "p_tilde must exceed 1");
    if (J < 1) fail(errc::range_violation, "schedule needs at least one rung");

    MoserSchedule out;
    out.m = m;
    out.s = s;
    const double sob = sobolev_limit(n);
    const double invm = inv_positive_part(m - 1.0);
    out.s0 = sob < invm ? sob : invm;
    out.p0 = std::max(p_tilde, 1.0 - (m - 1.0) * s);
    out.p.resize(static_cast<size_t>(J) + 1);
    out.p[0] = out.p0;
    for (int j = 1; j <= J; ++j) {
        out.p[j] = (out.p[j - 1] + 1.0 - (m - 1.0) * s) / s;
    }
    if (ehrling_r) {
        const double a = ehrling_exponent(n, s, *ehrling_r);
        out.a = a;
        out.nu = 4.0 * a / (1.0 - a);
    }
    return out;
}

DerivedExponents derive_exponents(const ModelParams& p, const DeriveOptions& opt) {
    p.validate();
    DerivedExponents out;
    if (((p.m - p.q) * Rational(p.n) + Rational(1)).positive())
        out.critical_alpha = critical_alpha(p);
    out.lower_bound_alpha = lower_bound_alpha(p.m, p.q);
    out.admissible_ks = admissible_ks(p);
    out.admissible_scalar = admissible_scalar(p);
    if (out.admissible_scalar) {
        out.threshold = scalar_alpha_threshold(p);
        const double alpha = opt.alpha.value_or(1.5 * *out.threshold);
        out.iter = iteration_exponents(p, alpha);
    }
    const double m = p.m.value();
    const double s = opt.moser_s.value_or(moser_s_cap(m));
    out.moser = moser_schedule(m, s, opt.moser_p_tilde, opt.moser_J, p.n);
    // nu is tied to a caller-chosen Ehrling pair, not to the schedule's s.
    const double a = ehrling_exponent(p.n, opt.ehrling_s, opt.ehrling_r);
    out.moser.a = a;
    out.moser.nu = 4.0 * a / (1.0 - a);
    return out;
}

} // namespace kslab
