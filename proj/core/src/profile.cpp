#include "kslab/profile.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kslab/errors.hpp"

namespace kslab {

namespace {

constexpr double kTiny = 1e-300;

struct AnnulusTerms {
    double value = 0.0;  // sup of |x|
    double slope = 0.0;  // sup of first difference quotients
    double curve = 0.0;  // sup of second difference quotients
};

AnnulusTerms annulus_terms(const RadialGrid& g, std::span<const double> x, double r_lo,
                           double r_hi) {
    const int N = g.cells();
    if (static_cast<int>(x.size()) != N)
        fail(errc::shape_mismatch, "field does not match the grid");
    if (!(r_lo >= 0.0) || !(r_hi > r_lo))
        fail(errc::range_violation, "annulus needs 0 <= r_lo < r_hi");
    int first = -1, last = -2;
    AnnulusTerms out;
    for (int k = 0; k < N; ++k) {
        if (g.centers[k] < r_lo || g.centers[k] > r_hi) continue;
        if (first < 0) first = k;
        last = k;
        out.value = std::max(out.value, std::abs(x[k]));
    }
    if (first < 0) fail(errc::empty_annulus, "no cell centers inside the annulus");
    for (int k = first; k < last; ++k) {
        const double s = (x[k + 1] - x[k]) / (g.centers[k + 1] - g.centers[k]);
        out.slope = std::max(out.slope, std::abs(s));
    }
    for (int k = first + 1; k < last; ++k) {
        const double sr = (x[k + 1] - x[k]) / (g.centers[k + 1] - g.centers[k]);
        const double sl = (x[k] - x[k - 1]) / (g.centers[k] - g.centers[k - 1]);
        const double c = (sr - sl) / (0.5 * (g.centers[k + 1] - g.centers[k - 1]));
        out.curve = std::max(out.curve, std::abs(c));
    }
    return out;
}

std::vector<double> field_diff(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) fail(errc::shape_mismatch, "fields differ in length");
    std::vector<double> d(a.size());
    for (size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return d;
}

// Worst of the three component distances, each taken relative to the size of
// the same component of the reference field.
double relative_tail_distance(const RadialGrid& g, std::span<const double> cur,
                              std::span<const double> prev, double r_lo, double r_hi) {
    const auto d = annulus_terms(g, field_diff(cur, prev), r_lo, r_hi);
    const auto s = annulus_terms(g, cur, r_lo, r_hi);
    const double rv = d.value / std::max(s.value, kTiny);
    const double rs = d.slope / std::max(s.slope, kTiny);
    const double rc = d.curve / std::max(s.curve, kTiny);
    return std::max({rv, rs, rc});
}

} // namespace

double profile_distance(const RadialGrid& g, std::span<const double> a, std::span<const double> b,
                        double r_lo, double r_hi) {
    const auto t = annulus_terms(g, field_diff(a, b), r_lo, r_hi);
    return t.value + t.slope + t.curve;
}

double profile_tail_gap(const RadialGrid& g, const RunReport& rep, double r_cut) {
    if (rep.snapshots.size() < 2)
        fail(errc::validation_error, "tail gap needs at least 2 snapshots");
    const Snapshot& last = rep.snapshots.back();
    const Snapshot& prev = rep.snapshots[rep.snapshots.size() - 2];
    return std::max(relative_tail_distance(g, last.u, prev.u, r_cut, g.R),
                    relative_tail_distance(g, last.v, prev.v, r_cut, g.R));
}

ProfilePair extract_profile(const RadialGrid& g, const RunReport& rep, double r_cut,
                            double rel_tol) {
    if (rep.verdict != Verdict::BlownUp)
        fail(errc::wrong_verdict, "profile extraction needs a BlownUp run, got " +
                                      std::string(verdict_name(rep.verdict)));
    if (rep.snapshots.size() < 3)
        fail(errc::validation_error, "profile extraction needs at least 3 snapshots, got " +
                                         std::to_string(rep.snapshots.size()));
    if (!(rel_tol > 0.0)) fail(errc::validation_error, "rel_tol must be positive");
    const Snapshot& last = rep.snapshots.back();

    ProfilePair out;
    out.cauchy_rel = profile_tail_gap(g, rep, r_cut);
    if (out.cauchy_rel > rel_tol)
        fail(errc::not_cauchy, "tail snapshots differ by " + std::to_string(out.cauchy_rel) +
                                   " relative on r >= " + std::to_string(r_cut) +
                                   "; the run stopped too far from the blow-up time or the "
                                   "annulus reaches into the collapsing core");
    out.u = last.u;
    out.v = last.v;
    out.t_profile = last.t;
    return out;
}

ProfileFit fit_decay_exponent(const RadialGrid& g, std::span<const double> u, double r_in,
                              double r_out, double alpha) {
    const int N = g.cells();
    if (static_cast<int>(u.size()) != N)
        fail(errc::shape_mismatch, "profile does not match the grid");
    if (!(r_in > 0.0) || !(r_out > r_in))
        fail(errc::range_violation, "fit annulus needs 0 < r_in < r_out");
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        fail(errc::range_violation, "decay rate alpha must be finite and nonnegative");

    std::vector<double> lr, lu;
    for (int k = 0; k < N; ++k) {
        const double r = g.centers[k];
        if (r < r_in || r > r_out) continue;
        if (!(u[k] > 0.0))
            fail(errc::nonpositive_profile,
                 "profile must be positive on the fit annulus, u = " + std::to_string(u[k]) +
                     " at r = " + std::to_string(r));
        lr.push_back(std::log(r));
        lu.push_back(std::log(u[k]));
    }
    if (lr.size() < 8)
        fail(errc::empty_annulus,
             "fit annulus holds " + std::to_string(lr.size()) + " cells, need at least 8");

    const size_t M = lr.size();
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < M; ++i) {
        mx += lr[i];
        my += lu[i];
    }
    mx /= static_cast<double>(M);
    my /= static_cast<double>(M);
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < M; ++i) {
        sxx += (lr[i] - mx) * (lr[i] - mx);
        sxy += (lr[i] - mx) * (lu[i] - my);
    }
    const double slope = sxy / sxx;

    ProfileFit fit;
    fit.p_star = -slope;
    fit.log_c = my - slope * mx;
    fit.cells_used = static_cast<int>(M);
    for (size_t i = 0; i < M; ++i)
        fit.max_residual = std::max(fit.max_residual, std::abs(lu[i] - (fit.log_c + slope * lr[i])));
    fit.alpha = alpha;
    for (int k = 0; k < N; ++k) {
        const double w = u[k] * std::pow(g.centers[k], alpha);
        if (std::isfinite(w)) fit.c_alpha = std::max(fit.c_alpha, w);
    }
    return fit;
}

ProfileBounds check_profile_bounds(const ProfileFit& fit, const ModelParams& params,
                                   double margin) {
    if (!(margin >= 0.0)) fail(errc::validation_error, "margin must be nonnegative");
    ProfileBounds out;
    out.p_star = fit.p_star;
    out.decay_cap = critical_alpha(params);
    out.decay_floor = lower_bound_alpha(params.m, params.q);
    out.margin = margin;
    out.upper_ok = fit.p_star <= out.decay_cap + margin;
    out.lower_ok = !std::isfinite(out.decay_floor) || fit.p_star >= out.decay_floor - margin;
    return out;
}

} // namespace kslab
