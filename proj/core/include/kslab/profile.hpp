#pragma once

#include <span>
#include <vector>

#include "kslab/exponents.hpp"
#include "kslab/grid.hpp"
#include "kslab/solver.hpp"

namespace kslab {

// Distance between two fields on the annulus r in [r_lo, r_hi]: the sup-norm
// of the value difference plus the sup-norms of the first and second radial
// difference-quotient differences. Each term is a seminorm of a - b, so the
// whole thing is symmetric and satisfies the triangle inequality.
double profile_distance(const RadialGrid& g, std::span<const double> a, std::span<const double> b,
                        double r_lo, double r_hi);

struct ProfilePair {
    std::vector<double> u, v;  // fields of the final snapshot
    double t_profile = 0.0;    // time of the final snapshot
    double cauchy_rel = 0.0;   // worst relative tail distance over all checked components
};

/// Worst relative tail distance between the last two snapshots on [r_cut, R]:
// for each field and each of the three components (values, first and second
// difference quotients), the sup-distance divided by the final snapshot's own
// component size. Needs at least 2 snapshots.
double profile_tail_gap(const RadialGrid& g, const RunReport& rep, double r_cut);

// Reads the limiting profile off the tail of a blown-up run. Requires the
// tail gap to stay below rel_tol. Throws WrongVerdict, ValidationError
// (< 3 snapshots), NotCauchy.
ProfilePair extract_profile(const RadialGrid& g, const RunReport& rep, double r_cut,
                            double rel_tol);

struct ProfileFit {
    double p_star = 0.0;        // negated log-log slope
    double log_c = 0.0;         // fitted log-amplitude
    double max_residual = 0.0;  // sup-norm of the fit residual in log space
    int cells_used = 0;
    double alpha = 0.0;    // the decay rate c_alpha was computed against
    double c_alpha = 0.0;  // max over the whole grid of u * r^alpha
};

// Least-squares line through (log r, log u) on the annulus [r_in, r_out].
// Needs at least 8 cells there (EmptyAnnulus) and u > 0 on all of them
// (NonpositiveProfile).
ProfileFit fit_decay_exponent(const RadialGrid& g, std::span<const double> u, double r_in,
                              double r_out, double alpha);

struct ProfileBounds {
    double p_star = 0.0;
    double decay_cap = 0.0;    // critical exponent: fits far above it look like artifacts
    double decay_floor = 0.0;  // +inf disables the floor check
    double margin = 0.5;
    bool upper_ok = false;  // p_star <= decay_cap + margin
    bool lower_ok = false;  // p_star >= decay_floor - margin, vacuous for an infinite floor

    bool ok() const { return upper_ok && lower_ok; }
};

ProfileBounds check_profile_bounds(const ProfileFit& fit, const ModelParams& params,
                                   double margin = 0.5);

} // namespace kslab
