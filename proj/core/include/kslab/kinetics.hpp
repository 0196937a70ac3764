#pragma once

#include <functional>
#include <vector>

namespace kslab {

// Pointwise coefficient functions of the cross-diffusion system together with
// the declared envelope constants. The envelopes
//   K_D1 * u^{m-1} <= D(u,v) <= K_D2 * max(u,1)^{m-1}
//   |S(u,v)|       <= K_S   * max(u,1)^q
//   g(u)           <= K_g   * u
// are what validate_kinetics checks by sampling; for m < 1 the lower envelope
// only holds on the declared validation range and K_D1 encodes that.
struct KineticFunctions {
    double m = 1.0;
    double q = 1.0;
    double K_D1 = 1.0;
    double K_D2 = 1.0;
    double K_S = 1.0;
    double K_g = 1.0;
    double eta = 0.0;  // floor applied to D when positive

    std::function<double(double, double)> D;         // (u, v)
    std::function<double(double, double)> S;         // (u, v)
    std::function<double(double)> g;                 // signal production
    std::function<double(double, double)> mobility;  // S(u,v)/u, finite as u -> 0
};

// D = (u+1)^{m-1}, S = u (u+1)^{q-1}, g = id. The envelope constants are
// exact for m >= 1; for m < 1 the lower diffusion constant is computed for
// the default validation range [1e-6, 1e6].
KineticFunctions prototype_kinetics(double m, double q, double eta = 0.0);

// Piecewise-linear (u, D, S) table, constant beyond the endpoints. Declared
// exponents come from the caller; envelope constants are fitted by sampling.
struct KineticsTableRow {
    double u, D, S;
};
KineticFunctions table_kinetics(std::vector<KineticsTableRow> rows, double m, double q,
                                double eta = 0.0);

// Samples the declared envelopes on log-spaced points of [u_min, u_max]
// (and a few v values, which the envelopes must be uniform in). Throws
// ValidationError at the first violated bound.
void validate_kinetics(const KineticFunctions& k, int samples = 1000, double u_min = 1e-6,
                       double u_max = 1e6);

// Saturating cutoff: identity on [0, 1/eps], a C^1 monotone blend on
// [1/eps, 2/eps], constant 1.5/eps beyond. Bounded by 2/eps everywhere.
struct RegularizationParams {
    double epsilon = 1e-3;

    double cutoff(double xi) const;
    void validate() const;  // epsilon in (0,1)
};

} // namespace kslab
