#include "kslab/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "kslab/errors.hpp"

namespace kslab {

namespace {

constexpr double kValidationUMin = 1e-6;

double pos(double x) { return x > 0.0 ? x : 0.0; }

std::vector<double> log_spaced(double lo, double hi, int count) {
    std::vector<double> out(count);
    const double la = std::log(lo), lb = std::log(hi);
    for (int i = 0; i < count; ++i) {
        out[i] = std::exp(la + (lb - la) * i / (count - 1));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

} // namespace

KineticFunctions prototype_kinetics(double m, double q, double eta) {
    KineticFunctions k;
    k.m = m;
    k.q = q;
    k.eta = eta;
    k.K_D2 = std::pow(2.0, pos(m - 1.0));
    k.K_S = std::pow(2.0, pos(q));
    k.K_g = 1.0;
    if (m >= 1.0) {
        k.K_D1 = 1.0;
    } else {
        // (u+1)^{m-1} / u^{m-1} is smallest at the low end of the validation
        // range; shave a few ulps so sampled comparisons cannot flip.
        k.K_D1 = std::pow(1.0 + 1.0 / kValidationUMin, m - 1.0) * (1.0 - 1e-12);
    }
    k.D = [m, eta](double u, double) { return std::max(std::pow(u + 1.0, m - 1.0), eta); };
    k.S = [q](double u, double) { return u * std::pow(u + 1.0, q - 1.0); };
    k.g = [](double u) { return u; };
    k.mobility = [q](double u, double) { return std::pow(u + 1.0, q - 1.0); };
    return k;
}

KineticFunctions table_kinetics(std::vector<KineticsTableRow> rows, double m, double q,
                                double eta) {
    if (rows.size() < 2) fail(errc::validation_error, "kinetics table needs at least 2 rows");
    for (size_t i = 0; i + 1 < rows.size(); ++i) {
        if (!(rows[i].u < rows[i + 1].u))
            fail(errc::validation_error, "kinetics table must be strictly increasing in u");
    }
    for (const auto& r : rows) {
        if (!(r.u >= 0.0) || !std::isfinite(r.D) || !std::isfinite(r.S) || r.D < 0.0)
            fail(errc::validation_error, "kinetics table entries must be finite, u and D >= 0");
    }

    auto shared = std::make_shared<std::vector<KineticsTableRow>>(std::move(rows));
    auto interp = [shared](double u, double KineticsTableRow::*field) {
        const auto& t = *shared;
        if (u <= t.front().u) return t.front().*field;
        if (u >= t.back().u) return t.back().*field;
        size_t hi = 1;
        while (t[hi].u < u) ++hi;
        const auto& a = t[hi - 1];
        const auto& b = t[hi];
        const double w = (u - a.u) / (b.u - a.u);
        return a.*field + w * (b.*field - a.*field);
    };

    KineticFunctions k;
    k.m = m;
    k.q = q;
    k.eta = eta;
    k.D = [interp, eta](double u, double) {
        return std::max(interp(u, &KineticsTableRow::D), eta);
    };
    k.S = [interp](double u, double) { return interp(u, &KineticsTableRow::S); };
    k.g = [](double u) { return u; };
    k.mobility = [interp](double u, double) {
        return interp(u, &KineticsTableRow::S) / std::max(u, 1e-100);
    };

    // Fit the envelope constants over the default validation range.
    const auto us = log_spaced(kValidationUMin, 1e6, 2000);
    double kd1 = std::numeric_limits<double>::infinity(), kd2 = 0.0, ks = 0.0;
    for (double u : us) {
        const double d = k.D(u, 0.0);
        const double s = std::abs(k.S(u, 0.0));
        const double lo_ref = std::pow(u, m - 1.0);
        const double hi_ref = std::pow(std::max(u, 1.0), m - 1.0);
        const double s_ref = std::pow(std::max(u, 1.0), q);
        kd1 = std::min(kd1, d / lo_ref);
        kd2 = std::max(kd2, d / hi_ref);
        ks = std::max(ks, s / s_ref);
    }
    k.K_D1 = kd1 * (1.0 - 1e-9);
    k.K_D2 = kd2 * (1.0 + 1e-9);
    k.K_S = ks * (1.0 + 1e-9);
    k.K_g = 1.0;
    return k;
}

void validate_kinetics(const KineticFunctions& k, int samples, double u_min, double u_max) {
    if (!k.D || !k.S || !k.g) fail(errc::validation_error, "kinetics functions must be set");
    if (samples < 10 || !(u_min > 0.0) || !(u_max > u_min))
        fail(errc::validation_error, "bad sampling request for kinetics validation");

    const double v_probe[] = {0.0, 1.0, 17.3};
    for (double u : log_spaced(u_min, u_max, samples)) {
        const double lo = k.K_D1 * std::pow(u, k.m - 1.0);
        const double hi = k.K_D2 * std::pow(std::max(u, 1.0), k.m - 1.0);
        const double s_cap = k.K_S * std::pow(std::max(u, 1.0), k.q);
        for (double v : v_probe) {
            const double d = k.D(u, v);
            const double s = std::abs(k.S(u, v));
            if (!(d >= lo))
                fail(errc::validation_error,
                     "diffusion below declared lower envelope at u = " + std::to_string(u));
            if (!(d <= hi))
                fail(errc::validation_error,
                     "diffusion above declared upper envelope at u = " + std::to_string(u));
            if (!(s <= s_cap))
                fail(errc::validation_error,
                     "sensitivity above declared envelope at u = " + std::to_string(u));
        }
        if (!(k.g(u) <= k.K_g * u * (1.0 + 1e-12)))
            fail(errc::validation_error,
                 "production above declared envelope at u = " + std::to_string(u));
    }
}

double RegularizationParams::cutoff(double xi) const {
    const double a = 1.0 / epsilon;
    if (xi <= a) return xi;
    if (xi >= 2.0 * a) return 1.5 * a;
    const double t = (xi - a) * epsilon;  // in (0,1)
    return a * (1.0 + t - 0.5 * t * t);
}

void RegularizationParams::validate() const {
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        fail(errc::validation_error, "epsilon must lie in (0,1), got " + std::to_string(epsilon));
}

} // namespace kslab
