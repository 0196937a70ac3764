#include "kslab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "kslab/errors.hpp"
#include "kslab/monitors.hpp"

namespace kslab {

namespace {

constexpr double kTiny = 1e-300;

double sup_norm(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x)
        if (v > s) s = v;
    return s;
}

double min_of(const std::vector<double>& x) {
    double s = std::numeric_limits<double>::infinity();
    for (double v : x)
        if (v < s) s = v;
    return s;
}

// Solves a diagonally dominant tridiagonal system in place. lo[k] couples to
// k-1, up[k] to k+1. Returns the max absolute residual of the solution.
void thomas_solve(std::vector<double>& lo, std::vector<double>& diag, std::vector<double>& up,
                  std::vector<double>& rhs, std::vector<double>& x) {
    const size_t n = diag.size();
    for (size_t k = 1; k < n; ++k) {
        const double piv = diag[k - 1];
        if (!std::isfinite(piv) || piv == 0.0)
            fail(errc::linear_solve_failure, "tridiagonal pivot degenerate at row " + std::to_string(k - 1));
        const double w = lo[k] / piv;
        diag[k] -= w * up[k - 1];
        rhs[k] -= w * rhs[k - 1];
    }
    if (!std::isfinite(diag[n - 1]) || diag[n - 1] == 0.0)
        fail(errc::linear_solve_failure, "tridiagonal pivot degenerate at last row");
    x.resize(n);
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for (size_t k = n - 1; k-- > 0;) {
        x[k] = (rhs[k] - up[k] * x[k + 1]) / diag[k];
    }
}

double tridiag_residual(const std::vector<double>& lo, const std::vector<double>& diag,
                        const std::vector<double>& up, const std::vector<double>& rhs,
                        const std::vector<double>& x) {
    const size_t n = diag.size();
    double worst = 0.0;
    for (size_t k = 0; k < n; ++k) {
        double r = diag[k] * x[k] - rhs[k];
        if (k > 0) r += lo[k] * x[k - 1];
        if (k + 1 < n) r += up[k] * x[k + 1];
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

struct WorkBuffers {
    std::vector<double> lo, diag, up, rhs, sol, phi, dface, tface;
};

} // namespace

void validate_state(const RadialGrid& g, const FieldState& s) {
    const int N = g.cells();
    if (static_cast<int>(s.u.size()) != N || static_cast<int>(s.v.size()) != N)
        fail(errc::shape_mismatch, "state fields do not match the grid");
    for (int k = 0; k < N; ++k) {
        if (!std::isfinite(s.u[k]) || !std::isfinite(s.v[k]))
            fail(errc::non_finite_state, "state contains a non-finite entry");
        if (s.u[k] < 0.0 || s.v[k] < 0.0)
            fail(errc::validation_error, "state fields must be nonnegative");
    }
    if (!std::isfinite(s.t)) fail(errc::non_finite_state, "state time is not finite");
}

FieldState make_bump_initial(const RadialGrid& g, double mass, double width, double v0_level,
                             double u_floor) {
    if (!(mass > 0.0) || !(width > 0.0) || v0_level < 0.0 || u_floor < 0.0)
        fail(errc::validation_error, "bump needs mass, width > 0 and nonnegative levels");
    const int N = g.cells();
    FieldState s;
    s.u.resize(N);
    s.v.assign(N, v0_level);
    double bump_mass = 0.0, floor_mass = 0.0;
    for (int k = 0; k < N; ++k) {
        const double z = g.centers[k] / width;
        s.u[k] = std::exp(-z * z);
        bump_mass += g.volumes[k] * s.u[k];
        floor_mass += g.volumes[k] * u_floor;
    }
    if (!(mass > floor_mass))
        fail(errc::validation_error, "requested mass is below the background floor mass");
    const double A = (mass - floor_mass) / bump_mass;
    for (int k = 0; k < N; ++k) s.u[k] = A * s.u[k] + u_floor;
    return s;
}

void SolverConfig::validate(double initial_sup) const {
    if (!(dt_min > 0.0) || !(dt_min < dt_init) || !(dt_init <= dt_max))
        fail(errc::validation_error, "need 0 < dt_min < dt_init <= dt_max");
    if (!(cfl_safety > 0.0) || !(cfl_safety < 1.0))
        fail(errc::validation_error, "cfl_safety must lie in (0,1)");
    if (!(t_end > 0.0)) fail(errc::validation_error, "t_end must be positive");
    if (!(linear_tol > 0.0)) fail(errc::validation_error, "linear_tol must be positive");
    if (!(blowup_threshold > initial_sup))
        fail(errc::validation_error, "blowup_threshold must exceed the initial sup-norm");
    if (positivity_budget_rel < 0.0)
        fail(errc::validation_error, "positivity budget must be nonnegative");
    if (!(growth_cap > 0.0)) fail(errc::validation_error, "growth cap must be positive");
    if (record_every < 1) fail(errc::validation_error, "record_every must be >= 1");
    if (!(snapshot_factor > 1.0))
        fail(errc::validation_error, "snapshot_factor must exceed 1");
    if (picard_iters < 1 || picard_iters > 5)
        fail(errc::validation_error, "picard_iters must lie in [1,5]");
    if (max_steps < 1) fail(errc::validation_error, "max_steps must be positive");
}

FieldState step(const RadialGrid& g, const KineticFunctions& kin, const RegularizationParams* reg,
                const FieldState& s, double dt, const SolverConfig& cfg, StepStats* stats,
                double clip_budget) {
    const int N = g.cells();
    if (static_cast<int>(s.u.size()) != N || static_cast<int>(s.v.size()) != N)
        fail(errc::shape_mismatch, "step: state does not match the grid");
    if (!(dt > 0.0) || !std::isfinite(dt)) fail(errc::validation_error, "step needs finite dt > 0");

    WorkBuffers w;
    w.lo.assign(N, 0.0);
    w.diag.assign(N, 0.0);
    w.up.assign(N, 0.0);
    w.rhs.assign(N, 0.0);

    StepStats local;
    StepStats& st = stats ? *stats : local;
    st = StepStats{};
    st.cfl_dt = std::numeric_limits<double>::infinity();

    // Face transmissibilities of the plain Laplacian (v equation).
    std::vector<double> tv(static_cast<size_t>(N) + 1, 0.0);
    for (int j = 1; j < N; ++j)
        tv[j] = g.face_areas[j] / (g.centers[j] - g.centers[j - 1]);

    // v-step: ((1+dt) I - dt lap) v_new = v_old + dt g(u~).
    for (int k = 0; k < N; ++k) {
        const double usrc = reg ? reg->cutoff(s.u[k]) : s.u[k];
        w.rhs[k] = s.v[k] + dt * kin.g(usrc);
        w.lo[k] = -dt * tv[k] / g.volumes[k];
        w.up[k] = -dt * tv[k + 1] / g.volumes[k];
        w.diag[k] = 1.0 + dt - w.lo[k] - w.up[k];
    }
    std::vector<double> lo = w.lo, diag = w.diag, up = w.up, rhs = w.rhs;
    std::vector<double> v_new;
    thomas_solve(lo, diag, up, rhs, v_new);
    {
        double scale = 1.0;
        for (int k = 0; k < N; ++k) scale = std::max(scale, std::abs(w.rhs[k]));
        st.residual_v = tridiag_residual(w.lo, w.diag, w.up, w.rhs, v_new);
        if (!(st.residual_v <= cfg.linear_tol * scale))
            fail(errc::linear_solve_failure, "v-solve residual " + std::to_string(st.residual_v));
    }
    for (int k = 0; k < N; ++k) {
        if (v_new[k] < 0.0) {
            st.clipped_mass_v -= v_new[k] * g.volumes[k];
            v_new[k] = 0.0;
        }
    }

    // Drift flux on interior faces, donor-cell upwinded along the new signal
    // gradient. The effective face velocity flux/density feeds the CFL bound.
    const auto gv = face_gradient(g, v_new);
    w.phi.assign(static_cast<size_t>(N) + 1, 0.0);
    for (int j = 1; j < N; ++j) {
        const int donor = gv[j] > 0.0 ? j - 1 : j;
        const double ud = s.u[donor];
        const double ueff = reg ? reg->cutoff(ud) : ud;
        w.phi[j] = kin.S(ueff, v_new[donor]) * gv[j];
        if (ud > kTiny) {
            const double speed = std::abs(w.phi[j]) / ud;
            if (speed > 0.0) {
                st.max_speed = std::max(st.max_speed, speed);
                const double width = g.volumes[donor] / g.face_areas[j];
                st.cfl_dt = std::min(st.cfl_dt, width / speed);
            }
        }
    }

    // u-step: (I - dt div D_face grad) u_new = u_old - dt div(phi), with the
    // diffusivity frozen at the old state (optionally refreshed by Picard).
    std::vector<double> dcell(N);
    for (int k = 0; k < N; ++k) dcell[k] = kin.D(s.u[k], s.v[k]);
    std::vector<double> u_sol = s.u;
    w.dface.assign(static_cast<size_t>(N) + 1, 0.0);
    for (int it = 0; it < cfg.picard_iters; ++it) {
        for (int j = 1; j < N; ++j) {
            const double a = dcell[j - 1], b = dcell[j];
            w.dface[j] = (a + b) > 0.0 ? 2.0 * a * b / (a + b) : 0.0;
        }
        for (int k = 0; k < N; ++k) {
            const double tuk = w.dface[k] * tv[k];
            const double tukp = w.dface[k + 1] * tv[k + 1];
            w.lo[k] = -dt * tuk / g.volumes[k];
            w.up[k] = -dt * tukp / g.volumes[k];
            w.diag[k] = 1.0 - w.lo[k] - w.up[k];
            const double divphi = (g.face_areas[k + 1] * w.phi[k + 1] - g.face_areas[k] * w.phi[k]) /
                                  g.volumes[k];
            w.rhs[k] = s.u[k] - dt * divphi;
        }
        lo = w.lo;
        diag = w.diag;
        up = w.up;
        rhs = w.rhs;
        std::vector<double> next;
        thomas_solve(lo, diag, up, rhs, next);
        double scale = 1.0;
        for (int k = 0; k < N; ++k) scale = std::max(scale, std::abs(w.rhs[k]));
        st.residual_u = tridiag_residual(w.lo, w.diag, w.up, w.rhs, next);
        if (!(st.residual_u <= cfg.linear_tol * scale))
            fail(errc::linear_solve_failure, "u-solve residual " + std::to_string(st.residual_u));
        double delta = 0.0;
        for (int k = 0; k < N; ++k) delta = std::max(delta, std::abs(next[k] - u_sol[k]));
        u_sol = std::move(next);
        if (it + 1 < cfg.picard_iters) {
            for (int k = 0; k < N; ++k) dcell[k] = kin.D(u_sol[k], s.v[k]);
            if (delta <= cfg.linear_tol * std::max(1.0, sup_norm(u_sol))) break;
        }
    }

    // Flux-form reassembly: rebuild the accepted update from the face fluxes
    // implied by the solve, so the mass identity telescopes exactly.
    w.tface.assign(static_cast<size_t>(N) + 1, 0.0);
    for (int j = 1; j < N; ++j) {
        const double diff = w.dface[j] * (u_sol[j] - u_sol[j - 1]) / (g.centers[j] - g.centers[j - 1]);
        w.tface[j] = g.face_areas[j] * (diff - w.phi[j]);
    }
    FieldState out;
    out.u.resize(N);
    out.v = std::move(v_new);
    out.t = s.t + dt;
    out.step_count = s.step_count + 1;
    for (int k = 0; k < N; ++k) {
        double val = s.u[k] + dt * (w.tface[k + 1] - w.tface[k]) / g.volumes[k];
        if (val < 0.0) {
            st.clipped_mass_u -= val * g.volumes[k];
            val = 0.0;
        }
        if (!std::isfinite(val) || !std::isfinite(out.v[k]))
            fail(errc::non_finite_state, "step produced a non-finite field value");
        out.u[k] = val;
    }
    if (clip_budget >= 0.0 && st.clipped_mass_u > clip_budget)
        fail(errc::positivity_violation,
             "clipped mass " + std::to_string(st.clipped_mass_u) + " exceeds budget " +
                 std::to_string(clip_budget));
    return out;
}

const char* verdict_name(Verdict v) noexcept {
    switch (v) {
        case Verdict::BlownUp: return "BlownUp";
        case Verdict::Completed: return "Completed";
        case Verdict::Failed: return "Failed";
    }
    return "Unknown";
}

namespace {

SeriesEntry make_entry(const RadialGrid& g, const FieldState& s, double dt,
                       const AnalysisSpec& spec) {
    SeriesEntry e;
    e.t = s.t;
    e.dt = dt;
    e.sup_u = sup_norm(s.u);
    e.mass_u = reduced_mass(g, s.u);
    e.grad_norm = weighted_gradient_norm(g, s.v, spec.theta, spec.beta);
    e.vgrad_sup = v_grad_sup(g, s.v, spec.beta);
    e.wsup.reserve(spec.alphas.size());
    for (double a : spec.alphas) e.wsup.push_back(weighted_sup(g, s.u, a));
    return e;
}

} // namespace

RunReport run(const RadialGrid& g, const KineticFunctions& kin, const RegularizationParams* reg,
              FieldState state, const SolverConfig& cfg, const AnalysisSpec& spec) {
    validate_state(g, state);
    if (reg) reg->validate();
    double sup_prev = sup_norm(state.u);
    cfg.validate(sup_prev);

    RunReport rep;
    rep.alphas = spec.alphas;
    rep.theta = spec.theta;
    rep.beta = spec.beta;
    rep.mass_initial = reduced_mass(g, state.u);
    rep.min_u_seen = min_of(state.u);
    rep.min_v_seen = min_of(state.v);

    const double clip_budget = cfg.positivity_budget_rel * std::max(rep.mass_initial, kTiny);

    auto record = [&](double dt_used) {
        SeriesEntry e = make_entry(g, state, dt_used, spec);
        rep.max_grad_norm = std::max(rep.max_grad_norm, e.grad_norm);
        rep.max_mass_drift_rel =
            std::max(rep.max_mass_drift_rel,
                     std::abs(e.mass_u - rep.mass_initial) / std::max(rep.mass_initial, kTiny));
        rep.series.push_back(std::move(e));
    };
    auto snapshot = [&]() {
        Snapshot sn;
        sn.index = static_cast<long>(rep.snapshots.size());
        sn.t = state.t;
        sn.u = state.u;
        sn.v = state.v;
        rep.snapshots.push_back(std::move(sn));
    };

    record(0.0);
    snapshot();

    double dt = std::clamp(cfg.dt_init, cfg.dt_min, cfg.dt_max);
    double cfl_bound = std::numeric_limits<double>::infinity();
    {
        // Seed the CFL bound from the initial signal gradient.
        const auto gv = face_gradient(g, state.v);
        for (int j = 1; j < g.cells(); ++j) {
            const int donor = gv[j] > 0.0 ? j - 1 : j;
            const double ud = state.u[donor];
            if (ud <= kTiny) continue;
            const double ueff = reg ? reg->cutoff(ud) : ud;
            const double speed = std::abs(kin.S(ueff, state.v[donor]) * gv[j]) / ud;
            if (speed > 0.0)
                cfl_bound = std::min(cfl_bound, g.volumes[donor] / g.face_areas[j] / speed);
        }
    }

    double sup_at_last_snap = std::max(sup_prev, kTiny);
    double next_ladder = 0.5 * cfg.t_end;
    std::deque<double> sup_hist{sup_prev};
    bool last_reject_was_growth = false;
    long accepted_since_record = 0;
    double last_dt = 0.0;

    auto growing = [&]() {
        if (last_reject_was_growth) return true;
        return sup_prev > 1.001 * sup_hist.front();
    };
    auto finish = [&](Verdict v, std::string reason) {
        rep.verdict = v;
        rep.reason = std::move(reason);
        if (rep.series.empty() || rep.series.back().t != state.t) record(last_dt);
        if (rep.snapshots.empty() || rep.snapshots.back().t != state.t) snapshot();
        rep.t_final = state.t;
        rep.sup_final = sup_prev;
        rep.mass_final = reduced_mass(g, state.u);
        rep.steps_accepted = state.step_count;
        rep.final_state = state;
        if (v == Verdict::BlownUp) {
            const auto bracket = estimate_blowup_time(rep);
            rep.t_low = bracket.first;
            rep.t_high = bracket.second;
        }
        return rep;
    };

    while (true) {
        // A sliver of remaining time below dt_min counts as having arrived.
        if (cfg.t_end - state.t <= cfg.dt_min)
            return finish(Verdict::Completed, "reached t_end");
        if (state.step_count >= cfg.max_steps)
            return finish(Verdict::Failed, "step budget exhausted");

        double dt_try = std::min({dt, cfg.dt_max, cfg.cfl_safety * cfl_bound});
        dt_try = std::min(dt_try, cfg.t_end - state.t);
        if (dt_try < cfg.dt_min) {
            if (growing()) return finish(Verdict::BlownUp, "dt collapsed under dt_min while growing");
            return finish(Verdict::Failed, "dt collapsed under dt_min");
        }

        StepStats st;
        bool rejected = false;
        std::string reject_why;
        FieldState next;
        try {
            next = step(g, kin, reg, state, dt_try, cfg, &st,
                        clip_budget - rep.clipped_mass_total);
        } catch (const Error& e) {
            if (e.code() == errc::positivity_violation || e.code() == errc::linear_solve_failure ||
                e.code() == errc::non_finite_state) {
                rejected = true;
                reject_why = e.what();
            } else {
                throw;
            }
        }

        double sup_next = 0.0;
        if (!rejected) {
            sup_next = sup_norm(next.u);
            if (sup_next > (1.0 + cfg.growth_cap) * std::max(sup_prev, kTiny)) {
                rejected = true;
                last_reject_was_growth = true;
                reject_why = "sup-norm growth cap";
            }
        }

        if (rejected) {
            ++rep.steps_rejected;
            dt = 0.5 * dt_try;
            if (dt < cfg.dt_min) {
                if (growing())
                    return finish(Verdict::BlownUp, "dt collapsed under dt_min while growing");
                return finish(Verdict::Failed, "dt collapsed under dt_min (" + reject_why + ")");
            }
            continue;
        }

        state = std::move(next);
        sup_prev = sup_next;
        last_dt = dt_try;
        last_reject_was_growth = false;
        sup_hist.push_back(sup_next);
        if (sup_hist.size() > 21) sup_hist.pop_front();
        rep.clipped_mass_total += st.clipped_mass_u;
        rep.min_u_seen = std::min(rep.min_u_seen, min_of(state.u));
        rep.min_v_seen = std::min(rep.min_v_seen, min_of(state.v));
        if (st.cfl_dt > 0.0 && std::isfinite(st.cfl_dt)) cfl_bound = st.cfl_dt;
        else cfl_bound = std::numeric_limits<double>::infinity();

        if (++accepted_since_record >= cfg.record_every) {
            record(dt_try);
            accepted_since_record = 0;
        }
        if (sup_next >= cfg.snapshot_factor * sup_at_last_snap) {
            if (rep.series.empty() || rep.series.back().t != state.t) record(dt_try);
            snapshot();
            sup_at_last_snap = sup_next;
        }
        if (state.t >= next_ladder && state.t < cfg.t_end) {
            if (rep.snapshots.empty() || rep.snapshots.back().t != state.t) {
                if (rep.series.empty() || rep.series.back().t != state.t) record(dt_try);
                snapshot();
            }
            while (next_ladder <= state.t) {
                const double adv = cfg.t_end - 0.5 * (cfg.t_end - next_ladder);
                if (!(adv > next_ladder)) {
                    next_ladder = std::numeric_limits<double>::infinity();
                    break;
                }
                next_ladder = adv;
            }
        }

        if (sup_next >= cfg.blowup_threshold)
            return finish(Verdict::BlownUp, "sup-norm reached the blow-up threshold");

        dt = std::min(dt_try * 1.1, cfg.dt_max);
    }
}

std::pair<double, double> estimate_blowup_time(const RunReport& report) {
    if (report.verdict != Verdict::BlownUp)
        fail(errc::wrong_verdict, "blow-up bracket needs a BlownUp report, got " +
                                      std::string(verdict_name(report.verdict)));
    const auto& s = report.series;
    if (s.size() < 2) fail(errc::validation_error, "blow-up bracket needs at least 2 entries");

    const double t_low = s.back().t;
    const size_t K = std::min<size_t>(16, s.size() - 1);
    std::vector<double> dts;
    dts.reserve(K);
    for (size_t i = s.size() - K; i < s.size(); ++i) dts.push_back(s[i].dt);
    const double d_last = dts.back();

    std::vector<double> ratios;
    for (size_t i = 0; i + 1 < dts.size(); ++i) {
        if (dts[i] > 0.0) ratios.push_back(dts[i + 1] / dts[i]);
    }
    double rho = 1.0;
    if (!ratios.empty()) {
        std::sort(ratios.begin(), ratios.end());
        rho = ratios[ratios.size() / 2];
    }

    double tail;
    if (rho < 1.0 - 1e-9 && d_last > 0.0) {
        tail = d_last * rho / (1.0 - rho);
    } else {
        // Flat cascade: sum the trailing run of comparable steps.
        tail = 0.0;
        for (size_t i = s.size(); i-- > 1;) {
            if (s[i].dt >= 0.5 * d_last && s[i].dt > 0.0)
                tail += s[i].dt;
            else
                break;
        }
        tail = std::max(tail, d_last);
    }
    return {t_low, t_low + 2.0 * tail};
}

AgreementSummary compare_runs(const RunReport& regularized, const RunReport& plain,
                              double inv_eps) {
    if (!(inv_eps > 0.0)) fail(errc::validation_error, "compare_runs needs 1/eps > 0");
    AgreementSummary out;
    bool have_t_eps = false;
    for (const auto& e : regularized.series) {
        if (e.sup_u > inv_eps) break;
        out.t_eps = e.t;
        have_t_eps = true;
    }
    if (!have_t_eps) return out;  // the cutoff was live from the start; nothing comparable

    const size_t n = std::min(regularized.series.size(), plain.series.size());
    for (size_t i = 0; i < n; ++i) {
        const auto& a = regularized.series[i];
        const auto& b = plain.series[i];
        if (a.t != b.t || a.t > out.t_eps) break;
        out.max_deviation = std::max({out.max_deviation, std::abs(a.sup_u - b.sup_u),
                                      std::abs(a.mass_u - b.mass_u)});
        ++out.points;
    }
    const size_t ns = std::min(regularized.snapshots.size(), plain.snapshots.size());
    for (size_t i = 0; i < ns; ++i) {
        const auto& a = regularized.snapshots[i];
        const auto& b = plain.snapshots[i];
        if (a.t != b.t || a.t > out.t_eps || a.u.size() != b.u.size()) break;
        for (size_t k = 0; k < a.u.size(); ++k) {
            out.max_deviation = std::max({out.max_deviation, std::abs(a.u[k] - b.u[k]),
                                          std::abs(a.v[k] - b.v[k])});
        }
    }
    return out;
}

} // namespace kslab
