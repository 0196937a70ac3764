#pragma once

#include <string>
#include <utility>
#include <vector>

#include "kslab/grid.hpp"
#include "kslab/kinetics.hpp"

namespace kslab {

struct FieldState {
    std::vector<double> u;
    std::vector<double> v;
    double t = 0.0;
    long step_count = 0;
};

// Shape, finiteness and nonnegativity checks. Throws.
void validate_state(const RadialGrid& g, const FieldState& s);

FieldState make_bump_initial(const RadialGrid& g, double mass, double width, double v0_level,
                             double u_floor = 0.0);

struct SolverConfig {
    double dt_init = 1e-5;
    double dt_min = 1e-13;
    double dt_max = 1e-2;
    double cfl_safety = 0.4;           // fraction of the positivity-safe drift step
    double blowup_threshold = 1e10;
    double t_end = 1.0;
    double linear_tol = 1e-10;         // relative residual cap for the tridiagonal solves
    double positivity_budget_rel = 1e-8;  // cumulative clipped mass, relative to initial mass
    double growth_cap = 0.10;          // max relative sup-norm growth per accepted step
    int record_every = 1;
    int picard_iters = 1;              // refreshes of the frozen diffusivity, 1..5
    double snapshot_factor = 2.0;      // snapshot whenever the sup-norm grows by this factor
    long max_steps = 2000000;

    void validate(double initial_sup) const;
};

struct StepStats {
    double clipped_mass_u = 0.0;
    double clipped_mass_v = 0.0;
    double max_speed = 0.0;  // fastest face drift velocity encountered
    double cfl_dt = 0.0;     // positivity-safe dt bound (before cfl_safety)
    double residual_u = 0.0;
    double residual_v = 0.0;
};

// One operator-split step.
//   1. backward Euler for v_t = lap v - v + g(u), tridiagonal direct solve;
//   2. u-step: implicit diffusion with harmonic-mean face diffusivities
//      frozen at the old state, drift flux S * (face gradient of the new v)
//      explicit with donor-cell upwinding;
//   3. the u update is reassembled in flux form, so the reduced mass moves
//      only through the shared face fluxes and is conserved to rounding.
// In regularized mode (reg != nullptr) u feeds S and g through the cutoff.
// Negative undershoots clip to zero; the clipped mass is reported and
// checked against clip_budget. Throws LinearSolveFailure, NonFiniteState,
// PositivityViolation.
FieldState step(const RadialGrid& g, const KineticFunctions& kin, const RegularizationParams* reg,
                const FieldState& s, double dt, const SolverConfig& cfg,
                StepStats* stats = nullptr, double clip_budget = -1.0);

enum class Verdict { BlownUp, Completed, Failed };
const char* verdict_name(Verdict v) noexcept;

struct SeriesEntry {
    double t = 0.0;
    double dt = 0.0;
    double sup_u = 0.0;
    double mass_u = 0.0;
    double grad_norm = 0.0;
    double vgrad_sup = 0.0;
    std::vector<double> wsup;  // one entry per monitored alpha
};

struct Snapshot {
    long index = 0;
    double t = 0.0;
    std::vector<double> u, v;
};

// What to watch while the run advances, and how to read the end state.
// Radii are fractions of R.
struct AnalysisSpec {
    std::vector<double> alphas;
    double theta = 12.0;
    double beta = 2.5;
    double annulus_in = 0.05;
    double annulus_out = 0.3;
    double profile_rcut = 0.2;
    double profile_tol = 1e-3;
    double margin = 0.5;
    bool check_bounds = false;
};

struct RunReport {
    Verdict verdict = Verdict::Failed;
    std::string reason;
    double t_final = 0.0;
    double sup_final = 0.0;
    long steps_accepted = 0;
    long steps_rejected = 0;
    double mass_initial = 0.0;
    double mass_final = 0.0;
    double max_mass_drift_rel = 0.0;
    double clipped_mass_total = 0.0;
    double min_u_seen = 0.0;
    double min_v_seen = 0.0;
    double max_grad_norm = 0.0;
    double t_low = 0.0, t_high = 0.0;  // blow-up time bracket, BlownUp only
    std::vector<double> alphas;
    double theta = 0.0, beta = 0.0;
    std::vector<SeriesEntry> series;
    std::vector<Snapshot> snapshots;
    FieldState final_state;
};

// Adaptive time loop. dt is capped by the drift CFL bound and by the 10%
// sup-norm growth rule (violations reject the step and halve dt; accepted
// steps grow dt by 1.1x). Ends BlownUp when the sup-norm crosses the
// threshold or dt collapses under dt_min while the sup-norm is growing,
// Completed at t_end, Failed otherwise.
RunReport run(const RadialGrid& g, const KineticFunctions& kin, const RegularizationParams* reg,
              FieldState initial, const SolverConfig& cfg, const AnalysisSpec& spec);

// Bracket [t_low, t_high] for the blow-up time: t_low is the last recorded
// time, the tail extrapolates the recorded dt cascade (geometric sum when
// the cascade decays, trailing-run sum when it sits flat at the floor).
std::pair<double, double> estimate_blowup_time(const RunReport& report);

struct AgreementSummary {
    double t_eps = 0.0;         // last recorded time with sup_u <= 1/eps in the regularized run
    double max_deviation = 0.0; // worst series / snapshot / final-state gap on [0, t_eps]
    long points = 0;            // series entries compared
};

// Compares a regularized run against its plain twin over the shared recorded
// prefix up to t_eps. While the cutoff never engages, the two trajectories
// evaluate identical arithmetic, so the deviation is exactly zero.
AgreementSummary compare_runs(const RunReport& regularized, const RunReport& plain,
                              double inv_eps);

} // namespace kslab
