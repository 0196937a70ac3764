#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "kslab/scenario.hpp"
#include "kslab/solver.hpp"

namespace kslab {

// Exit-status contract shared by the commands and the CLI front end.
inline constexpr int kExitFailure = 1;     // inadmissible model, failed criteria
inline constexpr int kExitParse = 2;       // malformed scenario document
inline constexpr int kExitValidation = 3;  // well-formed but inconsistent inputs
inline constexpr int kExitSolver = 4;      // a run ended in a solver failure

struct CmdOptions {
    std::filesystem::path out_dir = "out";
    int jobs = 1;
    std::uint64_t seed = 12345;
};

// Smooth zero-mean-ish perturbation shape with sup-norm 1, reproducible from
// the seed alone (no distribution objects, so byte-stable across platforms).
std::vector<double> smooth_noise(int n, std::uint64_t seed);

struct TwinSeriesEntry {
    double t = 0.0;
    double du_delta = 0.0;  // volume-weighted L2 gap of u, delta run vs base
    double du_half = 0.0;   // same for the delta/2 run
    double ratio_u = 0.0;   // du_half / du_delta, 0.5 in the linear regime
    double dv_delta = 0.0;
    double dv_half = 0.0;
};

struct TwinReport {
    double delta = 0.0;
    double dt = 0.0;
    long steps = 0;
    std::vector<TwinSeriesEntry> series;
    double c_hat_delta = 0.0;  // fitted exponential rate of du_delta(t)
    double c_hat_half = 0.0;
    double amp_delta = 0.0;  // fitted amplitude at t = 0
    double amp_half = 0.0;
    double ratio_min = 0.0, ratio_max = 0.0;  // over entries with du_delta > 0
    double min_cfl_margin = 0.0;              // min over steps of cfl_safety*bound/dt
};

// Base, delta- and delta/2-perturbed trajectories advanced in lockstep on a
// fixed time grid, so their difference series live on identical times. The
// perturbation multiplies the initial u by (1 + delta * noise). Throws
// ValidationError when dt breaches the drift stability bound.
TwinReport run_twin(const RadialGrid& g, const KineticFunctions& kin, const FieldState& base,
                    double delta, double dt, double t_end, int record_every, std::uint64_t seed,
                    const SolverConfig& cfg);

int cmd_exponents(const Scenario& sc, const CmdOptions& opt, std::ostream& log);
int cmd_simulate(const Scenario& sc, const CmdOptions& opt, std::ostream& log);
int cmd_twin(const Scenario& sc, const CmdOptions& opt, std::ostream& log);
int cmd_sweep(const Scenario& sc, const CmdOptions& opt, std::ostream& log);

} // namespace kslab
