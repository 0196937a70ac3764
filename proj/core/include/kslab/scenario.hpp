#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kslab/exponents.hpp"
#include "kslab/solver.hpp"
#include "kslab/textio.hpp"

namespace kslab {

enum class RunMode { Plain, Regularized };
const char* run_mode_name(RunMode m) noexcept;

// One experiment description, read from a flat key=value file with dotted
// keys and '#' comments. Unknown and duplicate keys are rejected; m, q, p,
// theta and beta parse into exact rationals so admissibility window
// endpoints are decided without rounding.
struct Scenario {
    ModelParams model;

    int grid_cells = 256;
    double grid_grading = 1.0;

    double init_mass = 1.0;
    double init_width = 0.15;  // absolute radius of the initial bump
    double init_v0 = 0.0;
    double init_floor = 0.0;

    RunMode mode = RunMode::Plain;
    double reg_epsilon = 1e-3;  // only read in regularized mode

    SolverConfig solver;
    AnalysisSpec analysis;

    double twin_delta = 1e-3;
    double twin_dt = 1e-4;
    double twin_t_end = 0.05;
    int twin_record_every = 10;

    // Sweep axes; an empty list falls back to the scenario's own value.
    std::vector<double> sweep_mass;
    std::vector<double> sweep_width;
    std::vector<Rational> sweep_m;
    std::vector<Rational> sweep_q;

    DeriveOptions derive;

    // Appends the full resolved configuration (defaults filled in) to a
    // report, so every artifact can reproduce its run.
    void echo(KeyValueDoc& doc) const;
};

// Throws ParseError with line diagnostics on malformed, unknown or duplicate
// keys; ValidationError on cross-field violations.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

} // namespace kslab
