#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "kslab/experiments.hpp"

namespace kslab {

// One entry of the built-in verification battery. `metrics` carries the
// measured numbers so the verify report explains itself; everything in it is
// a pure function of the seed, which keeps repeated reports byte-identical.
struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;   // one-line explanation, filled on failure or for context
    KeyValueDoc metrics;
};

// Runs the whole battery in order. A criterion that throws is converted into
// a failed result; the battery always returns all entries. `progress`
// receives one line per criterion as it finishes (timings go only there,
// never into the results).
std::vector<CriterionResult> run_acceptance(std::uint64_t seed, std::ostream* progress = nullptr);

// `verify` subcommand: run the battery, write <out>/report.txt, exit 0 only
// if every criterion passed.
int cmd_verify(const CmdOptions& opt, std::ostream& log);

} // namespace kslab
