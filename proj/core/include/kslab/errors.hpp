#pragma once

#include <stdexcept>
#include <string>

namespace kslab {

enum class errc {
    degenerate_denominator,
    nonpositive_denominator,
    range_violation,
    inadmissible_params,
    shape_mismatch,
    nonzero_boundary_flux,
    linear_solve_failure,
    positivity_violation,
    non_finite_state,
    wrong_verdict,
    not_cauchy,
    empty_annulus,
    nonpositive_profile,
    parse_error,
    validation_error,
};

const char* errc_name(errc c) noexcept;

class Error : public std::runtime_error {
  public:
    Error(errc c, const std::string& msg)
        : std::runtime_error(std::string(errc_name(c)) + ": " + msg), code_(c) {}

    errc code() const noexcept { return code_; }

  private:
    errc code_;
};

[[noreturn]] inline void fail(errc c, const std::string& msg) { throw Error(c, msg); }

} // namespace kslab
