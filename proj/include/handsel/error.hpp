#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace handsel {

// Stable machine-readable error codes. The CLI maps these onto exit codes
// and a JSON error report, so renaming a code is a breaking change.
enum class ErrorCode {
    config,
    io,
    malformed_row,
    invariant_violation,
    duplicate_id,
    divergence,
    truncation_failure,
    degenerate_sample,
    insufficient_history,
    domain,
    dimension_mismatch,
    missing_score,
    missing_cover,
    unresolved_roster,
    empty_split,
    length_mismatch,
    empty_input,
    zero_actual,
    non_normalized,
    class_missing,
    too_many_features,
    not_converged,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace handsel
