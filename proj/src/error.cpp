#include "handsel/error.hpp"

namespace handsel {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::config: return "config";
        case ErrorCode::io: return "io";
        case ErrorCode::malformed_row: return "malformed_row";
        case ErrorCode::invariant_violation: return "invariant_violation";
        case ErrorCode::duplicate_id: return "duplicate_id";
        case ErrorCode::divergence: return "divergence";
        case ErrorCode::truncation_failure: return "truncation_failure";
        case ErrorCode::degenerate_sample: return "degenerate_sample";
        case ErrorCode::insufficient_history: return "insufficient_history";
        case ErrorCode::domain: return "domain";
        case ErrorCode::dimension_mismatch: return "dimension_mismatch";
        case ErrorCode::missing_score: return "missing_score";
        case ErrorCode::missing_cover: return "missing_cover";
        case ErrorCode::unresolved_roster: return "unresolved_roster";
        case ErrorCode::empty_split: return "empty_split";
        case ErrorCode::length_mismatch: return "length_mismatch";
        case ErrorCode::empty_input: return "empty_input";
        case ErrorCode::zero_actual: return "zero_actual";
        case ErrorCode::non_normalized: return "non_normalized";
        case ErrorCode::class_missing: return "class_missing";
        case ErrorCode::too_many_features: return "too_many_features";
        case ErrorCode::not_converged: return "not_converged";
    }
    return "unknown";
}

} // namespace handsel
