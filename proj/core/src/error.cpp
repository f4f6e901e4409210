#include "halluzig/error.hpp"

namespace halluzig {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::missing_manifest: return "missing_manifest";
    case ErrorCode::malformed_manifest: return "malformed_manifest";
    case ErrorCode::shape_mismatch: return "shape_mismatch";
    case ErrorCode::non_finite_entry: return "non_finite_entry";
    case ErrorCode::out_of_range_entry: return "out_of_range_entry";
    case ErrorCode::causal_violation: return "causal_violation";
    case ErrorCode::row_sum_violation: return "row_sum_violation";
    case ErrorCode::degenerate_layer: return "degenerate_layer";
    case ErrorCode::insufficient_depth: return "insufficient_depth";
    case ErrorCode::inconsistent_vertices: return "inconsistent_vertices";
    case ErrorCode::invalid_filtration: return "invalid_filtration";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::single_class: return "single_class";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::transfer_incompatible: return "transfer_incompatible";
    case ErrorCode::io_failure: return "io_failure";
    case ErrorCode::parse_failure: return "parse_failure";
    case ErrorCode::all_samples_failed: return "all_samples_failed";
    case ErrorCode::invariant_violation: return "invariant_violation";
  }
  return "unknown";
}

}  // namespace halluzig
