#include "netadapt/error.hpp"

namespace netadapt {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::unknown_vertex: return "unknown_vertex";
    case ErrorCode::duplicate_edge: return "duplicate_edge";
    case ErrorCode::self_loop: return "self_loop";
    case ErrorCode::nonpositive_length: return "nonpositive_length";
    case ErrorCode::negative_conductivity: return "negative_conductivity";
    case ErrorCode::invalid_partition: return "invalid_partition";
    case ErrorCode::incompatible_sources: return "incompatible_sources";
    case ErrorCode::disconnected_support: return "disconnected_support";
    case ErrorCode::solver_failure: return "solver_failure";
    case ErrorCode::singular_gradient: return "singular_gradient";
    case ErrorCode::step_failure: return "step_failure";
    case ErrorCode::connectivity_violation: return "connectivity_violation";
    case ErrorCode::bound_not_applicable: return "bound_not_applicable";
    case ErrorCode::non_finite: return "non_finite";
    case ErrorCode::degenerate_permeability: return "degenerate_permeability";
    case ErrorCode::unstable_time_step: return "unstable_time_step";
    case ErrorCode::invalid_preset: return "invalid_preset";
    case ErrorCode::invalid_tree: return "invalid_tree";
    case ErrorCode::empty_source_set: return "empty_source_set";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::config_error: return "config_error";
  }
  return "unknown";
}

}  // namespace netadapt
