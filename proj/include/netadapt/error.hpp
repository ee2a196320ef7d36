#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace netadapt {

enum class ErrorCode {
  invalid_argument,
  unknown_vertex,
  duplicate_edge,
  self_loop,
  nonpositive_length,
  negative_conductivity,
  invalid_partition,
  incompatible_sources,
  disconnected_support,
  solver_failure,
  singular_gradient,
  step_failure,
  connectivity_violation,
  bound_not_applicable,
  non_finite,
  degenerate_permeability,
  unstable_time_step,
  invalid_preset,
  invalid_tree,
  empty_source_set,
  io_error,
  config_error,
};

/// Stable identifier used in machine-readable error reports.
std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace netadapt
