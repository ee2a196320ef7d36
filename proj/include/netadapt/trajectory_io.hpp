#pragma once

#include <filesystem>
#include <iosfwd>

#include "netadapt/dynamics.hpp"

namespace netadapt {

/// CSV with columns iter,E_total,E_pumping,E_metabolic,tau_accepted,
/// n_active_edges,n_cycles. Values are printed with full round-trip precision.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory);

/// Plot data: one row per edge with endpoint coordinates and C.
void write_plot_csv(std::ostream& out, const Network& network);
void write_plot_csv(const std::filesystem::path& path, const Network& network);

}  // namespace netadapt
