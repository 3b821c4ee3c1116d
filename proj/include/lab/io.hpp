#pragma once

#include <string>
#include <vector>

#include "lab/conserved.hpp"
#include "lab/dirac.hpp"
#include "lab/flows.hpp"
#include "lab/grid.hpp"

namespace lab {
namespace io {

/// CSV (x, q) with full round-trip precision.
void write_field_csv(const LatticeField& f, const std::string& path);
LatticeField read_field_csv(const std::string& path, double L, bool periodic = true);

/// One JSON object per line: {"seed":..., "values":[...]}.
void append_field_jsonl(const LatticeField& f, uint64_t seed, const std::string& path);

/// CSV (x, gamma, gplus, gminus).
void write_greens_csv(const TorusGrid& grid, const DiagGreens& dg, const std::string& path);

/// Trajectory run directory: manifest.json, ledger.csv, snapshots/NNNN.csv.
void write_trajectory(const FlowTrajectory& traj, const std::string& dir,
                      const std::string& extra_manifest_json = "{}");

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& content);

}  // namespace io
}  // namespace lab
