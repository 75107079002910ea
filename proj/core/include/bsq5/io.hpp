#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bsq5/state.hpp"
#include "bsq5/timestepper.hpp"

namespace bsq5 {

/// Comment lines ("# key: value") placed at the top of every CSV output.
struct Provenance {
  std::string command_line;
  std::string version;
  std::vector<std::pair<std::string, std::string>> parameters;
  void write(std::ostream& os) const;
};

/// Trajectory snapshots as CSV rows t,x,eta,u.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const Provenance& prov);

/// Energy series as CSV rows t,E,eta_xx_0,eta_xx_L,dis_residual.
void write_energy_csv(std::ostream& os, const Trajectory& traj,
                      const Provenance& prov);

/// Binary checkpoint: magic "B5KDV1", little-endian u64 N (cells),
/// f64 L, f64 t, then (N+1) eta values and (N+1) u values as f64.
void write_checkpoint(std::ostream& os, const State& s, const Grid& g);
std::pair<State, Grid> read_checkpoint(std::istream& is);

/// Compact binary snapshot stream: little-endian header u64 N, f64 L,
/// f64 dt, u64 mode tag, then per snapshot f64 t followed by (N+1) eta and
/// (N+1) u values.
void write_trajectory_bin(std::ostream& os, const Trajectory& traj, double dt,
                          Mode mode);
struct TrajectoryBin {
  Grid grid;
  double dt = 0.0;
  Mode mode = Mode::Linear;
  std::vector<State> snapshots;
};
TrajectoryBin read_trajectory_bin(std::istream& is);

void write_checkpoint_file(const std::string& path, const State& s, const Grid& g);
std::pair<State, Grid> read_checkpoint_file(const std::string& path);

}  // namespace bsq5
