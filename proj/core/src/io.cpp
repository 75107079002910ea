#include "bsq5/io.hpp"

#include <cstring>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace bsq5 {

namespace {
constexpr char kMagic[6] = {'B', '5', 'K', 'D', 'V', '1'};

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& os, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  put_u64(os, v);
}

double get_f64(std::istream& is) {
  const std::uint64_t v = get_u64(is);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}
}  // namespace

void Provenance::write(std::ostream& os) const {
  os << "# command: " << command_line << "\n";
  os << "# version: " << version << "\n";
  for (const auto& [k, v] : parameters) os << "# " << k << ": " << v << "\n";
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const Provenance& prov) {
  prov.write(os);
  os << "t,x,eta,u\n";
  os.precision(17);
  for (const State& s : traj.snapshots)
    for (int j = 0; j < s.n_nodes(); ++j)
      os << s.t << "," << traj.grid.node(j) << "," << s.eta[j] << "," << s.u[j] << "\n";
}

void write_energy_csv(std::ostream& os, const Trajectory& traj,
                      const Provenance& prov) {
  prov.write(os);
  os << "t,E,eta_xx_0,eta_xx_L,dis_residual\n";
  os.precision(17);
  for (const EnergyRecord& r : traj.records)
    os << r.t << "," << r.E << "," << r.eta_xx_0 << "," << r.eta_xx_L << ","
       << r.dis_residual << "\n";
}

void write_checkpoint(std::ostream& os, const State& s, const Grid& g) {
  if (s.n_nodes() != g.n_nodes())
    throw std::invalid_argument("checkpoint: state/grid size mismatch");
  os.write(kMagic, 6);
  put_u64(os, static_cast<std::uint64_t>(g.N));
  put_f64(os, g.L);
  put_f64(os, s.t);
  for (double v : s.eta) put_f64(os, v);
  for (double v : s.u) put_f64(os, v);
}

std::pair<State, Grid> read_checkpoint(std::istream& is) {
  char magic[6];
  is.read(magic, 6);
  if (!is || std::memcmp(magic, kMagic, 6) != 0)
    throw std::runtime_error("checkpoint: bad magic");
  const auto N = static_cast<int>(get_u64(is));
  const double L = get_f64(is);
  const double t = get_f64(is);
  Grid g = make_grid(L, N);
  State s(g);
  s.t = t;
  for (int j = 0; j <= N; ++j) s.eta[j] = get_f64(is);
  for (int j = 0; j <= N; ++j) s.u[j] = get_f64(is);
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return {std::move(s), g};
}

void write_trajectory_bin(std::ostream& os, const Trajectory& traj, double dt,
                          Mode mode) {
  put_u64(os, static_cast<std::uint64_t>(traj.grid.N));
  put_f64(os, traj.grid.L);
  put_f64(os, dt);
  put_u64(os, static_cast<std::uint64_t>(mode));
  for (const State& s : traj.snapshots) {
    put_f64(os, s.t);
    for (double v : s.eta) put_f64(os, v);
    for (double v : s.u) put_f64(os, v);
  }
}

TrajectoryBin read_trajectory_bin(std::istream& is) {
  TrajectoryBin out;
  const auto N = static_cast<int>(get_u64(is));
  const double L = get_f64(is);
  out.dt = get_f64(is);
  const auto tag = get_u64(is);
  if (!is) throw std::runtime_error("trajectory stream: truncated header");
  if (tag > 2) throw std::runtime_error("trajectory stream: bad mode tag");
  out.mode = static_cast<Mode>(tag);
  out.grid = make_grid(L, N);
  while (true) {
    const double t = get_f64(is);
    if (!is) break;
    State s(out.grid);
    s.t = t;
    for (int j = 0; j <= N; ++j) s.eta[j] = get_f64(is);
    for (int j = 0; j <= N; ++j) s.u[j] = get_f64(is);
    if (!is) throw std::runtime_error("trajectory stream: truncated frame");
    out.snapshots.push_back(std::move(s));
  }
  return out;
}

void write_checkpoint_file(const std::string& path, const State& s, const Grid& g) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_checkpoint(os, s, g);
}

std::pair<State, Grid> read_checkpoint_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  return read_checkpoint(is);
}

}  // namespace bsq5
