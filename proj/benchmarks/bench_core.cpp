#include <benchmark/benchmark.h>

#include <cmath>

#include "bsq5/model.hpp"
#include "bsq5/operator.hpp"
#include "bsq5/spectral.hpp"
#include "bsq5/timestepper.hpp"

namespace {

bsq5::ModelCoefficients coeffs(double L) {
  return bsq5::derive_coefficients(bsq5::PhysicalParameters::canonical(1.0, 1.0),
                                   1.0, 1.0, L);
}

bsq5::State wave_state(const bsq5::Grid& g) {
  bsq5::State s(g);
  for (int j = 0; j <= g.N; ++j) {
    const double sp = std::sin(M_PI * g.node(j) / g.L);
    s.eta[j] = sp * sp * sp;
    s.u[j] = 0.5 * sp * sp * sp;
  }
  return s;
}

void BM_operator_apply(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const auto c = coeffs(2 * M_PI);
  const auto g = bsq5::make_grid(c.L, N);
  const auto op = bsq5::assemble_operator(c, g, bsq5::BcFamily::Dissipative);
  const auto s = wave_state(g);
  for (auto _ : state) {
    auto out = op.apply(s);
    benchmark::DoNotOptimize(out.eta.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * (N + 1));
}
BENCHMARK(BM_operator_apply)->Arg(128)->Arg(512)->Arg(2048);

void BM_cn_step(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const auto c = coeffs(2 * M_PI);
  const auto g = bsq5::make_grid(c.L, N);
  const auto op = bsq5::assemble_operator(c, g, bsq5::BcFamily::Dissipative);
  auto s = wave_state(g);
  s = bsq5::step_linear(op, s, 1e-3);  // prime the cached factorization
  for (auto _ : state) {
    s = bsq5::step_linear(op, s, 1e-3);
    benchmark::DoNotOptimize(s.eta.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * (N + 1));
}
BENCHMARK(BM_cn_step)->Arg(128)->Arg(512)->Arg(2048);

void BM_factorization(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const auto c = coeffs(2 * M_PI);
  const auto g = bsq5::make_grid(c.L, N);
  const auto op = bsq5::assemble_operator(c, g, bsq5::BcFamily::Dissipative);
  for (auto _ : state) {
    bsq5::BandFactor f(op.band(), 5e-4);
    benchmark::DoNotOptimize(&f);
  }
}
BENCHMARK(BM_factorization)->Arg(128)->Arg(512);

void BM_q_roots(benchmark::State& state) {
  const bsq5::QPolynomial p{0.7, 1.1, 3.0};
  for (auto _ : state) {
    auto rs = bsq5::q_roots(p);
    benchmark::DoNotOptimize(&rs);
  }
}
BENCHMARK(BM_q_roots);

void BM_mobius_feasibility(benchmark::State& state) {
  const auto rs = bsq5::q_roots({1.0, 1.0, 2.0});
  const auto pts = rs.nonreal_ordered();
  double L = 0.01;
  for (auto _ : state) {
    auto chk = bsq5::mobius_feasibility(std::span<const bsq5::Complex, 4>(pts), L);
    benchmark::DoNotOptimize(&chk);
    L = (L > 100.0) ? 0.01 : L * 1.001;
  }
}
BENCHMARK(BM_mobius_feasibility);

}  // namespace

BENCHMARK_MAIN();
