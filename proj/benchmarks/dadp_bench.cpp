#include <benchmark/benchmark.h>

#include "dadp/adp.hpp"
#include "dadp/distributed.hpp"
#include "dadp/oracle.hpp"
#include "fixtures.hpp"

namespace {

using namespace dadp;

const DataMatrices& fixture_dm() {
  static const DataMatrices dm = testing::fixture_data(1e-3, 11);
  return dm;
}

void BM_CollectData(benchmark::State& state) {
  const double h = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(testing::fixture_data(h, 11));
}
BENCHMARK(BM_CollectData)->Arg(100)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_PolicyStep(benchmark::State& state) {
  const DataMatrices& dm = fixture_dm();
  const Matrix K = testing::reference_K_star();
  const Matrix Q = Matrix::Identity(6, 6), R = Matrix::Identity(3, 3);
  for (auto _ : state) benchmark::DoNotOptimize(policy_step(dm, K, Q, R, 0.5));
}
BENCHMARK(BM_PolicyStep)->Unit(benchmark::kMicrosecond);

void BM_LearnFixture(benchmark::State& state) {
  const auto cfg = LearnerConfig::with_step(Matrix::Identity(6, 6), Matrix::Identity(3, 3), 2.46, 0.001);
  for (auto _ : state) benchmark::DoNotOptimize(learn_lqr(fixture_dm(), cfg));
}
BENCHMARK(BM_LearnFixture)->Unit(benchmark::kMillisecond);

void BM_Kleinman(benchmark::State& state) {
  const Matrix A = testing::fixture_A(), B = testing::fixture_B();
  const Matrix Q = Matrix::Identity(6, 6), R = Matrix::Identity(3, 3);
  for (auto _ : state) benchmark::DoNotOptimize(oracle::kleinman(A, B, Q, R));
}
BENCHMARK(BM_Kleinman)->Unit(benchmark::kMicrosecond);

void BM_StructuredSdp(benchmark::State& state) {
  const auto st = SparsityStructure::from_graph(testing::fixture_partition(), testing::fixture_graph());
  const auto sys = assemble_stab(fixture_dm(), testing::reference_K_star(), Matrix::Identity(3, 3));
  SdpConfig cfg;
  cfg.c = 100.0;
  cfg.R_prime = Matrix::Identity(3, 3);
  for (auto _ : state) benchmark::DoNotOptimize(solve_structured_sdp(sys.theta_s, sys.i_x, st, cfg));
}
BENCHMARK(BM_StructuredSdp)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
