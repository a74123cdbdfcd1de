// Serial reference kernels against their OpenMP counterparts.

#include "tesp/kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace tesp;
using namespace tesp::kernels;

namespace {

void fill(BlockTable& t, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  for (auto& v : t.raw()) v = {g(rng), g(rng)};
}

std::vector<CMat> random_slices(Index h, Index rows, Index cols, std::mt19937_64& rng) {
  std::vector<CMat> out;
  for (Index k = 0; k < h; ++k) out.push_back(CMat::Random(rows, cols));
  (void)rng;
  return out;
}

template <bool Parallel>
void BM_rank_update(benchmark::State& st) {
  const Index q = st.range(0), h = 3, w = st.range(1);
  std::mt19937_64 rng(1);
  BlockTable table(q, q, h, w, w), gl(q, q, h, w, w), gr(q, q, h, w, w);
  fill(table, rng);
  fill(gl, rng);
  fill(gr, rng);
  Index step = 0;
  for (auto _ : st) {
    Index pi = step % q, pj = (step * 7) % q;
    if (Parallel)
      omp::rank_update_table(table, gl, gr, pi, pj);
    else
      serial::rank_update_table(table, gl, gr, pi, pj);
    for (auto& v : table.raw()) v *= 0.5;
    ++step;
    benchmark::DoNotOptimize(table.raw().data());
  }
}

template <bool Parallel>
void BM_loss_table(benchmark::State& st) {
  const Index q = st.range(0), h = 3, w = st.range(1);
  std::mt19937_64 rng(2);
  BlockTable table(q, q, h, w, w);
  fill(table, rng);
  Mat losses;
  for (auto _ : st) {
    if (Parallel)
      omp::loss_table(table, 4, losses);
    else
      serial::loss_table(table, 4, losses);
    benchmark::DoNotOptimize(losses.data());
  }
}

template <bool Parallel>
void BM_sandwich(benchmark::State& st) {
  const Index q = st.range(0), h = 3, dim = 30, w = st.range(1);
  std::mt19937_64 rng(3);
  BlockTable left(q, 1, h, w, dim), right(1, q, h, dim, w), table(q, q, h, w, w);
  fill(left, rng);
  fill(right, rng);
  auto mid = random_slices(h, dim, dim, rng);
  for (auto _ : st) {
    if (Parallel)
      omp::sandwich_table(left, mid, right, table);
    else
      serial::sandwich_table(left, mid, right, table);
    benchmark::DoNotOptimize(table.raw().data());
  }
}

template <bool Parallel>
void BM_slice_products(benchmark::State& st) {
  const Index h = st.range(0), dim = st.range(1);
  std::mt19937_64 rng(4);
  auto a = random_slices(h, dim, dim, rng), b = random_slices(h, dim, dim, rng);
  std::vector<CMat> out;
  for (auto _ : st) {
    if (Parallel)
      omp::slice_products(a, b, out);
    else
      serial::slice_products(a, b, out);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_rank_update<false>)->Args({30, 1})->Args({100, 1})->Args({30, 4});
BENCHMARK(BM_rank_update<true>)->Args({30, 1})->Args({100, 1})->Args({30, 4});
BENCHMARK(BM_loss_table<false>)->Args({30, 1})->Args({100, 1})->Args({30, 4});
BENCHMARK(BM_loss_table<true>)->Args({30, 1})->Args({100, 1})->Args({30, 4});
BENCHMARK(BM_sandwich<false>)->Args({30, 1})->Args({30, 4});
BENCHMARK(BM_sandwich<true>)->Args({30, 1})->Args({30, 4});
BENCHMARK(BM_slice_products<false>)->Args({3, 64})->Args({9, 128});
BENCHMARK(BM_slice_products<true>)->Args({3, 64})->Args({9, 128});

BENCHMARK_MAIN();
