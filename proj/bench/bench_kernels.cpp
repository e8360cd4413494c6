// OpenMP kernels against their serial reference loops.
// Args are the problem size; compare the Parallel/Serial pairs at equal size.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "zcam/kernels.hpp"

namespace {

using zcam::Matrix;

Matrix random_matrix(std::size_t r, std::size_t c, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Matrix m(r, c);
  for (auto& v : m.data()) v = nd(gen);
  return m;
}

// rows x 512 activations times a 512 x 512 layer
template <auto Kernel>
void BM_matmul(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const Matrix a = random_matrix(n, 512, 1), b = random_matrix(512, 512, 2);
  Matrix out(n, 512);
  for (auto _ : st) {
    Kernel(a, b, out);
    benchmark::DoNotOptimize(out.data().data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n * 512 * 512));
}

template <auto Kernel>
void BM_matmul_tn(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const Matrix a = random_matrix(n, 512, 1), b = random_matrix(n, 512, 2);
  Matrix out(512, 512);
  for (auto _ : st) {
    Kernel(a, b, out);
    benchmark::DoNotOptimize(out.data().data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n * 512 * 512));
}

template <auto Kernel>
void BM_matmul_nt(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const Matrix a = random_matrix(n, 512, 1), b = random_matrix(512, 512, 2);
  Matrix out(n, 512);
  for (auto _ : st) {
    Kernel(a, b, out);
    benchmark::DoNotOptimize(out.data().data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n * 512 * 512));
}

// kNN style: n queries against 4n reference rows in 64-D
template <auto Kernel>
void BM_sq_dists(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const Matrix q = random_matrix(n, 64, 3), x = random_matrix(4 * n, 64, 4);
  Matrix out(n, 4 * n);
  for (auto _ : st) {
    Kernel(q, x, out);
    benchmark::DoNotOptimize(out.data().data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n * 4 * n));
}

// one kernel column for the OCSVM solver
template <auto Kernel>
void BM_rbf_row(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const Matrix rows = random_matrix(n, 10, 5);
  const Matrix x = random_matrix(1, 10, 6);
  std::vector<double> out(n);
  for (auto _ : st) {
    Kernel(rows, x.row(0), 0.1, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n));
}

namespace k = zcam::kernels;
namespace s = zcam::kernels::serial;

BENCHMARK(BM_matmul<k::matmul>)->Name("matmul/parallel")->Arg(64)->Arg(256);
BENCHMARK(BM_matmul<s::matmul>)->Name("matmul/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_matmul_tn<k::matmul_tn>)->Name("matmul_tn/parallel")->Arg(64)->Arg(256);
BENCHMARK(BM_matmul_tn<s::matmul_tn>)->Name("matmul_tn/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_matmul_nt<k::matmul_nt>)->Name("matmul_nt/parallel")->Arg(64)->Arg(256);
BENCHMARK(BM_matmul_nt<s::matmul_nt>)->Name("matmul_nt/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_sq_dists<k::sq_dists>)->Name("sq_dists/parallel")->Arg(128)->Arg(512);
BENCHMARK(BM_sq_dists<s::sq_dists>)->Name("sq_dists/serial")->Arg(128)->Arg(512);
BENCHMARK(BM_rbf_row<k::rbf_row>)->Name("rbf_row/parallel")->Arg(1000)->Arg(20000);
BENCHMARK(BM_rbf_row<s::rbf_row>)->Name("rbf_row/serial")->Arg(1000)->Arg(20000);

}  // namespace

BENCHMARK_MAIN();
