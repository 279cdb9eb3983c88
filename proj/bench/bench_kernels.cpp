// Serial reference vs OpenMP kernels on training-scale shapes.

#include <vector>

#include <benchmark/benchmark.h>

#include "sphembed/kernels.hpp"
#include "sphembed/rng.hpp"

namespace {

std::vector<double> random_buffer(std::size_t n, std::uint64_t seed) {
    sphembed::Rng rng(seed);
    std::vector<double> v(n);
    for (double &x : v)
        x = rng.normal(0.0, 1.0);
    return v;
}

void bm_matmul_serial(benchmark::State &state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const auto a = random_buffer(n * n, 1), b = random_buffer(n * n, 2);
    std::vector<double> c(n * n);
    for (auto _ : state) {
        sphembed::kernels::serial::matmul(a.data(), b.data(), c.data(), n, n, n);
        benchmark::ClobberMemory();
    }
}

void bm_matmul_omp(benchmark::State &state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const auto a = random_buffer(n * n, 1), b = random_buffer(n * n, 2);
    std::vector<double> c(n * n);
    for (auto _ : state) {
        sphembed::kernels::matmul(a.data(), b.data(), c.data(), n, n, n);
        benchmark::ClobberMemory();
    }
}

void bm_sqdist_serial(benchmark::State &state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const std::size_t d = 64;
    const auto x = random_buffer(n * d, 3), y = random_buffer(n * d, 4);
    std::vector<double> dist(n * n);
    for (auto _ : state) {
        sphembed::kernels::serial::pairwise_sqdist(x.data(), y.data(),
                                                 dist.data(), n, n, d);
        benchmark::ClobberMemory();
    }
}

void bm_sqdist_omp(benchmark::State &state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const std::size_t d = 64;
    const auto x = random_buffer(n * d, 3), y = random_buffer(n * d, 4);
    std::vector<double> dist(n * n);
    for (auto _ : state) {
        sphembed::kernels::pairwise_sqdist(x.data(), y.data(), dist.data(), n,
                                         n, d);
        benchmark::ClobberMemory();
    }
}

} // namespace

BENCHMARK(bm_matmul_serial)->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(bm_matmul_omp)->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(bm_sqdist_serial)->Arg(256)->Arg(1024);
BENCHMARK(bm_sqdist_omp)->Arg(256)->Arg(1024);

BENCHMARK_MAIN();
