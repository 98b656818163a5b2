#include <benchmark/benchmark.h>

#include "er/model.hpp"

namespace {

er::Instance chain(int n) {
    std::vector<er::Atom> atoms;
    for (int k = 0; k < n; ++k)
        atoms.push_back(er::Atom{er::Predicate{"R", 2},
                                 {er::Variable{"x" + std::to_string(k)},
                                  er::Variable{"x" + std::to_string(k + 1)}}});
    return er::Instance(std::move(atoms));
}

void bm_homomorphisms(benchmark::State& state) {
    er::Instance big = chain(static_cast<int>(state.range(0)));
    er::Instance q = chain(3);
    for (auto _ : state) benchmark::DoNotOptimize(er::homomorphisms(q, big, 100));
}
BENCHMARK(bm_homomorphisms)->Arg(8)->Arg(32);

void bm_canonicalize(benchmark::State& state) {
    er::Instance big = chain(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(er::canonical(big));
}
BENCHMARK(bm_canonicalize)->Arg(8)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
