// Serial reference kernels against the OpenMP ones on page-sized planes.
//
//   bench_kernels --benchmark_filter=max_filter
//   OMP_NUM_THREADS=4 bench_kernels

#include <benchmark/benchmark.h>
#include <omp.h>

#include "docenh/enhance.hpp"
#include "docenh/kernels.hpp"
#include "docenh/rng.hpp"
#include "docenh/synth.hpp"

namespace k = docenh::kernels;

namespace {

docenh::Plane page_plane(int side) {
  docenh::Rng rng(7);
  docenh::synth::PageOptions o;
  o.width = o.height = side;
  o.channels = 1;
  return docenh::channel_plane(docenh::synth::text_page(o, rng), 0);
}

template <auto Fn>
void window_kernel(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const docenh::Plane p = page_plane(side);
  const int window = docenh::default_illumination_window(side, side);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(p, window));
  state.SetItemsProcessed(state.iterations() * p.size());
  state.counters["threads"] = omp_get_max_threads();
}

template <auto Fn>
void gaussian_kernel(benchmark::State& state) {
  const docenh::Plane p = page_plane(static_cast<int>(state.range(0)));
  const auto taps = k::gaussian_taps(11, 1.5);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(p, taps));
  state.SetItemsProcessed(state.iterations() * p.size());
}

template <auto Fn>
void plane_kernel(benchmark::State& state) {
  const docenh::Plane p = page_plane(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(p));
  state.SetItemsProcessed(state.iterations() * p.size());
}

void enhance_page(benchmark::State& state) {
  docenh::Rng rng(3);
  docenh::synth::PageOptions o;
  o.width = o.height = static_cast<int>(state.range(0));
  const docenh::Image page = docenh::synth::text_page(o, rng);
  for (auto _ : state) benchmark::DoNotOptimize(docenh::enhance_document(page));
}

}  // namespace

#define PAIR(name, wrapper, fn)                                                         \
  BENCHMARK(wrapper<k::reference::fn>)->Name(name "/reference")->Arg(512)->Arg(1024); \
  BENCHMARK(wrapper<k::fn>)->Name(name "/openmp")->Arg(512)->Arg(1024)

PAIR("max_filter", window_kernel, max_filter);
PAIR("min_filter", window_kernel, min_filter);
PAIR("box_blur", window_kernel, box_blur);
PAIR("separable_valid", gaussian_kernel, separable_valid);
PAIR("laplacian", plane_kernel, laplacian);
PAIR("laplacian_abs_sum", plane_kernel, laplacian_abs_sum);
BENCHMARK(enhance_page)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
