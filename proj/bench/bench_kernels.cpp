// Serial reference against the OpenMP replicate kernel, and Fenwick sampling against a linear scan.
#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "hubforge/hubs.hpp"
#include "hubforge/parallel.hpp"
#include "hubforge/pa_tree.hpp"
#include "hubforge/weighted_index.hpp"

using namespace hubforge;

namespace {

template <class F>
double seconds(F&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  const int threads = argc > 1 ? std::atoi(argv[1]) : 0;
  const auto spec = AttachmentSpec::linear(1, 1);
  const std::size_t reps = 200;
  auto replicate = [&](std::size_t r) {
    RandomSource rng(derive_seed(1, r));
    return leader_of(grow(spec, 20000, rng));
  };

  std::vector<NodeId> a, b;
  const double ts = seconds([&] { a = run_replicates_serial<NodeId>(reps, replicate); });
  const double tp = seconds([&] { b = run_replicates<NodeId>(reps, threads, replicate); });
  std::printf("replicates  serial %.3f s  openmp(%d threads) %.3f s  speedup %.2f  identical %s\n", ts,
              resolve_threads(threads), tp, ts / tp, a == b ? "yes" : "no");

  for (std::size_t n : {100, 1000, 10000, 100000}) {
    DynamicWeightedIndex fen;
    LinearScanSampler lin;
    RandomSource setup(2);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = setup.uniform() + 0.01;
      fen.set_weight(i, w);
      lin.set_weight(i, w);
    }
    const std::size_t draws = 2'000'000 / (1 + n / 1000);
    std::size_t sink = 0;
    RandomSource r1(3), r2(3);
    const double tf = seconds([&] {
      for (std::size_t i = 0; i < draws; ++i) sink += fen.sample(r1);
    });
    const double tl = seconds([&] {
      for (std::size_t i = 0; i < draws; ++i) sink -= lin.sample(r2);
    });
    std::printf("sampling n=%-7zu draws=%-8zu fenwick %.1f ns  linear %.1f ns  agree %s\n", n, draws,
                1e9 * tf / draws, 1e9 * tl / draws, sink == 0 ? "yes" : "no");
  }
  return 0;
}
