// Independent pilot for the stabilization thresholds used by the acceptance
// suite. Parents are drawn by degree class (linear scan over classes, then a
// uniform member), with its own random engine, so no code is shared with the
// library's growth kernel. Prints a header to stdout.
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <vector>

namespace {

struct ClassTree {
  std::vector<std::uint32_t> degree;
  std::vector<std::uint32_t> parent;
  std::vector<std::vector<std::uint32_t>> members;  // members[d]: nodes of degree d
  std::vector<std::uint32_t> slot;                  // position inside members[degree]
  std::vector<std::uint32_t> active;                // degrees with a non-empty class
  std::uint32_t leader = 0, max_degree = 0;
  std::uint64_t switches = 0;

  void add(std::uint32_t par) {
    const auto id = static_cast<std::uint32_t>(degree.size());
    degree.push_back(0);
    parent.push_back(par);
    if (members.empty()) members.emplace_back();
    if (members[0].empty()) active.push_back(0);
    slot.push_back(static_cast<std::uint32_t>(members[0].size()));
    members[0].push_back(id);
  }

  void bump(std::uint32_t v) {
    const std::uint32_t d = degree[v];
    auto& from = members[d];
    const std::uint32_t last = from.back();
    from[slot[v]] = last;
    slot[last] = slot[v];
    from.pop_back();
    if (from.empty()) active.erase(std::find(active.begin(), active.end(), d));
    if (members.size() <= d + 1) members.emplace_back();
    if (members[d + 1].empty()) active.push_back(d + 1);
    slot[v] = static_cast<std::uint32_t>(members[d + 1].size());
    members[d + 1].push_back(v);
    degree[v] = d + 1;
    if (d + 1 > max_degree) {
      max_degree = d + 1;
      if (v != leader) {
        leader = v;
        ++switches;
      }
    } else if (d + 1 == max_degree && v < leader) {
      leader = v;
      ++switches;
    }
  }
};

template <class F>
void step(ClassTree& t, F&& f, std::mt19937_64& eng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double z = 0.0;
  for (auto d : t.active) z += t.members[d].size() * f(d);
  double u = U(eng) * z;
  std::uint32_t d = t.active.back();
  for (auto c : t.active) {
    const double w = t.members[c].size() * f(c);
    if (u < w) {
      d = c;
      break;
    }
    u -= w;
  }
  std::uniform_int_distribution<std::size_t> pick(0, t.members[d].size() - 1);
  const std::uint32_t p = t.members[d][pick(eng)];
  t.add(p);
  t.bump(p);
}

struct Proportion {
  std::uint64_t hits = 0, n = 0;
  double p() const { return static_cast<double>(hits) / n; }
};

double wilson_lower(double p, double n, double z) {
  const double z2 = z * z;
  return (p + z2 / (2 * n) - z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n))) / (1 + z2 / n);
}

// Pilot lower confidence bound, then room for the noise of a 500-run test sample.
double threshold(const Proportion& pr, double test_n) {
  const double lo = wilson_lower(pr.p(), static_cast<double>(pr.n), 4.0);
  return std::max(0.0, lo - 4.0 * std::sqrt(lo * (1 - lo) / test_n));
}

}  // namespace

int main() {
  const std::size_t runs = 2000;
  const double test_n = 500;
  std::mt19937_64 eng(20240917);

  auto power2 = [](std::size_t d) { return (d + 1.0) * (d + 1.0); };
  auto constant = [](std::size_t) { return 1.0; };

  Proportion stable;
  for (std::size_t r = 0; r < runs; ++r) {
    ClassTree t;
    t.add(0);
    std::uint32_t at_checkpoint = 0;
    for (std::uint64_t s = 1; s <= 100000; ++s) {
      step(t, power2, eng);
      if (s == 1000) at_checkpoint = t.leader;
    }
    stable.hits += at_checkpoint == t.leader;
    ++stable.n;
  }

  Proportion window;
  std::vector<std::uint64_t> last_switch;
  Proportion late_switch;
  for (std::size_t r = 0; r < runs; ++r) {
    ClassTree t;
    t.add(0);
    std::uint64_t before = 0, last = 0, prev = 0;
    for (std::uint64_t s = 1; s <= 10000; ++s) {
      step(t, constant, eng);
      if (t.switches != prev) last = s;
      prev = t.switches;
      if (s == 1000) before = t.switches;
    }
    window.hits += t.switches > before;
    ++window.n;
    late_switch.hits += last > 100;
    ++late_switch.n;
  }

  std::printf("#pragma once\n\n");
  std::printf("// Generated by tools/pilot_calibrate (seed 20240917, %zu runs per regime).\n", runs);
  std::printf("// Thresholds = Wilson lower bound (z=4) minus 4 sd of a %g-run sample.\n\n", test_n);
  std::printf("namespace pilot {\n\n");
  std::printf("// power:p=2,c=1, leader at step 1e3 equals leader at 1e5: pilot %.4f\n", stable.p());
  std::printf("inline constexpr double kPowerStabilization = %.4f;\n\n", threshold(stable, test_n));
  std::printf("// constant:c=1, at least one switch in (1e3, 1e4]: pilot %.4f\n", window.p());
  std::printf("inline constexpr double kConstantWindowSwitch = %.4f;\n\n", threshold(window, test_n));
  std::printf("// constant:c=1, last switch after step 100 by step 1e4: pilot %.4f\n", late_switch.p());
  std::printf("inline constexpr double kConstantLateSwitch = %.4f;\n\n", threshold(late_switch, test_n));
  std::printf("}  // namespace pilot\n");
  return 0;
}
