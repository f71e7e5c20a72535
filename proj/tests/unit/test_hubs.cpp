#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "../pilot_thresholds.hpp"
#include "hubforge/error.hpp"
#include "hubforge/criteria.hpp"
#include "hubforge/hubs.hpp"
#include "hubforge/parallel.hpp"

using namespace hubforge;

namespace {

NodeId brute_leader(const GrowthTree& t) {
  Degree best = 0;
  for (NodeId v = 0; v < t.size(); ++v) best = std::max(best, t.out_degree(v));
  for (NodeId v = 0; v < t.size(); ++v)
    if (t.out_degree(v) == best) return v;
  return 0;
}

struct Recorder : GrowthObserver {
  std::vector<NodeId> leaders;
  void on_step(const GrowthTree& t, const StepEvent&) override { leaders.push_back(brute_leader(t)); }
};

// Replays the growth and compares every node with every ancestor after each step.
std::uint64_t brute_catch_up(const std::vector<NodeId>& parents) {
  const std::size_t n = parents.size();
  std::vector<Degree> deg(n, 0);
  std::vector<std::vector<char>> caught(n);
  std::vector<std::vector<NodeId>> anc(n);
  for (NodeId v = 1; v < n; ++v) {
    for (NodeId a = parents[v]; a != kNoParent; a = parents[a]) anc[v].push_back(a);
    caught[v].assign(anc[v].size(), 0);
  }
  for (NodeId s = 1; s < n; ++s) {
    ++deg[parents[s]];
    for (NodeId v = 1; v < s; ++v)
      for (std::size_t i = 0; i < anc[v].size(); ++i)
        if (deg[v] > 0 && deg[v] >= deg[anc[v][i]]) caught[v][i] = 1;
  }
  std::uint64_t count = 1;
  for (NodeId v = 1; v < n; ++v)
    if (deg[v] > 0 && std::all_of(caught[v].begin(), caught[v].end(), [](char c) { return c; })) ++count;
  return count;
}

double brute_next_inverse_max(const GrowthTree& t, const AttachmentSpec& spec) {
  Degree m = 0;
  for (NodeId v = 0; v < t.size(); ++v) m = std::max(m, t.out_degree(v));
  double z = 0, acc = 0;
  for (NodeId v = 0; v < t.size(); ++v) {
    const double w = spec.evaluate(t.out_degree(v));
    z += w;
    acc += w / std::max<double>(m, t.out_degree(v) + 1.0);
  }
  return acc / z;
}

}  // namespace

TEST_CASE("tracker follows the brute-force leader") {
  for (auto spec : {AttachmentSpec::constant(1), AttachmentSpec::linear(1, 1), AttachmentSpec::power(2, 1)}) {
    for (std::uint64_t r = 0; r < 5; ++r) {
      RandomSource rng(derive_seed(21, r));
      LeaderTracker tracker({10, 100, 500});
      Recorder rec;
      TreeGrower g(spec, rng);
      g.add_observer(tracker);
      g.add_observer(rec);
      g.run(500);
      CHECK(tracker.leader() == rec.leaders.back());
      CHECK(tracker.leader() == leader_of(g.tree()));
      std::uint64_t switches = 0;
      NodeId prev = 0;
      for (std::size_t s = 0; s < rec.leaders.size(); ++s) {
        if (rec.leaders[s] != prev) ++switches;
        prev = rec.leaders[s];
        for (const auto& cp : tracker.trace().checkpoints)
          if (cp.step == s + 1) {
            CHECK(cp.leader == rec.leaders[s]);
            CHECK(cp.switches == switches);
          }
      }
      CHECK(tracker.trace().switches.size() == switches);
      CHECK(tracker.trace().checkpoints.size() == 3);
    }
  }
}

TEST_CASE("leader ties go to the older node") {
  std::vector<NodeId> parents{kNoParent, 0, 1, 1, 0};
  auto t = GrowthTree::from_parents(parents, AttachmentSpec::constant(1));
  CHECK(leader_of(t) == 0);
}

TEST_CASE("catch-up count against replay") {
  for (auto spec : {AttachmentSpec::constant(1), AttachmentSpec::power(2, 1)}) {
    for (std::uint64_t r = 0; r < 10; ++r) {
      RandomSource a(derive_seed(31, r)), b(derive_seed(31, r));
      const auto fast = catch_up_count(spec, 200, a);
      auto t = grow(spec, 200, b);
      std::vector<NodeId> parents(t.parents().begin(), t.parents().end());
      CHECK(fast == brute_catch_up(parents));
    }
  }
}

TEST_CASE("catch-up of a root alone and a star") {
  RandomSource rng(1);
  CHECK(catch_up_count(AttachmentSpec::linear(1, 1), 0, rng) == 1);
  std::vector<NodeId> star{kNoParent, 0, 0, 0, 0};
  CHECK(brute_catch_up(star) == 1);
}

TEST_CASE("overtake bound telescopes to one half") {
  const double lb = overtake_log_bound(AttachmentSpec::linear(1, 1), 3, 1.0, 0.0);
  CHECK(std::exp(lb) == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(std::exp(lb) >= 0.5);
  const double shifted = overtake_log_bound(AttachmentSpec::linear(1, 1), 3, 1.0, 2.0);
  CHECK(shifted == doctest::Approx(lb - 2.0));
}

TEST_CASE("overtake preconditions") {
  auto lin = AttachmentSpec::linear(1, 1);
  CHECK_THROWS_AS(overtake_log_bound(lin, 0, 1.0, 0.0), Error);
  CHECK_THROWS_AS(overtake_log_bound(lin, 3, 0.0, 0.0), Error);
  CHECK_THROWS_AS(overtake_log_bound(lin, 3, 1.0, -1.0), Error);
  try {
    overtake_log_bound(AttachmentSpec::constant(1), 3, 1.0, 0.0);
    FAIL("expected DivergentMoment");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DivergentMoment);
  }
}

TEST_CASE("overtake frequency stays below the bound") {
  auto r = overtake_probability(AttachmentSpec::linear(1, 1), 3, 1.0, 0.0, 5000, 4, 1, {200, 1'000'000});
  CHECK(r.probability <= r.bound + 3 * r.standard_error);
  CHECK(r.probability > 0.0);
}

TEST_CASE("phi") {
  auto e = estimate_phi(AttachmentSpec::constant(1), 1, 200, 2000, 6);
  REQUIRE(e.status == PhiStatus::Reached);
  CHECK(*e.phi >= 2);
  CHECK(e.probability >= 0.5);
  auto n = estimate_phi(AttachmentSpec::power(2, 1), 1, 200, 2000, 6);
  CHECK(n.status == PhiStatus::NotReached);
  CHECK(n.interval.upper < 0.5);
  CHECK(std::string(to_string(PhiStatus::Undetermined)) == "undetermined");
}

TEST_CASE("one-step expectation against enumeration") {
  for (auto spec : {AttachmentSpec::power(2, 1), AttachmentSpec::linear(1, 1), AttachmentSpec::power(40, 1)}) {
    for (std::uint64_t r = 0; r < 10; ++r) {
      RandomSource rng(derive_seed(41, r));
      auto t = grow(spec, 50 + 40 * r, rng);
      CHECK(next_inverse_max_exact(t, spec) == doctest::Approx(brute_next_inverse_max(t, spec)).epsilon(1e-12));
      RandomSource s(derive_seed(42, r));
      auto mc = next_inverse_max_sampled(t, spec, 20000, s);
      CHECK(std::abs(mc.mean - brute_next_inverse_max(t, spec)) <= 5 * mc.standard_error + 1e-15);
    }
  }
}

TEST_CASE("supermartingale snapshots hold") {
  SupermartingaleOptions opt;
  opt.snapshots = 20;
  opt.max_nodes = 2000;
  for (auto spec : {AttachmentSpec::power(2, 1), AttachmentSpec::linear(1, 1)}) {
    auto snaps = supermartingale_check(spec, 1.0, opt, 3);
    CHECK(snaps.size() == 20);
    for (const auto& s : snaps) {
      CHECK(s.exact);
      CHECK(s.holds);
      CHECK(s.bound == doctest::Approx((1.0 / s.max_degree) * (1.0 - 1.0 / (2.0 * s.nodes))));
    }
  }
}

TEST_CASE("max growth constant") {
  // kappa = 1, a = 1/2; the sequence tends to Gamma(3/2)
  auto m = max_growth_check(AttachmentSpec::power(2, 1), 1.0, 200, 0.5, 50, 1);
  double direct = std::tgamma(1.5);
  for (int n = 2; n < 100000; ++n)
    direct = std::min(direct, std::exp(-0.5 * std::log(n) + std::lgamma(n) + std::lgamma(1.5) - std::lgamma(n - 0.5)));
  CHECK(m.c_min == doctest::Approx(direct).epsilon(1e-9));
  CHECK(m.r == doctest::Approx(0.5 * m.c_min));
  CHECK(m.fraction >= 0.0);
  CHECK(m.fraction <= 1.0);
}

TEST_CASE("win surrogate favours the root under superlinear growth") {
  const double p = win_surrogate(AttachmentSpec::power(2, 1), 0, 1, 1, 200, 300, 5);
  CHECK(p > 0.3);
  CHECK_THROWS_AS(win_surrogate(AttachmentSpec::power(2, 1), 0, 5, 1, 200, 10, 5), Error);
}

TEST_CASE("persistence csv and summary") {
  auto res = persistence_experiment(AttachmentSpec::power(2, 1), {10, 100}, 1000, 20, 7);
  CHECK(res.rows.size() == 60);
  REQUIRE(res.summary.size() == 2);
  CHECK(res.summary[0].checkpoint == 10);
  std::ostringstream os;
  write_persistence_csv(os, res);
  CHECK(os.str().rfind("replicate,checkpoint,leader,max_degree,switches\n", 0) == 0);
  CHECK_THROWS_AS(persistence_experiment(AttachmentSpec::power(2, 1), {1000}, 1000, 2, 7), Error);
}

TEST_CASE("two nodes and a star keep the root") {
  for (auto spec : {AttachmentSpec::constant(1), AttachmentSpec::power(2, 1)}) {
    RandomSource rng(1);
    LeaderTracker tracker({1});
    TreeGrower g(spec, rng);
    g.add_observer(tracker);
    g.run(1);
    CHECK(tracker.leader() == 0);
    CHECK(tracker.trace().switches.empty());
  }
  auto star = GrowthTree::from_parents(std::vector<NodeId>{kNoParent}, AttachmentSpec::constant(1));
  LeaderTracker tracker;
  tracker.reset(star);
  for (NodeId v = 1; v < 20; ++v) {
    star.attach(0, 1.0, 1.0);
    tracker.on_step(star, {v, 0, v});
  }
  CHECK(tracker.trace().switches.empty());
  auto single = persistence_experiment(AttachmentSpec::constant(1), {1}, 2, 1, 3);
  CHECK(single.summary[0].stabilization == 1.0);
}

TEST_CASE("uniform attachment keeps switching late") {
  const auto late = run_replicates<char>(500, 1, [](std::size_t r) -> char {
    RandomSource rng(derive_seed(44, r));
    LeaderTracker tracker;
    TreeGrower g(AttachmentSpec::constant(1), rng);
    g.add_observer(tracker);
    g.run(10000);
    return tracker.trace().last_switch_step > 100;
  });
  const double frac = std::count(late.begin(), late.end(), 1) / 500.0;
  CHECK(frac > 0.5);
  CHECK(frac >= pilot::kConstantLateSwitch);
}

TEST_CASE("catch-up census settles early under superlinear growth") {
  auto a = catch_up_census(AttachmentSpec::power(2, 1), 1000, 200, 12);
  auto b = catch_up_census(AttachmentSpec::power(2, 1), 10000, 200, 12);
  // same seeds: the larger run extends the smaller one, and caught-up nodes stay caught up
  for (std::size_t r = 0; r < 200; ++r) CHECK(b.counts[r] >= a.counts[r]);
  CHECK(a.median == b.median);
}

TEST_CASE("overtake vanishes with the head start") {
  auto r = overtake_probability(AttachmentSpec::linear(1, 1), 3, 1.0, 30.0, 2000, 4, 1, {200, 1'000'000});
  CHECK(r.successes == 0);
  CHECK(r.bound < 1e-12);
}

TEST_CASE("phi rejects rank zero") {
  CHECK_THROWS_AS(estimate_phi(AttachmentSpec::constant(1), 0, 100, 10, 1), Error);
  auto n = estimate_phi(AttachmentSpec::power(2, 1), 1, 10000, 500, 7);
  CHECK(n.status == PhiStatus::NotReached);
}

TEST_CASE("max growth fraction meets its guarantee") {
  const double eps = 0.2;
  for (auto spec : {AttachmentSpec::power(2, 1), AttachmentSpec::linear(1, 1)}) {
    auto m = max_growth_check(spec, 1.0, 2000, eps, 200, 9);
    CHECK(m.fraction >= 1.0 - eps);
  }
}

TEST_CASE("stabilization follows the classifier") {
  auto none = criteria::classify(AttachmentSpec::constant(1));
  auto unique = criteria::classify(AttachmentSpec::power(2, 1));
  REQUIRE(none.verdict == criteria::Verdict::NoPersistentHub);
  REQUIRE(unique.verdict == criteria::Verdict::UniquePersistentHub);
  const double lo = persistence_experiment(AttachmentSpec::constant(1), {1000}, 10000, 300, 15).summary[0].stabilization;
  const double hi = persistence_experiment(AttachmentSpec::power(2, 1), {1000}, 10000, 300, 15).summary[0].stabilization;
  CHECK(hi >= pilot::kPowerStabilization);
  CHECK(lo < hi);
}
