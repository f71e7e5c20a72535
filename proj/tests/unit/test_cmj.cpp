#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "hubforge/cmj.hpp"
#include "hubforge/error.hpp"
#include "hubforge/stats.hpp"

using namespace hubforge;

TEST_CASE("ulam labels") {
  CmjPopulation pop;
  const auto a = pop.add_child(0, 0.1);  // 1
  pop.add_child(0, 0.2);                 // 2
  const auto c = pop.add_child(a, 0.3);  // 1.1
  CHECK(pop.ulam_string(0) == "root");
  CHECK(pop.ulam_string(c) == "1.1");
  CHECK(pop.ulam_label(c) == std::vector<std::uint32_t>{1, 1});
  CHECK(pop.child_rank(2) == 2);
  CHECK(k_moderate_census(pop, 1) == 3);
  CHECK(k_moderate_census(pop, 2) == 4);
  CHECK_THROWS_AS(pop.add_child(c, 0.2), Error);
}

TEST_CASE("yule population grows like e^t") {
  auto spec = AttachmentSpec::constant(1);
  std::vector<double> sizes;
  for (std::uint64_t r = 0; r < 10000; ++r) {
    RandomSource rng(derive_seed(12, r));
    sizes.push_back(static_cast<double>(simulate_until_time(spec, 1.0, rng).size()));
  }
  auto m = stats::mean_se(sizes);
  CHECK(std::abs(m.mean - std::exp(1.0)) <= 3 * m.standard_error);
}

TEST_CASE("jump chain is ordered and consistent") {
  RandomSource rng(3);
  auto run = simulate_until_size(AttachmentSpec::power(1.2, 1), 500, rng);
  const auto& pop = run.population;
  CHECK(pop.size() == 500);
  CHECK(run.jumps.size() == 499);
  double last = 0;
  for (std::size_t i = 0; i < run.jumps.size(); ++i) {
    const auto& j = run.jumps[i];
    CHECK(j.time >= last);
    last = j.time;
    CHECK(j.newborn == i + 1);
    CHECK(pop.parent(j.newborn) == j.parent);
    CHECK(pop.birth_time(j.newborn) == j.time);
    CHECK(pop.birth_time(j.parent) <= j.time);
  }
  auto tree = to_growth_tree(pop, AttachmentSpec::power(1.2, 1));
  for (IndividualId u = 0; u < pop.size(); ++u) CHECK(tree.out_degree(u) == pop.children_count(u));
}

TEST_CASE("caps") {
  RandomSource rng(1);
  CmjCaps caps{1000, 100};
  try {
    simulate_until_size(AttachmentSpec::constant(1), 200, rng, caps);
    FAIL("expected CapExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CapExceeded);
  }
  // f(k) = (k+1)^3 explodes in finite time
  try {
    simulate_until_time(AttachmentSpec::power(3, 1), 50.0, rng, caps);
    FAIL("expected ExplosionSuspected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ExplosionSuspected);
  }
}

TEST_CASE("killed size of the yule process") {
  // rate-1 Yule process killed at Exp(alpha): |T_Y| is geometric with mean alpha/(alpha-1)
  auto k = killed_size(AttachmentSpec::constant(1), 4.0, 4000, 9);
  CHECK(std::abs(k.size.mean - 4.0 / 3.0) < 4 * k.size.standard_error);
  CHECK(k.laplace_sum == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(k.predicted == doctest::Approx(4.0 / 3.0).epsilon(1e-6));
  try {
    killed_size(AttachmentSpec::constant(1), 0.5, 10, 9);
    FAIL("expected DivergentExpectation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DivergentExpectation);
  }
}

TEST_CASE("event log csv") {
  CmjPopulation pop;
  pop.add_child(0, 0.5);
  pop.add_child(1, 0.75);
  JumpChain jumps{{0.5, 1, 0}, {0.75, 2, 1}};
  std::ostringstream os;
  write_event_log_csv(os, pop, jumps);
  CHECK(os.str() == "event_index,time,parent_ulam,child_rank\n1,0.5,root,1\n2,0.75,1,1\n");
}

TEST_CASE("smallest populations") {
  RandomSource rng(2);
  auto one = simulate_until_size(AttachmentSpec::linear(1, 1), 1, rng);
  CHECK(one.population.size() == 1);
  CHECK(one.jumps.empty());
  CHECK(simulate_until_time(AttachmentSpec::linear(1, 1), 0.0, rng).size() == 1);

  // the first birth is the root's, after Exp(f(0)); f(0) = 4 gives mean 1/4
  std::vector<double> first;
  for (std::uint64_t r = 0; r < 20000; ++r) {
    RandomSource g(derive_seed(22, r));
    auto two = simulate_until_size(AttachmentSpec::constant(4), 2, g);
    CHECK(two.population.parent(1) == 0);
    CHECK(two.population.child_rank(1) == 1);
    first.push_back(two.jumps[0].time);
  }
  auto m = stats::mean_se(first);
  CHECK(std::abs(m.mean - 0.25) <= 3 * m.standard_error);
}

TEST_CASE("third individual matches the discrete tree law") {
  std::uint64_t second = 0;
  for (std::uint64_t r = 0; r < 100000; ++r) {
    RandomSource rng(derive_seed(23, r));
    auto run = simulate_until_size(AttachmentSpec::linear(1, 1), 3, rng);
    second += run.population.parent(2) == 0;
  }
  CHECK(std::abs(second / 1e5 - 2.0 / 3.0) <= 0.005);
}

TEST_CASE("explosive rule trips the default caps") {
  RandomSource rng(5);
  try {
    simulate_until_time(AttachmentSpec::power(2, 1), 1e6, rng);
    FAIL("expected ExplosionSuspected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ExplosionSuspected);
  }
}

TEST_CASE("fast killing leaves the root alone") {
  auto k = killed_size(AttachmentSpec::linear(1, 1), 1e6, 1000, 3);
  CHECK(k.size.mean == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("census with a large K counts everyone") {
  RandomSource rng(8);
  auto run = simulate_until_size(AttachmentSpec::linear(1, 1), 400, rng);
  std::uint32_t max_rank = 0;
  for (IndividualId u = 1; u < run.population.size(); ++u) max_rank = std::max(max_rank, run.population.child_rank(u));
  CHECK(k_moderate_census(run.population, max_rank) == 400);
  CHECK(k_moderate_census(CmjPopulation{}, 1) == 1);
}
