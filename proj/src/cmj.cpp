#include "hubforge/cmj.hpp"

#include <cstdio>
#include <ostream>

#include "hubforge/criteria.hpp"
#include "hubforge/error.hpp"
#include "hubforge/parallel.hpp"

namespace hubforge {

CmjPopulation::CmjPopulation() : parent_{kNoParent}, rank_{0}, birth_{0.0}, children_{0} {}

IndividualId CmjPopulation::add_child(IndividualId p, double time) {
  if (p >= size()) throw Error(ErrorCode::Precondition, "unknown parent");
  if (time < birth_[p]) throw Error(ErrorCode::Precondition, "child born before its parent");
  const auto id = static_cast<IndividualId>(size());
  parent_.push_back(p);
  rank_.push_back(++children_[p]);
  birth_.push_back(time);
  children_.push_back(0);
  return id;
}

std::vector<std::uint32_t> CmjPopulation::ulam_label(IndividualId u) const {
  std::vector<std::uint32_t> out;
  for (; u != 0; u = parent_[u]) out.push_back(rank_[u]);
  return {out.rbegin(), out.rend()};
}

std::string CmjPopulation::ulam_string(IndividualId u) const {
  if (u == 0) return "root";
  std::string s;
  for (auto r : ulam_label(u)) {
    if (!s.empty()) s += '.';
    s += std::to_string(r);
  }
  return s;
}

CmjProcess::CmjProcess(const AttachmentSpec& spec, RandomSource& rng, CmjCaps caps)
    : spec_(spec), rng_(rng), caps_(caps) {
  schedule(0, 0.0);
}

void CmjProcess::schedule(IndividualId u, double from) {
  const double rate = spec_.evaluate(pop_.children_count(u), &rng_);
  queue_.push({from + rng_.exponential(rate), u});
}

const JumpEvent& CmjProcess::advance() {
  const Pending next = queue_.top();
  queue_.pop();
  ++events_;
  pop_.set_clock(next.time);
  const IndividualId child = pop_.add_child(next.who, next.time);
  schedule(next.who, next.time);
  schedule(child, next.time);
  jumps_.push_back({next.time, child, next.who});
  return jumps_.back();
}

void CmjProcess::run_until_size(std::size_t n) {
  if (n > caps_.max_individuals)
    throw Error(ErrorCode::CapExceeded, "requested size above the population cap");
  while (pop_.size() < n) {
    if (events_ >= caps_.max_events) throw Error(ErrorCode::CapExceeded, "event cap reached");
    advance();
  }
}

void CmjProcess::run_until_time(double t) {
  while (next_event_time() <= t) {
    if (pop_.size() >= caps_.max_individuals || events_ >= caps_.max_events)
      throw Error(ErrorCode::ExplosionSuspected, "cap reached before time " + std::to_string(t));
    advance();
  }
  pop_.set_clock(t);
}

CmjRun simulate_until_size(const AttachmentSpec& spec, std::size_t n, RandomSource& rng, CmjCaps caps) {
  if (n < 1) throw Error(ErrorCode::Precondition, "population size must be at least 1");
  CmjProcess proc(spec, rng, caps);
  proc.run_until_size(n);
  JumpChain jumps = proc.jumps();
  return {proc.release(), std::move(jumps)};
}

CmjPopulation simulate_until_time(const AttachmentSpec& spec, double t, RandomSource& rng, CmjCaps caps) {
  if (!(t >= 0.0)) throw Error(ErrorCode::Precondition, "time must be non-negative");
  CmjProcess proc(spec, rng, caps);
  proc.run_until_time(t);
  return proc.release();
}

KilledSize killed_size(const AttachmentSpec& spec, double alpha, std::size_t replicates,
                       std::uint64_t seed, int threads, CmjCaps caps) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::Precondition, "alpha must be positive");
  const auto q = criteria::malthus_sum(spec, alpha);
  if (!q.certified || q.verdict != criteria::SeriesVerdict::Converges || !(q.upper() < 1.0))
    throw Error(ErrorCode::DivergentExpectation, "Laplace sum at alpha is not certified below 1");

  const auto sizes = run_replicates<double>(replicates, threads, [&](std::size_t r) {
    RandomSource rng(derive_seed(seed, r));
    const double y = rng.exponential(alpha);
    return static_cast<double>(simulate_until_time(spec, y, rng, caps).size());
  });
  return {stats::mean_se(sizes), q.upper(), 1.0 / (1.0 - q.estimate()), sizes};
}

std::uint64_t k_moderate_census(const CmjPopulation& pop, std::uint32_t K) {
  std::vector<char> moderate(pop.size(), 0);
  moderate[0] = 1;
  std::uint64_t count = 1;
  for (IndividualId u = 1; u < pop.size(); ++u) {
    moderate[u] = moderate[pop.parent(u)] && pop.child_rank(u) <= K;
    count += moderate[u];
  }
  return count;
}

GrowthTree to_growth_tree(const CmjPopulation& pop, const AttachmentSpec& spec) {
  return GrowthTree::from_parents(pop.parents(), spec);
}

void write_event_log_csv(std::ostream& os, const CmjPopulation& pop, const JumpChain& jumps) {
  os << "event_index,time,parent_ulam,child_rank\n";
  char buf[32];
  for (std::size_t k = 0; k < jumps.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.12g", jumps[k].time);
    os << k + 1 << ',' << buf << ',' << pop.ulam_string(jumps[k].parent) << ','
       << pop.child_rank(jumps[k].newborn) << '\n';
  }
}

}  // namespace hubforge
