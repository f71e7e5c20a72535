#pragma once

#include <cstdint>
#include <iosfwd>
#include <queue>
#include <string>
#include <vector>

#include "hubforge/attachment.hpp"
#include "hubforge/pa_tree.hpp"
#include "hubforge/rng.hpp"
#include "hubforge/stats.hpp"

namespace hubforge {

using IndividualId = std::uint32_t;

struct CmjCaps {
  std::uint64_t max_events = 10'000'000;
  std::uint64_t max_individuals = 1'000'000;
};

/// Individuals of a CMJ population, indexed in birth order (the root is 0).
/// Ulam-Harris labels are kept as (parent, child rank) pairs; ranks start at 1.
class CmjPopulation {
 public:
  CmjPopulation();

  std::size_t size() const { return parent_.size(); }
  IndividualId parent(IndividualId u) const { return parent_[u]; }
  std::uint32_t child_rank(IndividualId u) const { return rank_[u]; }
  double birth_time(IndividualId u) const { return birth_[u]; }
  std::uint32_t children_count(IndividualId u) const { return children_[u]; }
  double clock() const { return clock_; }
  std::span<const IndividualId> parents() const { return parent_; }

  /// Appends the next child of `p`, born at `time` (not before p's birth).
  IndividualId add_child(IndividualId p, double time);
  void set_clock(double t) { clock_ = t; }

  std::vector<std::uint32_t> ulam_label(IndividualId u) const;
  /// "root" for the root, otherwise the dotted ranks, e.g. "1.2".
  std::string ulam_string(IndividualId u) const;

 private:
  std::vector<IndividualId> parent_;
  std::vector<std::uint32_t> rank_;
  std::vector<double> birth_;
  std::vector<std::uint32_t> children_;
  double clock_ = 0.0;
};

struct JumpEvent {
  double time;
  IndividualId newborn;
  IndividualId parent;
};
using JumpChain = std::vector<JumpEvent>;

/// Event-driven CMJ process with exponential-mixture waiting times. Each living
/// individual has exactly one pending birth: its next child arrives after an
/// Exp(F(children so far)) delay. Ties in time are broken by individual id.
class CmjProcess {
 public:
  CmjProcess(const AttachmentSpec& spec, RandomSource& rng, CmjCaps caps = {});

  const CmjPopulation& population() const { return pop_; }
  CmjPopulation release() { return std::move(pop_); }
  const JumpChain& jumps() const { return jumps_; }
  std::uint64_t events() const { return events_; }
  double next_event_time() const { return queue_.top().time; }

  /// Pops the earliest pending birth and realises it.
  const JumpEvent& advance();

  /// CapExceeded when the event or population cap would be crossed.
  void run_until_size(std::size_t n);
  /// Realises every birth with time <= t. ExplosionSuspected on hitting the population cap.
  void run_until_time(double t);

 private:
  struct Pending {
    double time;
    IndividualId who;
    bool operator>(const Pending& o) const { return time != o.time ? time > o.time : who > o.who; }
  };

  void schedule(IndividualId u, double from);

  const AttachmentSpec& spec_;
  RandomSource& rng_;
  CmjCaps caps_;
  CmjPopulation pop_;
  JumpChain jumps_;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue_;
  std::uint64_t events_ = 0;
};

struct CmjRun {
  CmjPopulation population;
  JumpChain jumps;
};

CmjRun simulate_until_size(const AttachmentSpec& spec, std::size_t n, RandomSource& rng, CmjCaps caps = {});
CmjPopulation simulate_until_time(const AttachmentSpec& spec, double t, RandomSource& rng, CmjCaps caps = {});

struct KilledSize {
  stats::MeanSe size;
  double laplace_sum;  // q, certified upper bound below 1
  double predicted;    // 1 / (1 - q) from the partial sum
  std::vector<double> sizes;
};

/// Mean of |T_Y| with Y ~ Exp(alpha) independent of the process.
/// DivergentExpectation unless the Laplace sum at alpha is certified below 1.
KilledSize killed_size(const AttachmentSpec& spec, double alpha, std::size_t replicates,
                       std::uint64_t seed, int threads = 1, CmjCaps caps = {});

/// Individuals whose Ulam-Harris coordinates are all <= K (the root counts).
std::uint64_t k_moderate_census(const CmjPopulation& pop, std::uint32_t K);

/// Discrete tree of the jump chain: node k is the k-th individual born.
GrowthTree to_growth_tree(const CmjPopulation& pop, const AttachmentSpec& spec);

void write_event_log_csv(std::ostream& os, const CmjPopulation& pop, const JumpChain& jumps);

}  // namespace hubforge
