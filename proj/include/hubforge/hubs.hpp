#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "hubforge/attachment.hpp"
#include "hubforge/pa_tree.hpp"
#include "hubforge/stats.hpp"

namespace hubforge {

/// Maximal out-degree holder with the smallest birth index.
NodeId leader_of(const GrowthTree& tree);

struct LeaderCheckpoint {
  std::uint64_t step;
  NodeId leader;
  Degree max_degree;
  std::uint64_t switches;  // switches so far
};

struct LeaderTrace {
  std::vector<std::pair<std::uint64_t, NodeId>> switches;  // (step, new leader)
  NodeId leader = 0;
  Degree max_degree = 0;
  std::uint64_t last_switch_step = 0;
  std::vector<LeaderCheckpoint> checkpoints;
};

/// O(1) per step. Only the parent's degree changes in a step, so the leader can
/// only move to that parent.
class LeaderTracker : public GrowthObserver {
 public:
  /// `checkpoints` are step counts (a tree after s steps has s + 1 nodes).
  explicit LeaderTracker(std::vector<std::uint64_t> checkpoints = {});

  /// Re-seeds the state from an existing tree; steps counted from tree.size() - 1.
  void reset(const GrowthTree& tree);
  void on_step(const GrowthTree& tree, const StepEvent& event) override;

  const LeaderTrace& trace() const { return trace_; }
  NodeId leader() const { return trace_.leader; }
  Degree max_degree() const { return trace_.max_degree; }

 private:
  void record(std::uint64_t step);

  std::vector<std::uint64_t> checkpoints_;
  std::size_t next_checkpoint_ = 0;
  LeaderTrace trace_;
};

struct PersistenceRow {
  std::uint64_t replicate;
  LeaderCheckpoint checkpoint;
};

struct PersistenceSummary {
  std::uint64_t checkpoint;
  double stabilization;  // leader at checkpoint == leader at n_max
  double window_switch;  // >= 1 switch in (checkpoint, next checkpoint]
};

struct PersistenceResult {
  std::vector<PersistenceRow> rows;  // replicate-major, n_max last per replicate
  std::vector<PersistenceSummary> summary;
};

PersistenceResult persistence_experiment(const AttachmentSpec& spec, std::vector<std::uint64_t> checkpoints,
                                         std::uint64_t n_max, std::size_t replicates, std::uint64_t seed,
                                         int threads = 1);

void write_persistence_csv(std::ostream& os, const PersistenceResult& result);

/// Nodes that, for every ancestor a, had out-degree >= deg(a) at one of their
/// own degree increments. The root counts vacuously.
std::uint64_t catch_up_count(const AttachmentSpec& spec, std::uint64_t steps, RandomSource& rng);

struct CatchUpCensus {
  std::vector<std::uint64_t> counts;  // per replicate
  double median = 0.0;
  stats::MeanSe mean;
};

CatchUpCensus catch_up_census(const AttachmentSpec& spec, std::uint64_t steps, std::size_t replicates,
                              std::uint64_t seed, int threads = 1);

struct OvertakeResult {
  std::uint64_t successes = 0;
  std::size_t replicates = 0;
  double probability = 0.0;
  double standard_error = 0.0;
  double bound = 0.0;
  double log_bound = 0.0;
};

struct OvertakeOptions {
  std::uint64_t horizon = 2000;       // j range of a simulated race
  std::size_t truncation = 1'000'000; // terms of the moment product before the tail bound
};

/// Two racing birth sequences: the challenger starts fresh after a delay y, the
/// incumbent already has k - 1 children. Counts races with some j >= 1 where
/// y + sum_{i<=k+j} X_i <= sum_{i=k}^{k+j} X'_i, and returns the maximal bound
///   prod_{i>=k} E e^{lambda (X'_i - X_i)} * e^{-lambda y} * prod_{i<k} E e^{-lambda X_i}.
OvertakeResult overtake_probability(const AttachmentSpec& spec, std::uint64_t k, double lambda, double y,
                                    std::size_t replicates, std::uint64_t seed, int threads = 1,
                                    OvertakeOptions options = {});

/// The bound alone, in log space. DivergentMoment when the product is not finite.
double overtake_log_bound(const AttachmentSpec& spec, std::uint64_t k, double lambda, double y,
                          std::size_t truncation = 1'000'000);

enum class PhiStatus { Reached, NotReached, Undetermined };
const char* to_string(PhiStatus s);

struct PhiEstimate {
  PhiStatus status = PhiStatus::Undetermined;
  std::optional<std::uint64_t> phi;
  double probability = 0.0;  // at phi, or at max_horizon
  stats::Interval interval{0.0, 1.0};
  std::size_t replicates = 0;
};

/// Smallest n with P(exists k <= n: sum_{l<=k} X(ujl) < sum_{l=j+1}^{k} X(ul)) >= 1/2.
PhiEstimate estimate_phi(const AttachmentSpec& spec, std::uint64_t j, std::uint64_t max_horizon,
                         std::size_t replicates, std::uint64_t seed, int threads = 1);

struct Snapshot {
  std::uint64_t nodes;
  Degree max_degree;
  double leader_share;  // probability the next parent has degree M
  double expectation;   // E[1/M_{n+1} | T_n]
  double standard_error;
  double bound;         // (1/M)(1 - 1/(2 n kappa)), n = node count
  bool exact;
  bool holds;
};

/// E[1/M_{n+1} | T_n] for a frozen tree by summing over every candidate parent.
double next_inverse_max_exact(const GrowthTree& tree, const AttachmentSpec& spec);

/// Same quantity from `continuations` independent single steps.
stats::MeanSe next_inverse_max_sampled(const GrowthTree& tree, const AttachmentSpec& spec,
                                       std::size_t continuations, RandomSource& rng);

inline constexpr std::uint64_t kExactEnumerationLimit = 10'000;

struct SupermartingaleOptions {
  std::size_t snapshots = 100;
  std::uint64_t min_nodes = 2;
  std::uint64_t max_nodes = 10'000;
  std::size_t continuations = 100'000;  // only above kExactEnumerationLimit
};

std::vector<Snapshot> supermartingale_check(const AttachmentSpec& spec, double kappa,
                                            const SupermartingaleOptions& options, std::uint64_t seed,
                                            int threads = 1);

struct MaxGrowth {
  double c_min;     // inf_n n^{-a} Gamma(n) Gamma(2-a) / Gamma(n-a), a = 1/(2 kappa)
  double r;         // eps * c_min
  double fraction;  // replicates with min_n M_n n^{-a} >= r
  stats::Interval interval;
  std::size_t replicates;
};

MaxGrowth max_growth_check(const AttachmentSpec& spec, double kappa, std::uint64_t steps, double eps,
                           std::size_t replicates, std::uint64_t seed, int threads = 1);

/// Finite-horizon stand-in for the win event: deg(u) >= deg(v) at every step in
/// [from_step, steps]. No finite run decides the event itself.
double win_surrogate(const AttachmentSpec& spec, NodeId u, NodeId v, std::uint64_t from_step,
                     std::uint64_t steps, std::size_t replicates, std::uint64_t seed, int threads = 1);

}  // namespace hubforge
