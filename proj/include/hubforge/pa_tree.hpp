#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "hubforge/attachment.hpp"
#include "hubforge/rng.hpp"
#include "hubforge/weighted_index.hpp"

namespace hubforge {

/// Node identity is the birth index: the root is 0, the k-th arrival is k.
using NodeId = std::uint32_t;
inline constexpr NodeId kNoParent = std::numeric_limits<NodeId>::max();

/// Rooted tree grown one leaf at a time.
class GrowthTree {
 public:
  GrowthTree() = default;

  /// Builds a tree from a parent list (parents[0] must be kNoParent and
  /// parents[k] < k). Weights are f(out_degree) for the given deterministic rule.
  static GrowthTree from_parents(std::span<const NodeId> parents, const AttachmentSpec& spec);

  std::size_t size() const { return parent_.size(); }
  NodeId parent(NodeId v) const { return parent_[v]; }
  Degree out_degree(NodeId v) const { return out_degree_[v]; }
  double weight(NodeId v) const { return weight_[v]; }
  std::uint64_t birth_index(NodeId v) const { return v; }

  std::span<const NodeId> parents() const { return parent_; }
  std::span<const Degree> out_degrees() const { return out_degree_; }
  std::span<const double> weights() const { return weight_; }

  NodeId add_root(double w);
  /// Appends a child of `p`; `parent_weight` is the parent's weight at its new degree.
  NodeId attach(NodeId p, double parent_weight, double child_weight);

 private:
  std::vector<NodeId> parent_;
  std::vector<Degree> out_degree_;
  std::vector<double> weight_;
};

struct StepEvent {
  std::uint64_t step;  // 1-based; after step s the tree has s + 1 nodes
  NodeId parent;
  NodeId child;
};

class GrowthObserver {
 public:
  virtual ~GrowthObserver() = default;
  virtual void on_step(const GrowthTree& tree, const StepEvent& event) = 0;
};

/// Incremental driver for the discrete attachment dynamics: each step samples a
/// parent with probability weight/total, attaches a new node, and refreshes the
/// weights of the parent (at its new degree) and the newborn (at degree 0).
/// Random rules draw each F value once, when the degree is reached.
class TreeGrower {
 public:
  /// Rebuild cadence of the prefix-sum structure (updates).
  static constexpr std::uint64_t kRebuildInterval = std::uint64_t{1} << 20;

  TreeGrower(const AttachmentSpec& spec, RandomSource& rng);
  /// Continues from an existing tree, keeping its stored weights.
  TreeGrower(const AttachmentSpec& spec, RandomSource& rng, GrowthTree start);

  void add_observer(GrowthObserver& obs) { observers_.push_back(&obs); }

  StepEvent step();
  void run(std::uint64_t steps);

  const GrowthTree& tree() const { return tree_; }
  GrowthTree release() { return std::move(tree_); }
  const DynamicWeightedIndex& index() const { return index_; }
  std::uint64_t steps_done() const { return tree_.size() - 1; }

 private:
  const AttachmentSpec& spec_;
  RandomSource& rng_;
  GrowthTree tree_;
  DynamicWeightedIndex index_;
  std::vector<GrowthObserver*> observers_;
};

/// Grows `steps` rounds from the single root node.
GrowthTree grow(const AttachmentSpec& spec, std::uint64_t steps, RandomSource& rng,
                std::span<GrowthObserver* const> observers = {});

/// N_k: number of nodes of out-degree k.
std::map<Degree, std::uint64_t> degree_histogram(const GrowthTree& tree);

struct PartitionBound {
  bool holds;
  double lhs;  // Z = sum_v f(out_degree(v))
  double rhs;  // 2 n kappa f(M) / (M + 1), n = node count, M = max out-degree
  double log_lhs;
  double log_rhs;
};

/// Evaluates the handshake bound on the total attachment weight of a concrete
/// tree; the comparison is done in log space so superlinear rules cannot overflow.
PartitionBound partition_bound_check(const GrowthTree& tree, const AttachmentSpec& spec, double kappa);

/// Edge list `child,parent,birth_index,out_degree_final`, one row per non-root node.
void write_tree_csv(std::ostream& os, const GrowthTree& tree);

}  // namespace hubforge
