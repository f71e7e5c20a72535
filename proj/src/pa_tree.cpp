#include "hubforge/pa_tree.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <ostream>

#include "hubforge/error.hpp"

namespace hubforge {

GrowthTree GrowthTree::from_parents(std::span<const NodeId> parents, const AttachmentSpec& spec) {
  if (parents.empty() || parents[0] != kNoParent)
    throw Error(ErrorCode::Precondition, "parent list must start with the root");
  GrowthTree t;
  t.parent_.assign(parents.begin(), parents.end());
  t.out_degree_.assign(parents.size(), 0);
  for (std::size_t v = 1; v < parents.size(); ++v) {
    if (parents[v] >= v) throw Error(ErrorCode::Precondition, "parent must precede child");
    ++t.out_degree_[parents[v]];
  }
  t.weight_.resize(parents.size());
  for (std::size_t v = 0; v < parents.size(); ++v) t.weight_[v] = spec.evaluate(t.out_degree_[v]);
  return t;
}

NodeId GrowthTree::add_root(double w) {
  parent_.assign(1, kNoParent);
  out_degree_.assign(1, 0);
  weight_.assign(1, w);
  return 0;
}

NodeId GrowthTree::attach(NodeId p, double parent_weight, double child_weight) {
  const auto child = static_cast<NodeId>(parent_.size());
  parent_.push_back(p);
  out_degree_.push_back(0);
  weight_.push_back(child_weight);
  ++out_degree_[p];
  weight_[p] = parent_weight;
  return child;
}

TreeGrower::TreeGrower(const AttachmentSpec& spec, RandomSource& rng) : spec_(spec), rng_(rng) {
  const double w = spec_.evaluate(0, &rng_);
  tree_.add_root(w);
  index_.set_weight(0, w);
}

TreeGrower::TreeGrower(const AttachmentSpec& spec, RandomSource& rng, GrowthTree start)
    : spec_(spec), rng_(rng), tree_(std::move(start)), index_(tree_.size()) {
  for (NodeId v = 0; v < tree_.size(); ++v) index_.set_weight(v, tree_.weight(v));
  index_.rebuild();
}

StepEvent TreeGrower::step() {
  const auto parent = static_cast<NodeId>(index_.sample(rng_));
  const Degree new_degree = tree_.out_degree(parent) + 1;
  const double parent_w = spec_.evaluate(new_degree, &rng_);
  const double child_w = spec_.evaluate(0, &rng_);
  const NodeId child = tree_.attach(parent, parent_w, child_w);
  index_.set_weight(parent, parent_w);
  index_.set_weight(child, child_w);
  if (index_.updates_since_rebuild() >= kRebuildInterval) index_.rebuild();
#ifndef NDEBUG
  if (!spec_.is_random()) {
    assert(tree_.weight(parent) == spec_.evaluate(tree_.out_degree(parent)));
    assert(tree_.weight(child) == spec_.evaluate(0));
  }
#endif
  const StepEvent ev{tree_.size() - 1, parent, child};
  for (auto* obs : observers_) obs->on_step(tree_, ev);
  return ev;
}

void TreeGrower::run(std::uint64_t steps) {
  for (std::uint64_t s = 0; s < steps; ++s) step();
}

GrowthTree grow(const AttachmentSpec& spec, std::uint64_t steps, RandomSource& rng,
                std::span<GrowthObserver* const> observers) {
  TreeGrower grower(spec, rng);
  for (auto* obs : observers) grower.add_observer(*obs);
  grower.run(steps);
  return grower.release();
}

std::map<Degree, std::uint64_t> degree_histogram(const GrowthTree& tree) {
  std::map<Degree, std::uint64_t> hist;
  for (Degree d : tree.out_degrees()) ++hist[d];
  return hist;
}

PartitionBound partition_bound_check(const GrowthTree& tree, const AttachmentSpec& spec, double kappa) {
  if (spec.is_random())
    throw Error(ErrorCode::UnsupportedSpec, "partition bound needs a deterministic rule");
  const auto hist = degree_histogram(tree);
  const Degree max_deg = hist.rbegin()->first;

  // log Z by log-sum-exp over degree classes.
  std::vector<double> logs;
  logs.reserve(hist.size());
  for (auto [deg, count] : hist) logs.push_back(std::log(static_cast<double>(count)) + std::log(spec.evaluate(deg)));
  const double peak = *std::max_element(logs.begin(), logs.end());
  double acc = 0.0;
  for (double l : logs) acc += std::exp(l - peak);
  const double log_lhs = peak + std::log(acc);

  const double n = static_cast<double>(tree.size());
  const double log_rhs =
      std::log(2.0 * n * kappa) + std::log(spec.evaluate(max_deg)) - std::log(max_deg + 1.0);
  return {log_lhs <= log_rhs, std::exp(log_lhs), std::exp(log_rhs), log_lhs, log_rhs};
}

void write_tree_csv(std::ostream& os, const GrowthTree& tree) {
  os << "child,parent,birth_index,out_degree_final\n";
  for (NodeId v = 1; v < tree.size(); ++v)
    os << v << ',' << tree.parent(v) << ',' << tree.birth_index(v) << ',' << tree.out_degree(v) << '\n';
}

}  // namespace hubforge
