#include "hubforge/hubs.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "hubforge/criteria.hpp"
#include "hubforge/error.hpp"
#include "hubforge/parallel.hpp"

namespace hubforge {

NodeId leader_of(const GrowthTree& tree) {
  NodeId best = 0;
  for (NodeId v = 1; v < tree.size(); ++v)
    if (tree.out_degree(v) > tree.out_degree(best)) best = v;
  return best;
}

LeaderTracker::LeaderTracker(std::vector<std::uint64_t> checkpoints) : checkpoints_(std::move(checkpoints)) {
  std::sort(checkpoints_.begin(), checkpoints_.end());
  checkpoints_.erase(std::unique(checkpoints_.begin(), checkpoints_.end()), checkpoints_.end());
  record(0);
}

void LeaderTracker::reset(const GrowthTree& tree) {
  trace_ = {};
  trace_.leader = leader_of(tree);
  trace_.max_degree = tree.out_degree(trace_.leader);
  next_checkpoint_ = 0;
  record(tree.size() - 1);
}

void LeaderTracker::record(std::uint64_t step) {
  while (next_checkpoint_ < checkpoints_.size() && checkpoints_[next_checkpoint_] <= step) {
    if (checkpoints_[next_checkpoint_] == step)
      trace_.checkpoints.push_back({step, trace_.leader, trace_.max_degree, trace_.switches.size()});
    ++next_checkpoint_;
  }
}

void LeaderTracker::on_step(const GrowthTree& tree, const StepEvent& ev) {
  const Degree d = tree.out_degree(ev.parent);
  bool moved = false;
  if (d > trace_.max_degree) {
    trace_.max_degree = d;
    moved = ev.parent != trace_.leader;
  } else if (d == trace_.max_degree && ev.parent < trace_.leader) {
    moved = true;
  }
  if (moved) {
    trace_.leader = ev.parent;
    trace_.switches.emplace_back(ev.step, ev.parent);
    trace_.last_switch_step = ev.step;
  }
  record(ev.step);
}

PersistenceResult persistence_experiment(const AttachmentSpec& spec, std::vector<std::uint64_t> checkpoints,
                                         std::uint64_t n_max, std::size_t replicates, std::uint64_t seed,
                                         int threads) {
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  if (!checkpoints.empty() && checkpoints.back() >= n_max)
    throw Error(ErrorCode::Precondition, "checkpoints must be below n_max");
  auto all = checkpoints;
  all.push_back(n_max);

  const auto traces = run_replicates<std::vector<LeaderCheckpoint>>(replicates, threads, [&](std::size_t r) {
    RandomSource rng(derive_seed(seed, r));
    LeaderTracker tracker(all);
    TreeGrower grower(spec, rng);
    grower.add_observer(tracker);
    grower.run(n_max);
    return tracker.trace().checkpoints;
  });

  PersistenceResult out;
  for (std::size_t r = 0; r < replicates; ++r)
    for (const auto& cp : traces[r]) out.rows.push_back({r, cp});
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    std::size_t same = 0, moved = 0;
    for (const auto& t : traces) {
      same += t[c].leader == t.back().leader;
      moved += t[c + 1].switches > t[c].switches;
    }
    const double n = replicates ? static_cast<double>(replicates) : 1.0;
    out.summary.push_back({checkpoints[c], same / n, moved / n});
  }
  return out;
}

void write_persistence_csv(std::ostream& os, const PersistenceResult& result) {
  os << "replicate,checkpoint,leader,max_degree,switches\n";
  for (const auto& row : result.rows)
    os << row.replicate << ',' << row.checkpoint.step << ',' << row.checkpoint.leader << ','
       << row.checkpoint.max_degree << ',' << row.checkpoint.switches << '\n';
}

namespace {

class CatchUpObserver : public GrowthObserver {
 public:
  void on_step(const GrowthTree& tree, const StepEvent& ev) override {
    const NodeId u = ev.parent;
    if (u >= started_.size()) {
      started_.resize(tree.size(), 0);
      pending_.resize(tree.size());
    }
    const Degree d = tree.out_degree(u);
    auto& list = pending_[u];
    if (!started_[u]) {
      started_[u] = 1;
      for (NodeId a = tree.parent(u); a != kNoParent; a = tree.parent(a))
        if (tree.out_degree(a) > d) list.push_back(a);
    } else {
      std::erase_if(list, [&](NodeId a) { return tree.out_degree(a) <= d; });
    }
  }

  std::uint64_t count() const {
    std::uint64_t c = 1;
    for (NodeId u = 1; u < started_.size(); ++u) c += started_[u] && pending_[u].empty();
    return c;
  }

 private:
  std::vector<char> started_;
  std::vector<std::vector<NodeId>> pending_;
};

}  // namespace

std::uint64_t catch_up_count(const AttachmentSpec& spec, std::uint64_t steps, RandomSource& rng) {
  CatchUpObserver obs;
  TreeGrower grower(spec, rng);
  grower.add_observer(obs);
  grower.run(steps);
  return obs.count();
}

CatchUpCensus catch_up_census(const AttachmentSpec& spec, std::uint64_t steps, std::size_t replicates,
                              std::uint64_t seed, int threads) {
  CatchUpCensus out;
  out.counts = run_replicates<std::uint64_t>(replicates, threads, [&](std::size_t r) {
    RandomSource rng(derive_seed(seed, r));
    return catch_up_count(spec, steps, rng);
  });
  std::vector<double> xs(out.counts.begin(), out.counts.end());
  out.mean = stats::mean_se(xs);
  out.median = stats::median(std::move(xs));
  return out;
}

namespace {

// Waiting-time sampler over degrees 0..n; deterministic rates are tabulated once.
class RateTable {
 public:
  RateTable(const AttachmentSpec& spec, std::uint64_t n) : spec_(spec) {
    if (spec.is_random()) return;
    inv_.resize(n + 1);
    for (std::uint64_t d = 0; d <= n; ++d) inv_[d] = 1.0 / spec.evaluate(static_cast<Degree>(d));
  }
  double wait(std::uint64_t d, RandomSource& rng) const {
    if (d < inv_.size()) return -std::log1p(-rng.uniform()) * inv_[d];
    return rng.exponential(spec_.evaluate(static_cast<Degree>(d), &rng));
  }

 private:
  const AttachmentSpec& spec_;
  std::vector<double> inv_;
};

}  // namespace

double overtake_log_bound(const AttachmentSpec& spec, std::uint64_t k, double lambda, double y,
                          std::size_t truncation) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::Precondition, "lambda must be positive");
  if (!(y >= 0.0)) throw Error(ErrorCode::Precondition, "y must be non-negative");
  if (k < 1) throw Error(ErrorCode::Precondition, "k must be at least 1");

  double log_bound = -lambda * y;
  for (std::uint64_t i = 1; i < k; ++i)
    log_bound += spec.log_laplace_factor(static_cast<Degree>(i - 1), lambda);

  const auto isq = criteria::inverse_square_sum(spec, truncation);
  const auto env = spec.lower_envelope_law();
  if (!isq.certified || isq.verdict != criteria::SeriesVerdict::Converges || !env || env->is_bounded())
    throw Error(ErrorCode::DivergentMoment, "moment product is not certified finite");
  const std::size_t n = isq.truncation;
  const double x_next = (*env)(static_cast<double>(n + 1));
  const double z = lambda * lambda / (x_next * x_next);
  if (z > 0.5) throw Error(ErrorCode::DivergentMoment, "truncation too short for the tail bound");

  for (std::size_t d = k - 1; d <= n; ++d)
    log_bound += spec.log_symmetric_diff_moment(static_cast<Degree>(d), lambda);
  // -log(1 - z) <= z / (1 - z) per term when deterministic; 4 z for mixtures.
  const double per = spec.is_random() ? 4.0 * lambda * lambda : lambda * lambda / (1.0 - z);
  return log_bound + per * isq.tail_upper;
}

OvertakeResult overtake_probability(const AttachmentSpec& spec, std::uint64_t k, double lambda, double y,
                                    std::size_t replicates, std::uint64_t seed, int threads,
                                    OvertakeOptions options) {
  OvertakeResult out;
  out.log_bound = overtake_log_bound(spec, k, lambda, y, options.truncation);
  out.bound = std::exp(out.log_bound);
  out.replicates = replicates;

  const RateTable rates(spec, k + options.horizon);
  const auto hits = run_replicates<char>(replicates, threads, [&](std::size_t r) -> char {
    RandomSource rng(derive_seed(seed, r));
    double challenger = y, incumbent = 0.0;
    for (std::uint64_t i = 1; i < k; ++i) challenger += rates.wait(i - 1, rng);
    for (std::uint64_t j = 0; j <= options.horizon; ++j) {
      const std::uint64_t d = k + j - 1;
      challenger += rates.wait(d, rng);
      incumbent += rates.wait(d, rng);
      if (j >= 1 && challenger <= incumbent) return 1;
    }
    return 0;
  });
  for (char h : hits) out.successes += h;
  if (replicates > 0) {
    const double n = static_cast<double>(replicates);
    out.probability = static_cast<double>(out.successes) / n;
    out.standard_error = std::sqrt(out.probability * (1.0 - out.probability) / n);
  }
  return out;
}

const char* to_string(PhiStatus s) {
  switch (s) {
    case PhiStatus::Reached: return "reached";
    case PhiStatus::NotReached: return "not-reached";
    case PhiStatus::Undetermined: return "undetermined";
  }
  return "undetermined";
}

PhiEstimate estimate_phi(const AttachmentSpec& spec, std::uint64_t j, std::uint64_t max_horizon,
                         std::size_t replicates, std::uint64_t seed, int threads) {
  if (j < 1) throw Error(ErrorCode::Precondition, "child rank must be at least 1");
  if (replicates == 0) throw Error(ErrorCode::Precondition, "need at least one replicate");

  const RateTable rates(spec, max_horizon);
  // First k at which the child's k-th birth precedes the parent's k-th birth; 0 if none.
  const auto first = run_replicates<std::uint64_t>(replicates, threads, [&](std::size_t r) -> std::uint64_t {
    RandomSource rng(derive_seed(seed, r));
    double child = 0.0, parent = 0.0;
    for (std::uint64_t k = 1; k <= max_horizon; ++k) {
      child += rates.wait(k - 1, rng);
      if (k > j) {
        parent += rates.wait(k - 1, rng);
        if (child < parent) return k;
      }
    }
    return 0;
  });

  std::vector<std::uint64_t> hits;
  for (auto k : first)
    if (k) hits.push_back(k);
  std::sort(hits.begin(), hits.end());

  PhiEstimate out;
  out.replicates = replicates;
  const std::size_t need = (replicates + 1) / 2;
  if (hits.size() >= need) {
    const std::uint64_t phi = hits[need - 1];
    const auto upto = static_cast<std::uint64_t>(std::upper_bound(hits.begin(), hits.end(), phi) - hits.begin());
    out.status = PhiStatus::Reached;
    out.phi = phi;
    out.probability = static_cast<double>(upto) / static_cast<double>(replicates);
    out.interval = stats::wilson_interval(upto, replicates);
    return out;
  }
  out.probability = static_cast<double>(hits.size()) / static_cast<double>(replicates);
  out.interval = stats::wilson_interval(hits.size(), replicates);
  out.status = out.interval.upper < 0.5 ? PhiStatus::NotReached : PhiStatus::Undetermined;
  return out;
}

double next_inverse_max_exact(const GrowthTree& tree, const AttachmentSpec&) {
  Degree M = 0;
  double wmax = 0.0;
  for (NodeId v = 0; v < tree.size(); ++v) {
    M = std::max(M, tree.out_degree(v));
    wmax = std::max(wmax, tree.weight(v));
  }
  if (M == 0) throw Error(ErrorCode::Precondition, "snapshot needs at least two nodes");
  double z = 0.0, acc = 0.0;
  const double up = 1.0 / M, grow = 1.0 / (M + 1.0);
  for (NodeId v = 0; v < tree.size(); ++v) {
    const double w = tree.weight(v) / wmax;
    z += w;
    acc += w * (tree.out_degree(v) == M ? grow : up);
  }
  return acc / z;
}

stats::MeanSe next_inverse_max_sampled(const GrowthTree& tree, const AttachmentSpec&, std::size_t continuations,
                                       RandomSource& rng) {
  Degree M = 0;
  DynamicWeightedIndex index(tree.size());
  for (NodeId v = 0; v < tree.size(); ++v) {
    M = std::max(M, tree.out_degree(v));
    index.set_weight(v, tree.weight(v));
  }
  if (M == 0) throw Error(ErrorCode::Precondition, "snapshot needs at least two nodes");
  std::vector<double> xs(continuations);
  for (auto& x : xs) {
    const auto v = static_cast<NodeId>(index.sample(rng));
    x = tree.out_degree(v) == M ? 1.0 / (M + 1.0) : 1.0 / M;
  }
  return stats::mean_se(xs);
}

std::vector<Snapshot> supermartingale_check(const AttachmentSpec& spec, double kappa,
                                            const SupermartingaleOptions& options, std::uint64_t seed,
                                            int threads) {
  if (spec.is_random()) throw Error(ErrorCode::UnsupportedSpec, "supermartingale check needs a deterministic rule");
  if (!(kappa >= 1.0)) throw Error(ErrorCode::Precondition, "kappa must be at least 1");
  if (options.min_nodes < 2 || options.max_nodes < options.min_nodes)
    throw Error(ErrorCode::Precondition, "snapshot sizes need 2 <= min_nodes <= max_nodes");

  return run_replicates<Snapshot>(options.snapshots, threads, [&](std::size_t s) {
    RandomSource rng(derive_seed(seed, s));
    const std::uint64_t span = options.max_nodes - options.min_nodes + 1;
    const std::uint64_t n = options.min_nodes + rng.next_u64() % span;
    const GrowthTree tree = grow(spec, n - 1, rng);

    Snapshot snap{};
    snap.nodes = n;
    Degree M = 0;
    for (Degree d : tree.out_degrees()) M = std::max(M, d);
    snap.max_degree = M;
    double z = 0.0, top = 0.0;
    for (NodeId v = 0; v < tree.size(); ++v) {
      z += tree.weight(v);
      if (tree.out_degree(v) == M) top += tree.weight(v);
    }
    snap.leader_share = top / z;
    snap.bound = (1.0 / M) * (1.0 - 1.0 / (2.0 * static_cast<double>(n) * kappa));
    if (n <= kExactEnumerationLimit) {
      snap.exact = true;
      snap.expectation = next_inverse_max_exact(tree, spec);
      snap.holds = snap.expectation <= snap.bound * (1.0 + 1e-12);
    } else {
      const auto est = next_inverse_max_sampled(tree, spec, options.continuations, rng);
      snap.expectation = est.mean;
      snap.standard_error = est.standard_error;
      snap.holds = snap.expectation <= snap.bound + 3.0 * snap.standard_error;
    }
    return snap;
  });
}

namespace {

class MinScaledMax : public GrowthObserver {
 public:
  explicit MinScaledMax(double a) : a_(a) {}
  void on_step(const GrowthTree& tree, const StepEvent& ev) override {
    max_ = std::max(max_, tree.out_degree(ev.parent));
    const double n = static_cast<double>(tree.size());
    min_ = std::min(min_, max_ * std::pow(n, -a_));
  }
  double value() const { return min_; }

 private:
  double a_;
  Degree max_ = 0;
  double min_ = std::numeric_limits<double>::infinity();
};

}  // namespace

MaxGrowth max_growth_check(const AttachmentSpec& spec, double kappa, std::uint64_t steps, double eps,
                           std::size_t replicates, std::uint64_t seed, int threads) {
  if (!(kappa >= 1.0)) throw Error(ErrorCode::Precondition, "kappa must be at least 1");
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::Precondition, "eps must lie in (0, 1)");
  if (replicates == 0) throw Error(ErrorCode::Precondition, "need at least one replicate");
  const double a = 1.0 / (2.0 * kappa);

  MaxGrowth out{};
  out.c_min = std::tgamma(2.0 - a);
  const double lg = std::lgamma(2.0 - a);
  for (std::uint64_t n = 2; n <= steps + 1; ++n) {
    const double dn = static_cast<double>(n);
    out.c_min = std::min(out.c_min, std::exp(-a * std::log(dn) + std::lgamma(dn) + lg - std::lgamma(dn - a)));
  }
  out.r = eps * out.c_min;
  out.replicates = replicates;

  const auto mins = run_replicates<double>(replicates, threads, [&](std::size_t r) {
    RandomSource rng(derive_seed(seed, r));
    MinScaledMax obs(a);
    TreeGrower grower(spec, rng);
    grower.add_observer(obs);
    grower.run(steps);
    return obs.value();
  });
  std::uint64_t ok = 0;
  for (double m : mins) ok += m >= out.r;
  out.fraction = static_cast<double>(ok) / static_cast<double>(replicates);
  out.interval = stats::wilson_interval(ok, replicates);
  return out;
}

namespace {

class DominanceWatch : public GrowthObserver {
 public:
  DominanceWatch(NodeId u, NodeId v, std::uint64_t from) : u_(u), v_(v), from_(from) {}
  void on_step(const GrowthTree& tree, const StepEvent& ev) override {
    if (ev.step >= from_ && tree.out_degree(u_) < tree.out_degree(v_)) held_ = false;
  }
  bool held() const { return held_; }

 private:
  NodeId u_, v_;
  std::uint64_t from_;
  bool held_ = true;
};

}  // namespace

double win_surrogate(const AttachmentSpec& spec, NodeId u, NodeId v, std::uint64_t from_step,
                     std::uint64_t steps, std::size_t replicates, std::uint64_t seed, int threads) {
  if (std::max(u, v) > from_step || from_step > steps || from_step == 0)
    throw Error(ErrorCode::Precondition, "both nodes must exist at from_step, with 1 <= from_step <= steps");
  if (replicates == 0) throw Error(ErrorCode::Precondition, "need at least one replicate");
  const auto held = run_replicates<char>(replicates, threads, [&](std::size_t r) -> char {
    RandomSource rng(derive_seed(seed, r));
    DominanceWatch watch(u, v, from_step);
    TreeGrower grower(spec, rng);
    grower.add_observer(watch);
    grower.run(steps);
    return watch.held();
  });
  std::size_t count = 0;
  for (char h : held) count += h;
  return static_cast<double>(count) / static_cast<double>(replicates);
}

}  // namespace hubforge
