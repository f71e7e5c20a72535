#include "hubforge/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "hubforge/cmj.hpp"
#include "hubforge/criteria.hpp"
#include "hubforge/error.hpp"
#include "hubforge/hubs.hpp"
#include "hubforge/parallel.hpp"
#include "hubforge/spec_text.hpp"

namespace hubforge::cli {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<ConfigEntry> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open config file '" + path + "'");
  std::vector<ConfigEntry> out;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::Config, path + ":" + std::to_string(n) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key.empty()) throw Error(ErrorCode::Config, path + ":" + std::to_string(n) + ": empty key");
    for (const auto& e : out)
      if (e.key == key)
        throw Error(ErrorCode::Config, path + ":" + std::to_string(n) + ": field '" + key +
                                           "' already set on line " + std::to_string(e.line));
    out.push_back({key, value, n});
  }
  return out;
}

EmbedCheck embed_check(const AttachmentSpec& spec, std::size_t nodes, std::size_t replicates,
                       std::uint64_t seed, int threads) {
  if (nodes < 2) throw Error(ErrorCode::Precondition, "embed-check needs at least two nodes");
  EmbedCheck out;
  if (nodes == 2) {
    out.skipped = true;
    out.note = "both laws are degenerate at two nodes (root degree 1, leader 0)";
    return out;
  }
  struct Pair {
    std::uint32_t tree_root, tree_leader, cmj_root, cmj_leader;
  };
  const auto pairs = run_replicates<Pair>(replicates, threads, [&](std::size_t r) {
    RandomSource a(derive_seed(seed, 2 * r));
    const GrowthTree t = grow(spec, nodes - 1, a);
    RandomSource b(derive_seed(seed, 2 * r + 1));
    const CmjPopulation pop = simulate_until_size(spec, nodes, b).population;
    IndividualId lead = 0;
    for (IndividualId u = 1; u < pop.size(); ++u)
      if (pop.children_count(u) > pop.children_count(lead)) lead = u;
    return Pair{t.out_degree(0), leader_of(t), pop.children_count(0), lead};
  });
  for (auto* h : {&out.tree_root_hist, &out.cmj_root_hist, &out.tree_leader_hist, &out.cmj_leader_hist})
    h->assign(nodes, 0);
  for (const auto& p : pairs) {
    ++out.tree_root_hist[p.tree_root];
    ++out.cmj_root_hist[p.cmj_root];
    ++out.tree_leader_hist[p.tree_leader];
    ++out.cmj_leader_hist[p.cmj_leader];
  }
  out.root_degree = stats::chi_square_two_sample(out.tree_root_hist, out.cmj_root_hist);
  out.leader = stats::chi_square_two_sample(out.tree_leader_hist, out.cmj_leader_hist);
  return out;
}

namespace {

struct Options {
  std::string spec;
  std::string config;
  std::string out;
  std::uint64_t seed = 1;
  int threads = 1;
  std::size_t replicates = 1000;
  bool json = false;

  std::uint64_t steps = 1000;
  std::size_t size = 100;
  double time = -1.0;
  std::uint64_t max_events = CmjCaps{}.max_events;
  std::uint64_t max_individuals = CmjCaps{}.max_individuals;
  double alpha = 2.0;
  std::string checkpoints = "1000";
  std::uint64_t n_max = 10000;
  std::uint64_t k = 3;
  double lambda = 1.0;
  double y = 0.0;
  std::uint64_t horizon = 2000;
  std::uint64_t j = 1;
  std::uint64_t max_horizon = 10000;
  std::size_t snapshots = 100;
  std::uint64_t min_nodes = 2;
  std::uint64_t max_nodes = 10000;
  std::size_t continuations = 100000;
  double kappa = 0.0;
  std::size_t truncation = criteria::kDefaultTruncation;
  std::size_t nodes = 50;
};

// Output sink: --out path, "-" for the console, empty for none.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& console) {
    if (path.empty()) return;
    if (path == "-") {
      os_ = &console;
      return;
    }
    file_.open(path, std::ios::binary);
    if (!file_) throw Error(ErrorCode::Config, "cannot write '" + path + "'");
    os_ = &file_;
  }
  explicit operator bool() const { return os_ != nullptr; }
  std::ostream& operator*() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_ = nullptr;
};

std::vector<std::uint64_t> parse_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::Config, "checkpoints: '" + item + "' is not a count");
    }
  }
  return out;
}

int cmd_grow(const Options& o, const AttachmentSpec& spec, std::ostream& out) {
  RandomSource rng(derive_seed(o.seed, 0));
  LeaderTracker tracker;
  TreeGrower grower(spec, rng);
  grower.add_observer(tracker);
  grower.run(o.steps);
  const auto& tree = grower.tree();
  const auto& tr = tracker.trace();
  if (Sink s(o.out, out); s) write_tree_csv(*s, tree);
  if (o.json) {
    json sw = json::array();
    for (auto [step, who] : tr.switches) sw.push_back({step, who});
    out << json{{"nodes", tree.size()},
                {"leader", tr.leader},
                {"max_degree", tr.max_degree},
                {"last_switch_step", tr.last_switch_step},
                {"switches", sw}}
               .dump(2)
        << '\n';
  } else {
    out << "grow: nodes=" << tree.size() << " leader=" << tr.leader << " max_degree=" << tr.max_degree
        << " switches=" << tr.switches.size() << " last_switch_step=" << tr.last_switch_step << '\n';
  }
  return 0;
}

int cmd_cmj(const Options& o, const AttachmentSpec& spec, std::ostream& out) {
  RandomSource rng(derive_seed(o.seed, 0));
  CmjProcess proc(spec, rng, {o.max_events, o.max_individuals});
  if (o.time >= 0.0)
    proc.run_until_time(o.time);
  else
    proc.run_until_size(o.size);
  const auto& pop = proc.population();
  if (Sink s(o.out, out); s) write_event_log_csv(*s, pop, proc.jumps());
  if (o.json) {
    out << json{{"individuals", pop.size()}, {"clock", pop.clock()}, {"events", proc.events()},
                {"root_children", pop.children_count(0)}}
               .dump(2)
        << '\n';
  } else {
    out << "cmj: individuals=" << pop.size() << " clock=" << fmt(pop.clock()) << " events=" << proc.events()
        << '\n';
  }
  return 0;
}

int cmd_killed(const Options& o, const AttachmentSpec& spec, std::ostream& out) {
  const auto res = killed_size(spec, o.alpha, o.replicates, o.seed, o.threads, {o.max_events, o.max_individuals});
  if (Sink s(o.out, out); s) {
    *s << "replicate,size\n";
    for (std::size_t r = 0; r < res.sizes.size(); ++r) *s << r << ',' << fmt(res.sizes[r]) << '\n';
  }
  if (o.json) {
    out << json{{"mean", res.size.mean},
                {"standard_error", res.size.standard_error},
                {"replicates", res.size.count},
                {"laplace_sum", res.laplace_sum},
                {"predicted", res.predicted}}
               .dump(2)
        << '\n';
  } else {
    out << "killed-size: mean=" << fmt(res.size.mean) << " se=" << fmt(res.size.standard_error)
        << " predicted=" << fmt(res.predicted) << " replicates=" << res.size.count << '\n';
  }
  return 0;
}

int cmd_persistence(const Options& o, const AttachmentSpec& spec, std::ostream& out) {
  const auto res = persistence_experiment(spec, parse_list(o.checkpoints), o.n_max, o.replicates, o.seed, o.threads);
  if (Sink s(o.out, out); s) write_persistence_csv(*s, res);
  if (o.json) {
    json rows = json::array();
    for (const auto& c : res.summary)
      rows.push_back({{"checkpoint", c.checkpoint}, {"stabilization", c.stabilization}, {"window_switch", c.window_switch}});
    out << json{{"n_max", o.n_max}, {"replicates", o.replicates}, {"summary", rows}}.dump(2) << '\n';
  } else {
    out << "persistence:";
    for (const auto& c : res.summary)
      out << " [c=" << c.checkpoint << " stable=" << fmt(c.stabilization) << " window_switch=" << fmt(c.window_switch)
          << ']';
    out << '\n';
  }
  return 0;
}

int cmd_catchup(const Options& o, const AttachmentSpec& spec, std::ostream& out) {
  const auto res = catch_up_census(spec, o.steps, o.replicates, o.seed, o.threads);
  if (Sink s(o.out, out); s) {
    *s << "replicate,catch_up_count\n";
    for (std::size_t r = 0; r < res.counts.size(); ++r) *s << r << ',' << res.counts[r] << '\n';
  }
  if (o.json) {
    out << json{{"median", res.median}, {"mean", res.mean.mean}, {"standard_error", res.mean.standard_error}}.dump(2)
        << '\n';
  } else {
    out << "catchup: median=" << fmt(res.median) << " mean=" << fmt(res.mean.mean) << '\n';
  }
  return 0;
}

int cmd_overtake(const Options& o, const AttachmentSpec& spec, std::ostream& out) {
  OvertakeOptions opts;
  opts.horizon = o.horizon;
  opts.truncation = o.truncation;
  const auto res = overtake_probability(spec, o.k, o.lambda, o.y, o.replicates, o.seed, o.threads, opts);
  if (Sink s(o.out, out); s) {
    *s << "k,lambda,y,replicates,successes,probability,standard_error,bound\n";
    *s << o.k << ',' << fmt(o.lambda) << ',' << fmt(o.y) << ',' << res.replicates << ',' << res.successes << ','
       << fmt(res.probability) << ',' << fmt(res.standard_error) << ',' << fmt(res.bound) << '\n';
  }
  if (o.json) {
    out << json{{"probability", res.probability},
                {"standard_error", res.standard_error},
                {"bound", res.bound},
                {"log_bound", res.log_bound},
                {"successes", res.successes}}
               .dump(2)
        << '\n';
  } else {
    out << "overtake: probability=" << fmt(res.probability) << " se=" << fmt(res.standard_error)
        << " bound=" << fmt(res.bound) << '\n';
  }
  return 0;
}

int cmd_phi(const Options& o, const AttachmentSpec& spec, std::ostream& out) {
  const auto res = estimate_phi(spec, o.j, o.max_horizon, o.replicates, o.seed, o.threads);
  const std::string phi = res.phi ? std::to_string(*res.phi) : "";
  if (Sink s(o.out, out); s) {
    *s << "j,status,phi,probability,ci_lower,ci_upper,replicates\n";
    *s << o.j << ',' << to_string(res.status) << ',' << phi << ',' << fmt(res.probability) << ','
       << fmt(res.interval.lower) << ',' << fmt(res.interval.upper) << ',' << res.replicates << '\n';
  }
  if (o.json) {
    out << json{{"status", to_string(res.status)},
                {"phi", res.phi ? json(*res.phi) : json(nullptr)},
                {"probability", res.probability},
                {"ci", {res.interval.lower, res.interval.upper}}}
               .dump(2)
        << '\n';
  } else {
    out << "phi: status=" << to_string(res.status) << " phi=" << (phi.empty() ? "-" : phi)
        << " probability=" << fmt(res.probability) << '\n';
  }
  return 0;
}

int cmd_supermartingale(const Options& o, const AttachmentSpec& spec, std::ostream& out) {
  double kappa = o.kappa;
  if (kappa <= 0.0) {
    const auto rep = criteria::kappa_of(spec, o.max_nodes);
    kappa = rep.kappa_global.value_or(rep.kappa_horizon);
  }
  SupermartingaleOptions opts;
  opts.snapshots = o.snapshots;
  opts.min_nodes = o.min_nodes;
  opts.max_nodes = o.max_nodes;
  opts.continuations = o.continuations;
  const auto snaps = supermartingale_check(spec, kappa, opts, o.seed, o.threads);
  std::size_t violations = 0;
  for (const auto& s : snaps) violations += !s.holds;
  if (Sink s(o.out, out); s) {
    *s << "snapshot,nodes,max_degree,leader_share,expectation,standard_error,bound,exact,holds\n";
    for (std::size_t i = 0; i < snaps.size(); ++i) {
      const auto& p = snaps[i];
      *s << i << ',' << p.nodes << ',' << p.max_degree << ',' << fmt(p.leader_share) << ',' << fmt(p.expectation)
         << ',' << fmt(p.standard_error) << ',' << fmt(p.bound) << ',' << p.exact << ',' << p.holds << '\n';
    }
  }
  if (o.json) {
    out << json{{"kappa", kappa}, {"snapshots", snaps.size()}, {"violations", violations}}.dump(2) << '\n';
  } else {
    out << "supermartingale: kappa=" << fmt(kappa) << " snapshots=" << snaps.size() << " violations=" << violations
        << '\n';
  }
  return 0;
}

int cmd_criteria(const Options& o, const AttachmentSpec& spec, std::ostream& out) {
  criteria::ClassifyOptions opts;
  opts.truncation = o.truncation;
  const auto report = criteria::classify(spec, opts);
  const json j = criteria::to_json(report);
  if (Sink s(o.out, out); s) *s << j.dump(2) << '\n';
  if (o.json) {
    out << j.dump(2) << '\n';
  } else {
    out << "criteria: verdict=" << criteria::to_string(report.verdict)
        << " theorem=" << criteria::to_string(report.theorem) << '\n';
  }
  return 0;
}

int cmd_embed(const Options& o, const AttachmentSpec& spec, std::ostream& out) {
  const auto res = embed_check(spec, o.nodes, o.replicates, o.seed, o.threads);
  if (Sink s(o.out, out); s) {
    *s << "statistic,bin,tree,cmj\n";
    for (std::size_t b = 0; b < res.tree_root_hist.size(); ++b)
      *s << "root_degree," << b << ',' << res.tree_root_hist[b] << ',' << res.cmj_root_hist[b] << '\n';
    for (std::size_t b = 0; b < res.tree_leader_hist.size(); ++b)
      *s << "leader," << b << ',' << res.tree_leader_hist[b] << ',' << res.cmj_leader_hist[b] << '\n';
  }
  auto chi = [](const stats::ChiSquare& c) {
    return json{{"statistic", c.statistic}, {"dof", c.dof}, {"p_value", c.p_value}};
  };
  if (o.json) {
    out << json{{"skipped", res.skipped},
                {"note", res.note},
                {"root_degree", chi(res.root_degree)},
                {"leader", chi(res.leader)}}
               .dump(2)
        << '\n';
  } else if (res.skipped) {
    out << "embed-check: skipped (" << res.note << ")\n";
  } else {
    out << "embed-check: root_degree p=" << fmt(res.root_degree.p_value) << " dof=" << res.root_degree.dof
        << " leader p=" << fmt(res.leader.p_value) << " dof=" << res.leader.dof << '\n';
  }
  return 0;
}

using Command = int (*)(const Options&, const AttachmentSpec&, std::ostream&);

void add_common(CLI::App* sub, Options& o, bool replicates) {
  sub->add_option("--spec", o.spec, "attachment rule, e.g. linear:a=1,b=1")->required();
  sub->add_option("--config", o.config, "key = value file; command-line flags take precedence");
  sub->add_option("--seed", o.seed, "master seed");
  sub->add_option("--threads", o.threads, "worker threads (0 = all; HUBFORGE_THREADS overrides)");
  sub->add_option("--out", o.out, "output file ('-' for stdout)");
  sub->add_flag("--json", o.json, "print a JSON report instead of the summary line");
  if (replicates) sub->add_option("--replicates", o.replicates, "Monte Carlo replicates");
}

// Appends config entries as flags unless the command line already sets them.
std::vector<std::string> merge_config(CLI::App& app, const std::vector<std::string>& args) {
  if (args.empty()) return args;
  CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args[0]);
  } catch (const CLI::OptionNotFound&) {
    return args;
  }
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;

  auto given = [&](const std::string& flag) {
    return std::any_of(args.begin() + 1, args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  std::vector<std::string> merged = args;
  for (const auto& e : read_config(path)) {
    const std::string flag = "--" + e.key;
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (!opt || e.key == "config")
      throw Error(ErrorCode::Config, path + ":" + std::to_string(e.line) + ": unknown field '" + e.key +
                                         "' for " + args[0]);
    if (given(flag)) continue;
    if (opt->get_items_expected_max() == 0) {
      if (e.value == "true" || e.value == "1" || e.value == "yes") {
        merged.push_back(flag);
      } else if (!(e.value == "false" || e.value == "0" || e.value == "no")) {
        throw Error(ErrorCode::Config, path + ":" + std::to_string(e.line) + ": field '" + e.key +
                                           "' expects true or false");
      }
      continue;
    }
    merged.push_back(flag);
    merged.push_back(e.value);
  }
  return merged;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"hubforge: persistent hubs in preferential attachment trees", "hubforge"};
  app.require_subcommand(1);
  std::vector<std::pair<CLI::App*, Command>> commands;

  auto* grow_cmd = app.add_subcommand("grow", "grow one tree and export its edge list");
  add_common(grow_cmd, o, false);
  grow_cmd->add_option("--steps", o.steps, "attachment steps (nodes - 1)");
  commands.emplace_back(grow_cmd, cmd_grow);

  auto* cmj_cmd = app.add_subcommand("cmj", "simulate the continuous-time branching process");
  add_common(cmj_cmd, o, false);
  cmj_cmd->add_option("--size", o.size, "stop at this many individuals");
  cmj_cmd->add_option("--time", o.time, "stop at this time (overrides --size)");
  cmj_cmd->add_option("--max-events", o.max_events);
  cmj_cmd->add_option("--max-individuals", o.max_individuals);
  commands.emplace_back(cmj_cmd, cmd_cmj);

  auto* killed_cmd = app.add_subcommand("killed-size", "mean population at an independent Exp(alpha) time");
  add_common(killed_cmd, o, true);
  killed_cmd->add_option("--alpha", o.alpha, "killing rate");
  killed_cmd->add_option("--max-events", o.max_events);
  killed_cmd->add_option("--max-individuals", o.max_individuals);
  commands.emplace_back(killed_cmd, cmd_killed);

  auto* pers_cmd = app.add_subcommand("persistence", "leader stabilization between checkpoints and n_max");
  add_common(pers_cmd, o, true);
  pers_cmd->add_option("--checkpoints", o.checkpoints, "comma-separated step counts");
  pers_cmd->add_option("--n-max", o.n_max, "final step count");
  commands.emplace_back(pers_cmd, cmd_persistence);

  auto* catch_cmd = app.add_subcommand("catchup", "catch-up set census");
  add_common(catch_cmd, o, true);
  catch_cmd->add_option("--steps", o.steps, "attachment steps");
  commands.emplace_back(catch_cmd, cmd_catchup);

  auto* over_cmd = app.add_subcommand("overtake", "overtake frequency against the maximal bound");
  add_common(over_cmd, o, true);
  over_cmd->add_option("--k", o.k, "head start");
  over_cmd->add_option("--lambda", o.lambda, "exponential tilt");
  over_cmd->add_option("--y", o.y, "initial gap");
  over_cmd->add_option("--horizon", o.horizon, "births simulated per race");
  over_cmd->add_option("--truncation", o.truncation, "terms of the moment product");
  commands.emplace_back(over_cmd, cmd_overtake);

  auto* phi_cmd = app.add_subcommand("phi", "Monte Carlo estimate of phi(j)");
  add_common(phi_cmd, o, true);
  phi_cmd->add_option("--j", o.j, "child rank");
  phi_cmd->add_option("--max-horizon", o.max_horizon, "largest k examined");
  commands.emplace_back(phi_cmd, cmd_phi);

  auto* sm_cmd = app.add_subcommand("supermartingale", "one-step check of E[1/M_{n+1} | T_n]");
  add_common(sm_cmd, o, false);
  sm_cmd->add_option("--snapshots", o.snapshots);
  sm_cmd->add_option("--min-nodes", o.min_nodes);
  sm_cmd->add_option("--max-nodes", o.max_nodes);
  sm_cmd->add_option("--continuations", o.continuations, "single-step samples above 10^4 nodes");
  sm_cmd->add_option("--kappa", o.kappa, "override kappa (default: computed)");
  commands.emplace_back(sm_cmd, cmd_supermartingale);

  auto* crit_cmd = app.add_subcommand("criteria", "classify the rule");
  add_common(crit_cmd, o, false);
  crit_cmd->add_option("--truncation", o.truncation, "terms summed before the analytic tail");
  commands.emplace_back(crit_cmd, cmd_criteria);

  auto* embed_cmd = app.add_subcommand("embed-check", "discrete trees against CMJ jump chains");
  add_common(embed_cmd, o, true);
  embed_cmd->add_option("--n", o.nodes, "nodes per tree");
  commands.emplace_back(embed_cmd, cmd_embed);

  try {
    std::vector<std::string> argv = merge_config(app, args);
    std::reverse(argv.begin(), argv.end());
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    const AttachmentSpec spec = parse_spec(o.spec);
    for (auto [sub, fn] : commands)
      if (sub->parsed()) return fn(o, spec, out);
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_numeric_precondition(e.code()) ? 3 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace hubforge::cli
