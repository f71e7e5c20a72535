#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hubforge/attachment.hpp"
#include "hubforge/stats.hpp"

namespace hubforge::cli {

/// Entry point of the `hubforge` tool. `args` excludes the program name.
/// Exit codes: 0 success, 2 configuration error, 3 numeric precondition failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct EmbedCheck {
  bool skipped = false;
  std::string note;
  stats::ChiSquare root_degree;
  stats::ChiSquare leader;
  std::vector<std::uint64_t> tree_root_hist, cmj_root_hist;
  std::vector<std::uint64_t> tree_leader_hist, cmj_leader_hist;
};

/// Discrete attachment trees against CMJ jump chains at `nodes` individuals.
EmbedCheck embed_check(const AttachmentSpec& spec, std::size_t nodes, std::size_t replicates,
                       std::uint64_t seed, int threads = 1);

struct ConfigEntry {
  std::string key;
  std::string value;
  int line;
};

/// key = value lines; '#' starts a comment. Errors carry the line number.
std::vector<ConfigEntry> read_config(const std::string& path);

/// Fixed 12 significant digit rendering used in every CSV.
std::string fmt(double v);

}  // namespace hubforge::cli
