#pragma once

// Randomised comparisons of production code against the reference oracles.
// Each check returns ledger rows: one per compared pair, with the largest
// absolute deviation seen.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace checks {

struct Row {
  std::string pair;
  double max_deviation = 0;
  double tolerance = 0;
  std::string note;

  bool pass() const { return max_deviation <= tolerance; }
};

struct Ledger {
  std::vector<Row> rows;

  bool pass() const;
  void add(Row r) { rows.push_back(std::move(r)); }
  void append(const Ledger& other);
  void print(std::ostream& out, const std::string& prefix = "") const;
};

struct Paths {
  std::filesystem::path fixtures;
  std::filesystem::path data;
};

// Graph metrics on `graphs` random graphs of 1..max_nodes vertices.
Ledger graph_metrics(std::uint64_t seed, int graphs, int max_nodes);

// Sentence edge sets on random dependency trees of 1..max_tokens tokens,
// plus monotonicity in the distance cut-off.
Ledger tfmn_edges(std::uint64_t seed, int trees, int max_tokens);

// Analytic against Monte Carlo z-scores at each N, and mean z over null texts.
Ledger emotion_null(std::uint64_t seed, const Paths& paths, const std::vector<int>& sizes, int mc_samples,
                    int null_texts);

// TreeSHAP against coalition enumeration, local accuracy, dummy and additivity.
Ledger treeshap(std::uint64_t seed, int rounds);

// Rank tests and correlations against enumeration oracles and invariances.
Ledger statistics(std::uint64_t seed);

// Blobs CV accuracy, shuffled control, log-loss monotonicity, determinism.
Ledger ml_sanity(const Paths& paths);

}  // namespace checks
