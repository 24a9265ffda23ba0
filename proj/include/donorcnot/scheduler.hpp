#pragma once

// Frequency-collision conflict graphs over donor triples and greedy
// extraction of rounds of pulses that can run concurrently.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"

namespace donorcnot {

class OverlapGraph {
 public:
  explicit OverlapGraph(int n_nodes = 0);

  int n_nodes() const { return static_cast<int>(adjacency_.size()); }

  /// Throws std::out_of_range for a bad index and std::invalid_argument for
  /// a self-loop. Adding an existing edge is a no-op.
  void add_edge(int a, int b);
  bool has_edge(int a, int b) const;
  const std::vector<int>& neighbors(int node) const { return adjacency_.at(node); }
  std::size_t edge_count() const { return edge_count_; }

  /// Edges as (a, b) with a < b, sorted.
  std::vector<std::pair<int, int>> edges() const;

  /// edge_count / (n (n - 1) / 2); zero for fewer than two nodes.
  double density() const;

 private:
  std::vector<std::vector<int>> adjacency_;  // sorted
  std::size_t edge_count_ = 0;
};

struct OverlapOptions {
  double tolerance_mhz = 1.0;
  // Collisions closer than this are treated as one shared broadband line
  // and do not conflict. Zero disables the merge.
  double broadband_tolerance_mhz = 0.0;
};

/// Edge (i, j) iff some frequency of triple i and some frequency of triple j
/// collide. Each frequency list must be sorted ascending.
OverlapGraph build_overlap_graph(std::span<const std::vector<double>> frequency_sets, const OverlapOptions& options);

/// Independent edges with probability p (G(n, p)). Throws
/// std::invalid_argument for p outside [0, 1] or negative n.
OverlapGraph random_conflict_graph(int n, double p, std::uint64_t seed);

struct ParallelPlan {
  std::vector<std::vector<int>> rounds;  // each sorted ascending; rounds by size, largest first
};

void to_json(nlohmann::json& j, const ParallelPlan& plan);

/// Greedy independent set: nodes are scanned by ascending degree in the
/// subgraph induced by `candidates` (ties broken by a seeded shuffle) and
/// kept when no kept neighbor exists. Returns the set sorted ascending.
std::vector<int> greedy_independent_set(const OverlapGraph& graph, std::span<const int> candidates,
                                        std::uint64_t seed);

/// Repeated greedy extraction until every node is assigned.
ParallelPlan greedy_parallel_sets(const OverlapGraph& graph, std::uint64_t seed);

/// True iff the rounds partition the nodes and each round is independent.
bool is_valid_plan(const OverlapGraph& graph, const ParallelPlan& plan);

struct ParallelismEstimate {
  int n = 0;
  double p = 0.0;
  int trials = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; zero for one trial
};

void to_json(nlohmann::json& j, const ParallelismEstimate& e);

/// Monte Carlo over G(n, p): statistics of the greedy first-round size.
/// Trial t draws its graph and tie-breaking from mix_seed(seed, t).
ParallelismEstimate estimate_parallelism(int n, double p, int trials, std::uint64_t seed);

}  // namespace donorcnot
