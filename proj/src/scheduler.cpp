#include "donorcnot/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "donorcnot/random.hpp"

namespace donorcnot {

OverlapGraph::OverlapGraph(int n_nodes) {
  if (n_nodes < 0) throw std::invalid_argument("graph size must be non-negative");
  adjacency_.resize(n_nodes);
}

void OverlapGraph::add_edge(int a, int b) {
  if (a < 0 || b < 0 || a >= n_nodes() || b >= n_nodes()) throw std::out_of_range("edge endpoint out of range");
  if (a == b) throw std::invalid_argument("self-loop on node " + std::to_string(a));
  auto& na = adjacency_[a];
  const auto it = std::lower_bound(na.begin(), na.end(), b);
  if (it != na.end() && *it == b) return;
  na.insert(it, b);
  auto& nb = adjacency_[b];
  nb.insert(std::lower_bound(nb.begin(), nb.end(), a), a);
  ++edge_count_;
}

bool OverlapGraph::has_edge(int a, int b) const {
  if (a < 0 || b < 0 || a >= n_nodes() || b >= n_nodes()) throw std::out_of_range("node out of range");
  return std::binary_search(adjacency_[a].begin(), adjacency_[a].end(), b);
}

std::vector<std::pair<int, int>> OverlapGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(edge_count_);
  for (int a = 0; a < n_nodes(); ++a) {
    for (int b : adjacency_[a]) {
      if (a < b) out.emplace_back(a, b);
    }
  }
  return out;
}

double OverlapGraph::density() const {
  const double n = n_nodes();
  return n < 2 ? 0.0 : static_cast<double>(edge_count_) / (0.5 * n * (n - 1.0));
}

namespace {

// Does any pair collide at a distance in [lo, hi)? Both lists sorted.
bool collides_within(const std::vector<double>& a, const std::vector<double>& b, double lo, double hi) {
  std::size_t start = 0;
  for (double x : a) {
    while (start < b.size() && b[start] <= x - hi) ++start;
    for (std::size_t k = start; k < b.size() && b[k] < x + hi; ++k) {
      if (std::abs(b[k] - x) >= lo) return true;
    }
  }
  return false;
}

}  // namespace

OverlapGraph build_overlap_graph(std::span<const std::vector<double>> frequency_sets, const OverlapOptions& options) {
  if (!(options.tolerance_mhz >= 0.0) || !(options.broadband_tolerance_mhz >= 0.0)) {
    throw std::invalid_argument("overlap tolerances must be non-negative");
  }
  for (const auto& f : frequency_sets) {
    if (!std::is_sorted(f.begin(), f.end())) throw std::invalid_argument("frequency lists must be sorted");
  }
  OverlapGraph g(static_cast<int>(frequency_sets.size()));
  for (int i = 0; i < g.n_nodes(); ++i) {
    for (int j = i + 1; j < g.n_nodes(); ++j) {
      if (collides_within(frequency_sets[i], frequency_sets[j], options.broadband_tolerance_mhz,
                          options.tolerance_mhz)) {
        g.add_edge(i, j);
      }
    }
  }
  return g;
}

OverlapGraph random_conflict_graph(int n, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("edge probability must lie in [0, 1]");
  OverlapGraph g(n);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.bernoulli(p)) g.add_edge(i, j);
    }
  }
  return g;
}

std::vector<int> greedy_independent_set(const OverlapGraph& graph, std::span<const int> candidates,
                                        std::uint64_t seed) {
  std::vector<char> active(graph.n_nodes(), 0);
  for (int c : candidates) active.at(c) = 1;

  struct Key {
    int degree;
    std::uint64_t tie;
    int node;
  };
  Rng rng(seed);
  std::vector<Key> order;
  order.reserve(candidates.size());
  for (int c : candidates) {
    int degree = 0;
    for (int nb : graph.neighbors(c)) degree += active[nb];
    order.push_back({degree, rng.next(), c});
  }
  std::sort(order.begin(), order.end(), [](const Key& a, const Key& b) {
    return a.degree != b.degree ? a.degree < b.degree : a.tie != b.tie ? a.tie < b.tie : a.node < b.node;
  });

  std::vector<char> blocked(graph.n_nodes(), 0);
  std::vector<int> chosen;
  for (const Key& k : order) {
    if (blocked[k.node]) continue;
    chosen.push_back(k.node);
    for (int nb : graph.neighbors(k.node)) blocked[nb] = 1;
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

ParallelPlan greedy_parallel_sets(const OverlapGraph& graph, std::uint64_t seed) {
  std::vector<int> remaining(graph.n_nodes());
  std::iota(remaining.begin(), remaining.end(), 0);
  ParallelPlan plan;
  for (std::uint64_t round = 0; !remaining.empty(); ++round) {
    std::vector<int> set = greedy_independent_set(graph, remaining, mix_seed(seed, round));
    std::vector<int> rest;
    std::set_difference(remaining.begin(), remaining.end(), set.begin(), set.end(), std::back_inserter(rest));
    remaining = std::move(rest);
    plan.rounds.push_back(std::move(set));
  }
  std::stable_sort(plan.rounds.begin(), plan.rounds.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return plan;
}

bool is_valid_plan(const OverlapGraph& graph, const ParallelPlan& plan) {
  std::vector<int> seen(graph.n_nodes(), 0);
  for (const auto& round : plan.rounds) {
    for (std::size_t i = 0; i < round.size(); ++i) {
      if (round[i] < 0 || round[i] >= graph.n_nodes() || seen[round[i]]++) return false;
      for (std::size_t j = i + 1; j < round.size(); ++j) {
        if (graph.has_edge(round[i], round[j])) return false;
      }
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });
}

void to_json(nlohmann::json& j, const ParallelPlan& plan) {
  j = nlohmann::json{{"rounds", plan.rounds}};
}

void to_json(nlohmann::json& j, const ParallelismEstimate& e) {
  j = nlohmann::json{{"n", e.n}, {"p", e.p}, {"trials", e.trials}, {"mean", e.mean}, {"std", e.stddev}};
}

ParallelismEstimate estimate_parallelism(int n, double p, int trials, std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("node count must be non-negative");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("edge probability must lie in [0, 1]");
  if (trials < 1) throw std::invalid_argument("at least one trial is required");
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t trial_seed = mix_seed(seed, static_cast<std::uint64_t>(t));
    const OverlapGraph g = random_conflict_graph(n, p, trial_seed);
    const double size = static_cast<double>(greedy_independent_set(g, all, mix_seed(trial_seed, 0)).size());
    sum += size;
    sum_sq += size * size;
  }
  ParallelismEstimate e{n, p, trials, sum / trials, 0.0};
  if (trials > 1) e.stddev = std::sqrt(std::max(0.0, (sum_sq - trials * e.mean * e.mean) / (trials - 1)));
  return e;
}

}  // namespace donorcnot
