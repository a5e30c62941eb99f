#pragma once

#include <cstdint>
#include <vector>

#include "cqr/graph.hpp"

namespace cqr {

struct WalkConfig {
  double p = 1.0;           // return parameter
  double q = 1.0;           // in-out parameter
  int walk_length = 80;
  int walks_per_node = 10;
  int window = 10;
  int dim = 128;
  int negatives = 5;
  int epochs = 2;
  double step_size = 0.025;
  uint64_t seed = 1;
  bool parallel_updates = false;     // lock-free updates when threads > 1
  size_t alias_cache_capacity = 1u << 20;
};

// Second-order biased walks. Transition weight from (prev, cur) to x is
// 1/p when x == prev, 1 when x is adjacent to prev, 1/q otherwise. Each
// (start, iteration) pair owns a derived RNG, so output is independent of
// thread count and scheduling.
std::vector<std::vector<int>> generate_walks(const CqaGraph& graph, const WalkConfig& cfg,
                                             int threads = 1);

// Exposed for distribution tests: the normalized next-step probabilities
// for one (prev, cur) state, aligned with graph.neighbors(cur).
std::vector<double> step_probabilities(const CqaGraph& graph, int prev, int cur,
                                       double p, double q);

}  // namespace cqr
