#pragma once

#include <unordered_map>

#include "cqr/dataset.hpp"
#include "cqr/route.hpp"

namespace cqr {

// 1-based rank of the true best answerer; inside a score tie the truth
// takes the worst slot of its tie group, so tie-breaking can never
// manufacture a metric improvement.
int rank_of_best(const RoutingResult& result, NodeId truth);

// Fraction of questions whose truth landed in the top k.
double precision_at_k(std::span<const int> ranks, int k);

// Mean normalized reverse rank (|C| - rank) / (|C| - 1).
double accuracy_metric(std::span<const int> ranks, std::span<const int> pool_sizes);

double mean_reciprocal_rank(std::span<const int> ranks);

struct QuestionOutcome {
  uint32_t question = 0;  // dataset question local
  int rank = 0;
  int pool_size = 0;
};

struct MetricReport {
  double precision_at_1 = 0.0;
  double precision_at_3 = 0.0;
  double accuracy = 0.0;
  double mrr = 0.0;
  size_t questions = 0;
  size_t skipped = 0;  // unroutable (e.g. every tag unseen in training)
  std::vector<QuestionOutcome> detail;
};

// question local -> candidate pool / true best answerer, in dataset space.
using CandidatePools = std::unordered_map<uint32_t, std::vector<NodeId>>;
using TruthMap = std::unordered_map<uint32_t, NodeId>;

struct EvalOptions {
  const CandidatePools* pools = nullptr;  // default: the actual answerers
  const TruthMap* truth = nullptr;        // default: dataset best answerer
  int threads = 1;
};

MetricReport evaluate(const ColdScorer& scorer, const Dataset& ds, Split split,
                      const EvalOptions& opt = {});

}  // namespace cqr
