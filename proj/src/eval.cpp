#include "cqr/eval.hpp"

#include <algorithm>
#include <cmath>

namespace cqr {

int rank_of_best(const RoutingResult& result, NodeId truth) {
  double truth_score = 0.0;
  bool found = false;
  for (const auto& rc : result.ranked)
    if (rc.candidate == truth) {
      truth_score = rc.score;
      found = true;
      break;
    }
  if (!found) throw TruthNotInCandidates("rank_of_best: truth is not a candidate");
  int rank = 0;
  for (const auto& rc : result.ranked)
    if (rc.score >= truth_score) ++rank;  // strictly better plus the whole tie group
  return rank;
}

double precision_at_k(std::span<const int> ranks, int k) {
  if (ranks.empty()) return 0.0;
  size_t hits = 0;
  for (int r : ranks)
    if (r <= k) ++hits;
  return double(hits) / double(ranks.size());
}

double accuracy_metric(std::span<const int> ranks, std::span<const int> pool_sizes) {
  if (ranks.size() != pool_sizes.size())
    throw DataError("accuracy_metric: ranks and pool sizes differ in length");
  if (ranks.empty()) return 0.0;
  double acc = 0.0;
  for (size_t i = 0; i < ranks.size(); ++i) {
    if (pool_sizes[i] < 2)
      throw DegenerateCandidateSet("accuracy_metric: candidate pool smaller than 2");
    acc += double(pool_sizes[i] - ranks[i]) / double(pool_sizes[i] - 1);
  }
  return acc / double(ranks.size());
}

double mean_reciprocal_rank(std::span<const int> ranks) {
  if (ranks.empty()) return 0.0;
  double acc = 0.0;
  for (int r : ranks) acc += 1.0 / double(r);
  return acc / double(ranks.size());
}

MetricReport evaluate(const ColdScorer& scorer, const Dataset& ds, Split split,
                      const EvalOptions& opt) {
  std::vector<uint32_t> questions = ds.questions_in(split);
  if (questions.empty())
    throw EmptyInput(std::string("evaluate: split ") + split_name(split) + " is empty");

  struct Slot {
    int rank = -1;
    int pool = 0;
    bool skipped = false;
  };
  std::vector<Slot> slots(questions.size());

#pragma omp parallel for num_threads(opt.threads) if (opt.threads > 1) schedule(dynamic)
  for (int64_t i = 0; i < int64_t(questions.size()); ++i) {
    uint32_t q = questions[i];
    const QuestionInfo& info = ds.question(q);

    RoutingQuery query;
    // tags of the earliest record define the question's tag set
    query.tags = ds.records()[info.record_idx.front()].tags;
    if (split != Split::TestNewAsker) query.asker = info.asker;
    if (opt.pools) {
      query.candidates = opt.pools->at(q);
    } else {
      query.candidates = info.answerers;
    }

    NodeId truth = opt.truth ? opt.truth->at(q) : ds.best_answerer(q);
    try {
      RoutingResult r = route(scorer, query);
      slots[i].rank = rank_of_best(r, truth);
      slots[i].pool = int(query.candidates.size());
    } catch (const UnknownTag&) {
      slots[i].skipped = true;
    }
  }

  MetricReport report;
  std::vector<int> ranks, pools;
  for (size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].skipped) {
      ++report.skipped;
      continue;
    }
    ranks.push_back(slots[i].rank);
    pools.push_back(slots[i].pool);
    report.detail.push_back({questions[i], slots[i].rank, slots[i].pool});
  }
  report.questions = ranks.size();
  if (!ranks.empty()) {
    report.precision_at_1 = precision_at_k(ranks, 1);
    report.precision_at_3 = precision_at_k(ranks, 3);
    report.accuracy = accuracy_metric(ranks, pools);
    report.mrr = mean_reciprocal_rank(ranks);
  }
  return report;
}

}  // namespace cqr
