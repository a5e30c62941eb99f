#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cqr/ids.hpp"

namespace cqr {

inline int64_t vote_score(uint64_t upvotes, uint64_t downvotes) {
  return int64_t(upvotes) - int64_t(downvotes);
}

// One answering thread: question, asker, answerer, tags, and the community
// verdict on the answer. Tags are kept sorted and deduplicated.
struct InteractionRecord {
  NodeId question;
  NodeId asker;
  NodeId answerer;
  std::vector<NodeId> tags;
  int64_t score = 0;
  bool is_best = false;
  std::optional<int64_t> timestamp;

  friend bool operator==(const InteractionRecord&, const InteractionRecord&) = default;
};

// <question, answerer, asker, tags> with the vote score as regression target.
struct TrainingCase {
  NodeId question;
  NodeId answerer;
  NodeId asker;
  std::vector<NodeId> tags;
  double target = 0.0;
};

inline TrainingCase to_case(const InteractionRecord& r) {
  return TrainingCase{r.question, r.answerer, r.asker, r.tags, double(r.score)};
}

}  // namespace cqr
