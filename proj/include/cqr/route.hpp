#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "cqr/dataset.hpp"
#include "cqr/endcold.hpp"
#include "cqr/seq.hpp"

namespace cqr {

// Local id that resolves to "absent" in every table and graph.
inline constexpr uint32_t kUnknownLocal = 0xffffffffu;

struct RoutingQuery {
  std::vector<NodeId> tags;
  std::optional<NodeId> asker;
  std::vector<NodeId> candidates;
};

struct RankedCandidate {
  NodeId candidate;
  double score = 0.0;
};

struct RoutingResult {
  std::vector<RankedCandidate> ranked;  // score desc, ties by ascending local
  NodeId best;
};

// Maps caller-space ids into the id space a model was trained in. Ids that
// were never seen in training map to kUnknownLocal and score as zeros.
using IdTranslation = std::function<NodeId(NodeId)>;
IdTranslation identity_translation();
IdTranslation interner_translation(const Interner& from, const Interner& to);

class ColdScorer {
 public:
  virtual ~ColdScorer() = default;
  // One score per candidate, in candidate order.
  virtual std::vector<double> score(const RoutingQuery& query) const = 0;
};

class SeqScorer : public ColdScorer {
 public:
  SeqScorer(const EmbeddingTable& table, const RegressorModel& model,
            IdTranslation translate = identity_translation());
  std::vector<double> score(const RoutingQuery& query) const override;

 private:
  const EmbeddingTable& table_;
  const RegressorModel& model_;
  IdTranslation translate_;
};

class EndColdScorer : public ColdScorer {
 public:
  EndColdScorer(const EndColdModel& model, const CqaGraph& base,
                IdTranslation translate = identity_translation());
  std::vector<double> score(const RoutingQuery& query) const override;

  const EndColdPredictor& predictor() const { return predictor_; }

 private:
  EndColdPredictor predictor_;
  IdTranslation translate_;
};

RoutingResult route(const ColdScorer& scorer, const RoutingQuery& query);

struct RouteOutcome {
  std::optional<RoutingResult> result;
  std::string error;  // empty on success
};

// Parallel over items; output order matches input order and every item
// equals the serial route() result.
std::vector<RouteOutcome> route_batch(const ColdScorer& scorer,
                                      std::span<const RoutingQuery> queries,
                                      int threads = 1);

}  // namespace cqr
