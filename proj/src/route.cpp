#include "cqr/route.hpp"

#include <algorithm>

namespace cqr {

IdTranslation identity_translation() {
  return [](NodeId id) { return id; };
}

IdTranslation interner_translation(const Interner& from, const Interner& to) {
  return [&from, &to](NodeId id) {
    // locals past the source universe are fresh ids for never-seen entities
    if (id.local >= from.count(id.kind)) return NodeId{id.kind, kUnknownLocal};
    if (auto mapped = to.find(id.kind, from.name(id))) return *mapped;
    return NodeId{id.kind, kUnknownLocal};
  };
}

SeqScorer::SeqScorer(const EmbeddingTable& table, const RegressorModel& model,
                     IdTranslation translate)
    : table_(table), model_(model), translate_(std::move(translate)) {}

std::vector<double> SeqScorer::score(const RoutingQuery& query) const {
  if (query.candidates.empty()) throw EmptyCandidateSet("SeqScorer: no candidates");
  TrainingCase c;
  c.question = {NodeKind::Question, kUnknownLocal};  // cold: zero block
  c.asker = query.asker ? translate_(*query.asker) : NodeId{NodeKind::User, kUnknownLocal};
  for (NodeId t : query.tags) c.tags.push_back(translate_(t));
  std::vector<double> out;
  out.reserve(query.candidates.size());
  for (NodeId cand : query.candidates) {
    c.answerer = translate_(cand);
    out.push_back(model_.score(assemble(table_, c, model_.spec)));
  }
  return out;
}

EndColdScorer::EndColdScorer(const EndColdModel& model, const CqaGraph& base,
                             IdTranslation translate)
    : predictor_(model, base), translate_(std::move(translate)) {}

std::vector<double> EndColdScorer::score(const RoutingQuery& query) const {
  if (query.candidates.empty()) throw EmptyCandidateSet("EndColdScorer: no candidates");
  std::vector<NodeId> tags;
  tags.reserve(query.tags.size());
  for (NodeId t : query.tags) tags.push_back(translate_(t));
  std::optional<NodeId> asker;
  if (query.asker) {
    NodeId a = translate_(*query.asker);
    if (a.local != kUnknownLocal) asker = a;
  }
  std::vector<NodeId> candidates;
  candidates.reserve(query.candidates.size());
  for (NodeId cand : query.candidates) candidates.push_back(translate_(cand));
  return predictor_.score_cold(tags, asker, candidates);
}

RoutingResult route(const ColdScorer& scorer, const RoutingQuery& query) {
  if (query.candidates.empty()) throw EmptyCandidateSet("route: no candidates");
  std::vector<double> scores = scorer.score(query);
  RoutingResult result;
  result.ranked.reserve(scores.size());
  for (size_t i = 0; i < scores.size(); ++i)
    result.ranked.push_back({query.candidates[i], scores[i]});
  std::sort(result.ranked.begin(), result.ranked.end(),
            [](const RankedCandidate& a, const RankedCandidate& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.candidate.local < b.candidate.local;
            });
  result.best = result.ranked.front().candidate;
  return result;
}

std::vector<RouteOutcome> route_batch(const ColdScorer& scorer,
                                      std::span<const RoutingQuery> queries, int threads) {
  std::vector<RouteOutcome> out(queries.size());
#pragma omp parallel for num_threads(threads) if (threads > 1) schedule(dynamic)
  for (int64_t i = 0; i < int64_t(queries.size()); ++i) {
    try {
      out[i].result = route(scorer, queries[i]);
    } catch (const Error& e) {
      out[i].error = e.what();
    }
  }
  return out;
}

}  // namespace cqr
