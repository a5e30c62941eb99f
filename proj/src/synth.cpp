#include "cqr/synth.hpp"

#include <algorithm>
#include <cmath>

#include "cqr/rng.hpp"

namespace cqr {

SynthCorpus generate(const SynthConfig& cfg) {
  if (cfg.topic_dim > int(cfg.n_tags))
    throw DataError("generate: topic_dim must not exceed n_tags");
  if (cfg.tags_per_question_mean < 1.0 || cfg.answers_per_question_mean < 1.0)
    throw DataError("generate: per-question means must be >= 1");

  Rng rng(cfg.seed);
  SynthCorpus out;

  out.user_expertise = Tensor(int(cfg.n_users), cfg.topic_dim);
  for (double& v : out.user_expertise.data) v = rng.normal();
  out.tag_topics = Tensor(int(cfg.n_tags), cfg.topic_dim);
  for (double& v : out.tag_topics.data) v = rng.normal();
  out.question_topics = Tensor(int(cfg.n_questions), cfg.topic_dim);

  uint32_t n_fresh = uint32_t(std::lround(cfg.fresh_asker_fraction * cfg.n_users));
  n_fresh = std::min(n_fresh, cfg.n_users > 1 ? cfg.n_users - 1 : 0);
  uint32_t n_regular = cfg.n_users - n_fresh;  // regulars are indices [0, n_regular)

  // choose which questions get a one-shot fresh asker
  std::vector<uint32_t> question_order(cfg.n_questions);
  for (uint32_t i = 0; i < cfg.n_questions; ++i) question_order[i] = i;
  rng.shuffle(question_order);
  size_t n_fresh_questions = std::min<size_t>(n_fresh, cfg.n_questions);
  std::vector<uint32_t> fresh_asker_of(cfg.n_questions, UINT32_MAX);
  for (size_t i = 0; i < n_fresh_questions; ++i)
    fresh_asker_of[question_order[i]] = n_regular + uint32_t(i);

  auto user_name = [](uint32_t u) { return "u" + std::to_string(u); };

  std::vector<double> weight(n_regular);
  for (uint32_t q = 0; q < cfg.n_questions; ++q) {
    // tag set: 1 + Poisson(mean - 1), capped
    int want = 1 + rng.poisson(cfg.tags_per_question_mean - 1.0);
    int n_tags_q = std::min<int>({want, int(cfg.n_tags), 10});
    std::vector<uint32_t> tags;
    while (int(tags.size()) < n_tags_q) {
      uint32_t t = rng.uniform_int(cfg.n_tags);
      if (std::find(tags.begin(), tags.end(), t) == tags.end()) tags.push_back(t);
    }
    std::sort(tags.begin(), tags.end());

    double* topic = out.question_topics.row(int(q));
    for (uint32_t t : tags)
      for (int j = 0; j < cfg.topic_dim; ++j) topic[j] += out.tag_topics.at(int(t), j);
    for (int j = 0; j < cfg.topic_dim; ++j) topic[j] /= double(tags.size());

    uint32_t asker = fresh_asker_of[q] != UINT32_MAX ? fresh_asker_of[q]
                                                     : rng.uniform_int(n_regular);

    auto affinity = [&](uint32_t u) {
      const double* e = out.user_expertise.row(int(u));
      double s = 0.0;
      for (int j = 0; j < cfg.topic_dim; ++j) s += e[j] * topic[j];
      return s;
    };
    // deterministic part of the vote an answerer earns on this question
    auto utility = [&](uint32_t u) {
      const double* e = out.user_expertise.row(int(u));
      const double* ea = out.user_expertise.row(int(asker));
      double rapport = 0.0;
      for (int j = 0; j < cfg.topic_dim; ++j) rapport += e[j] * ea[j];
      return cfg.vote_scale * affinity(u) +
             cfg.asker_affinity_weight * rapport / std::sqrt(double(cfg.topic_dim));
    };

    // softmax over regular users, stabilized by the max affinity
    double inv_temp = 1.0 / cfg.answerer_temperature;
    double max_aff = -1e300;
    for (uint32_t u = 0; u < n_regular; ++u) max_aff = std::max(max_aff, affinity(u));
    double total = 0.0;
    for (uint32_t u = 0; u < n_regular; ++u) {
      weight[u] = std::exp((affinity(u) - max_aff) * inv_temp);
      total += weight[u];
    }

    int n_answers;
    if (cfg.single_answer_fraction > 0.0) {
      double s = cfg.single_answer_fraction;
      if (rng.uniform() < s) {
        n_answers = 1;
      } else {
        // multi branch mean chosen so the overall mean still matches
        double multi_mean = (cfg.answers_per_question_mean - s) / (1.0 - s);
        n_answers = 2 + rng.poisson(std::max(0.0, multi_mean - 2.0));
      }
    } else {
      n_answers = 1 + rng.poisson(cfg.answers_per_question_mean - 1.0);
    }
    n_answers = std::min<int>(n_answers, int(n_regular));
    std::vector<uint32_t> answerers;
    while (int(answerers.size()) < n_answers) {
      double u01 = rng.uniform() * total;
      double acc = 0.0;
      uint32_t pick = n_regular - 1;
      for (uint32_t u = 0; u < n_regular; ++u) {
        acc += weight[u];
        if (u01 <= acc) {
          pick = u;
          break;
        }
      }
      if (std::find(answerers.begin(), answerers.end(), pick) == answerers.end())
        answerers.push_back(pick);
    }

    uint32_t latent_best = answerers.front();
    for (uint32_t u : answerers)
      if (utility(u) > utility(latent_best)) latent_best = u;

    NodeId qid = out.ids.intern(NodeKind::Question, "q" + std::to_string(q));
    NodeId askerid = out.ids.intern(NodeKind::User, user_name(asker));
    std::vector<NodeId> tagids;
    for (uint32_t t : tags)
      tagids.push_back(out.ids.intern(NodeKind::Tag, "t" + std::to_string(t)));
    std::sort(tagids.begin(), tagids.end());

    for (uint32_t u : answerers) {
      InteractionRecord r;
      r.question = qid;
      r.asker = askerid;
      r.answerer = out.ids.intern(NodeKind::User, user_name(u));
      r.tags = tagids;
      r.score = int64_t(std::llround(
          utility(u) + (cfg.noise_sd > 0.0 ? cfg.noise_sd * rng.normal() : 0.0)));
      r.is_best = (u == latent_best);
      r.timestamp = int64_t(q);
      out.records.push_back(std::move(r));
    }
    out.truth[qid.local] = *out.ids.find(NodeKind::User, user_name(latent_best));
  }
  return out;
}

CandidatePools build_candidate_pools(const Dataset& ds, Split split, int pool_size,
                                     uint64_t seed) {
  std::vector<char> answers_in_train(ds.count(NodeKind::User), 0);
  for (const auto& r : ds.records())
    if (ds.split_of(r.question.local) == Split::Train)
      answers_in_train[r.answerer.local] = 1;
  std::vector<uint32_t> population;
  for (uint32_t u = 0; u < answers_in_train.size(); ++u)
    if (answers_in_train[u]) population.push_back(u);

  CandidatePools pools;
  for (uint32_t q : ds.questions_in(split)) {
    std::vector<NodeId> pool = ds.question(q).answerers;
    Rng rng(mix_seed(seed, 0x900fULL, q));
    size_t guard = 0;
    while (int(pool.size()) < pool_size && !population.empty() && guard < 100000) {
      NodeId cand = user_id(population[rng.uniform_int(uint32_t(population.size()))]);
      if (std::find(pool.begin(), pool.end(), cand) == pool.end()) pool.push_back(cand);
      ++guard;
    }
    pools.emplace(q, std::move(pool));
  }
  return pools;
}

}  // namespace cqr
