#pragma once

#include "cqr/eval.hpp"

namespace cqr {

struct SynthConfig {
  uint32_t n_users = 500;
  uint32_t n_questions = 5000;
  uint32_t n_tags = 50;
  int topic_dim = 8;
  double tags_per_question_mean = 2.8;
  double answers_per_question_mean = 1.8;
  // when > 0, pins the single-answer share exactly (a two-branch mixture);
  // otherwise counts are plain 1 + Poisson(mean - 1)
  double single_answer_fraction = 0.0;
  double noise_sd = 0.5;
  // softmax temperature for answerer sampling; above 1 mixes weak matches
  // (and their low votes) into the observed answers
  double answerer_temperature = 1.0;
  // share of users reserved as one-shot askers with no other activity;
  // their questions are the only source of a new-asker test pool
  double fresh_asker_fraction = 0.5;
  double vote_scale = 5.0;
  // weight of the deterministic asker-answerer affinity in the vote
  // utility; this is what makes asker features informative for ranking
  double asker_affinity_weight = 2.0;
  uint64_t seed = 1;
};

// Latent-expertise community. Users carry expertise vectors, tags carry
// topic vectors, a question's topic is the mean of its tags' topics.
// Answerers are drawn softmax-proportionally to expertise.topic. The vote
// utility is vote_scale * expertise.topic plus an asker-answerer affinity
// term; votes round(utility + noise). The record of the highest-utility
// answerer carries is_best and defines the truth map.
struct SynthCorpus {
  Interner ids;
  std::vector<InteractionRecord> records;
  TruthMap truth;  // question local -> latent best answerer
  Tensor user_expertise;   // generator index order, row u is user "u<u>"
  Tensor tag_topics;
  Tensor question_topics;
};

SynthCorpus generate(const SynthConfig& cfg);

// Actual answerers plus distractors sampled from the training answerer
// population, padded to pool_size per test question.
CandidatePools build_candidate_pools(const Dataset& ds, Split split, int pool_size,
                                     uint64_t seed);

}  // namespace cqr
