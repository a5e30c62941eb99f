#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cqr/dataset.hpp"
#include "cqr/rng.hpp"
#include "cqr/tensor.hpp"

namespace cqrtest {

// Central finite differences against an analytic gradient; returns the
// worst relative error over all coordinates of the parameter.
inline double max_rel_error_fd(const std::function<double()>& eval, cqr::Tensor& param,
                               const cqr::Tensor& analytic, double h = 1e-5) {
  double worst = 0.0;
  for (size_t i = 0; i < param.size(); ++i) {
    double keep = param.data[i];
    param.data[i] = keep + h;
    double fp = eval();
    param.data[i] = keep - h;
    double fm = eval();
    param.data[i] = keep;
    double fd = (fp - fm) / (2.0 * h);
    double an = analytic.data[i];
    double err = std::abs(fd - an) / std::max({1e-6, std::abs(fd), std::abs(an)});
    worst = std::max(worst, err);
  }
  return worst;
}

// Small random CQA corpora for property tests. Node counts stay small so
// dense oracles remain cheap.
inline cqr::ParsedRecords random_records(uint64_t seed, int n_questions, int n_users,
                                         int n_tags, int max_answers = 4) {
  cqr::Rng rng(seed);
  cqr::ParsedRecords out;
  for (int q = 0; q < n_questions; ++q) {
    std::string qname = "q" + std::to_string(q);
    uint32_t asker = rng.uniform_int(uint32_t(n_users));
    int n_tags_q = 1 + int(rng.uniform_int(3));
    std::vector<std::string> tags;
    for (int t = 0; t < n_tags_q; ++t)
      tags.push_back("t" + std::to_string(rng.uniform_int(uint32_t(n_tags))));
    int n_answers = 1 + int(rng.uniform_int(uint32_t(max_answers)));
    for (int a = 0; a < n_answers; ++a) {
      cqr::InteractionRecord r;
      r.question = out.ids.intern(cqr::NodeKind::Question, qname);
      r.asker = out.ids.intern(cqr::NodeKind::User, "u" + std::to_string(asker));
      r.answerer = out.ids.intern(
          cqr::NodeKind::User, "u" + std::to_string(rng.uniform_int(uint32_t(n_users))));
      for (const auto& t : tags) r.tags.push_back(out.ids.intern(cqr::NodeKind::Tag, t));
      std::sort(r.tags.begin(), r.tags.end());
      r.tags.erase(std::unique(r.tags.begin(), r.tags.end()), r.tags.end());
      r.score = int64_t(rng.uniform_int(21)) - 10;
      r.timestamp = int64_t(q) * 10 + a;
      out.records.push_back(std::move(r));
    }
  }
  return out;
}

// The two-question community from the paper's illustration: user 1 asked
// question 1 (tags 1, 2), answered by users 2-4; user 4 asked question 2
// (tags 2, 3), answered by users 3, 5, 6.
inline cqr::ParsedRecords two_question_corpus() {
  cqr::ParsedRecords out;
  auto add = [&](const char* q, const char* asker, const char* answerer,
                 std::vector<const char*> tags, int64_t score, bool best) {
    cqr::InteractionRecord r;
    r.question = out.ids.intern(cqr::NodeKind::Question, q);
    r.asker = out.ids.intern(cqr::NodeKind::User, asker);
    r.answerer = out.ids.intern(cqr::NodeKind::User, answerer);
    for (const char* t : tags) r.tags.push_back(out.ids.intern(cqr::NodeKind::Tag, t));
    std::sort(r.tags.begin(), r.tags.end());
    r.score = score;
    r.is_best = best;
    out.records.push_back(std::move(r));
  };
  add("q1", "u1", "u2", {"t1", "t2"}, 3, false);
  add("q1", "u1", "u3", {"t1", "t2"}, 7, true);
  add("q1", "u1", "u4", {"t1", "t2"}, 1, false);
  add("q2", "u4", "u3", {"t2", "t3"}, 2, false);
  add("q2", "u4", "u5", {"t2", "t3"}, 5, true);
  add("q2", "u4", "u6", {"t2", "t3"}, -1, false);
  return out;
}

}  // namespace cqrtest
