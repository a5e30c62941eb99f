#include "cqr/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "cqr/rng.hpp"

namespace cqr {

NodeId Interner::intern(NodeKind kind, std::string_view name) {
  auto& idx = index_[size_t(kind)];
  auto it = idx.find(std::string(name));
  if (it != idx.end()) return {kind, it->second};
  uint32_t local = uint32_t(names_[size_t(kind)].size());
  names_[size_t(kind)].emplace_back(name);
  idx.emplace(std::string(name), local);
  return {kind, local};
}

std::optional<NodeId> Interner::find(NodeKind kind, std::string_view name) const {
  const auto& idx = index_[size_t(kind)];
  auto it = idx.find(std::string(name));
  if (it == idx.end()) return std::nullopt;
  return NodeId{kind, it->second};
}

const std::string& Interner::name(NodeId id) const {
  return names_[size_t(id.kind)].at(id.local);
}

uint32_t Interner::count(NodeKind kind) const {
  return uint32_t(names_[size_t(kind)].size());
}

const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::TestExistingAsker: return "test-existing-asker";
    case Split::TestNewAsker: return "test-new-asker";
  }
  return "?";
}

std::optional<Split> split_from_name(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "test-existing-asker") return Split::TestExistingAsker;
  if (name == "test-new-asker") return Split::TestNewAsker;
  return std::nullopt;
}

Dataset::Dataset(Interner ids, std::vector<InteractionRecord> records,
                 std::vector<Split> question_split)
    : ids_(std::move(ids)),
      records_(std::move(records)),
      question_split_(std::move(question_split)) {
  for (auto k : {NodeKind::Question, NodeKind::User, NodeKind::Tag})
    counts_[size_t(k)] = ids_.count(k);
  if (question_split_.size() != counts_[size_t(NodeKind::Question)])
    throw DataError("split table size does not match question count");

  questions_.resize(counts_[size_t(NodeKind::Question)]);
  for (size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (r.tags.empty())
      throw DataError("record " + std::to_string(i) + " has no tags");
    auto& q = questions_[r.question.local];
    if (q.record_idx.empty()) {
      q.asker = r.asker;
    } else if (q.asker != r.asker) {
      throw DataError("question " + ids_.name(r.question) + " has two askers");
    }
    if (r.is_best) {
      for (size_t j : q.record_idx)
        if (records_[j].is_best)
          throw DataError("question " + ids_.name(r.question) + " has two best answers");
    }
    q.record_idx.push_back(i);
    q.answerers.push_back(r.answerer);
    if (r.timestamp && (!q.first_timestamp || *r.timestamp < *q.first_timestamp))
      q.first_timestamp = r.timestamp;
    if (r.asker == r.answerer) ++self_answers_;
  }
  for (auto& q : questions_) {
    std::sort(q.answerers.begin(), q.answerers.end());
    q.answerers.erase(std::unique(q.answerers.begin(), q.answerers.end()),
                      q.answerers.end());
  }

  user_in_training_.assign(counts_[size_t(NodeKind::User)], 0);
  for (const auto& r : records_) {
    if (question_split_[r.question.local] != Split::Train) continue;
    user_in_training_[r.asker.local] = 1;
    user_in_training_[r.answerer.local] = 1;
  }
}

const QuestionInfo& Dataset::question(uint32_t question_local) const {
  return questions_.at(question_local);
}

std::vector<uint32_t> Dataset::questions_in(Split s) const {
  std::vector<uint32_t> out;
  for (uint32_t q = 0; q < question_split_.size(); ++q)
    if (question_split_[q] == s) out.push_back(q);
  return out;
}

NodeId Dataset::best_answerer(uint32_t question_local) const {
  const auto& q = questions_.at(question_local);
  if (q.record_idx.empty())
    throw DataError("question " + std::to_string(question_local) + " has no records");
  for (size_t i : q.record_idx)
    if (records_[i].is_best) return records_[i].answerer;
  size_t best = q.record_idx.front();
  for (size_t i : q.record_idx) {
    const auto& r = records_[i];
    const auto& b = records_[best];
    if (r.score > b.score || (r.score == b.score && r.answerer.local < b.answerer.local))
      best = i;
  }
  return records_[best].answerer;
}

std::vector<InteractionRecord> Dataset::train_records() const {
  std::vector<InteractionRecord> out;
  for (const auto& r : records_)
    if (question_split_[r.question.local] == Split::Train) out.push_back(r);
  return out;
}

std::vector<TrainingCase> Dataset::train_cases() const {
  std::vector<TrainingCase> out;
  for (const auto& r : records_)
    if (question_split_[r.question.local] == Split::Train) out.push_back(to_case(r));
  return out;
}

bool Dataset::asker_unseen_in_training(uint32_t question_local) const {
  NodeId asker = questions_.at(question_local).asker;
  return !user_in_training_[asker.local];
}

bool Dataset::operator==(const Dataset& other) const {
  if (records_ != other.records_) return false;
  if (question_split_ != other.question_split_) return false;
  if (counts_ != other.counts_) return false;
  for (auto k : {NodeKind::Question, NodeKind::User, NodeKind::Tag})
    for (uint32_t i = 0; i < counts_[size_t(k)]; ++i)
      if (ids_.name({k, i}) != other.ids_.name({k, i})) return false;
  return true;
}

namespace {

struct QuestionAgg {
  NodeId asker;
  std::vector<NodeId> answerers;
  std::optional<int64_t> first_timestamp;
  size_t n_records = 0;
};

}  // namespace

Dataset make_splits(ParsedRecords parsed, const SplitOptions& opt) {
  if (parsed.records.empty()) throw EmptyInput("make_splits: no records");
  if (!(opt.test_fraction > 0.0 && opt.test_fraction < 1.0))
    throw DataError("test_fraction must be in (0,1)");

  uint32_t n_questions = parsed.ids.count(NodeKind::Question);
  uint32_t n_users = parsed.ids.count(NodeKind::User);

  std::vector<QuestionAgg> agg(n_questions);
  std::vector<uint32_t> user_activity(n_users, 0);  // record appearances
  for (const auto& r : parsed.records) {
    auto& q = agg[r.question.local];
    if (q.n_records == 0) q.asker = r.asker;
    q.answerers.push_back(r.answerer);
    if (r.timestamp && (!q.first_timestamp || *r.timestamp < *q.first_timestamp))
      q.first_timestamp = r.timestamp;
    ++q.n_records;
    ++user_activity[r.asker.local];
    if (r.answerer != r.asker) ++user_activity[r.answerer.local];
  }
  for (auto& q : agg) {
    std::sort(q.answerers.begin(), q.answerers.end());
    q.answerers.erase(std::unique(q.answerers.begin(), q.answerers.end()),
                      q.answerers.end());
  }

  std::vector<uint32_t> eligible;
  for (uint32_t q = 0; q < n_questions; ++q)
    if (int(agg[q].answerers.size()) >= opt.min_answers) eligible.push_back(q);
  if (eligible.empty())
    throw EmptyInput("make_splits: no question has enough distinct answerers");

  size_t n_test = size_t(std::lround(opt.test_fraction * double(n_questions)));
  n_test = std::min(std::max<size_t>(n_test, 1), eligible.size());

  std::vector<uint32_t> test;
  if (opt.time_ordered) {
    std::vector<uint32_t> ordered = eligible;
    std::stable_sort(ordered.begin(), ordered.end(), [&](uint32_t a, uint32_t b) {
      int64_t ta = agg[a].first_timestamp.value_or(0);
      int64_t tb = agg[b].first_timestamp.value_or(0);
      return ta < tb;
    });
    test.assign(ordered.end() - n_test, ordered.end());
  } else {
    // Questions whose asker has no activity beyond this question feed the
    // new-asker pool; cap them at half the quota. Each record contributes
    // exactly one activity count for its asker, so "no other activity"
    // means the asker's total equals this question's record count.
    std::vector<uint32_t> lone, rest;
    for (uint32_t q : eligible) {
      bool is_lone = user_activity[agg[q].asker.local] == uint32_t(agg[q].n_records);
      (is_lone ? lone : rest).push_back(q);
    }
    Rng rng(mix_seed(opt.seed, 0xd5));
    rng.shuffle(lone);
    rng.shuffle(rest);
    size_t from_lone = std::min(lone.size(), n_test / 2);
    test.assign(lone.begin(), lone.begin() + from_lone);
    for (uint32_t q : rest) {
      if (test.size() >= n_test) break;
      test.push_back(q);
    }
    for (size_t i = from_lone; i < lone.size() && test.size() < n_test; ++i)
      test.push_back(lone[i]);
  }

  std::vector<Split> split(n_questions, Split::Train);
  for (uint32_t q : test) split[q] = Split::TestExistingAsker;  // provisional

  std::vector<char> seen_in_train(n_users, 0);
  for (const auto& r : parsed.records) {
    if (split[r.question.local] != Split::Train) continue;
    seen_in_train[r.asker.local] = 1;
    seen_in_train[r.answerer.local] = 1;
  }
  for (uint32_t q : test)
    if (!seen_in_train[agg[q].asker.local]) split[q] = Split::TestNewAsker;

  return Dataset(std::move(parsed.ids), std::move(parsed.records), std::move(split));
}

ParsedRecords reintern_records(const Interner& ids,
                               const std::vector<InteractionRecord>& records) {
  ParsedRecords out;
  out.records.reserve(records.size());
  for (const auto& r : records) {
    InteractionRecord n = r;
    n.question = out.ids.intern(NodeKind::Question, ids.name(r.question));
    n.asker = out.ids.intern(NodeKind::User, ids.name(r.asker));
    n.answerer = out.ids.intern(NodeKind::User, ids.name(r.answerer));
    n.tags.clear();
    for (NodeId t : r.tags) n.tags.push_back(out.ids.intern(NodeKind::Tag, ids.name(t)));
    std::sort(n.tags.begin(), n.tags.end());
    out.records.push_back(std::move(n));
  }
  return out;
}

Dataset dataset_from_parsed(ParsedRecords parsed) {
  uint32_t n_questions = parsed.ids.count(NodeKind::Question);
  std::vector<Split> split(n_questions, Split::Train);
  if (!parsed.splits.empty()) {
    for (size_t i = 0; i < parsed.records.size(); ++i) {
      if (!parsed.splits[i]) continue;
      split[parsed.records[i].question.local] = *parsed.splits[i];
    }
  }
  return Dataset(std::move(parsed.ids), std::move(parsed.records), std::move(split));
}

}  // namespace cqr
