#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cqr/errors.hpp"
#include "cqr/records.hpp"

namespace cqr {

// String ids are interned to dense per-kind locals in first-seen order, so
// identical input files always produce identical node numbering.
class Interner {
 public:
  NodeId intern(NodeKind kind, std::string_view name);
  std::optional<NodeId> find(NodeKind kind, std::string_view name) const;
  const std::string& name(NodeId id) const;
  uint32_t count(NodeKind kind) const;

 private:
  std::array<std::vector<std::string>, 3> names_;
  std::array<std::unordered_map<std::string, uint32_t>, 3> index_;
};

enum class Split : uint8_t { Train = 0, TestExistingAsker = 1, TestNewAsker = 2 };

const char* split_name(Split s);
std::optional<Split> split_from_name(std::string_view name);

// Records plus interner, before any split has been assigned. "splits", when
// non-empty, carries per-record split tags recovered from a saved dataset.
struct ParsedRecords {
  Interner ids;
  std::vector<InteractionRecord> records;
  std::vector<std::optional<Split>> splits;
};

struct SplitOptions {
  double test_fraction = 0.15;
  uint64_t seed = 1;
  bool time_ordered = false;   // take the most recent questions as test
  int min_answers = 2;         // distinct-answerer floor for test eligibility
};

struct QuestionInfo {
  NodeId asker;
  std::vector<size_t> record_idx;     // positions in Dataset::records
  std::vector<NodeId> answerers;      // distinct, ascending local
  std::optional<int64_t> first_timestamp;
};

class Dataset {
 public:
  Dataset(Interner ids, std::vector<InteractionRecord> records,
          std::vector<Split> question_split);

  const Interner& ids() const { return ids_; }
  const std::vector<InteractionRecord>& records() const { return records_; }
  uint32_t count(NodeKind kind) const { return counts_[size_t(kind)]; }

  Split split_of(uint32_t question_local) const { return question_split_.at(question_local); }
  const std::vector<Split>& question_splits() const { return question_split_; }
  const QuestionInfo& question(uint32_t question_local) const;
  std::vector<uint32_t> questions_in(Split s) const;

  // Accepted answerer if flagged, else highest vote, ties to smallest local.
  NodeId best_answerer(uint32_t question_local) const;

  std::vector<InteractionRecord> train_records() const;
  std::vector<TrainingCase> train_cases() const;

  // True when the question's asker appears in no training record.
  bool asker_unseen_in_training(uint32_t question_local) const;

  size_t self_answer_count() const { return self_answers_; }

  bool operator==(const Dataset& other) const;

 private:
  Interner ids_;
  std::vector<InteractionRecord> records_;
  std::vector<Split> question_split_;
  std::array<uint32_t, 3> counts_{0, 0, 0};
  std::vector<QuestionInfo> questions_;
  std::vector<char> user_in_training_;
  size_t self_answers_ = 0;
};

// Deterministic question-level split. Draws up to half of the test quota
// from questions whose asker has no other activity, so the new-asker pool
// stays populated; classification into the two test pools is recomputed
// against the final training set either way.
Dataset make_splits(ParsedRecords parsed, const SplitOptions& opt);

// Everything in the train split (or honor per-record tags if present).
Dataset dataset_from_parsed(ParsedRecords parsed);

// Re-interns a record subset into a fresh, dense id space. Training
// artifacts (graph, embeddings, checkpoints) live in the space interned
// from the train records alone, so entities seen only at test time resolve
// to "unknown" exactly like entities never seen at all.
ParsedRecords reintern_records(const Interner& ids,
                               const std::vector<InteractionRecord>& records);

}  // namespace cqr
