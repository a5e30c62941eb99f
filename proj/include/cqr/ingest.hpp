#pragma once

#include <iosfwd>
#include <string>

#include "cqr/dataset.hpp"

namespace cqr {

// Canonical dataset format: one JSON object per line with keys question_id,
// asker_id, answerer_id, tags, score, is_best and optional timestamp/split.
// Unknown keys are ignored. String ids intern in first-seen order.
ParsedRecords parse_canonical(std::istream& in);

void serialize_canonical(const Dataset& ds, std::ostream& out, bool with_splits = true);
void serialize_canonical(const Interner& ids,
                         const std::vector<InteractionRecord>& records,
                         std::ostream& out);

Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& ds, const std::string& path);

struct StackExchangeStats {
  size_t questions = 0;
  size_t answers = 0;
  size_t skipped_missing_owner = 0;
  size_t skipped_no_tags = 0;
  size_t skipped_orphan_answers = 0;
};

// Adapter for a Posts dump: <row .../> lines with Id, PostTypeId (1 question,
// 2 answer), ParentId, OwnerUserId, Score, Tags ("<a><b>"), AcceptedAnswerId.
// Single pass; answers join against the questions seen so far.
ParsedRecords parse_stackexchange(std::istream& in, StackExchangeStats* stats = nullptr);

}  // namespace cqr
