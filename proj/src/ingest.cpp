#include "cqr/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include <json.hpp>

namespace cqr {

using nlohmann::json;

namespace {

std::vector<NodeId> intern_tags(Interner& ids, const std::vector<std::string>& tags,
                                size_t line) {
  if (tags.empty()) throw ParseError(line, "empty tag list");
  std::vector<NodeId> out;
  out.reserve(tags.size());
  for (const auto& t : tags) out.push_back(ids.intern(NodeKind::Tag, t));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

const json& require(const json& obj, const char* key, size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw MissingField(key, line);
  return *it;
}

std::string require_string(const json& obj, const char* key, size_t line) {
  const json& v = require(obj, key, line);
  if (!v.is_string()) throw ParseError(line, std::string(key) + " must be a string");
  return v.get<std::string>();
}

}  // namespace

ParsedRecords parse_canonical(std::istream& in) {
  ParsedRecords out;
  std::string line;
  size_t lineno = 0;
  bool any_split = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(lineno, e.what());
    }
    if (!obj.is_object()) throw ParseError(lineno, "expected a JSON object");

    InteractionRecord r;
    r.question = out.ids.intern(NodeKind::Question, require_string(obj, "question_id", lineno));
    r.asker = out.ids.intern(NodeKind::User, require_string(obj, "asker_id", lineno));
    r.answerer = out.ids.intern(NodeKind::User, require_string(obj, "answerer_id", lineno));

    const json& tags = require(obj, "tags", lineno);
    if (!tags.is_array() || tags.empty())
      throw ParseError(lineno, "tags must be a non-empty array");
    std::vector<std::string> tag_names;
    for (const auto& t : tags) {
      if (!t.is_string()) throw ParseError(lineno, "tags entries must be strings");
      tag_names.push_back(t.get<std::string>());
    }
    r.tags = intern_tags(out.ids, tag_names, lineno);

    const json& score = require(obj, "score", lineno);
    if (!score.is_number_integer()) throw ParseError(lineno, "score must be an integer");
    r.score = score.get<int64_t>();

    const json& best = require(obj, "is_best", lineno);
    if (!best.is_boolean()) throw ParseError(lineno, "is_best must be a boolean");
    r.is_best = best.get<bool>();

    if (auto it = obj.find("timestamp"); it != obj.end() && !it->is_null()) {
      if (!it->is_number_integer()) throw ParseError(lineno, "timestamp must be an integer");
      r.timestamp = it->get<int64_t>();
    }

    std::optional<Split> split;
    if (auto it = obj.find("split"); it != obj.end() && it->is_string()) {
      split = split_from_name(it->get<std::string>());
      if (!split) throw ParseError(lineno, "unknown split tag");
      any_split = true;
    }

    out.records.push_back(std::move(r));
    out.splits.push_back(split);
  }
  if (!any_split) out.splits.clear();
  return out;
}

namespace {

void write_record(const Interner& ids, const InteractionRecord& r,
                  const Split* split, std::ostream& out) {
  json obj = json::object();
  obj["question_id"] = ids.name(r.question);
  obj["asker_id"] = ids.name(r.asker);
  obj["answerer_id"] = ids.name(r.answerer);
  json tags = json::array();
  for (NodeId t : r.tags) tags.push_back(ids.name(t));
  obj["tags"] = std::move(tags);
  obj["score"] = r.score;
  obj["is_best"] = r.is_best;
  if (r.timestamp) obj["timestamp"] = *r.timestamp;
  if (split) obj["split"] = split_name(*split);
  out << obj.dump() << '\n';
}

}  // namespace

void serialize_canonical(const Dataset& ds, std::ostream& out, bool with_splits) {
  for (const auto& r : ds.records()) {
    Split s = ds.split_of(r.question.local);
    write_record(ds.ids(), r, with_splits ? &s : nullptr, out);
  }
}

void serialize_canonical(const Interner& ids,
                         const std::vector<InteractionRecord>& records,
                         std::ostream& out) {
  for (const auto& r : records) write_record(ids, r, nullptr, out);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return dataset_from_parsed(parse_canonical(in));
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  serialize_canonical(ds, out);
}

// ---------------------------------------------------------------------------
// Stack Exchange Posts dump
// ---------------------------------------------------------------------------

namespace {

std::string xml_unescape(std::string_view s, size_t line) {
  std::string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size();) {
    if (s[i] != '&') {
      out += s[i++];
      continue;
    }
    size_t end = s.find(';', i);
    if (end == std::string_view::npos) throw ParseError(line, "unterminated XML entity");
    std::string_view ent = s.substr(i + 1, end - i - 1);
    if (ent == "lt") out += '<';
    else if (ent == "gt") out += '>';
    else if (ent == "amp") out += '&';
    else if (ent == "quot") out += '"';
    else if (ent == "apos") out += '\'';
    else if (!ent.empty() && ent[0] == '#') {
      int code = 0;
      if (ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X'))
        code = int(std::stoul(std::string(ent.substr(2)), nullptr, 16));
      else
        code = int(std::stoul(std::string(ent.substr(1))));
      if (code < 0x80) out += char(code);  // dump tags are ASCII
    } else {
      throw ParseError(line, "unknown XML entity &" + std::string(ent) + ";");
    }
    i = end + 1;
  }
  return out;
}

// Pulls key="value" attributes out of a <row .../> element.
std::unordered_map<std::string, std::string> parse_row_attrs(std::string_view row,
                                                             size_t line) {
  std::unordered_map<std::string, std::string> attrs;
  size_t i = 0;
  while (i < row.size()) {
    while (i < row.size() && (row[i] == ' ' || row[i] == '\t')) ++i;
    if (i >= row.size() || row[i] == '/' || row[i] == '>') break;
    size_t eq = row.find('=', i);
    if (eq == std::string_view::npos) throw ParseError(line, "attribute without '='");
    std::string key(row.substr(i, eq - i));
    if (eq + 1 >= row.size() || row[eq + 1] != '"')
      throw ParseError(line, "attribute value not quoted");
    size_t close = row.find('"', eq + 2);
    if (close == std::string_view::npos) throw ParseError(line, "unterminated attribute");
    attrs[key] = xml_unescape(row.substr(eq + 2, close - eq - 2), line);
    i = close + 1;
  }
  return attrs;
}

std::vector<std::string> parse_tag_list(const std::string& raw, size_t line) {
  std::vector<std::string> tags;
  size_t i = 0;
  while (i < raw.size()) {
    if (raw[i] != '<') throw ParseError(line, "malformed Tags attribute");
    size_t close = raw.find('>', i);
    if (close == std::string::npos) throw ParseError(line, "malformed Tags attribute");
    if (close > i + 1) tags.emplace_back(raw.substr(i + 1, close - i - 1));
    i = close + 1;
  }
  return tags;
}

struct PendingQuestion {
  std::string owner;
  std::vector<std::string> tags;
  std::string accepted_answer_id;  // empty when none
};

}  // namespace

ParsedRecords parse_stackexchange(std::istream& in, StackExchangeStats* stats) {
  ParsedRecords out;
  StackExchangeStats local;
  StackExchangeStats& st = stats ? *stats : local;

  std::unordered_map<std::string, PendingQuestion> questions;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t pos = line.find("<row");
    if (pos == std::string::npos) continue;
    auto attrs = parse_row_attrs(std::string_view(line).substr(pos + 4), lineno);

    auto get = [&](const char* key) -> const std::string* {
      auto it = attrs.find(key);
      return it == attrs.end() ? nullptr : &it->second;
    };
    const std::string* id = get("Id");
    const std::string* type = get("PostTypeId");
    if (!id || !type) throw ParseError(lineno, "row lacks Id or PostTypeId");

    if (*type == "1") {
      ++st.questions;
      const std::string* owner = get("OwnerUserId");
      const std::string* tags_raw = get("Tags");
      if (!owner || owner->empty()) {
        ++st.skipped_missing_owner;
        continue;
      }
      if (!tags_raw) {
        ++st.skipped_no_tags;
        continue;
      }
      auto tags = parse_tag_list(*tags_raw, lineno);
      if (tags.empty()) {
        ++st.skipped_no_tags;
        continue;
      }
      PendingQuestion q;
      q.owner = *owner;
      q.tags = std::move(tags);
      if (const std::string* acc = get("AcceptedAnswerId")) q.accepted_answer_id = *acc;
      questions.emplace(*id, std::move(q));
    } else if (*type == "2") {
      ++st.answers;
      const std::string* parent = get("ParentId");
      const std::string* owner = get("OwnerUserId");
      const std::string* score = get("Score");
      if (!owner || owner->empty()) {
        ++st.skipped_missing_owner;
        continue;
      }
      if (!parent) throw ParseError(lineno, "answer row lacks ParentId");
      auto qit = parent ? questions.find(*parent) : questions.end();
      if (qit == questions.end()) {
        ++st.skipped_orphan_answers;
        continue;
      }
      const PendingQuestion& q = qit->second;
      InteractionRecord r;
      r.question = out.ids.intern(NodeKind::Question, *parent);
      r.asker = out.ids.intern(NodeKind::User, q.owner);
      r.answerer = out.ids.intern(NodeKind::User, *owner);
      r.tags = intern_tags(out.ids, q.tags, lineno);
      r.score = score ? std::stoll(*score) : 0;
      r.is_best = !q.accepted_answer_id.empty() && q.accepted_answer_id == *id;
      out.records.push_back(std::move(r));
    }
    // other post types (wiki, moderator) are irrelevant here
  }
  return out;
}

}  // namespace cqr
