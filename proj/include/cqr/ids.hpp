#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>

namespace cqr {

enum class NodeKind : uint8_t { Question = 0, User = 1, Tag = 2 };

inline char kind_letter(NodeKind k) {
  switch (k) {
    case NodeKind::Question: return 'q';
    case NodeKind::User: return 'u';
    case NodeKind::Tag: return 't';
  }
  return '?';
}

// Typed node identifier. Locals are dense per kind (0..count-1), so a
// (kind, local) pair addresses a row in any per-kind table.
struct NodeId {
  NodeKind kind = NodeKind::Question;
  uint32_t local = 0;

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

inline NodeId question_id(uint32_t local) { return {NodeKind::Question, local}; }
inline NodeId user_id(uint32_t local) { return {NodeKind::User, local}; }
inline NodeId tag_id(uint32_t local) { return {NodeKind::Tag, local}; }

inline std::string to_string(NodeId id) {
  return std::string(1, kind_letter(id.kind)) + ":" + std::to_string(id.local);
}

struct NodeIdHash {
  size_t operator()(NodeId id) const {
    return std::hash<uint64_t>{}((uint64_t(id.kind) << 32) | id.local);
  }
};

}  // namespace cqr
