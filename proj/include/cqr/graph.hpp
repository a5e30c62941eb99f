#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "cqr/records.hpp"
#include "cqr/tensor.hpp"

namespace cqr {

enum class EdgeKind : uint8_t { Asked = 0, Answered = 1, Tagged = 2 };

const char* edge_kind_name(EdgeKind k);
std::optional<EdgeKind> edge_kind_from_name(std::string_view name);

struct Edge {
  int src = 0;  // graph node index
  int dst = 0;
  EdgeKind kind = EdgeKind::Asked;

  friend bool operator==(const Edge&, const Edge&) = default;
};

class CqaGraph;
struct ColdAttachment;
CqaGraph build_graph(const std::vector<InteractionRecord>& records);
ColdAttachment attach_cold_question(const CqaGraph& graph, const std::vector<NodeId>& tags,
                                    std::optional<NodeId> asker);
CqaGraph read_graph(std::istream& in);

// Undirected heterogeneous graph over question/user/tag nodes. Node indices
// are kind-major (questions, users, tags), ascending by local id, covering
// exactly the nodes that occur in the input records. Cold questions attached
// later are appended after all built nodes so existing indices stay stable.
class CqaGraph {
 public:
  int node_count() const { return int(nodes_.size()); }
  int questions() const { return kind_count_[0]; }
  int users() const { return kind_count_[1]; }
  int tags() const { return kind_count_[2]; }

  NodeId node_at(int index) const { return nodes_.at(index); }
  std::optional<int> index_of(NodeId id) const;

  std::span<const int> neighbors(int v) const {
    return {adj_.data() + adj_ptr_[v], adj_.data() + adj_ptr_[v + 1]};
  }
  int degree(int v) const { return adj_ptr_[v + 1] - adj_ptr_[v]; }
  bool adjacent(int u, int v) const;

  const std::vector<Edge>& edges() const { return edges_; }
  size_t collapsed_self_edges() const { return collapsed_self_edges_; }

  uint64_t structural_hash() const;

 private:
  friend CqaGraph build_graph(const std::vector<InteractionRecord>&);
  friend CqaGraph read_graph(std::istream&);
  friend ColdAttachment attach_cold_question(const CqaGraph&, const std::vector<NodeId>&,
                                             std::optional<NodeId>);

  void rebuild_adjacency();

  std::vector<NodeId> nodes_;
  std::array<int, 3> kind_count_{0, 0, 0};
  // per-kind local -> node index, -1 when the local never occurs
  std::array<std::vector<int>, 3> local_to_index_;
  std::vector<Edge> edges_;
  std::vector<int> adj_ptr_, adj_;
  size_t collapsed_self_edges_ = 0;
};

// build_graph keeps one edge per distinct interacting pair. A user who both
// asked and answered a question keeps a single edge of kind Asked; the
// collapse is counted.

// A-hat = D^(-1/2) (A + I) D^(-1/2) with D the self-looped degree matrix.
struct NormalizedAdjacency {
  SparseMatrix ahat;
};

NormalizedAdjacency normalize(const CqaGraph& graph);

// attach_cold_question extends a copy of the graph with one new question
// node wired to the given (known) tags and, when present, the asker.
// Unknown tags are dropped; throws UnknownTag when none remain.
struct ColdAttachment {
  CqaGraph graph;
  int cold_node = -1;
  std::vector<NodeId> dropped_tags;
};

// Text dump:  "cqagraph v1 <nQ> <nU> <nT>"  then one "src dst kind" per line.
void write_graph(const CqaGraph& graph, std::ostream& out);

}  // namespace cqr
