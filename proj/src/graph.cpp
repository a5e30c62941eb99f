#include "cqr/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace cqr {

const char* edge_kind_name(EdgeKind k) {
  switch (k) {
    case EdgeKind::Asked: return "asked";
    case EdgeKind::Answered: return "answered";
    case EdgeKind::Tagged: return "tagged";
  }
  return "?";
}

std::optional<EdgeKind> edge_kind_from_name(std::string_view name) {
  if (name == "asked") return EdgeKind::Asked;
  if (name == "answered") return EdgeKind::Answered;
  if (name == "tagged") return EdgeKind::Tagged;
  return std::nullopt;
}

std::optional<int> CqaGraph::index_of(NodeId id) const {
  const auto& map = local_to_index_[size_t(id.kind)];
  if (id.local >= map.size()) return std::nullopt;
  int idx = map[id.local];
  if (idx < 0) return std::nullopt;
  return idx;
}

bool CqaGraph::adjacent(int u, int v) const {
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

void CqaGraph::rebuild_adjacency() {
  int n = node_count();
  std::vector<int> deg(n, 0);
  for (const auto& e : edges_) {
    ++deg[e.src];
    ++deg[e.dst];
  }
  adj_ptr_.assign(size_t(n) + 1, 0);
  for (int i = 0; i < n; ++i) adj_ptr_[i + 1] = adj_ptr_[i] + deg[i];
  adj_.resize(edges_.size() * 2);
  std::vector<int> cursor(adj_ptr_.begin(), adj_ptr_.end() - 1);
  for (const auto& e : edges_) {
    adj_[cursor[e.src]++] = e.dst;
    adj_[cursor[e.dst]++] = e.src;
  }
  for (int i = 0; i < n; ++i)
    std::sort(adj_.begin() + adj_ptr_[i], adj_.begin() + adj_ptr_[i + 1]);
}

uint64_t CqaGraph::structural_hash() const {
  uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](uint64_t v) {
    h ^= v;
    h *= 1099511628211ULL;
  };
  for (int c : kind_count_) mix(uint64_t(c));
  for (const auto& n : nodes_) {
    mix(uint64_t(n.kind));
    mix(n.local);
  }
  for (const auto& e : edges_) {
    mix(uint64_t(e.src));
    mix(uint64_t(e.dst));
    mix(uint64_t(e.kind));
  }
  return h;
}

CqaGraph build_graph(const std::vector<InteractionRecord>& records) {
  if (records.empty()) throw EmptyInput("build_graph: no records");

  CqaGraph g;
  // collect occurring locals per kind
  std::array<std::vector<uint32_t>, 3> locals;
  auto note = [&](NodeId id) { locals[size_t(id.kind)].push_back(id.local); };
  for (const auto& r : records) {
    note(r.question);
    note(r.asker);
    note(r.answerer);
    for (NodeId t : r.tags) note(t);
  }
  for (auto& v : locals) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  for (auto kind : {NodeKind::Question, NodeKind::User, NodeKind::Tag}) {
    auto& v = locals[size_t(kind)];
    auto& map = g.local_to_index_[size_t(kind)];
    map.assign(v.empty() ? 0 : v.back() + 1, -1);
    for (uint32_t local : v) {
      map[local] = int(g.nodes_.size());
      g.nodes_.push_back({kind, local});
    }
    g.kind_count_[size_t(kind)] = int(v.size());
  }

  // pair -> position in edges_, kinds collapse with Asked taking precedence
  std::unordered_map<uint64_t, size_t> seen;
  std::unordered_set<uint64_t> collapsed;
  auto add_edge = [&](int a, int b, EdgeKind kind) {
    uint64_t key = (uint64_t(std::min(a, b)) << 32) | uint64_t(std::max(a, b));
    auto it = seen.find(key);
    if (it == seen.end()) {
      seen.emplace(key, g.edges_.size());
      g.edges_.push_back({a, b, kind});
      return;
    }
    Edge& e = g.edges_[it->second];
    if (kind != e.kind && (kind == EdgeKind::Asked || e.kind == EdgeKind::Asked)) {
      e.kind = EdgeKind::Asked;
      collapsed.insert(key);
    }
  };

  for (const auto& r : records) {
    int q = *g.index_of(r.question);
    int asker = *g.index_of(r.asker);
    int answerer = *g.index_of(r.answerer);
    add_edge(asker, q, EdgeKind::Asked);
    add_edge(answerer, q, EdgeKind::Answered);
    for (NodeId t : r.tags) add_edge(q, *g.index_of(t), EdgeKind::Tagged);
  }

  g.collapsed_self_edges_ = collapsed.size();
  std::sort(g.edges_.begin(), g.edges_.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
  });
  g.rebuild_adjacency();
  return g;
}

NormalizedAdjacency normalize(const CqaGraph& graph) {
  int n = graph.node_count();
  if (n == 0) throw EmptyInput("normalize: empty graph");

  std::vector<double> inv_sqrt_deg(n);
  for (int i = 0; i < n; ++i) inv_sqrt_deg[i] = 1.0 / std::sqrt(double(graph.degree(i) + 1));

  SparseMatrix m(n, n);
  m.symmetric = true;
  size_t nnz = graph.edges().size() * 2 + size_t(n);
  m.col.reserve(nnz);
  m.val.reserve(nnz);
  for (int i = 0; i < n; ++i) {
    auto nb = graph.neighbors(i);
    size_t k = 0;
    // neighbors are sorted; weave the self loop into column order
    while (k < nb.size() && nb[k] < i) {
      m.col.push_back(nb[k]);
      m.val.push_back(inv_sqrt_deg[i] * inv_sqrt_deg[nb[k]]);
      ++k;
    }
    m.col.push_back(i);
    m.val.push_back(inv_sqrt_deg[i] * inv_sqrt_deg[i]);
    while (k < nb.size()) {
      m.col.push_back(nb[k]);
      m.val.push_back(inv_sqrt_deg[i] * inv_sqrt_deg[nb[k]]);
      ++k;
    }
    m.row_ptr[i + 1] = int(m.col.size());
  }
  return {std::move(m)};
}

ColdAttachment attach_cold_question(const CqaGraph& graph, const std::vector<NodeId>& tags,
                                    std::optional<NodeId> asker) {
  ColdAttachment out;
  std::vector<int> tag_nodes;
  for (NodeId t : tags) {
    if (t.kind != NodeKind::Tag) throw DataError("attach_cold_question: non-tag in tag set");
    if (auto idx = graph.index_of(t)) {
      tag_nodes.push_back(*idx);
    } else {
      out.dropped_tags.push_back(t);
    }
  }
  if (tag_nodes.empty())
    throw UnknownTag("attach_cold_question: no tag of the cold question exists in the graph");
  std::sort(tag_nodes.begin(), tag_nodes.end());
  tag_nodes.erase(std::unique(tag_nodes.begin(), tag_nodes.end()), tag_nodes.end());

  int asker_node = -1;
  if (asker) {
    if (asker->kind != NodeKind::User)
      throw DataError("attach_cold_question: asker is not a user");
    auto idx = graph.index_of(*asker);
    if (!idx) throw DataError("attach_cold_question: asker not present in graph");
    asker_node = *idx;
  }

  CqaGraph g = graph;
  int cold = g.node_count();
  uint32_t cold_local =
      g.local_to_index_[size_t(NodeKind::Question)].empty()
          ? 0
          : uint32_t(g.local_to_index_[size_t(NodeKind::Question)].size());
  g.nodes_.push_back({NodeKind::Question, cold_local});
  g.local_to_index_[size_t(NodeKind::Question)].push_back(cold);
  ++g.kind_count_[size_t(NodeKind::Question)];
  if (asker_node >= 0) g.edges_.push_back({asker_node, cold, EdgeKind::Asked});
  for (int t : tag_nodes) g.edges_.push_back({cold, t, EdgeKind::Tagged});
  g.rebuild_adjacency();

  out.graph = std::move(g);
  out.cold_node = cold;
  return out;
}

void write_graph(const CqaGraph& graph, std::ostream& out) {
  out << "cqagraph v1 " << graph.questions() << ' ' << graph.users() << ' '
      << graph.tags() << '\n';
  for (const auto& e : graph.edges())
    out << e.src << ' ' << e.dst << ' ' << edge_kind_name(e.kind) << '\n';
}

CqaGraph read_graph(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ParseError(1, "empty graph file");
  std::istringstream hs(header);
  std::string magic, version;
  int nq = 0, nu = 0, nt = 0;
  hs >> magic >> version >> nq >> nu >> nt;
  if (magic != "cqagraph" || version != "v1" || hs.fail())
    throw ParseError(1, "bad graph header");

  CqaGraph g;
  auto add_kind = [&](NodeKind kind, int count) {
    auto& map = g.local_to_index_[size_t(kind)];
    map.resize(count);
    for (int i = 0; i < count; ++i) {
      map[i] = int(g.nodes_.size());
      g.nodes_.push_back({kind, uint32_t(i)});
    }
    g.kind_count_[size_t(kind)] = count;
  };
  add_kind(NodeKind::Question, nq);
  add_kind(NodeKind::User, nu);
  add_kind(NodeKind::Tag, nt);

  std::string line;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    int src = 0, dst = 0;
    std::string kind;
    ls >> src >> dst >> kind;
    if (ls.fail()) throw ParseError(lineno, "bad edge line");
    auto ek = edge_kind_from_name(kind);
    if (!ek) throw ParseError(lineno, "unknown edge kind " + kind);
    if (src < 0 || src >= g.node_count() || dst < 0 || dst >= g.node_count())
      throw ParseError(lineno, "edge endpoint out of range");
    g.edges_.push_back({src, dst, *ek});
  }
  g.rebuild_adjacency();
  return g;
}

}  // namespace cqr
