#include "cqr/skipgram.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "cqr/rng.hpp"
#include "cqr/textio.hpp"

namespace cqr {

EmbeddingTable::EmbeddingTable(std::vector<NodeId> nodes, int dim)
    : nodes_(std::move(nodes)), vectors_(int(nodes_.size()), dim) {
  rebuild_index();
}

void EmbeddingTable::rebuild_index() {
  for (auto& v : local_to_row_) v.clear();
  for (size_t r = 0; r < nodes_.size(); ++r) {
    auto& map = local_to_row_[size_t(nodes_[r].kind)];
    if (nodes_[r].local >= map.size()) map.resize(nodes_[r].local + 1, -1);
    map[nodes_[r].local] = int(r);
  }
}

std::optional<int> EmbeddingTable::row_of(NodeId id) const {
  const auto& map = local_to_row_[size_t(id.kind)];
  if (id.local >= map.size() || map[id.local] < 0) return std::nullopt;
  return map[id.local];
}

void EmbeddingTable::write(std::ostream& out) const {
  out << "embed v1 " << count() << ' ' << dim() << '\n';
  for (size_t r = 0; r < nodes_.size(); ++r) {
    out << to_string(nodes_[r]);
    const double* v = vectors_.row(int(r));
    for (int j = 0; j < dim(); ++j) out << ' ' << g9(v[j]);
    out << '\n';
  }
}

EmbeddingTable EmbeddingTable::read(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ParseError(1, "empty embedding file");
  std::istringstream hs(header);
  std::string magic, version;
  size_t count = 0;
  int dim = 0;
  hs >> magic >> version >> count >> dim;
  if (magic != "embed" || version != "v1" || hs.fail())
    throw ParseError(1, "bad embedding header");

  std::vector<NodeId> nodes;
  nodes.reserve(count);
  Tensor vecs(int(count), dim);
  std::string line;
  for (size_t r = 0; r < count; ++r) {
    if (!std::getline(in, line)) throw ParseError(r + 2, "truncated embedding file");
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key.size() < 3 || key[1] != ':') throw ParseError(r + 2, "bad node key " + key);
    NodeKind kind;
    switch (key[0]) {
      case 'q': kind = NodeKind::Question; break;
      case 'u': kind = NodeKind::User; break;
      case 't': kind = NodeKind::Tag; break;
      default: throw ParseError(r + 2, "bad node kind in " + key);
    }
    nodes.push_back({kind, uint32_t(std::stoul(key.substr(2)))});
    for (int j = 0; j < dim; ++j) {
      double v;
      ls >> v;
      if (ls.fail()) throw ParseError(r + 2, "bad vector entry");
      vecs.at(int(r), j) = v;
    }
  }
  EmbeddingTable t;
  t.nodes_ = std::move(nodes);
  t.vectors_ = std::move(vecs);
  t.rebuild_index();
  return t;
}

namespace {

inline double log_sigmoid(double x) {
  // -log(1 + exp(-x)) computed stably on both sides
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

}  // namespace

double skipgram_sample_loss(const Tensor& in, const Tensor& out, int center, int context,
                            std::span<const int> negatives) {
  const int dim = in.cols;
  const double* h = in.row(center);
  auto dot = [&](int node) {
    const double* o = out.row(node);
    double s = 0.0;
    for (int j = 0; j < dim; ++j) s += h[j] * o[j];
    return s;
  };
  double loss = -log_sigmoid(dot(context));
  for (int neg : negatives) loss -= log_sigmoid(-dot(neg));
  return loss;
}

double skipgram_sample_loss_grad(const Tensor& in, const Tensor& out, int center,
                                 int context, std::span<const int> negatives,
                                 Tensor& grad_in, Tensor& grad_out) {
  const int dim = in.cols;
  const double* h = in.row(center);
  double* gh = grad_in.row(center);
  double loss = 0.0;
  auto accumulate = [&](int node, double label) {
    const double* o = out.row(node);
    double s = 0.0;
    for (int j = 0; j < dim; ++j) s += h[j] * o[j];
    loss -= label > 0.5 ? log_sigmoid(s) : log_sigmoid(-s);
    double g = sigmoid(s) - label;  // dL/ds
    double* go = grad_out.row(node);
    for (int j = 0; j < dim; ++j) {
      gh[j] += g * o[j];
      go[j] += g * h[j];
    }
  };
  accumulate(context, 1.0);
  for (int neg : negatives) accumulate(neg, 0.0);
  return loss;
}

namespace {

struct NegativeSampler {
  std::vector<double> cum;
  std::vector<int> node;

  static NegativeSampler build(const std::vector<int64_t>& counts) {
    NegativeSampler s;
    double acc = 0.0;
    for (size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] <= 0) continue;
      acc += std::pow(double(counts[i]), 0.75);
      s.cum.push_back(acc);
      s.node.push_back(int(i));
    }
    return s;
  }

  int sample(Rng& rng) const {
    double u = rng.uniform() * cum.back();
    size_t i = std::upper_bound(cum.begin(), cum.end(), u) - cum.begin();
    if (i >= node.size()) i = node.size() - 1;
    return node[i];
  }
};

struct PairSchedule {
  std::vector<int64_t> walk_offset;  // pairs before walk i (one epoch)
  int64_t pairs_per_epoch = 0;
};

PairSchedule count_pairs(const std::vector<std::vector<int>>& walks, int window) {
  PairSchedule s;
  s.walk_offset.reserve(walks.size());
  for (const auto& w : walks) {
    s.walk_offset.push_back(s.pairs_per_epoch);
    int len = int(w.size());
    for (int i = 0; i < len; ++i) {
      int lo = std::max(0, i - window);
      int hi = std::min(len - 1, i + window);
      s.pairs_per_epoch += hi - lo;  // all context slots minus the center itself
    }
  }
  return s;
}

}  // namespace

EmbeddingTable train_skipgram(const std::vector<std::vector<int>>& walks,
                              const CqaGraph& graph, const WalkConfig& cfg, int threads) {
  const int n = graph.node_count();
  const int dim = cfg.dim;

  PairSchedule schedule = count_pairs(walks, cfg.window);
  if (schedule.pairs_per_epoch == 0)
    throw DegenerateInput("train_skipgram: no (center, context) pairs in the walk corpus");

  std::vector<int64_t> counts(n, 0);
  for (const auto& w : walks)
    for (int node : w) ++counts[node];
  NegativeSampler sampler = NegativeSampler::build(counts);

  Tensor in(n, dim), out(n, dim);
  for (int i = 0; i < n; ++i) {
    Rng init(mix_seed(cfg.seed, 0x5eedULL, uint64_t(i)));
    double* row = in.row(i);
    for (int j = 0; j < dim; ++j) row[j] = init.uniform(-0.5 / dim, 0.5 / dim);
  }

  const int64_t total_updates = schedule.pairs_per_epoch * cfg.epochs;
  const double lr0 = cfg.step_size;
  auto lr_at = [&](int64_t done) {
    double f = double(done) / double(total_updates);
    return lr0 * (1.0 - 0.99 * f);
  };

  auto train_walk = [&](const std::vector<int>& walk, Rng& rng, int64_t done_base,
                        std::vector<double>& gh) {
    int len = int(walk.size());
    int64_t done = done_base;
    for (int i = 0; i < len; ++i) {
      int center = walk[i];
      int lo = std::max(0, i - cfg.window);
      int hi = std::min(len - 1, i + cfg.window);
      double* h = in.row(center);
      for (int c = lo; c <= hi; ++c) {
        if (c == i) continue;
        int context = walk[c];
        double lr = lr_at(done++);
        std::fill(gh.begin(), gh.end(), 0.0);
        auto update = [&](int target, double label) {
          double* o = out.row(target);
          double s = 0.0;
          for (int j = 0; j < dim; ++j) s += h[j] * o[j];
          double g = (sigmoid(s) - label) * lr;
          for (int j = 0; j < dim; ++j) {
            gh[j] += g * o[j];
            o[j] -= g * h[j];
          }
        };
        update(context, 1.0);
        for (int k = 0; k < cfg.negatives; ++k) {
          int neg = sampler.sample(rng);
          if (neg == context) continue;
          update(neg, 0.0);
        }
        for (int j = 0; j < dim; ++j) h[j] -= gh[j];
      }
    }
  };

  bool hogwild = cfg.parallel_updates && threads > 1;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    int64_t epoch_base = schedule.pairs_per_epoch * epoch;
    if (!hogwild) {
      Rng rng(mix_seed(cfg.seed, 0xabcdULL, uint64_t(epoch)));
      std::vector<double> gh(dim);
      for (size_t w = 0; w < walks.size(); ++w)
        train_walk(walks[w], rng, epoch_base + schedule.walk_offset[w], gh);
    } else {
#pragma omp parallel num_threads(threads)
      {
        std::vector<double> gh(dim);
#pragma omp for schedule(dynamic, 16)
        for (int64_t w = 0; w < int64_t(walks.size()); ++w) {
          Rng rng(mix_seed(cfg.seed, uint64_t(w) + 0x77ULL, uint64_t(epoch)));
          train_walk(walks[w], rng, epoch_base + schedule.walk_offset[w], gh);
        }
      }
    }
  }

  std::vector<NodeId> nodes;
  nodes.reserve(n);
  for (int i = 0; i < n; ++i) nodes.push_back(graph.node_at(i));
  EmbeddingTable table(std::move(nodes), dim);
  table.matrix() = std::move(in);
  return table;
}

}  // namespace cqr
