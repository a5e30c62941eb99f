#include "cqr/walks.hpp"

#include <list>
#include <unordered_map>

#include "cqr/rng.hpp"

namespace cqr {

namespace {

struct AliasTable {
  std::vector<double> prob;
  std::vector<int> alias;

  static AliasTable build(const std::vector<double>& weights) {
    size_t k = weights.size();
    AliasTable t;
    t.prob.assign(k, 0.0);
    t.alias.assign(k, 0);
    double total = 0.0;
    for (double w : weights) total += w;
    std::vector<double> scaled(k);
    for (size_t i = 0; i < k; ++i) scaled[i] = weights[i] * double(k) / total;
    std::vector<int> small, large;
    for (size_t i = 0; i < k; ++i)
      (scaled[i] < 1.0 ? small : large).push_back(int(i));
    while (!small.empty() && !large.empty()) {
      int s = small.back();
      small.pop_back();
      int l = large.back();
      large.pop_back();
      t.prob[s] = scaled[s];
      t.alias[s] = l;
      scaled[l] = scaled[l] + scaled[s] - 1.0;
      (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    for (int i : large) t.prob[i] = 1.0;
    for (int i : small) t.prob[i] = 1.0;
    return t;
  }

  int sample(Rng& rng) const {
    int i = int(rng.uniform_int(uint32_t(prob.size())));
    return rng.uniform() < prob[i] ? i : alias[i];
  }
};

// Bounded cache of per-(prev, cur) alias tables, one instance per thread.
class AliasCache {
 public:
  explicit AliasCache(size_t capacity) : capacity_(capacity ? capacity : 1) {}

  const AliasTable& get(const CqaGraph& g, int prev, int cur, double p, double q) {
    uint64_t key = (uint64_t(uint32_t(prev)) << 32) | uint32_t(cur);
    auto it = map_.find(key);
    if (it != map_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second.first);
      return it->second.second;
    }
    if (map_.size() >= capacity_) {
      map_.erase(lru_.back());
      lru_.pop_back();
    }
    std::vector<double> w = raw_weights(g, prev, cur, p, q);
    lru_.push_front(key);
    auto [pos, inserted] =
        map_.emplace(key, std::make_pair(lru_.begin(), AliasTable::build(w)));
    return pos->second.second;
  }

  static std::vector<double> raw_weights(const CqaGraph& g, int prev, int cur, double p,
                                         double q) {
    auto nb = g.neighbors(cur);
    std::vector<double> w(nb.size());
    for (size_t i = 0; i < nb.size(); ++i) {
      int x = nb[i];
      if (x == prev) w[i] = 1.0 / p;
      else if (g.adjacent(x, prev)) w[i] = 1.0;
      else w[i] = 1.0 / q;
    }
    return w;
  }

 private:
  size_t capacity_;
  std::list<uint64_t> lru_;
  std::unordered_map<uint64_t, std::pair<std::list<uint64_t>::iterator, AliasTable>> map_;
};

std::vector<int> one_walk(const CqaGraph& g, const WalkConfig& cfg, AliasCache& cache,
                          int start, Rng& rng) {
  std::vector<int> walk;
  walk.reserve(cfg.walk_length);
  walk.push_back(start);
  if (cfg.walk_length == 1) return walk;

  auto first_nb = g.neighbors(start);
  if (first_nb.empty()) return walk;  // dead end
  walk.push_back(first_nb[rng.uniform_int(uint32_t(first_nb.size()))]);

  while (int(walk.size()) < cfg.walk_length) {
    int cur = walk.back();
    int prev = walk[walk.size() - 2];
    auto nb = g.neighbors(cur);
    if (nb.empty()) break;
    const AliasTable& table = cache.get(g, prev, cur, cfg.p, cfg.q);
    walk.push_back(nb[table.sample(rng)]);
  }
  return walk;
}

}  // namespace

std::vector<double> step_probabilities(const CqaGraph& graph, int prev, int cur, double p,
                                       double q) {
  std::vector<double> w = AliasCache::raw_weights(graph, prev, cur, p, q);
  double total = 0.0;
  for (double v : w) total += v;
  for (double& v : w) v /= total;
  return w;
}

std::vector<std::vector<int>> generate_walks(const CqaGraph& graph, const WalkConfig& cfg,
                                             int threads) {
  int n = graph.node_count();
  std::vector<std::vector<int>> walks(size_t(n) * cfg.walks_per_node);
  const int total = n * cfg.walks_per_node;
#pragma omp parallel num_threads(threads) if (threads > 1)
  {
    AliasCache cache(cfg.alias_cache_capacity);
#pragma omp for schedule(dynamic, 64)
    for (int i = 0; i < total; ++i) {
      int iteration = i / n;
      int start = i % n;
      Rng rng(mix_seed(cfg.seed, uint64_t(start), uint64_t(iteration)));
      walks[i] = one_walk(graph, cfg, cache, start, rng);
    }
  }
  return walks;
}

}  // namespace cqr
