#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "cqr/skipgram.hpp"
#include "helpers.hpp"

using namespace cqr;

namespace {

CqaGraph graph_from_text(const std::string& body) {
  std::stringstream in(body);
  return read_graph(in);
}

// triangle 0-1-2 plus tail 2-3-4; kinds are irrelevant to the walker
CqaGraph five_node_graph() {
  return graph_from_text(
      "cqagraph v1 2 3 0\n0 1 answered\n1 2 answered\n0 2 answered\n2 3 answered\n"
      "3 4 answered\n");
}

// Empirical (prev,cur)->next conditionals vs the bias formula.
double worst_transition_gap(const CqaGraph& g, double p, double q, uint64_t seed,
                            int64_t min_steps) {
  WalkConfig cfg;
  cfg.p = p;
  cfg.q = q;
  cfg.walk_length = 40;
  cfg.walks_per_node = 1;
  cfg.seed = seed;

  std::map<std::pair<int, int>, std::map<int, int64_t>> counts;
  int64_t steps = 0;
  for (int iter = 0; steps < min_steps; ++iter) {
    cfg.seed = mix_seed(seed, uint64_t(iter));
    auto walks = generate_walks(g, cfg);
    for (const auto& w : walks)
      for (size_t i = 2; i < w.size(); ++i) {
        ++counts[{w[i - 2], w[i - 1]}][w[i]];
        ++steps;
      }
  }

  double worst = 0.0;
  for (const auto& [state, nexts] : counts) {
    int64_t total = 0;
    for (const auto& [_, c] : nexts) total += c;
    if (total < 2000) continue;
    std::vector<double> want = step_probabilities(g, state.first, state.second, p, q);
    auto nb = g.neighbors(state.second);
    for (size_t i = 0; i < nb.size(); ++i) {
      auto it = nexts.find(nb[i]);
      double got = it == nexts.end() ? 0.0 : double(it->second) / double(total);
      worst = std::max(worst, std::abs(got - want[i]));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("uniform walk when p = q = 1") {
  CqaGraph g = five_node_graph();
  // from (3, 2): neighbors of 2 are {0, 1, 3}; with p=q=1 all weight 1
  std::vector<double> probs = step_probabilities(g, 3, 2, 1.0, 1.0);
  for (double v : probs) CHECK(v == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("bias formula weights return, common, and far neighbors") {
  CqaGraph g = five_node_graph();
  // from (0, 2): neighbors of 2 are {0, 1, 3}; 0 is the return, 1 is
  // adjacent to 0, 3 is two hops away
  std::vector<double> probs = step_probabilities(g, 0, 2, 4.0, 0.25);
  double z = 1.0 / 4.0 + 1.0 + 1.0 / 0.25;
  CHECK(probs[0] == doctest::Approx(0.25 / z));
  CHECK(probs[1] == doctest::Approx(1.0 / z));
  CHECK(probs[2] == doctest::Approx(4.0 / z));
}

TEST_CASE("isolated node walks have length one") {
  CqaGraph g = graph_from_text("cqagraph v1 1 2 0\n0 1 answered\n");
  WalkConfig cfg;
  cfg.walk_length = 20;
  cfg.walks_per_node = 3;
  auto walks = generate_walks(g, cfg);
  REQUIRE(walks.size() == 9);
  for (size_t i = 0; i < walks.size(); ++i)
    if (i % 3 == 2) CHECK(walks[i].size() == 1);  // node 2 is isolated
}

TEST_CASE("huge p and q drive the walker forward along a path") {
  CqaGraph g = graph_from_text(
      "cqagraph v1 1 4 0\n0 1 answered\n1 2 answered\n2 3 answered\n3 4 answered\n");
  WalkConfig cfg;
  cfg.p = 1e12;  // never return
  cfg.q = 1e3;   // never jump, but returning is suppressed much harder
  cfg.walk_length = 5;
  cfg.walks_per_node = 2000;
  cfg.seed = 123;
  auto walks = generate_walks(g, cfg);
  int from_zero = 0;
  for (size_t i = 0; i < walks.size(); ++i) {
    if (walks[i].front() != 0 || walks[i].size() < 5) continue;
    ++from_zero;
    for (int step = 0; step < 5; ++step) CHECK(walks[i][step] == step);
  }
  CHECK(from_zero == 2000);
}

TEST_CASE("empirical transitions match the formula within 2 percent") {
  CqaGraph g = five_node_graph();
  CHECK(worst_transition_gap(g, 1.0, 1.0, 5, 100000) < 0.02);
  CHECK(worst_transition_gap(g, 4.0, 0.25, 6, 100000) < 0.02);
}

TEST_CASE("walk generation is reproducible and thread-count independent") {
  auto parsed = cqrtest::random_records(21, 30, 10, 6);
  CqaGraph g = build_graph(parsed.records);
  WalkConfig cfg;
  cfg.walk_length = 15;
  cfg.walks_per_node = 4;
  cfg.seed = 77;
  auto a = generate_walks(g, cfg, 1);
  auto b = generate_walks(g, cfg, 4);
  CHECK(a == b);
}

TEST_CASE("skip-gram sample gradient matches finite differences") {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed * 13);
    int n = 6, d = 5;
    Tensor in(n, d), out(n, d);
    for (double& v : in.data) v = rng.uniform(-0.8, 0.8);
    for (double& v : out.data) v = rng.uniform(-0.8, 0.8);
    std::vector<int> negs{2, 3, 3, 5};

    Tensor gin(n, d), gout(n, d);
    skipgram_sample_loss_grad(in, out, 0, 1, negs, gin, gout);
    auto eval_in = [&] { return skipgram_sample_loss(in, out, 0, 1, negs); };
    CHECK(cqrtest::max_rel_error_fd(eval_in, in, gin) < 1e-4);
    CHECK(cqrtest::max_rel_error_fd(eval_in, out, gout) < 1e-4);
  }
}

TEST_CASE("constant co-occurrence aligns two embeddings") {
  // nodes 0 and 2 only ever walk with each other; the second component
  // supplies the negative samples
  CqaGraph g = graph_from_text("cqagraph v1 2 2 0\n0 2 answered\n1 3 answered\n");
  WalkConfig cfg;
  cfg.dim = 16;
  cfg.walk_length = 20;
  cfg.walks_per_node = 10;
  cfg.window = 4;
  cfg.negatives = 3;
  cfg.epochs = 200;
  cfg.step_size = 0.05;
  cfg.seed = 5;
  auto walks = generate_walks(g, cfg);
  EmbeddingTable t = train_skipgram(walks, g, cfg);

  auto cosine = [&](int x, int y) {
    const double* a = t.row(x);
    const double* b = t.row(y);
    double dot = 0, na = 0, nb = 0;
    for (int j = 0; j < t.dim(); ++j) {
      dot += a[j] * b[j];
      na += a[j] * a[j];
      nb += b[j] * b[j];
    }
    return dot / std::sqrt(na * nb);
  };
  CHECK(cosine(0, 2) > 0.9);
  CHECK(cosine(0, 1) < 0.5);  // nodes that never co-occur stay apart
}

TEST_CASE("degenerate walk corpora are rejected") {
  CqaGraph g = graph_from_text("cqagraph v1 1 0 0\n");
  WalkConfig cfg;
  auto walks = generate_walks(g, cfg);  // single isolated node
  CHECK_THROWS_AS(train_skipgram(walks, g, cfg), DegenerateInput);
}

TEST_CASE("skip-gram training is deterministic in exact mode") {
  auto parsed = cqrtest::random_records(31, 15, 8, 5);
  CqaGraph g = build_graph(parsed.records);
  WalkConfig cfg;
  cfg.dim = 8;
  cfg.walk_length = 10;
  cfg.walks_per_node = 3;
  cfg.epochs = 2;
  cfg.seed = 9;
  auto walks = generate_walks(g, cfg);
  EmbeddingTable a = train_skipgram(walks, g, cfg);
  EmbeddingTable b = train_skipgram(walks, g, cfg);
  CHECK(a.matrix() == b.matrix());
}

TEST_CASE("embeddings stay finite over training") {
  for (uint64_t seed : {41u, 42u}) {
    auto parsed = cqrtest::random_records(seed, 12, 6, 4);
    CqaGraph g = build_graph(parsed.records);
    WalkConfig cfg;
    cfg.dim = 12;
    cfg.walk_length = 12;
    cfg.walks_per_node = 4;
    cfg.epochs = 10;
    cfg.seed = seed;
    EmbeddingTable t = train_skipgram(generate_walks(g, cfg), g, cfg);
    for (double v : t.matrix().data) CHECK(std::isfinite(v));
  }
}

TEST_CASE("embedding file round-trips") {
  auto parsed = cqrtest::random_records(51, 8, 5, 3);
  CqaGraph g = build_graph(parsed.records);
  WalkConfig cfg;
  cfg.dim = 6;
  cfg.epochs = 1;
  cfg.walk_length = 8;
  cfg.walks_per_node = 2;
  EmbeddingTable t = train_skipgram(generate_walks(g, cfg), g, cfg);

  std::stringstream buf;
  t.write(buf);
  std::string once = buf.str();
  EmbeddingTable back = EmbeddingTable::read(buf);
  REQUIRE(back.count() == t.count());
  REQUIRE(back.dim() == t.dim());
  for (size_t r = 0; r < t.count(); ++r) {
    CHECK(back.node_at(int(r)) == t.node_at(int(r)));
    for (int j = 0; j < t.dim(); ++j)
      CHECK(back.row(int(r))[j] == doctest::Approx(t.row(int(r))[j]).epsilon(1e-8));
  }

  // writing the reloaded table reproduces the file byte for byte
  std::stringstream buf2;
  back.write(buf2);
  CHECK(buf2.str() == once);
}
