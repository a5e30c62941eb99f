#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cqr/endcold.hpp"
#include "cqr/route.hpp"
#include "cqr/seq.hpp"
#include "helpers.hpp"

using namespace cqr;

namespace {

CqaGraph graph_from_text(const std::string& body) {
  std::stringstream in(body);
  return read_graph(in);
}

EmbeddingTable handmade_table(int users, int dim, const std::function<double(int, int)>& f) {
  std::vector<NodeId> nodes;
  for (int u = 0; u < users; ++u) nodes.push_back(user_id(uint32_t(u)));
  EmbeddingTable t(std::move(nodes), dim);
  for (int u = 0; u < users; ++u)
    for (int j = 0; j < dim; ++j) t.matrix().at(u, j) = f(u, j);
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------
// sequential pipeline
// ---------------------------------------------------------------------------

TEST_CASE("assemble slot layout") {
  std::vector<NodeId> nodes = {question_id(0), user_id(0), user_id(1), tag_id(0), tag_id(1)};
  EmbeddingTable t(std::move(nodes), 4);
  for (size_t r = 0; r < t.count(); ++r)
    for (int j = 0; j < 4; ++j) t.matrix().at(int(r), j) = double(r + 1);

  TrainingCase c;
  c.question = question_id(0);
  c.answerer = user_id(0);
  c.asker = user_id(1);
  c.tags = {tag_id(0), tag_id(1)};

  FeatureSpec ta{SeqVariant::TA, 4};
  auto x = assemble(t, c, ta);
  REQUIRE(x.size() == 16);
  CHECK(x[0] == 1.0);    // question block
  CHECK(x[4] == 2.0);    // answerer block
  CHECK(x[8] == 3.0);    // asker block
  CHECK(x[12] == 4.5);   // mean of tag rows 4 and 5

  // cold question: zero block
  c.question = {NodeKind::Question, 999};
  auto cold = assemble(t, c, ta);
  for (int j = 0; j < 4; ++j) CHECK(cold[j] == 0.0);

  // two tags average; single tag is itself
  c.tags = {tag_id(1)};
  CHECK(assemble(t, c, ta)[12] == 5.0);

  FeatureSpec un{SeqVariant::Un, 4};
  CHECK(assemble(t, c, un).size() == 8);

  FeatureSpec tspec{SeqVariant::T, 4};
  c.tags.clear();
  CHECK_THROWS_AS(assemble(t, c, tspec), EmptyTagSet);
  CHECK(assemble(t, c, un).size() == 8);  // Un ignores the empty tag set
}

TEST_CASE("pointwise linear regressor finds a constant target") {
  Rng rng(2);
  int n = 60, d = 6;
  Tensor features(n, d);
  for (double& v : features.data) v = rng.uniform(-1.0, 1.0);
  std::vector<double> targets(n, 3.0);

  FeatureSpec spec{SeqVariant::Un, 3};
  RegressorHyper hyper;
  hyper.eps_insensitive = 0.0;  // analytic optimum is exactly b=c, w=0
  hyper.l2 = 0.0;
  hyper.step_size = 2e-2;
  hyper.epochs = 400;
  hyper.batch = 0;
  RegressorModel m = train_pointwise(features, targets, RegressorKind::LinearEps, spec, hyper);
  CHECK(std::abs(m.bias - 3.0) < 2e-2);
  for (double v : m.w.data) CHECK(std::abs(v) < 5e-2);
}

TEST_CASE("mlp regressor memorizes a single example") {
  Tensor features(1, 4);
  features.data = {0.3, -0.2, 0.8, 0.1};
  std::vector<double> targets{2.5};
  FeatureSpec spec{SeqVariant::Un, 2};
  RegressorHyper hyper;
  hyper.step_size = 1e-2;
  hyper.epochs = 500;
  hyper.mlp_h1 = 16;
  hyper.mlp_h2 = 8;
  hyper.mlp_h3 = 4;
  RegressorModel m = train_pointwise(features, targets, RegressorKind::Mlp, spec, hyper);
  double pred = m.score({features.data.data(), 4});
  CHECK((pred - 2.5) * (pred - 2.5) < 1e-3);
}

TEST_CASE("pointwise training is deterministic") {
  Rng rng(5);
  Tensor features(20, 4);
  for (double& v : features.data) v = rng.uniform(-1.0, 1.0);
  std::vector<double> targets(20);
  for (double& v : targets) v = rng.uniform(-3.0, 3.0);
  FeatureSpec spec{SeqVariant::Un, 2};
  RegressorHyper hyper;
  hyper.epochs = 20;
  for (RegressorKind kind : {RegressorKind::LinearEps, RegressorKind::Mlp}) {
    RegressorModel a = train_pointwise(features, targets, kind, spec, hyper);
    RegressorModel b = train_pointwise(features, targets, kind, spec, hyper);
    CHECK(a.w == b.w);
    CHECK(a.layers == b.layers);
    CHECK(a.bias == b.bias);
  }
}

TEST_CASE("derive_pairs enumerates strict orderings only") {
  auto make_case = [](uint32_t q, uint32_t u, double y) {
    TrainingCase c;
    c.question = question_id(q);
    c.answerer = user_id(u);
    c.asker = user_id(100);
    c.tags = {tag_id(0)};
    c.target = y;
    return c;
  };
  // {5, 2} -> one pair
  CHECK(derive_pairs({make_case(0, 1, 5), make_case(0, 2, 2)}).size() == 1);
  // {3, 3} -> tie, no pair
  CHECK(derive_pairs({make_case(1, 1, 3), make_case(1, 2, 3)}).empty());
  // {5, 2, 2} -> 5 beats each 2
  auto pairs = derive_pairs({make_case(2, 1, 5), make_case(2, 2, 2), make_case(2, 3, 2)});
  CHECK(pairs.size() == 2);
  for (const auto& p : pairs) CHECK(p.preferred == user_id(1));
  // single answer -> nothing
  CHECK(derive_pairs({make_case(3, 1, 9)}).empty());
}

TEST_CASE("pairwise training separates separable constraints") {
  // user 0 is preferred over users 1..3 everywhere; embeddings are fixed
  EmbeddingTable table = handmade_table(4, 3, [](int u, int j) {
    return u == 0 ? (j == 0 ? 1.0 : 0.0) : (j == u - 1 ? -0.5 : 0.1);
  });
  std::vector<PairConstraint> constraints;
  for (uint32_t other = 1; other <= 3; ++other)
    for (uint32_t q = 0; q < 4; ++q)
      constraints.push_back(
          {question_id(q), user_id(10), {tag_id(0)}, user_id(0), user_id(other)});

  FeatureSpec spec{SeqVariant::TA, 3};
  RegressorHyper hyper;
  hyper.step_size = 5e-2;
  hyper.epochs = 300;
  hyper.batch = 0;
  double margin = 1.0;
  RegressorModel m = train_pairwise(constraints, table, spec, margin, 0.0, hyper);

  double total = 0.0;
  for (const auto& c : constraints) {
    TrainingCase plus, minus;
    plus.question = minus.question = c.question;
    plus.asker = minus.asker = c.asker;
    plus.tags = minus.tags = c.tags;
    plus.answerer = c.preferred;
    minus.answerer = c.other;
    auto xp = assemble(table, plus, spec);
    auto xm = assemble(table, minus, spec);
    double loss = pair_hinge_loss({m.w.data.data(), m.w.data.size()}, xp, xm, margin);
    total += loss;
    double s = 0.0;
    for (size_t i = 0; i < xp.size(); ++i) s += m.w.data[i] * (xp[i] - xm[i]);
    CHECK(s >= margin - 1e-6);
  }
  CHECK(total <= 1e-12);
}

TEST_CASE("pointwise and pairwise agree on a dominant candidate") {
  // user 0's embedding direction earns the top vote on every question
  EmbeddingTable table = handmade_table(5, 2, [](int u, int j) {
    if (u == 0) return j == 0 ? 1.0 : 0.0;
    return j == 0 ? -0.3 : 0.4 + 0.1 * u;
  });
  FeatureSpec spec{SeqVariant::TA, 2};

  std::vector<TrainingCase> cases;
  for (uint32_t q = 0; q < 6; ++q)
    for (uint32_t u = 0; u < 4; ++u) {
      TrainingCase c;
      c.question = question_id(q);
      c.answerer = user_id(u);
      c.asker = user_id(4);
      c.tags = {tag_id(0)};
      c.target = u == 0 ? 10.0 : 1.0;
      cases.push_back(c);
    }

  Tensor features(int(cases.size()), spec.feature_len());
  std::vector<double> targets;
  for (size_t i = 0; i < cases.size(); ++i) {
    auto x = assemble(table, cases[i], spec);
    std::copy(x.begin(), x.end(), features.row(int(i)));
    targets.push_back(cases[i].target);
  }
  RegressorHyper hyper;
  hyper.step_size = 5e-2;
  hyper.epochs = 200;
  hyper.batch = 0;
  RegressorModel pointwise =
      train_pointwise(features, targets, RegressorKind::LinearEps, spec, hyper);
  RegressorModel pairwise =
      train_pairwise(derive_pairs(cases), table, spec, 1.0, 0.0, hyper);

  RoutingQuery q;
  q.tags = {tag_id(0)};
  q.asker = user_id(4);
  for (uint32_t u = 0; u < 4; ++u) q.candidates.push_back(user_id(u));
  CHECK(route(SeqScorer(table, pointwise), q).best == user_id(0));
  CHECK(route(SeqScorer(table, pairwise), q).best == user_id(0));
}

TEST_CASE("pairwise rejects degenerate constraint sets") {
  EmbeddingTable table = handmade_table(2, 3, [](int, int) { return 0.25; });
  std::vector<PairConstraint> cs = {
      {question_id(0), user_id(9), {tag_id(0)}, user_id(0), user_id(1)}};
  FeatureSpec spec{SeqVariant::TA, 3};
  RegressorHyper hyper;
  CHECK_THROWS_AS(train_pairwise(cs, table, spec, 1.0, 0.0, hyper), DegenerateInput);
  CHECK_THROWS_AS(train_pairwise({}, table, spec, 1.0, 0.0, hyper), EmptyInput);
}

TEST_CASE("seqmodel files round-trip") {
  Rng rng(8);
  Tensor features(10, 8);
  for (double& v : features.data) v = rng.uniform(-1.0, 1.0);
  std::vector<double> targets(10);
  for (double& v : targets) v = rng.uniform(-2.0, 2.0);
  FeatureSpec spec{SeqVariant::TA, 2};
  RegressorHyper hyper;
  hyper.epochs = 5;
  hyper.mlp_h1 = 8;
  hyper.mlp_h2 = 6;
  hyper.mlp_h3 = 4;
  for (RegressorKind kind : {RegressorKind::LinearEps, RegressorKind::Mlp}) {
    RegressorModel m = train_pointwise(features, targets, kind, spec, hyper);
    std::stringstream buf;
    m.write(buf);
    std::string once = buf.str();
    RegressorModel back = RegressorModel::read(buf);
    CHECK(back.kind == m.kind);
    CHECK(back.spec.variant == m.spec.variant);
    std::vector<double> x(8, 0.4);
    CHECK(back.score(x) == doctest::Approx(m.score(x)).epsilon(1e-7));
    std::stringstream buf2;
    back.write(buf2);
    CHECK(buf2.str() == once);
  }
}

// ---------------------------------------------------------------------------
// end-to-end model
// ---------------------------------------------------------------------------

namespace {

EndColdConfig tiny_config(int d = 2) {
  EndColdConfig cfg;
  cfg.d0 = cfg.d1 = cfg.d2 = d;
  cfg.h1 = 8;
  cfg.h2 = 6;
  cfg.h3 = 4;
  cfg.seed = 3;
  return cfg;
}

}  // namespace

TEST_CASE("encode closed forms") {
  // single isolated question node: A-hat = [1]
  CqaGraph g1 = graph_from_text("cqagraph v1 1 0 0\n");
  EndColdConfig cfg;
  cfg.d0 = cfg.d1 = cfg.d2 = 1;
  EndColdModel m = EndColdModel::init(1, cfg);
  m.x0.data = {0.7};
  m.w1.data = {2.0};
  m.b1.data = {0.1};
  m.w2.data = {-1.5};
  m.b2.data = {0.2};
  SparseMatrix ahat = normalize(g1).ahat;
  Tensor h2 = encode(m, ahat);
  double h1 = std::max(0.0, 0.7 * 2.0 + 0.1);
  CHECK(h2.data[0] == doctest::Approx(h1 * -1.5 + 0.2).epsilon(1e-12));

  // zero inputs and zero biases propagate zero
  m.x0.data = {0.0};
  m.b1.data = {0.0};
  m.b2.data = {0.0};
  CHECK(encode(m, ahat).data[0] == 0.0);

  // two connected nodes: one round of averaging per layer
  CqaGraph g2 = graph_from_text("cqagraph v1 1 1 0\n0 1 answered\n");
  EndColdModel m2 = EndColdModel::init(2, cfg);
  m2.x0.data = {1.0, 3.0};
  m2.w1.data = {1.0};
  m2.b1.data = {0.0};
  m2.w2.data = {1.0};
  m2.b2.data = {0.5};
  Tensor h = encode(m2, normalize(g2).ahat);
  // A X0 = [2, 2]; relu -> [2, 2]; A H1 = [2, 2]; +0.5
  CHECK(h.data[0] == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(h.data[1] == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("predict assembles the quadruple with mean tags and zero slots") {
  CqaGraph g = graph_from_text(
      "cqagraph v1 1 2 2\n0 1 answered\n0 2 asked\n0 3 tagged\n0 4 tagged\n");
  EndColdModel m = EndColdModel::init(5, tiny_config());
  SparseMatrix ahat = normalize(g).ahat;
  Tensor h2 = encode(m, ahat);

  CaseRef both;
  both.question = 0;
  both.answerer = 1;
  both.asker = 2;
  both.tag_nodes = {3, 4};
  CaseRef one_tag = both;
  one_tag.tag_nodes = {3};

  Tensor f = assemble_case_features(h2, {&both, 1});
  int d = h2.cols;
  for (int j = 0; j < d; ++j) {
    CHECK(f.at(0, 3 * d + j) ==
          doctest::Approx((h2.at(3, j) + h2.at(4, j)) / 2.0).epsilon(1e-12));
  }
  Tensor f1 = assemble_case_features(h2, {&one_tag, 1});
  for (int j = 0; j < d; ++j) CHECK(f1.at(0, 3 * d + j) == h2.at(3, j));

  // missing asker slot is exactly zero
  CaseRef no_asker = both;
  no_asker.asker = -1;
  Tensor f2 = assemble_case_features(h2, {&no_asker, 1});
  for (int j = 0; j < d; ++j) CHECK(f2.at(0, 2 * d + j) == 0.0);

  CaseRef no_tags = both;
  no_tags.tag_nodes.clear();
  CHECK_THROWS_AS(assemble_case_features(h2, {&no_tags, 1}), EmptyTagSet);
}

TEST_CASE("training memorizes a single case") {
  auto parsed = cqrtest::two_question_corpus();
  CqaGraph g = build_graph(parsed.records);
  SparseMatrix ahat = normalize(g).ahat;

  EndColdConfig cfg = tiny_config(4);
  cfg.epochs = 400;
  cfg.step_size = 1e-2;
  cfg.batch = 0;
  EndColdModel m = EndColdModel::init(g.node_count(), cfg);

  std::vector<TrainingCase> cases = {to_case(parsed.records[0])};
  std::vector<CaseRef> refs = {to_case_ref(g, cases[0])};
  std::vector<double> targets = {cases[0].target};
  TrainReport r = train(m, ahat, refs, targets);
  CHECK(r.epoch_loss.back() < 1e-3);
}

TEST_CASE("constant targets converge to the constant predictor") {
  auto parsed = cqrtest::two_question_corpus();
  CqaGraph g = build_graph(parsed.records);
  SparseMatrix ahat = normalize(g).ahat;

  EndColdConfig cfg = tiny_config(4);
  cfg.epochs = 300;
  cfg.step_size = 1e-2;
  cfg.batch = 0;
  EndColdModel m = EndColdModel::init(g.node_count(), cfg);

  std::vector<CaseRef> refs;
  std::vector<double> targets;
  for (const auto& rec : parsed.records) {
    refs.push_back(to_case_ref(g, to_case(rec)));
    targets.push_back(4.0);
  }
  TrainReport r = train(m, ahat, refs, targets);
  CHECK(r.epoch_loss.back() < 1e-2);
  CHECK(r.epoch_loss.back() <= 0.9 * r.epoch_loss.front());
}

TEST_CASE("training is deterministic for a fixed seed") {
  auto parsed = cqrtest::two_question_corpus();
  CqaGraph g = build_graph(parsed.records);
  SparseMatrix ahat = normalize(g).ahat;
  std::vector<CaseRef> refs;
  std::vector<double> targets;
  for (const auto& rec : parsed.records) {
    refs.push_back(to_case_ref(g, to_case(rec)));
    targets.push_back(double(rec.score));
  }
  EndColdConfig cfg = tiny_config(3);
  cfg.epochs = 12;
  cfg.batch = 2;
  EndColdModel a = EndColdModel::init(g.node_count(), cfg);
  EndColdModel b = EndColdModel::init(g.node_count(), cfg);
  TrainReport ra = train(a, ahat, refs, targets);
  TrainReport rb = train(b, ahat, refs, targets);
  CHECK(ra.epoch_loss == rb.epoch_loss);
  CHECK(a.content_hash() == b.content_hash());
}

TEST_CASE("end-to-end gradient matches finite differences") {
  auto parsed = cqrtest::two_question_corpus();
  CqaGraph g = build_graph(parsed.records);
  REQUIRE(g.node_count() <= 20);
  SparseMatrix ahat = normalize(g).ahat;

  for (uint64_t seed = 1; seed <= 5; ++seed) {
    EndColdConfig cfg = tiny_config(2);
    cfg.seed = seed;
    EndColdModel m = EndColdModel::init(g.node_count(), cfg);
    // nudge biases off the exact relu kinks where finite differences are
    // undefined
    Rng jitter(seed + 900);
    for (Tensor* bt : {&m.b1, &m.b2, &m.c1, &m.c2, &m.c3, &m.c4})
      for (double& v : bt->data) v += jitter.uniform(0.005, 0.02);

    std::vector<CaseRef> refs;
    std::vector<double> targets;
    for (const auto& rec : parsed.records) {
      refs.push_back(to_case_ref(g, to_case(rec)));
      targets.push_back(double(rec.score));
    }
    // the loss as a pure function of the current parameters
    auto eval = [&] {
      Tensor h2 = encode(m, ahat);
      std::vector<double> preds = predict_many(m, h2, refs);
      double acc = 0.0;
      for (size_t i = 0; i < preds.size(); ++i) {
        double dd = preds[i] - targets[i];
        acc += dd * dd;
      }
      return acc / double(preds.size());
    };

    EndColdConfig one = cfg;
    one.epochs = 0;
    (void)one;
    // record one batch on a tape to harvest analytic gradients
    Tape tape;
    std::vector<int> pnodes;
    for (Tensor* p : m.parameters()) pnodes.push_back(tape.input(*p, true));
    // rebuild the same graph the trainer records
    std::vector<std::tuple<int, int, double>> tq, tu, ta, tt;
    for (size_t i = 0; i < refs.size(); ++i) {
      tq.emplace_back(int(i), refs[i].question, 1.0);
      tu.emplace_back(int(i), refs[i].answerer, 1.0);
      if (refs[i].asker >= 0) ta.emplace_back(int(i), refs[i].asker, 1.0);
      for (int t : refs[i].tag_nodes)
        tt.emplace_back(int(i), t, 1.0 / double(refs[i].tag_nodes.size()));
    }
    SparseMatrix sq = sparse_from_triplets(int(refs.size()), g.node_count(), tq);
    SparseMatrix su = sparse_from_triplets(int(refs.size()), g.node_count(), tu);
    SparseMatrix sa = sparse_from_triplets(int(refs.size()), g.node_count(), ta);
    SparseMatrix st = sparse_from_triplets(int(refs.size()), g.node_count(), tt);
    int h1 = tape.relu(tape.add_bias(tape.matmul(tape.spmm(&ahat, pnodes[0]), pnodes[1]),
                                     pnodes[2]));
    int h2 = tape.add_bias(tape.matmul(tape.spmm(&ahat, h1), pnodes[3]), pnodes[4]);
    int feat = tape.concat({tape.spmm(&sq, h2), tape.spmm(&su, h2), tape.spmm(&sa, h2),
                            tape.spmm(&st, h2)});
    int z = tape.relu(tape.add_bias(tape.matmul(feat, pnodes[5]), pnodes[6]));
    z = tape.relu(tape.add_bias(tape.matmul(z, pnodes[7]), pnodes[8]));
    z = tape.relu(tape.add_bias(tape.matmul(z, pnodes[9]), pnodes[10]));
    z = tape.add_bias(tape.matmul(z, pnodes[11]), pnodes[12]);
    Tensor y(int(targets.size()), 1);
    for (size_t i = 0; i < targets.size(); ++i) y.at(int(i), 0) = targets[i];
    int loss = tape.mse(z, tape.input(std::move(y), false));
    tape.backward(loss);

    auto params = m.parameters();
    for (size_t p = 0; p < params.size(); ++p) {
      double err = cqrtest::max_rel_error_fd(eval, *params[p], tape.grad(pnodes[p]));
      CHECK(err < 1e-4);
    }
  }
}

TEST_CASE("predictions are invariant under node relabeling") {
  auto parsed = cqrtest::two_question_corpus();
  CqaGraph g = build_graph(parsed.records);
  int n = g.node_count();
  SparseMatrix ahat = normalize(g).ahat;
  EndColdModel m = EndColdModel::init(n, tiny_config(3));

  // permute node indices
  Rng rng(17);
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);

  std::vector<std::tuple<int, int, double>> trip;
  Tensor dense = ahat.dense();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (dense.at(i, j) != 0.0) trip.emplace_back(perm[i], perm[j], dense.at(i, j));
  SparseMatrix permuted = sparse_from_triplets(n, n, std::move(trip));

  EndColdModel mp = m;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m.cfg.d0; ++j) mp.x0.at(perm[i], j) = m.x0.at(i, j);

  CaseRef c = to_case_ref(g, to_case(parsed.records[2]));
  CaseRef cp = c;
  cp.question = perm[c.question];
  cp.answerer = perm[c.answerer];
  cp.asker = perm[c.asker];
  for (int& t : cp.tag_nodes) t = perm[t];

  double want = predict(m, ahat, c);
  double got = predict(mp, permuted, cp);
  CHECK(std::abs(want - got) < 1e-9);
}

TEST_CASE("cold prediction contracts") {
  auto parsed = cqrtest::two_question_corpus();
  CqaGraph g = build_graph(parsed.records);
  EndColdConfig cfg = tiny_config(3);
  EndColdModel m = EndColdModel::init(g.node_count(), cfg);
  uint64_t model_hash = m.content_hash();
  uint64_t graph_hash = g.structural_hash();

  EndColdPredictor predictor(m, g);
  NodeId t1 = *parsed.ids.find(NodeKind::Tag, "t1");
  NodeId t2 = *parsed.ids.find(NodeKind::Tag, "t2");
  NodeId u1 = *parsed.ids.find(NodeKind::User, "u1");

  // never-seen candidates all score alike
  std::vector<NodeId> unseen = {{NodeKind::User, 100}, {NodeKind::User, 200},
                                {NodeKind::User, 300}};
  auto scores = predictor.score_cold({t1, t2}, u1, unseen);
  CHECK(scores[0] == scores[1]);
  CHECK(scores[1] == scores[2]);

  // new-asker predictions ignore the asker argument entirely
  std::vector<NodeId> cands = {*parsed.ids.find(NodeKind::User, "u2"),
                               *parsed.ids.find(NodeKind::User, "u5")};
  auto no_asker = predictor.score_cold({t1}, std::nullopt, cands);
  auto unseen_asker = predictor.score_cold({t1}, NodeId{NodeKind::User, 777}, cands);
  CHECK(no_asker == unseen_asker);

  // neither the model nor the base graph moved
  CHECK(m.content_hash() == model_hash);
  CHECK(g.structural_hash() == graph_hash);
}

TEST_CASE("identical encoder rows give identical scores") {
  // two users whose only edge is answering the same question
  std::string text = "cqagraph v1 1 2 1\n0 1 answered\n0 2 answered\n0 3 tagged\n";
  CqaGraph g = graph_from_text(text);
  EndColdModel m = EndColdModel::init(4, tiny_config(3));
  // force identical input features for the twin users
  for (int j = 0; j < m.cfg.d0; ++j) m.x0.at(2, j) = m.x0.at(1, j);
  SparseMatrix ahat = normalize(g).ahat;
  Tensor h2 = encode(m, ahat);
  CaseRef a{0, 1, -1, {3}};
  CaseRef b{0, 2, -1, {3}};
  auto scores = predict_many(m, h2, std::vector<CaseRef>{a, b});
  CHECK(scores[0] == scores[1]);
}

TEST_CASE("checkpoints round-trip") {
  EndColdModel m = EndColdModel::init(5, tiny_config(3));
  std::stringstream buf;
  m.write(buf);
  std::string once = buf.str();
  EndColdModel back = EndColdModel::read(buf);
  CHECK(back.n_nodes == m.n_nodes);
  CHECK(back.cfg.d2 == m.cfg.d2);
  for (size_t i = 0; i < m.parameters().size(); ++i) {
    const Tensor& a = *m.parameters()[i];
    const Tensor& b = *back.parameters()[i];
    REQUIRE(a.rows == b.rows);
    for (size_t k = 0; k < a.size(); ++k)
      CHECK(b.data[k] == doctest::Approx(a.data[k]).epsilon(1e-8));
  }
  std::stringstream buf2;
  back.write(buf2);
  CHECK(buf2.str() == once);
}

TEST_CASE("diverging training reports a numeric error") {
  auto parsed = cqrtest::two_question_corpus();
  CqaGraph g = build_graph(parsed.records);
  SparseMatrix ahat = normalize(g).ahat;
  EndColdConfig cfg = tiny_config(3);
  cfg.epochs = 2;
  cfg.batch = 0;
  EndColdModel m = EndColdModel::init(g.node_count(), cfg);
  std::vector<CaseRef> refs;
  std::vector<double> targets;
  for (const auto& rec : parsed.records) {
    refs.push_back(to_case_ref(g, to_case(rec)));
    targets.push_back(1e200);  // squared residual overflows to inf
  }
  CHECK_THROWS_AS(train(m, ahat, refs, targets), NumericError);
}
