#include "cqr/endcold.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "cqr/optim.hpp"
#include "cqr/rng.hpp"
#include "cqr/textio.hpp"

namespace cqr {

namespace {

Tensor glorot(int rows, int cols, Rng& rng) {
  Tensor t(rows, cols);
  double bound = std::sqrt(6.0 / double(rows + cols));
  for (double& v : t.data) v = rng.uniform(-bound, bound);
  return t;
}

constexpr const char* kTensorNames[] = {"x0", "w1", "b1", "w2", "b2", "v1", "c1",
                                        "v2", "c2", "v3", "c3", "v4", "c4"};

}  // namespace

EndColdModel EndColdModel::init(int n_nodes, const EndColdConfig& cfg) {
  Rng rng(mix_seed(cfg.seed, 0xec01dULL));
  EndColdModel m;
  m.cfg = cfg;
  m.n_nodes = n_nodes;
  m.x0 = glorot(n_nodes, cfg.d0, rng);
  m.w1 = glorot(cfg.d0, cfg.d1, rng);
  m.b1 = Tensor(1, cfg.d1);
  m.w2 = glorot(cfg.d1, cfg.d2, rng);
  m.b2 = Tensor(1, cfg.d2);
  int fin = 4 * cfg.d2;
  m.v1 = glorot(fin, cfg.h1, rng);
  m.c1 = Tensor(1, cfg.h1);
  m.v2 = glorot(cfg.h1, cfg.h2, rng);
  m.c2 = Tensor(1, cfg.h2);
  m.v3 = glorot(cfg.h2, cfg.h3, rng);
  m.c3 = Tensor(1, cfg.h3);
  m.v4 = glorot(cfg.h3, 1, rng);
  m.c4 = Tensor(1, 1);
  return m;
}

std::vector<Tensor*> EndColdModel::parameters() {
  return {&x0, &w1, &b1, &w2, &b2, &v1, &c1, &v2, &c2, &v3, &c3, &v4, &c4};
}

std::vector<const Tensor*> EndColdModel::parameters() const {
  return {&x0, &w1, &b1, &w2, &b2, &v1, &c1, &v2, &c2, &v3, &c3, &v4, &c4};
}

uint64_t EndColdModel::content_hash() const {
  uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](uint64_t v) {
    h ^= v;
    h *= 1099511628211ULL;
  };
  for (const Tensor* t : parameters()) {
    mix(uint64_t(t->rows));
    mix(uint64_t(t->cols));
    for (double d : t->data) {
      uint64_t bits;
      static_assert(sizeof(bits) == sizeof(d));
      std::memcpy(&bits, &d, sizeof(bits));
      mix(bits);
    }
  }
  return h;
}

void EndColdModel::write(std::ostream& out) const {
  out << "endcold v1\n";
  out << "dims " << n_nodes << ' ' << cfg.d0 << ' ' << cfg.d1 << ' ' << cfg.d2 << ' '
      << cfg.h1 << ' ' << cfg.h2 << ' ' << cfg.h3 << '\n';
  auto params = parameters();
  for (size_t i = 0; i < params.size(); ++i) write_tensor(out, kTensorNames[i], *params[i]);
}

EndColdModel EndColdModel::read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "endcold v1")
    throw ParseError(1, "bad endcold checkpoint header");
  if (!std::getline(in, line)) throw ParseError(2, "missing dims line");
  std::istringstream ds(line);
  std::string tag;
  EndColdModel m;
  ds >> tag >> m.n_nodes >> m.cfg.d0 >> m.cfg.d1 >> m.cfg.d2 >> m.cfg.h1 >> m.cfg.h2 >>
      m.cfg.h3;
  if (tag != "dims" || ds.fail()) throw ParseError(2, "bad dims line");
  auto params = m.parameters();
  for (size_t i = 0; i < params.size(); ++i)
    *params[i] = read_tensor(in, kTensorNames[i]);
  if (m.x0.rows != m.n_nodes || m.x0.cols != m.cfg.d0)
    throw ParseError(0, "checkpoint x0 shape mismatch");
  return m;
}

Tensor encode(const EndColdModel& model, const SparseMatrix& ahat,
              const Tensor* x0_override) {
  const Tensor& x0 = x0_override ? *x0_override : model.x0;
  if (ahat.cols != x0.rows)
    throw ShapeMismatch("encode: adjacency is " + std::to_string(ahat.rows) + "x" +
                        std::to_string(ahat.cols) + " but x0 is " + x0.shape_str());
  Tensor ax, h1, ah1, h2, tmp;
  kernels::spmm(ahat, x0, ax);
  kernels::matmul(ax, model.w1, tmp);
  kernels::add_bias(tmp, model.b1, h1);
  kernels::relu(h1, h1);
  kernels::spmm(ahat, h1, ah1);
  kernels::matmul(ah1, model.w2, tmp);
  kernels::add_bias(tmp, model.b2, h2);
  return h2;
}

Tensor assemble_case_features(const Tensor& h2, std::span<const CaseRef> cases) {
  const int d = h2.cols;
  Tensor f(int(cases.size()), 4 * d);
  for (size_t i = 0; i < cases.size(); ++i) {
    const CaseRef& c = cases[i];
    if (c.tag_nodes.empty()) throw EmptyTagSet("case has no tag nodes");
    double* row = f.row(int(i));
    auto put = [&](int slot, int node) {
      if (node < 0) return;  // zero slot
      const double* src = h2.row(node);
      std::copy(src, src + d, row + slot * d);
    };
    put(0, c.question);
    put(1, c.answerer);
    put(2, c.asker);
    double inv = 1.0 / double(c.tag_nodes.size());
    for (int t : c.tag_nodes)
      for (int j = 0; j < d; ++j) row[3 * d + j] += inv * h2.at(t, j);
  }
  return f;
}

double mlp_forward(const EndColdModel& model, std::span<const double> feature) {
  Tensor f(1, int(feature.size()));
  std::copy(feature.begin(), feature.end(), f.data.begin());
  Tensor z, tmp;
  kernels::matmul(f, model.v1, tmp);
  kernels::add_bias(tmp, model.c1, z);
  kernels::relu(z, z);
  kernels::matmul(z, model.v2, tmp);
  kernels::add_bias(tmp, model.c2, z);
  kernels::relu(z, z);
  kernels::matmul(z, model.v3, tmp);
  kernels::add_bias(tmp, model.c3, z);
  kernels::relu(z, z);
  kernels::matmul(z, model.v4, tmp);
  kernels::add_bias(tmp, model.c4, z);
  return z.data[0];
}

std::vector<double> predict_many(const EndColdModel& model, const Tensor& h2,
                                 std::span<const CaseRef> cases) {
  Tensor f = assemble_case_features(h2, cases);
  Tensor z, tmp;
  kernels::matmul(f, model.v1, tmp);
  kernels::add_bias(tmp, model.c1, z);
  kernels::relu(z, z);
  kernels::matmul(z, model.v2, tmp);
  kernels::add_bias(tmp, model.c2, z);
  kernels::relu(z, z);
  kernels::matmul(z, model.v3, tmp);
  kernels::add_bias(tmp, model.c3, z);
  kernels::relu(z, z);
  kernels::matmul(z, model.v4, tmp);
  kernels::add_bias(tmp, model.c4, z);
  std::vector<double> out(cases.size());
  for (size_t i = 0; i < cases.size(); ++i) out[i] = z.at(int(i), 0);
  return out;
}

double predict(const EndColdModel& model, const SparseMatrix& ahat, const CaseRef& c) {
  Tensor h2 = encode(model, ahat);
  return predict_many(model, h2, {&c, 1})[0];
}

namespace {

// Selector matrices: row i of the result picks (or averages) rows of H2.
SparseMatrix selector(std::span<const CaseRef> cases, int n_nodes,
                      int CaseRef::* slot) {
  std::vector<std::tuple<int, int, double>> trip;
  for (size_t i = 0; i < cases.size(); ++i) {
    int node = cases[i].*slot;
    if (node >= 0) trip.emplace_back(int(i), node, 1.0);
  }
  return sparse_from_triplets(int(cases.size()), n_nodes, std::move(trip));
}

SparseMatrix tag_selector(std::span<const CaseRef> cases, int n_nodes) {
  std::vector<std::tuple<int, int, double>> trip;
  for (size_t i = 0; i < cases.size(); ++i) {
    const auto& tags = cases[i].tag_nodes;
    if (tags.empty()) throw EmptyTagSet("training case has no tag nodes");
    double inv = 1.0 / double(tags.size());
    for (int t : tags) trip.emplace_back(int(i), t, inv);
  }
  return sparse_from_triplets(int(cases.size()), n_nodes, std::move(trip));
}

struct BatchGraph {
  // tape node ids of the model parameters, in EndColdModel::parameters order
  std::vector<int> param_nodes;
  int h2 = -1;  // n×d2 encoder output node
};

// Records the GCN encode on the tape; parameters enter as inputs so their
// gradients come back out.
BatchGraph record_encode(Tape& tape, EndColdModel& model, const SparseMatrix& ahat) {
  BatchGraph g;
  for (Tensor* p : model.parameters()) g.param_nodes.push_back(tape.input(*p, true));
  int x0 = g.param_nodes[0];
  int w1 = g.param_nodes[1], b1 = g.param_nodes[2];
  int w2 = g.param_nodes[3], b2 = g.param_nodes[4];
  int h1 = tape.relu(tape.add_bias(tape.matmul(tape.spmm(&ahat, x0), w1), b1));
  g.h2 = tape.add_bias(tape.matmul(tape.spmm(&ahat, h1), w2), b2);
  return g;
}

int record_gather(Tape& tape, const BatchGraph& g, const SparseMatrix& sq,
                  const SparseMatrix& su, const SparseMatrix& sa,
                  const SparseMatrix& st) {
  int fq = tape.spmm(&sq, g.h2);
  int fu = tape.spmm(&su, g.h2);
  int fa = tape.spmm(&sa, g.h2);
  int ft = tape.spmm(&st, g.h2);
  return tape.concat({fq, fu, fa, ft});
}

int record_mlp(Tape& tape, const BatchGraph& g, int features) {
  int v1 = g.param_nodes[5], c1 = g.param_nodes[6];
  int v2 = g.param_nodes[7], c2 = g.param_nodes[8];
  int v3 = g.param_nodes[9], c3 = g.param_nodes[10];
  int v4 = g.param_nodes[11], c4 = g.param_nodes[12];
  int z = tape.relu(tape.add_bias(tape.matmul(features, v1), c1));
  z = tape.relu(tape.add_bias(tape.matmul(z, v2), c2));
  z = tape.relu(tape.add_bias(tape.matmul(z, v3), c3));
  return tape.add_bias(tape.matmul(z, v4), c4);
}

}  // namespace

TrainReport train(EndColdModel& model, const SparseMatrix& ahat,
                  const std::vector<CaseRef>& cases, const std::vector<double>& targets) {
  if (cases.empty()) throw EmptyInput("train: no cases");
  if (cases.size() != targets.size())
    throw DataError("train: cases and targets differ in length");

  const EndColdConfig& cfg = model.cfg;
  std::vector<AdamState> states(model.parameters().size());
  AdamConfig adam{cfg.step_size, 0.9, 0.999, 1e-8};

  std::vector<size_t> order(cases.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainReport report;
  size_t batch = cfg.batch > 0 ? size_t(cfg.batch) : cases.size();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng(mix_seed(cfg.seed, 0xe9ULL, uint64_t(epoch)));
    rng.shuffle(order);
    double epoch_loss = 0.0;
    size_t seen = 0;
    for (size_t begin = 0; begin < order.size(); begin += batch) {
      size_t end = std::min(order.size(), begin + batch);
      std::vector<CaseRef> chunk;
      chunk.reserve(end - begin);
      Tensor y(int(end - begin), 1);
      for (size_t i = begin; i < end; ++i) {
        chunk.push_back(cases[order[i]]);
        y.at(int(i - begin), 0) = targets[order[i]];
      }
      SparseMatrix sq = selector(chunk, model.n_nodes, &CaseRef::question);
      SparseMatrix su = selector(chunk, model.n_nodes, &CaseRef::answerer);
      SparseMatrix sa = selector(chunk, model.n_nodes, &CaseRef::asker);
      SparseMatrix st = tag_selector(chunk, model.n_nodes);

      Tape tape;
      BatchGraph g = record_encode(tape, model, ahat);
      int features = record_gather(tape, g, sq, su, sa, st);
      int out = record_mlp(tape, g, features);
      int target = tape.input(std::move(y), false);
      int loss = tape.mse(out, target);

      double loss_value = tape.value(loss).data[0];
      if (!std::isfinite(loss_value)) throw Divergence("train: loss is not finite");
      epoch_loss += loss_value * double(end - begin);
      seen += end - begin;

      tape.backward(loss);
      auto params = model.parameters();
      for (size_t i = 0; i < params.size(); ++i)
        adam_step(*params[i], tape.grad(g.param_nodes[i]), states[i], adam);
    }
    report.epoch_loss.push_back(epoch_loss / double(seen));
  }
  return report;
}

TrainReport train_hinge(EndColdModel& model, const SparseMatrix& ahat,
                        const std::vector<PairCaseRef>& pairs) {
  if (pairs.empty()) throw EmptyInput("train_hinge: no pair constraints");

  const EndColdConfig& cfg = model.cfg;
  std::vector<AdamState> states(model.parameters().size());
  AdamConfig adam{cfg.step_size, 0.9, 0.999, 1e-8};

  std::vector<size_t> order(pairs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainReport report;
  size_t batch = cfg.batch > 0 ? size_t(cfg.batch) : pairs.size();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng(mix_seed(cfg.seed, 0xe10ULL, uint64_t(epoch)));
    rng.shuffle(order);
    double epoch_loss = 0.0;
    size_t seen = 0;
    for (size_t begin = 0; begin < order.size(); begin += batch) {
      size_t end = std::min(order.size(), begin + batch);
      std::vector<CaseRef> plus, minus;
      for (size_t i = begin; i < end; ++i) {
        plus.push_back(pairs[order[i]].preferred);
        minus.push_back(pairs[order[i]].other);
      }
      SparseMatrix sq_p = selector(plus, model.n_nodes, &CaseRef::question);
      SparseMatrix su_p = selector(plus, model.n_nodes, &CaseRef::answerer);
      SparseMatrix sa_p = selector(plus, model.n_nodes, &CaseRef::asker);
      SparseMatrix st_p = tag_selector(plus, model.n_nodes);
      SparseMatrix su_m = selector(minus, model.n_nodes, &CaseRef::answerer);

      Tape tape;
      BatchGraph g = record_encode(tape, model, ahat);
      // the two sides differ only in the answerer slot
      int out_plus = record_mlp(tape, g, record_gather(tape, g, sq_p, su_p, sa_p, st_p));
      int out_minus = record_mlp(tape, g, record_gather(tape, g, sq_p, su_m, sa_p, st_p));
      int loss = tape.hinge_rank(out_plus, out_minus, cfg.hinge_margin);

      double loss_value = tape.value(loss).data[0];
      if (!std::isfinite(loss_value)) throw Divergence("train_hinge: loss is not finite");
      epoch_loss += loss_value * double(end - begin);
      seen += end - begin;

      tape.backward(loss);
      auto params = model.parameters();
      for (size_t i = 0; i < params.size(); ++i)
        adam_step(*params[i], tape.grad(g.param_nodes[i]), states[i], adam);
    }
    report.epoch_loss.push_back(epoch_loss / double(seen));
  }
  return report;
}

CaseRef to_case_ref(const CqaGraph& graph, const TrainingCase& c) {
  CaseRef r;
  auto q = graph.index_of(c.question);
  auto u = graph.index_of(c.answerer);
  auto a = graph.index_of(c.asker);
  r.question = q ? *q : -1;
  r.answerer = u ? *u : -1;
  r.asker = a ? *a : -1;
  for (NodeId t : c.tags)
    if (auto idx = graph.index_of(t)) r.tag_nodes.push_back(*idx);
  return r;
}

EndColdPredictor::EndColdPredictor(const EndColdModel& model, const CqaGraph& base)
    : model_(model), base_(base), base_ahat_(normalize(base).ahat) {
  if (base.node_count() != model.n_nodes)
    throw ShapeMismatch("EndColdPredictor: graph has " +
                        std::to_string(base.node_count()) + " nodes but model expects " +
                        std::to_string(model.n_nodes));
}

std::vector<double> EndColdPredictor::score_cold(const std::vector<NodeId>& tags,
                                                 std::optional<NodeId> asker,
                                                 std::span<const NodeId> candidates) const {
  if (candidates.empty()) throw EmptyCandidateSet("score_cold: no candidates");

  // an unseen asker is the new-asker case: no edge, zero slot
  std::optional<NodeId> known_asker;
  if (asker && base_.index_of(*asker)) known_asker = asker;

  ColdAttachment ext = attach_cold_question(base_, tags, known_asker);
  SparseMatrix ahat = normalize(ext.graph).ahat;

  Tensor x0_ext(model_.n_nodes + 1, model_.cfg.d0);
  std::copy(model_.x0.data.begin(), model_.x0.data.end(), x0_ext.data.begin());
  Tensor h2 = encode(model_, ahat, &x0_ext);

  std::vector<int> tag_nodes;
  for (NodeId t : tags)
    if (auto idx = ext.graph.index_of(t); idx && *idx != ext.cold_node)
      tag_nodes.push_back(*idx);

  int asker_node = -1;
  if (known_asker) asker_node = *ext.graph.index_of(*known_asker);

  std::vector<CaseRef> refs;
  refs.reserve(candidates.size());
  for (NodeId cand : candidates) {
    CaseRef r;
    r.question = ext.cold_node;
    auto u = ext.graph.index_of(cand);
    r.answerer = u ? *u : -1;
    r.asker = asker_node;
    r.tag_nodes = tag_nodes;
    refs.push_back(std::move(r));
  }
  return predict_many(model_, h2, refs);
}

double EndColdPredictor::predict_cold(const std::vector<NodeId>& tags,
                                      std::optional<NodeId> asker, NodeId candidate) const {
  return score_cold(tags, asker, {&candidate, 1})[0];
}

}  // namespace cqr
