#include "cqr/seq.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "cqr/optim.hpp"
#include "cqr/rng.hpp"
#include "cqr/tape.hpp"
#include "cqr/textio.hpp"

namespace cqr {

const char* variant_name(SeqVariant v) {
  switch (v) {
    case SeqVariant::Un: return "un";
    case SeqVariant::T: return "t";
    case SeqVariant::A: return "a";
    case SeqVariant::TA: return "ta";
  }
  return "?";
}

std::optional<SeqVariant> variant_from_name(std::string_view name) {
  if (name == "un") return SeqVariant::Un;
  if (name == "t") return SeqVariant::T;
  if (name == "a") return SeqVariant::A;
  if (name == "ta") return SeqVariant::TA;
  return std::nullopt;
}

const char* regressor_kind_name(RegressorKind k) {
  return k == RegressorKind::LinearEps ? "linear_eps" : "mlp";
}

std::optional<RegressorKind> regressor_kind_from_name(std::string_view name) {
  if (name == "linear_eps") return RegressorKind::LinearEps;
  if (name == "mlp") return RegressorKind::Mlp;
  return std::nullopt;
}

std::vector<double> assemble(const EmbeddingTable& table, const TrainingCase& c,
                             const FeatureSpec& spec) {
  if (spec.dim != table.dim())
    throw ShapeMismatch("assemble: spec dim " + std::to_string(spec.dim) +
                        " != table dim " + std::to_string(table.dim()));
  if (spec.uses_tags() && c.tags.empty())
    throw EmptyTagSet("assemble: variant needs tags but the case has none");

  const int d = spec.dim;
  std::vector<double> x(size_t(spec.feature_len()), 0.0);
  auto put = [&](int slot, NodeId id) {
    if (auto r = table.row_of(id)) {
      const double* src = table.row(*r);
      std::copy(src, src + d, x.begin() + size_t(slot) * d);
    }
  };
  put(0, c.question);
  put(1, c.answerer);
  int slot = 2;
  if (spec.uses_asker()) put(slot++, c.asker);
  if (spec.uses_tags()) {
    size_t known = 0;
    double* dst = x.data() + size_t(slot) * d;
    for (NodeId t : c.tags) {
      if (auto r = table.row_of(t)) {
        const double* src = table.row(*r);
        for (int j = 0; j < d; ++j) dst[j] += src[j];
        ++known;
      }
    }
    if (known > 0)
      for (int j = 0; j < d; ++j) dst[j] /= double(known);
  }
  return x;
}

double RegressorModel::score(std::span<const double> x) const {
  if (kind == RegressorKind::LinearEps && layers.empty()) {
    double s = bias;
    for (size_t i = 0; i < x.size(); ++i) s += w.data[i] * x[i];
    return s;
  }
  // relu MLP, linear output
  std::vector<double> cur(x.begin(), x.end());
  for (size_t l = 0; l + 1 < layers.size(); l += 2) {
    const Tensor& wt = layers[l];
    const Tensor& bt = layers[l + 1];
    std::vector<double> next(size_t(wt.cols), 0.0);
    for (int i = 0; i < wt.rows; ++i) {
      double v = cur[i];
      if (v == 0.0) continue;
      const double* row = wt.row(i);
      for (int j = 0; j < wt.cols; ++j) next[j] += v * row[j];
    }
    bool last = l + 2 >= layers.size();
    for (int j = 0; j < wt.cols; ++j) {
      next[j] += bt.data[j];
      if (!last && next[j] < 0.0) next[j] = 0.0;
    }
    cur = std::move(next);
  }
  return cur[0];
}

void RegressorModel::write(std::ostream& out) const {
  out << "seqmodel v1 " << variant_name(spec.variant) << ' ' << regressor_kind_name(kind)
      << ' ' << spec.dim << '\n';
  if (kind == RegressorKind::LinearEps) {
    write_tensor(out, "w", w);
    out << "bias " << g9(bias) << '\n';
  } else {
    out << "layers " << layers.size() << '\n';
    for (size_t i = 0; i < layers.size(); ++i)
      write_tensor(out, "m" + std::to_string(i), layers[i]);
  }
}

RegressorModel RegressorModel::read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "empty seqmodel file");
  std::istringstream hs(line);
  std::string magic, version, variant, kind;
  int dim = 0;
  hs >> magic >> version >> variant >> kind >> dim;
  if (magic != "seqmodel" || version != "v1" || hs.fail())
    throw ParseError(1, "bad seqmodel header");
  RegressorModel m;
  auto v = variant_from_name(variant);
  auto k = regressor_kind_from_name(kind);
  if (!v || !k) throw ParseError(1, "bad seqmodel variant or kind");
  m.spec = {*v, dim};
  m.kind = *k;
  if (m.kind == RegressorKind::LinearEps) {
    m.w = read_tensor(in, "w");
    if (!std::getline(in, line)) throw ParseError(0, "missing bias line");
    std::istringstream bs(line);
    std::string tag;
    bs >> tag >> m.bias;
    if (tag != "bias" || bs.fail()) throw ParseError(0, "bad bias line");
  } else {
    if (!std::getline(in, line)) throw ParseError(0, "missing layers line");
    std::istringstream ls(line);
    std::string tag;
    size_t count = 0;
    ls >> tag >> count;
    if (tag != "layers" || ls.fail()) throw ParseError(0, "bad layers line");
    for (size_t i = 0; i < count; ++i)
      m.layers.push_back(read_tensor(in, "m" + std::to_string(i)));
  }
  return m;
}

double eps_insensitive_loss(std::span<const double> w, double bias, double l2,
                            double eps_ins, std::span<const double> x, double y) {
  double r = bias - y;
  for (size_t i = 0; i < x.size(); ++i) r += w[i] * x[i];
  double loss = std::max(0.0, std::abs(r) - eps_ins);
  double reg = 0.0;
  for (double v : w) reg += v * v;
  return loss + l2 * reg;
}

void eps_insensitive_grad(std::span<const double> w, double bias, double l2,
                          double eps_ins, std::span<const double> x, double y,
                          std::span<double> grad_w, double& grad_b) {
  double r = bias - y;
  for (size_t i = 0; i < x.size(); ++i) r += w[i] * x[i];
  double s = 0.0;
  if (std::abs(r) > eps_ins) s = r > 0.0 ? 1.0 : -1.0;
  for (size_t i = 0; i < x.size(); ++i) grad_w[i] += s * x[i] + 2.0 * l2 * w[i];
  grad_b += s;
}

namespace {

RegressorModel train_linear_eps(const Tensor& features, const std::vector<double>& targets,
                                const FeatureSpec& spec, const RegressorHyper& hyper) {
  const int d = features.cols;
  RegressorModel m;
  m.spec = spec;
  m.kind = RegressorKind::LinearEps;
  m.w = Tensor(1, d);
  Tensor bias(1, 1);

  AdamState sw, sb;
  AdamConfig adam{hyper.step_size, 0.9, 0.999, 1e-8};
  std::vector<size_t> order(size_t(features.rows));
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  size_t batch = hyper.batch > 0 ? size_t(hyper.batch) : order.size();
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    Rng rng(mix_seed(hyper.seed, 0x11ULL, uint64_t(epoch)));
    rng.shuffle(order);
    for (size_t begin = 0; begin < order.size(); begin += batch) {
      size_t end = std::min(order.size(), begin + batch);
      Tensor gw(1, d);
      double gb = 0.0;
      for (size_t i = begin; i < end; ++i) {
        const double* x = features.row(int(order[i]));
        eps_insensitive_grad({m.w.data.data(), size_t(d)}, bias.data[0], hyper.l2,
                             hyper.eps_insensitive, {x, size_t(d)}, targets[order[i]],
                             {gw.data.data(), size_t(d)}, gb);
      }
      double inv = 1.0 / double(end - begin);
      for (double& v : gw.data) v *= inv;
      Tensor gbias = Tensor::scalar(gb * inv);
      adam_step(m.w, gw, sw, adam);
      adam_step(bias, gbias, sb, adam);
      for (double v : m.w.data)
        if (!std::isfinite(v)) throw Divergence("train_pointwise: weights diverged");
    }
  }
  m.bias = bias.data[0];
  return m;
}

RegressorModel train_mlp(const Tensor& features, const std::vector<double>& targets,
                         const FeatureSpec& spec, const RegressorHyper& hyper) {
  const int d = features.cols;
  Rng init(mix_seed(hyper.seed, 0x31ULL));
  auto glorot = [&](int r, int c) {
    Tensor t(r, c);
    double bound = std::sqrt(6.0 / double(r + c));
    for (double& v : t.data) v = init.uniform(-bound, bound);
    return t;
  };
  RegressorModel m;
  m.spec = spec;
  m.kind = RegressorKind::Mlp;
  m.layers = {glorot(d, hyper.mlp_h1),          Tensor(1, hyper.mlp_h1),
              glorot(hyper.mlp_h1, hyper.mlp_h2), Tensor(1, hyper.mlp_h2),
              glorot(hyper.mlp_h2, hyper.mlp_h3), Tensor(1, hyper.mlp_h3),
              glorot(hyper.mlp_h3, 1),          Tensor(1, 1)};

  std::vector<AdamState> states(m.layers.size());
  AdamConfig adam{hyper.step_size, 0.9, 0.999, 1e-8};
  std::vector<size_t> order(size_t(features.rows));
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  size_t batch = hyper.batch > 0 ? size_t(hyper.batch) : order.size();
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    Rng rng(mix_seed(hyper.seed, 0x32ULL, uint64_t(epoch)));
    rng.shuffle(order);
    for (size_t begin = 0; begin < order.size(); begin += batch) {
      size_t end = std::min(order.size(), begin + batch);
      Tensor xb(int(end - begin), d), yb(int(end - begin), 1);
      for (size_t i = begin; i < end; ++i) {
        const double* src = features.row(int(order[i]));
        std::copy(src, src + d, xb.row(int(i - begin)));
        yb.at(int(i - begin), 0) = targets[order[i]];
      }
      Tape tape;
      int x = tape.input(std::move(xb), false);
      std::vector<int> pnodes;
      for (Tensor& t : m.layers) pnodes.push_back(tape.input(t, true));
      int z = x;
      for (size_t l = 0; l + 1 < pnodes.size(); l += 2) {
        z = tape.add_bias(tape.matmul(z, pnodes[l]), pnodes[l + 1]);
        if (l + 2 < pnodes.size()) z = tape.relu(z);
      }
      int loss = tape.mse(z, tape.input(std::move(yb), false));
      if (!std::isfinite(tape.value(loss).data[0]))
        throw Divergence("train_pointwise: loss is not finite");
      tape.backward(loss);
      for (size_t i = 0; i < m.layers.size(); ++i)
        adam_step(m.layers[i], tape.grad(pnodes[i]), states[i], adam);
    }
  }
  return m;
}

}  // namespace

RegressorModel train_pointwise(const Tensor& features, const std::vector<double>& targets,
                               RegressorKind kind, const FeatureSpec& spec,
                               const RegressorHyper& hyper) {
  if (features.rows == 0) throw EmptyInput("train_pointwise: no examples");
  if (size_t(features.rows) != targets.size())
    throw DataError("train_pointwise: features and targets differ in length");
  if (features.cols != spec.feature_len())
    throw ShapeMismatch("train_pointwise: features are " + features.shape_str() +
                        " but the spec wants " + std::to_string(spec.feature_len()) +
                        " columns");
  return kind == RegressorKind::LinearEps
             ? train_linear_eps(features, targets, spec, hyper)
             : train_mlp(features, targets, spec, hyper);
}

std::vector<PairConstraint> derive_pairs(const std::vector<TrainingCase>& cases) {
  std::map<uint32_t, std::vector<size_t>> by_question;
  for (size_t i = 0; i < cases.size(); ++i)
    by_question[cases[i].question.local].push_back(i);

  std::vector<PairConstraint> out;
  for (const auto& [qlocal, idx] : by_question) {
    for (size_t a : idx)
      for (size_t b : idx) {
        if (a == b) continue;
        const TrainingCase& ca = cases[a];
        const TrainingCase& cb = cases[b];
        if (ca.answerer == cb.answerer) continue;
        if (ca.target > cb.target)
          out.push_back({ca.question, ca.asker, ca.tags, ca.answerer, cb.answerer});
      }
  }
  return out;
}

double pair_hinge_loss(std::span<const double> w, std::span<const double> x_plus,
                       std::span<const double> x_minus, double margin) {
  double s = 0.0;
  for (size_t i = 0; i < w.size(); ++i) s += w[i] * (x_plus[i] - x_minus[i]);
  return std::max(0.0, margin - s);
}

RegressorModel train_pairwise(const std::vector<PairConstraint>& constraints,
                              const EmbeddingTable& table, const FeatureSpec& spec,
                              double margin, double l2, const RegressorHyper& hyper) {
  if (constraints.empty()) throw EmptyInput("train_pairwise: no constraints");

  const int d = table.dim();
  const int answerer_off = d;  // slot 1
  // x_plus - x_minus is zero outside the answerer block
  Tensor deltas(int(constraints.size()), d);
  bool any_nonzero = false;
  for (size_t i = 0; i < constraints.size(); ++i) {
    double* row = deltas.row(int(i));
    if (auto r = table.row_of(constraints[i].preferred)) {
      const double* src = table.row(*r);
      for (int j = 0; j < d; ++j) row[j] += src[j];
    }
    if (auto r = table.row_of(constraints[i].other)) {
      const double* src = table.row(*r);
      for (int j = 0; j < d; ++j) row[j] -= src[j];
    }
    for (int j = 0; j < d; ++j)
      if (row[j] != 0.0) any_nonzero = true;
  }
  if (!any_nonzero)
    throw DegenerateInput("train_pairwise: every constraint has identical feature pairs");

  RegressorModel m;
  m.spec = spec;
  m.kind = RegressorKind::LinearEps;  // linear scorer, no bias
  m.w = Tensor(1, spec.feature_len());

  AdamState sw;
  AdamConfig adam{hyper.step_size, 0.9, 0.999, 1e-8};
  std::vector<size_t> order(constraints.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  size_t batch = hyper.batch > 0 ? size_t(hyper.batch) : order.size();
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    Rng rng(mix_seed(hyper.seed, 0x51ULL, uint64_t(epoch)));
    rng.shuffle(order);
    for (size_t begin = 0; begin < order.size(); begin += batch) {
      size_t end = std::min(order.size(), begin + batch);
      Tensor gw(1, spec.feature_len());
      for (size_t i = begin; i < end; ++i) {
        const double* delta = deltas.row(int(order[i]));
        double s = 0.0;
        for (int j = 0; j < d; ++j) s += m.w.data[answerer_off + j] * delta[j];
        if (margin - s > 0.0)
          for (int j = 0; j < d; ++j) gw.data[answerer_off + j] -= delta[j];
      }
      double inv = 1.0 / double(end - begin);
      for (size_t j = 0; j < gw.data.size(); ++j)
        gw.data[j] = gw.data[j] * inv + 2.0 * l2 * m.w.data[j];
      adam_step(m.w, gw, sw, adam);
      for (double v : m.w.data)
        if (!std::isfinite(v)) throw Divergence("train_pairwise: weights diverged");
    }
  }
  return m;
}

}  // namespace cqr
