#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "cqr/records.hpp"
#include "cqr/skipgram.hpp"

namespace cqr {

// Feature ablations: Un = (q,u), T = (q,u,tags), A = (q,u,asker),
// TA = (q,u,asker,tags). u is the answerer slot.
enum class SeqVariant : uint8_t { Un = 0, T = 1, A = 2, TA = 3 };

const char* variant_name(SeqVariant v);
std::optional<SeqVariant> variant_from_name(std::string_view name);

struct FeatureSpec {
  SeqVariant variant = SeqVariant::TA;
  int dim = 128;

  bool uses_asker() const { return variant == SeqVariant::A || variant == SeqVariant::TA; }
  bool uses_tags() const { return variant == SeqVariant::T || variant == SeqVariant::TA; }
  int slots() const { return 2 + uses_asker() + uses_tags(); }
  int feature_len() const { return slots() * dim; }
};

// Slot order is question, answerer, then asker and/or tag mean. Absent
// nodes (cold question, new asker, unseen candidate) become zero blocks;
// the tag block is the arithmetic mean of the known tag vectors.
std::vector<double> assemble(const EmbeddingTable& table, const TrainingCase& c,
                             const FeatureSpec& spec);

enum class RegressorKind : uint8_t { LinearEps = 0, Mlp = 1 };

const char* regressor_kind_name(RegressorKind k);
std::optional<RegressorKind> regressor_kind_from_name(std::string_view name);

struct RegressorHyper {
  double step_size = 1e-2;
  int epochs = 60;
  int batch = 256;
  uint64_t seed = 1;
  double eps_insensitive = 0.1;  // linear model tube width
  double l2 = 1e-4;
  int mlp_h1 = 256, mlp_h2 = 128, mlp_h3 = 64;
};

struct RegressorModel {
  FeatureSpec spec;
  RegressorKind kind = RegressorKind::LinearEps;
  // linear: w (1×D) and bias; pairwise models reuse the linear form
  Tensor w;
  double bias = 0.0;
  // mlp
  std::vector<Tensor> layers;  // weight/bias alternating

  double score(std::span<const double> x) const;

  void write(std::ostream& out) const;
  static RegressorModel read(std::istream& in);
};

// Pointwise regression of vote scores on assembled features. LinearEps
// minimizes mean epsilon-insensitive loss + l2*|w|^2; Mlp minimizes MSE.
RegressorModel train_pointwise(const Tensor& features, const std::vector<double>& targets,
                               RegressorKind kind, const FeatureSpec& spec,
                               const RegressorHyper& hyper);

// Loss/subgradient of the epsilon-insensitive objective at one point;
// shared by the trainer and the gradient tests.
double eps_insensitive_loss(std::span<const double> w, double bias, double l2,
                            double eps_ins, std::span<const double> x, double y);
void eps_insensitive_grad(std::span<const double> w, double bias, double l2,
                          double eps_ins, std::span<const double> x, double y,
                          std::span<double> grad_w, double& grad_b);

struct PairConstraint {
  NodeId question;
  NodeId asker;
  std::vector<NodeId> tags;
  NodeId preferred;  // strictly higher vote score
  NodeId other;
};

// One constraint per ordered answerer pair of a question with strictly
// different vote scores.
std::vector<PairConstraint> derive_pairs(const std::vector<TrainingCase>& cases);

// Eq-style margin objective on a linear scorer f(x) = w.x where the pair
// differs only in the answerer slot. Depends on the features only through
// x_plus - x_minus.
double pair_hinge_loss(std::span<const double> w, std::span<const double> x_plus,
                       std::span<const double> x_minus, double margin);

RegressorModel train_pairwise(const std::vector<PairConstraint>& constraints,
                              const EmbeddingTable& table, const FeatureSpec& spec,
                              double margin, double l2, const RegressorHyper& hyper);

}  // namespace cqr
