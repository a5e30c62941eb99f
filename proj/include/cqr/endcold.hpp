#pragma once

#include <iosfwd>
#include <optional>
#include <span>

#include "cqr/graph.hpp"
#include "cqr/records.hpp"
#include "cqr/tape.hpp"

namespace cqr {

struct EndColdConfig {
  int d0 = 128, d1 = 128, d2 = 128;  // input features and the two GCN layers
  int h1 = 256, h2 = 128, h3 = 64;   // MLP hidden widths
  double step_size = 1e-3;
  int epochs = 30;
  int batch = 1024;
  uint64_t seed = 1;
  double hinge_margin = 1.0;  // only for the optional pairwise head
};

// A training or scoring instance in graph-node space; -1 marks a slot that
// has no node (cold question, new asker, never-seen candidate) and is fed
// to the regressor as a zero vector.
struct CaseRef {
  int question = -1;
  int answerer = -1;
  int asker = -1;
  std::vector<int> tag_nodes;
};

struct PairCaseRef {
  CaseRef preferred;
  CaseRef other;
};

// Trainable per-node input features, two GCN layers, three MLP hidden
// layers and a scalar output, trained jointly.
struct EndColdModel {
  EndColdConfig cfg;
  int n_nodes = 0;
  Tensor x0;
  Tensor w1, b1, w2, b2;
  Tensor v1, c1, v2, c2, v3, c3, v4, c4;

  static EndColdModel init(int n_nodes, const EndColdConfig& cfg);

  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  uint64_t content_hash() const;

  void write(std::ostream& out) const;
  static EndColdModel read(std::istream& in);
};

// H1 = relu(A X0 W1 + b1), H2 = A H1 W2 + b2. x0_override substitutes the
// input features (used for cold extension with an extra zero row).
Tensor encode(const EndColdModel& model, const SparseMatrix& ahat,
              const Tensor* x0_override = nullptr);

// concat(H2[q], H2[u], H2[a], mean over H2[tags]); -1 slots are zeros.
Tensor assemble_case_features(const Tensor& h2, std::span<const CaseRef> cases);

double mlp_forward(const EndColdModel& model, std::span<const double> feature);
std::vector<double> predict_many(const EndColdModel& model, const Tensor& h2,
                                 std::span<const CaseRef> cases);
double predict(const EndColdModel& model, const SparseMatrix& ahat, const CaseRef& c);

struct TrainReport {
  std::vector<double> epoch_loss;
};

TrainReport train(EndColdModel& model, const SparseMatrix& ahat,
                  const std::vector<CaseRef>& cases, const std::vector<double>& targets);

// Optional ranking objective on answerer pairs (not the default setup).
TrainReport train_hinge(EndColdModel& model, const SparseMatrix& ahat,
                        const std::vector<PairCaseRef>& pairs);

CaseRef to_case_ref(const CqaGraph& graph, const TrainingCase& c);

// Scores candidates for cold questions against a fixed base graph. The
// extended adjacency is recomputed per question; the base normalization is
// computed once and reused for non-cold predictions.
class EndColdPredictor {
 public:
  EndColdPredictor(const EndColdModel& model, const CqaGraph& base);

  std::vector<double> score_cold(const std::vector<NodeId>& tags,
                                 std::optional<NodeId> asker,
                                 std::span<const NodeId> candidates) const;
  double predict_cold(const std::vector<NodeId>& tags, std::optional<NodeId> asker,
                      NodeId candidate) const;

  const SparseMatrix& base_ahat() const { return base_ahat_; }

 private:
  const EndColdModel& model_;
  const CqaGraph& base_;
  SparseMatrix base_ahat_;
};

}  // namespace cqr
