#pragma once

#include <iosfwd>
#include <optional>
#include <span>

#include "cqr/tensor.hpp"
#include "cqr/walks.hpp"

namespace cqr {

// Dense vector per node id. Rows cover the nodes the table was trained on;
// anything else resolves to "absent" and callers substitute zeros.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::vector<NodeId> nodes, int dim);

  int dim() const { return vectors_.cols; }
  size_t count() const { return nodes_.size(); }
  std::optional<int> row_of(NodeId id) const;
  const double* row(int r) const { return vectors_.row(r); }
  NodeId node_at(int r) const { return nodes_.at(r); }
  Tensor& matrix() { return vectors_; }
  const Tensor& matrix() const { return vectors_; }

  void write(std::ostream& out) const;
  static EmbeddingTable read(std::istream& in);

 private:
  std::vector<NodeId> nodes_;
  std::array<std::vector<int>, 3> local_to_row_;
  Tensor vectors_;

  void rebuild_index();
};

// Loss of one skip-gram-with-negative-sampling example:
//   -log s(in[center].out[context]) - sum_neg log s(-in[center].out[neg])
double skipgram_sample_loss(const Tensor& in, const Tensor& out, int center, int context,
                            std::span<const int> negatives);

// Accumulates analytic gradients of the same loss into grad_in / grad_out.
double skipgram_sample_loss_grad(const Tensor& in, const Tensor& out, int center,
                                 int context, std::span<const int> negatives,
                                 Tensor& grad_in, Tensor& grad_out);

// Skip-gram with negative sampling over the walk corpus; negatives drawn
// from the unigram^0.75 node distribution. Single-threaded unless
// cfg.parallel_updates is set (lock-free, nondeterministic).
EmbeddingTable train_skipgram(const std::vector<std::vector<int>>& walks,
                              const CqaGraph& graph, const WalkConfig& cfg,
                              int threads = 1);

}  // namespace cqr
