#pragma once

#include <vector>

#include "cqr/tensor.hpp"

namespace cqr {

// Define-by-run reverse-mode tape over dense tensors. Values are computed
// eagerly when an op is recorded; backward() walks the ops in exact reverse
// order. Sparse operands are constants (graph structure), never
// differentiated. A tape is confined to one thread.
class Tape {
 public:
  int input(Tensor value, bool requires_grad = true);
  int matmul(int a, int b);
  int spmm(const SparseMatrix* m, int x);
  int relu(int x);
  int add_bias(int x, int bias);
  int concat(const std::vector<int>& parts);  // column-wise
  int mean_rows(int x);                       // r×c -> 1×c
  int mse(int pred, int target);              // scalar
  // mean over rows of max(0, margin + minus - plus); plus/minus are r×1
  int hinge_rank(int plus, int minus, double margin);

  void backward(int loss);

  const Tensor& value(int node) const { return nodes_.at(node).value; }
  const Tensor& grad(int node) const { return nodes_.at(node).grad; }
  size_t size() const { return nodes_.size(); }

 private:
  enum class Op : uint8_t {
    Input,
    MatMul,
    Spmm,
    Relu,
    AddBias,
    Concat,
    MeanRows,
    Mse,
    HingeRank
  };

  struct Node {
    Op op;
    std::vector<int> inputs;
    Tensor value;
    Tensor grad;
    const SparseMatrix* sparse = nullptr;
    double param = 0.0;
    bool requires_grad = false;
  };

  int push(Node n);
  bool any_grad(const std::vector<int>& inputs) const;

  std::vector<Node> nodes_;
};

}  // namespace cqr
