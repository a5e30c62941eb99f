#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cqr/errors.hpp"

namespace cqr {

// Dense row-major matrix of 64-bit reals. Vectors are 1×c or r×1.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), data(size_t(r) * size_t(c), 0.0) {}

  static Tensor zeros(int r, int c) { return Tensor(r, c); }
  static Tensor scalar(double v) {
    Tensor t(1, 1);
    t.data[0] = v;
    return t;
  }

  double& at(int i, int j) { return data[size_t(i) * cols + j]; }
  double at(int i, int j) const { return data[size_t(i) * cols + j]; }
  double* row(int i) { return data.data() + size_t(i) * cols; }
  const double* row(int i) const { return data.data() + size_t(i) * cols; }
  size_t size() const { return data.size(); }
  std::string shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
  }
  void fill(double v) { std::fill(data.begin(), data.end(), v); }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

// CSR sparse matrix with fixed structure. Column indices are sorted per row.
struct SparseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_ptr;  // rows + 1
  std::vector<int> col;
  std::vector<double> val;
  bool symmetric = false;

  SparseMatrix() = default;
  SparseMatrix(int r, int c) : rows(r), cols(c), row_ptr(size_t(r) + 1, 0) {}

  size_t nnz() const { return col.size(); }
  Tensor dense() const;

  // Transpose for backward passes; cached, self for symmetric matrices.
  const SparseMatrix& transposed() const;

 private:
  mutable std::shared_ptr<SparseMatrix> transpose_cache_;
};

// Builder that tolerates unsorted input and duplicate coordinates (last wins
// is not needed here; duplicates are an error).
SparseMatrix sparse_from_triplets(int rows, int cols,
                                  std::vector<std::tuple<int, int, double>> triplets);

void set_threads(int n);
int threads();

inline void check_shapes(bool ok, const char* op, const Tensor& a, const Tensor& b) {
  if (!ok)
    throw ShapeMismatch(std::string(op) + ": incompatible shapes " + a.shape_str() +
                        " and " + b.shape_str());
}

// OpenMP kernels. All of them partition work by output row, so results are
// bit-identical to the serial reference for any thread count.
namespace kernels {

void matmul(const Tensor& a, const Tensor& b, Tensor& out, bool accumulate = false);
// out = a^T * b
void matmul_at_b(const Tensor& a, const Tensor& b, Tensor& out, bool accumulate = false);
// out = a * b^T
void matmul_a_bt(const Tensor& a, const Tensor& b, Tensor& out, bool accumulate = false);
void spmm(const SparseMatrix& s, const Tensor& x, Tensor& out, bool accumulate = false);
void relu(const Tensor& x, Tensor& out);
void relu_backward(const Tensor& x, const Tensor& grad_out, Tensor& grad_in_acc);
void add_bias(const Tensor& x, const Tensor& bias, Tensor& out);

}  // namespace kernels

// Naive serial implementations kept as the ground truth for kernel tests and
// the benchmark harness.
namespace ref {

void matmul(const Tensor& a, const Tensor& b, Tensor& out);
void spmm(const SparseMatrix& s, const Tensor& x, Tensor& out);

}  // namespace ref

}  // namespace cqr
