#include "cqr/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <tuple>

namespace cqr {

namespace {
std::atomic<int> g_threads{1};
}

void set_threads(int n) { g_threads.store(n < 1 ? 1 : n); }
int threads() { return g_threads.load(); }

Tensor SparseMatrix::dense() const {
  Tensor out(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) out.at(i, col[k]) = val[k];
  return out;
}

const SparseMatrix& SparseMatrix::transposed() const {
  if (symmetric) return *this;
  if (transpose_cache_) return *transpose_cache_;
  auto t = std::make_shared<SparseMatrix>(cols, rows);
  std::vector<int> counts(cols, 0);
  for (int c : col) ++counts[c];
  t->row_ptr.assign(size_t(cols) + 1, 0);
  for (int i = 0; i < cols; ++i) t->row_ptr[i + 1] = t->row_ptr[i] + counts[i];
  t->col.resize(nnz());
  t->val.resize(nnz());
  std::vector<int> cursor(t->row_ptr.begin(), t->row_ptr.end() - 1);
  for (int i = 0; i < rows; ++i)
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      int pos = cursor[col[k]]++;
      t->col[pos] = i;
      t->val[pos] = val[k];
    }
  transpose_cache_ = std::move(t);
  return *transpose_cache_;
}

SparseMatrix sparse_from_triplets(int rows, int cols,
                                  std::vector<std::tuple<int, int, double>> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) <
           std::tie(std::get<0>(b), std::get<1>(b));
  });
  SparseMatrix m(rows, cols);
  m.col.reserve(triplets.size());
  m.val.reserve(triplets.size());
  int prev_r = -1, prev_c = -1;
  for (const auto& [r, c, v] : triplets) {
    if (r < 0 || r >= rows || c < 0 || c >= cols)
      throw ShapeMismatch("sparse_from_triplets: coordinate out of range");
    if (r == prev_r && c == prev_c)
      throw DataError("sparse_from_triplets: duplicate coordinate");
    while (prev_r < r) m.row_ptr[++prev_r] = int(m.col.size());
    m.col.push_back(c);
    m.val.push_back(v);
    prev_c = c;
  }
  while (prev_r < rows) m.row_ptr[++prev_r] = int(m.col.size());
  return m;
}

namespace kernels {

void matmul(const Tensor& a, const Tensor& b, Tensor& out, bool accumulate) {
  check_shapes(a.cols == b.rows, "matmul", a, b);
  if (out.rows != a.rows || out.cols != b.cols) out = Tensor(a.rows, b.cols);
  const int n = a.rows, kk = a.cols, m = b.cols;
  const int nt = threads();
#pragma omp parallel for num_threads(nt) if (nt > 1) schedule(static)
  for (int i = 0; i < n; ++i) {
    double* orow = out.row(i);
    if (!accumulate) std::fill(orow, orow + m, 0.0);
    const double* arow = a.row(i);
    for (int k = 0; k < kk; ++k) {
      double av = arow[k];
      if (av == 0.0) continue;
      const double* brow = b.row(k);
      for (int j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
}

void matmul_at_b(const Tensor& a, const Tensor& b, Tensor& out, bool accumulate) {
  check_shapes(a.rows == b.rows, "matmul_at_b", a, b);
  if (out.rows != a.cols || out.cols != b.cols) out = Tensor(a.cols, b.cols);
  const int n = a.cols, m = b.cols, kk = a.rows;
  const int nt = threads();
#pragma omp parallel for num_threads(nt) if (nt > 1) schedule(static)
  for (int i = 0; i < n; ++i) {
    double* orow = out.row(i);
    if (!accumulate) std::fill(orow, orow + m, 0.0);
    for (int k = 0; k < kk; ++k) {
      double av = a.at(k, i);
      if (av == 0.0) continue;
      const double* brow = b.row(k);
      for (int j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
}

void matmul_a_bt(const Tensor& a, const Tensor& b, Tensor& out, bool accumulate) {
  check_shapes(a.cols == b.cols, "matmul_a_bt", a, b);
  if (out.rows != a.rows || out.cols != b.rows) out = Tensor(a.rows, b.rows);
  const int n = a.rows, m = b.rows, kk = a.cols;
  const int nt = threads();
#pragma omp parallel for num_threads(nt) if (nt > 1) schedule(static)
  for (int i = 0; i < n; ++i) {
    double* orow = out.row(i);
    const double* arow = a.row(i);
    for (int j = 0; j < m; ++j) {
      const double* brow = b.row(j);
      double acc = 0.0;
      for (int k = 0; k < kk; ++k) acc += arow[k] * brow[k];
      if (accumulate) orow[j] += acc;
      else orow[j] = acc;
    }
  }
}

void spmm(const SparseMatrix& s, const Tensor& x, Tensor& out, bool accumulate) {
  if (s.cols != x.rows)
    throw ShapeMismatch("spmm: incompatible shapes " + std::to_string(s.rows) + "x" +
                        std::to_string(s.cols) + " and " + x.shape_str());
  if (out.rows != s.rows || out.cols != x.cols) out = Tensor(s.rows, x.cols);
  const int m = x.cols;
  const int nt = threads();
#pragma omp parallel for num_threads(nt) if (nt > 1) schedule(static)
  for (int i = 0; i < s.rows; ++i) {
    double* orow = out.row(i);
    if (!accumulate) std::fill(orow, orow + m, 0.0);
    for (int k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k) {
      double v = s.val[k];
      const double* xrow = x.row(s.col[k]);
      for (int j = 0; j < m; ++j) orow[j] += v * xrow[j];
    }
  }
}

void relu(const Tensor& x, Tensor& out) {
  if (out.rows != x.rows || out.cols != x.cols) out = Tensor(x.rows, x.cols);
  const int nt = threads();
  const int64_t n = int64_t(x.size());
#pragma omp parallel for num_threads(nt) if (nt > 1) schedule(static)
  for (int64_t i = 0; i < n; ++i) out.data[i] = x.data[i] > 0.0 ? x.data[i] : 0.0;
}

void relu_backward(const Tensor& x, const Tensor& grad_out, Tensor& grad_in_acc) {
  check_shapes(x.rows == grad_out.rows && x.cols == grad_out.cols, "relu_backward", x,
               grad_out);
  const int nt = threads();
  const int64_t n = int64_t(x.size());
#pragma omp parallel for num_threads(nt) if (nt > 1) schedule(static)
  for (int64_t i = 0; i < n; ++i)
    if (x.data[i] > 0.0) grad_in_acc.data[i] += grad_out.data[i];
}

void add_bias(const Tensor& x, const Tensor& bias, Tensor& out) {
  check_shapes(bias.rows == 1 && bias.cols == x.cols, "add_bias", x, bias);
  if (out.rows != x.rows || out.cols != x.cols) out = Tensor(x.rows, x.cols);
  const int nt = threads();
#pragma omp parallel for num_threads(nt) if (nt > 1) schedule(static)
  for (int i = 0; i < x.rows; ++i) {
    const double* xrow = x.row(i);
    double* orow = out.row(i);
    for (int j = 0; j < x.cols; ++j) orow[j] = xrow[j] + bias.data[j];
  }
}

}  // namespace kernels

namespace ref {

void matmul(const Tensor& a, const Tensor& b, Tensor& out) {
  check_shapes(a.cols == b.rows, "matmul", a, b);
  out = Tensor(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < a.cols; ++k) {
      double av = a.at(i, k);
      if (av == 0.0) continue;
      for (int j = 0; j < b.cols; ++j) out.at(i, j) += av * b.at(k, j);
    }
}

void spmm(const SparseMatrix& s, const Tensor& x, Tensor& out) {
  out = Tensor(s.rows, x.cols);
  for (int i = 0; i < s.rows; ++i)
    for (int k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k)
      for (int j = 0; j < x.cols; ++j) out.at(i, j) += s.val[k] * x.at(s.col[k], j);
}

}  // namespace ref

}  // namespace cqr
