#include "cqr/tape.hpp"

#include <cassert>
#include <cmath>

namespace cqr {

namespace {

#ifndef NDEBUG
void check_finite(const Tensor& t, const char* op) {
  for (double v : t.data)
    if (!std::isfinite(v)) throw NumericError(std::string(op) + " produced a non-finite value");
}
#else
void check_finite(const Tensor&, const char*) {}
#endif

}  // namespace

int Tape::push(Node n) {
  check_finite(n.value, "tape op");
  nodes_.push_back(std::move(n));
  return int(nodes_.size()) - 1;
}

bool Tape::any_grad(const std::vector<int>& inputs) const {
  for (int i : inputs)
    if (nodes_[i].requires_grad) return true;
  return false;
}

int Tape::input(Tensor value, bool requires_grad) {
  Node n;
  n.op = Op::Input;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  return push(std::move(n));
}

int Tape::matmul(int a, int b) {
  Node n;
  n.op = Op::MatMul;
  n.inputs = {a, b};
  kernels::matmul(nodes_[a].value, nodes_[b].value, n.value);
  n.requires_grad = any_grad(n.inputs);
  return push(std::move(n));
}

int Tape::spmm(const SparseMatrix* m, int x) {
  Node n;
  n.op = Op::Spmm;
  n.inputs = {x};
  n.sparse = m;
  kernels::spmm(*m, nodes_[x].value, n.value);
  n.requires_grad = any_grad(n.inputs);
  return push(std::move(n));
}

int Tape::relu(int x) {
  Node n;
  n.op = Op::Relu;
  n.inputs = {x};
  kernels::relu(nodes_[x].value, n.value);
  n.requires_grad = any_grad(n.inputs);
  return push(std::move(n));
}

int Tape::add_bias(int x, int bias) {
  Node n;
  n.op = Op::AddBias;
  n.inputs = {x, bias};
  kernels::add_bias(nodes_[x].value, nodes_[bias].value, n.value);
  n.requires_grad = any_grad(n.inputs);
  return push(std::move(n));
}

int Tape::concat(const std::vector<int>& parts) {
  if (parts.empty()) throw ShapeMismatch("concat: no inputs");
  int rows = nodes_[parts[0]].value.rows;
  int cols = 0;
  for (int p : parts) {
    if (nodes_[p].value.rows != rows)
      throw ShapeMismatch("concat: row mismatch " + nodes_[parts[0]].value.shape_str() +
                          " vs " + nodes_[p].value.shape_str());
    cols += nodes_[p].value.cols;
  }
  Node n;
  n.op = Op::Concat;
  n.inputs = parts;
  n.value = Tensor(rows, cols);
  int off = 0;
  for (int p : parts) {
    const Tensor& v = nodes_[p].value;
    for (int i = 0; i < rows; ++i)
      std::copy(v.row(i), v.row(i) + v.cols, n.value.row(i) + off);
    off += v.cols;
  }
  n.requires_grad = any_grad(n.inputs);
  return push(std::move(n));
}

int Tape::mean_rows(int x) {
  const Tensor& v = nodes_[x].value;
  if (v.rows == 0) throw ShapeMismatch("mean_rows: empty input");
  Node n;
  n.op = Op::MeanRows;
  n.inputs = {x};
  n.value = Tensor(1, v.cols);
  for (int i = 0; i < v.rows; ++i)
    for (int j = 0; j < v.cols; ++j) n.value.data[j] += v.at(i, j);
  for (int j = 0; j < v.cols; ++j) n.value.data[j] /= double(v.rows);
  n.requires_grad = any_grad(n.inputs);
  return push(std::move(n));
}

int Tape::mse(int pred, int target) {
  const Tensor& p = nodes_[pred].value;
  const Tensor& t = nodes_[target].value;
  check_shapes(p.rows == t.rows && p.cols == t.cols, "mse", p, t);
  Node n;
  n.op = Op::Mse;
  n.inputs = {pred, target};
  double acc = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    double d = p.data[i] - t.data[i];
    acc += d * d;
  }
  n.value = Tensor::scalar(acc / double(p.size()));
  n.requires_grad = any_grad(n.inputs);
  return push(std::move(n));
}

int Tape::hinge_rank(int plus, int minus, double margin) {
  const Tensor& p = nodes_[plus].value;
  const Tensor& m = nodes_[minus].value;
  check_shapes(p.rows == m.rows && p.cols == 1 && m.cols == 1, "hinge_rank", p, m);
  Node n;
  n.op = Op::HingeRank;
  n.inputs = {plus, minus};
  n.param = margin;
  double acc = 0.0;
  for (int i = 0; i < p.rows; ++i) acc += std::max(0.0, margin + m.data[i] - p.data[i]);
  n.value = Tensor::scalar(acc / double(p.rows));
  n.requires_grad = any_grad(n.inputs);
  return push(std::move(n));
}

void Tape::backward(int loss) {
  Node& top = nodes_.at(loss);
  if (top.value.rows != 1 || top.value.cols != 1)
    throw ShapeMismatch("backward: loss node is not scalar, got " + top.value.shape_str());

  for (auto& n : nodes_) {
    n.grad = Tensor(n.value.rows, n.value.cols);
  }
  top.grad.data[0] = 1.0;

  for (int i = loss; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.requires_grad && n.op != Op::Input) continue;
    switch (n.op) {
      case Op::Input:
        break;
      case Op::MatMul: {
        Node& a = nodes_[n.inputs[0]];
        Node& b = nodes_[n.inputs[1]];
        if (a.requires_grad) kernels::matmul_a_bt(n.grad, b.value, a.grad, true);
        if (b.requires_grad) kernels::matmul_at_b(a.value, n.grad, b.grad, true);
        break;
      }
      case Op::Spmm: {
        Node& x = nodes_[n.inputs[0]];
        if (x.requires_grad) kernels::spmm(n.sparse->transposed(), n.grad, x.grad, true);
        break;
      }
      case Op::Relu: {
        Node& x = nodes_[n.inputs[0]];
        if (x.requires_grad) kernels::relu_backward(x.value, n.grad, x.grad);
        break;
      }
      case Op::AddBias: {
        Node& x = nodes_[n.inputs[0]];
        Node& b = nodes_[n.inputs[1]];
        if (x.requires_grad)
          for (size_t k = 0; k < x.grad.size(); ++k) x.grad.data[k] += n.grad.data[k];
        if (b.requires_grad)
          for (int r = 0; r < n.grad.rows; ++r)
            for (int c = 0; c < n.grad.cols; ++c) b.grad.data[c] += n.grad.at(r, c);
        break;
      }
      case Op::Concat: {
        int off = 0;
        for (int p : n.inputs) {
          Node& part = nodes_[p];
          if (part.requires_grad)
            for (int r = 0; r < n.grad.rows; ++r)
              for (int c = 0; c < part.value.cols; ++c)
                part.grad.at(r, c) += n.grad.at(r, off + c);
          off += part.value.cols;
        }
        break;
      }
      case Op::MeanRows: {
        Node& x = nodes_[n.inputs[0]];
        if (x.requires_grad) {
          double inv = 1.0 / double(x.value.rows);
          for (int r = 0; r < x.value.rows; ++r)
            for (int c = 0; c < x.value.cols; ++c)
              x.grad.at(r, c) += n.grad.data[c] * inv;
        }
        break;
      }
      case Op::Mse: {
        Node& p = nodes_[n.inputs[0]];
        Node& t = nodes_[n.inputs[1]];
        double scale = 2.0 * n.grad.data[0] / double(p.value.size());
        if (p.requires_grad)
          for (size_t k = 0; k < p.value.size(); ++k)
            p.grad.data[k] += scale * (p.value.data[k] - t.value.data[k]);
        if (t.requires_grad)
          for (size_t k = 0; k < t.value.size(); ++k)
            t.grad.data[k] -= scale * (p.value.data[k] - t.value.data[k]);
        break;
      }
      case Op::HingeRank: {
        Node& p = nodes_[n.inputs[0]];
        Node& m = nodes_[n.inputs[1]];
        double scale = n.grad.data[0] / double(p.value.rows);
        for (int r = 0; r < p.value.rows; ++r) {
          bool active = n.param + m.value.data[r] - p.value.data[r] > 0.0;
          if (!active) continue;
          if (p.requires_grad) p.grad.data[r] -= scale;
          if (m.requires_grad) m.grad.data[r] += scale;
        }
        break;
      }
    }
  }
}

}  // namespace cqr
