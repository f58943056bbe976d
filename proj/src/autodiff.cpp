#include "focalflow/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace focalflow {

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Tape::Node& Tape::at(Var v) {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
    throw std::out_of_range("Tape: invalid node id " + std::to_string(v.id));
  }
  return nodes_[v.id];
}

const Tape::Node& Tape::at(Var v) const { return const_cast<Tape*>(this)->at(v); }

Var Tape::constant(Mat value) {
  Node n;
  n.op = Op::kConst;
  n.val = std::move(value);
  return push(std::move(n));
}

Var Tape::leaf(Mat value) {
  Node n;
  n.op = Op::kLeaf;
  n.val = std::move(value);
  n.needs_grad = true;
  return push(std::move(n));
}

static void check_same(const Mat& a, const Mat& b, const char* op) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string("Tape::") + op + ": shape mismatch (" + std::to_string(a.rows) +
                                "x" + std::to_string(a.cols) + " vs " + std::to_string(b.rows) + "x" +
                                std::to_string(b.cols) + ")");
  }
}

Var Tape::add(Var a, Var b) {
  check_same(at(a).val, at(b).val, "add");
  Node n;
  n.op = Op::kAdd;
  n.in = {a.id, b.id};
  n.val = at(a).val + at(b).val;
  n.needs_grad = at(a).needs_grad || at(b).needs_grad;
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  check_same(at(a).val, at(b).val, "sub");
  Node n;
  n.op = Op::kSub;
  n.in = {a.id, b.id};
  n.val = at(a).val - at(b).val;
  n.needs_grad = at(a).needs_grad || at(b).needs_grad;
  return push(std::move(n));
}

Var Tape::scale(Var a, double s) {
  Node n;
  n.op = Op::kScale;
  n.in = {a.id};
  n.s = s;
  n.val = at(a).val * s;
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

Var Tape::matmul(Var a, Var b) {
  Node n;
  n.op = Op::kMatmul;
  n.in = {a.id, b.id};
  n.val = focalflow::matmul(at(a).val, at(b).val);
  n.needs_grad = at(a).needs_grad || at(b).needs_grad;
  return push(std::move(n));
}

Var Tape::add_row(Var x, Var row) {
  const Mat& xm = at(x).val;
  const Mat& rm = at(row).val;
  if (rm.rows != 1 || rm.cols != xm.cols) {
    throw std::invalid_argument("Tape::add_row: row is " + std::to_string(rm.rows) + "x" +
                                std::to_string(rm.cols) + ", expected 1x" + std::to_string(xm.cols));
  }
  Node n;
  n.op = Op::kAddRow;
  n.in = {x.id, row.id};
  n.val = xm;
  for (int i = 0; i < n.val.rows; ++i)
    for (int j = 0; j < n.val.cols; ++j) n.val(i, j) += rm(0, j);
  n.needs_grad = at(x).needs_grad || at(row).needs_grad;
  return push(std::move(n));
}

Var Tape::tanh_act(Var x) {
  Node n;
  n.op = Op::kTanh;
  n.in = {x.id};
  n.val = at(x).val;
  for (double& v : n.val.v) v = std::tanh(v);
  n.needs_grad = at(x).needs_grad;
  return push(std::move(n));
}

Var Tape::row_scale(Var x, std::vector<double> s) {
  const Mat& xm = at(x).val;
  if (static_cast<int>(s.size()) != xm.rows) {
    throw std::invalid_argument("Tape::row_scale: " + std::to_string(s.size()) + " factors for " +
                                std::to_string(xm.rows) + " rows");
  }
  Node n;
  n.op = Op::kRowScale;
  n.in = {x.id};
  n.aux = std::move(s);
  n.val = xm;
  for (int i = 0; i < n.val.rows; ++i)
    for (int j = 0; j < n.val.cols; ++j) n.val(i, j) *= n.aux[i];
  n.needs_grad = at(x).needs_grad;
  return push(std::move(n));
}

Var Tape::col_scale(Var x, std::vector<double> s) {
  const Mat& xm = at(x).val;
  if (static_cast<int>(s.size()) != xm.cols) {
    throw std::invalid_argument("Tape::col_scale: " + std::to_string(s.size()) + " factors for " +
                                std::to_string(xm.cols) + " cols");
  }
  Node n;
  n.op = Op::kColScale;
  n.in = {x.id};
  n.aux = std::move(s);
  n.val = xm;
  for (int i = 0; i < n.val.rows; ++i)
    for (int j = 0; j < n.val.cols; ++j) n.val(i, j) *= n.aux[j];
  n.needs_grad = at(x).needs_grad;
  return push(std::move(n));
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("Tape::concat_cols: no parts");
  const int rows = at(parts[0]).val.rows;
  int cols = 0;
  bool needs = false;
  for (Var p : parts) {
    if (at(p).val.rows != rows) throw std::invalid_argument("Tape::concat_cols: row count mismatch");
    cols += at(p).val.cols;
    needs = needs || at(p).needs_grad;
  }
  Node n;
  n.op = Op::kConcatCols;
  for (Var p : parts) n.in.push_back(p.id);
  n.val = Mat(rows, cols);
  int off = 0;
  for (Var p : parts) {
    const Mat& pm = at(p).val;
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < pm.cols; ++j) n.val(i, off + j) = pm(i, j);
    off += pm.cols;
  }
  n.needs_grad = needs;
  return push(std::move(n));
}

Var Tape::slice_cols(Var x, int begin, int len) {
  const Mat& xm = at(x).val;
  if (begin < 0 || len < 0 || begin + len > xm.cols) {
    throw std::out_of_range("Tape::slice_cols: [" + std::to_string(begin) + ", " +
                            std::to_string(begin + len) + ") outside " + std::to_string(xm.cols) + " cols");
  }
  Node n;
  n.op = Op::kSliceCols;
  n.in = {x.id};
  n.i0 = begin;
  n.i1 = len;
  n.val = Mat(xm.rows, len);
  for (int i = 0; i < xm.rows; ++i)
    for (int j = 0; j < len; ++j) n.val(i, j) = xm(i, begin + j);
  n.needs_grad = at(x).needs_grad;
  return push(std::move(n));
}

Var Tape::dct_cols(Var x, const DctPlan& plan, int dim) {
  const Mat& xm = at(x).val;
  const int plan_len = plan.length();
  if (dim < 1 || xm.cols != plan_len * dim) {
    throw std::invalid_argument("Tape::dct_cols: " + std::to_string(xm.cols) + " cols is not length " +
                                std::to_string(plan_len) + " x dim " + std::to_string(dim));
  }
  Node n;
  n.op = Op::kDct;
  n.in = {x.id};
  n.plan = &plan;
  n.i0 = dim;
  n.val = Mat(xm.rows, xm.cols);
  const Mat& basis = plan.basis();
  for (int r = 0; r < xm.rows; ++r) {
    const double* src = xm.row_ptr(r);
    double* dst = n.val.row_ptr(r);
    for (int u = 0; u < plan_len; ++u) {
      const double* brow = basis.row_ptr(u);
      for (int j = 0; j < dim; ++j) {
        double acc = 0.0;
        for (int i = 0; i < plan_len; ++i) acc += brow[i] * src[i * dim + j];
        dst[u * dim + j] = acc;
      }
    }
  }
  n.needs_grad = at(x).needs_grad;
  return push(std::move(n));
}

Var Tape::sumsq(Var x) {
  Node n;
  n.op = Op::kSumSq;
  n.in = {x.id};
  n.val = Mat(1, 1);
  n.val(0, 0) = sum_squares(at(x).val);
  n.needs_grad = at(x).needs_grad;
  return push(std::move(n));
}

const Mat& Tape::value(Var v) const { return at(v).val; }

double Tape::scalar(Var v) const {
  const Mat& m = at(v).val;
  if (m.rows != 1 || m.cols != 1) {
    throw std::invalid_argument("Tape::scalar: node is " + std::to_string(m.rows) + "x" +
                                std::to_string(m.cols) + ", not 1x1");
  }
  return m(0, 0);
}

const Mat& Tape::grad(Var v) const {
  if (!backward_done_) throw std::logic_error("Tape::grad: backward has not run");
  const Node& n = at(v);
  if (n.grad.v.empty()) {
    // Gradient never reached this node (constant or disconnected).
    const_cast<Tape*>(this)->zero_ = Mat(n.val.rows, n.val.cols, 0.0);
    return zero_;
  }
  return n.grad;
}

void Tape::backward(Var root) {
  if (backward_done_) throw std::logic_error("Tape::backward: already run on this tape");
  const Node& rn = at(root);
  if (rn.val.rows != 1 || rn.val.cols != 1) {
    throw std::invalid_argument("Tape::backward: root must be a 1x1 scalar");
  }
  backward_done_ = true;
  if (!rn.needs_grad) return;   // nothing differentiable upstream

  auto ensure_grad = [](Node& n) {
    if (n.grad.v.empty()) n.grad = Mat(n.val.rows, n.val.cols, 0.0);
  };
  ensure_grad(nodes_[root.id]);
  nodes_[root.id].grad(0, 0) = 1.0;

  for (int id = root.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.needs_grad || n.grad.v.empty()) continue;
    const Mat& g = n.grad;
    auto sink = [&](int in_id) -> Node* {
      Node& src = nodes_[in_id];
      if (!src.needs_grad) return nullptr;
      ensure_grad(src);
      return &src;
    };
    switch (n.op) {
      case Op::kConst:
      case Op::kLeaf:
        break;
      case Op::kAdd: {
        if (Node* a = sink(n.in[0])) for (size_t i = 0; i < g.v.size(); ++i) a->grad.v[i] += g.v[i];
        if (Node* b = sink(n.in[1])) for (size_t i = 0; i < g.v.size(); ++i) b->grad.v[i] += g.v[i];
        break;
      }
      case Op::kSub: {
        if (Node* a = sink(n.in[0])) for (size_t i = 0; i < g.v.size(); ++i) a->grad.v[i] += g.v[i];
        if (Node* b = sink(n.in[1])) for (size_t i = 0; i < g.v.size(); ++i) b->grad.v[i] -= g.v[i];
        break;
      }
      case Op::kScale: {
        if (Node* a = sink(n.in[0])) for (size_t i = 0; i < g.v.size(); ++i) a->grad.v[i] += n.s * g.v[i];
        break;
      }
      case Op::kMatmul: {
        const Mat& av = nodes_[n.in[0]].val;
        const Mat& bv = nodes_[n.in[1]].val;
        if (Node* a = sink(n.in[0])) {
          Mat da = focalflow::matmul(g, transpose(bv));
          for (size_t i = 0; i < da.v.size(); ++i) a->grad.v[i] += da.v[i];
        }
        if (Node* b = sink(n.in[1])) {
          Mat db = focalflow::matmul(transpose(av), g);
          for (size_t i = 0; i < db.v.size(); ++i) b->grad.v[i] += db.v[i];
        }
        break;
      }
      case Op::kAddRow: {
        if (Node* x = sink(n.in[0])) for (size_t i = 0; i < g.v.size(); ++i) x->grad.v[i] += g.v[i];
        if (Node* r = sink(n.in[1])) {
          for (int i = 0; i < g.rows; ++i)
            for (int j = 0; j < g.cols; ++j) r->grad(0, j) += g(i, j);
        }
        break;
      }
      case Op::kTanh: {
        if (Node* x = sink(n.in[0])) {
          for (size_t i = 0; i < g.v.size(); ++i) {
            const double y = n.val.v[i];
            x->grad.v[i] += g.v[i] * (1.0 - y * y);
          }
        }
        break;
      }
      case Op::kRowScale: {
        if (Node* x = sink(n.in[0])) {
          for (int i = 0; i < g.rows; ++i)
            for (int j = 0; j < g.cols; ++j) x->grad(i, j) += g(i, j) * n.aux[i];
        }
        break;
      }
      case Op::kColScale: {
        if (Node* x = sink(n.in[0])) {
          for (int i = 0; i < g.rows; ++i)
            for (int j = 0; j < g.cols; ++j) x->grad(i, j) += g(i, j) * n.aux[j];
        }
        break;
      }
      case Op::kConcatCols: {
        int off = 0;
        for (int in_id : n.in) {
          const int w = nodes_[in_id].val.cols;
          if (Node* p = sink(in_id)) {
            for (int i = 0; i < g.rows; ++i)
              for (int j = 0; j < w; ++j) p->grad(i, j) += g(i, off + j);
          }
          off += w;
        }
        break;
      }
      case Op::kSliceCols: {
        if (Node* x = sink(n.in[0])) {
          for (int i = 0; i < g.rows; ++i)
            for (int j = 0; j < n.i1; ++j) x->grad(i, n.i0 + j) += g(i, j);
        }
        break;
      }
      case Op::kDct: {
        // Adjoint of an orthonormal transform is its inverse.
        if (Node* x = sink(n.in[0])) {
          const Mat& basis = n.plan->basis();
          const int plan_len = n.plan->length();
          const int dim = n.i0;
          for (int r = 0; r < g.rows; ++r) {
            const double* src = g.row_ptr(r);
            double* dst = x->grad.row_ptr(r);
            for (int i = 0; i < plan_len; ++i) {
              for (int j = 0; j < dim; ++j) {
                double acc = 0.0;
                for (int u = 0; u < plan_len; ++u) acc += basis(u, i) * src[u * dim + j];
                dst[i * dim + j] += acc;
              }
            }
          }
        }
        break;
      }
      case Op::kSumSq: {
        if (Node* x = sink(n.in[0])) {
          const double gs = g(0, 0);
          const Mat& xv = nodes_[n.in[0]].val;
          for (size_t i = 0; i < xv.v.size(); ++i) x->grad.v[i] += 2.0 * gs * xv.v[i];
        }
        break;
      }
    }
  }
}

}  // namespace focalflow
