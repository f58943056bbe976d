#pragma once

#include <vector>

#include "focalflow/mat.hpp"
#include "focalflow/spectral.hpp"

namespace focalflow {

// Handle into a Tape. Default-constructed handles are invalid.
struct Var {
  int id = -1;
};

// Reverse-mode tape over matrix-valued nodes. Graphs are built per training
// step and thrown away; nodes append in topological order, so backward is a
// single reverse sweep. Only nodes downstream of a differentiable leaf get
// gradient buffers; everything reachable purely from constants is treated as
// data.
class Tape {
 public:
  // Non-differentiable input (data, stop-gradient branches).
  Var constant(Mat value);
  // Differentiable leaf (parameters).
  Var leaf(Mat value);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var scale(Var a, double s);
  Var matmul(Var a, Var b);
  // Broadcast a 1 x c row over every row of x.
  Var add_row(Var x, Var row);
  Var tanh_act(Var x);
  // Row i scaled by s[i] / column j scaled by s[j].
  Var row_scale(Var x, std::vector<double> s);
  Var col_scale(Var x, std::vector<double> s);
  Var concat_cols(const std::vector<Var>& parts);
  Var slice_cols(Var x, int begin, int len);
  // Each row holds a length x dim trajectory (row-major); applies the plan
  // along time for every dim. Orthonormality makes the backward pass the
  // transposed transform.
  Var dct_cols(Var x, const DctPlan& plan, int dim);
  // Sum of squared entries, a 1 x 1 node.
  Var sumsq(Var x);

  const Mat& value(Var v) const;
  double scalar(Var v) const;

  // Root must be 1 x 1. May be called once per tape.
  void backward(Var root);
  // Zero matrix for nodes the gradient never reached.
  const Mat& grad(Var v) const;

  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  enum class Op {
    kConst, kLeaf, kAdd, kSub, kScale, kMatmul, kAddRow, kTanh,
    kRowScale, kColScale, kConcatCols, kSliceCols, kDct, kSumSq,
  };

  struct Node {
    Op op;
    std::vector<int> in;
    Mat val;
    Mat grad;
    bool needs_grad = false;
    double s = 0.0;               // kScale
    std::vector<double> aux;      // kRowScale / kColScale weights
    const DctPlan* plan = nullptr;
    int i0 = 0, i1 = 0;           // kSliceCols begin/len, kDct dim in i0
  };

  Var push(Node node);
  Node& at(Var v);
  const Node& at(Var v) const;

  std::vector<Node> nodes_;
  bool backward_done_ = false;
  Mat zero_;
};

}  // namespace focalflow
