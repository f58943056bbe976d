#include "focalflow/autodiff.hpp"

#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "focalflow/rng.hpp"

using namespace focalflow;

namespace {

Mat random_mat(int r, int c, Rng& rng) {
  Mat m(r, c);
  for (double& v : m.v) v = rng.normal();
  return m;
}

// Central finite differences of a scalar graph against its tape gradient.
// build() must construct the same graph from the given leaf values.
void check_against_fd(const std::vector<Mat>& leaves,
                      const std::function<Var(Tape&, const std::vector<Var>&)>& build,
                      double tol = 1e-7) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(leaves.size());
  for (const Mat& m : leaves) vars.push_back(tape.leaf(m));
  tape.backward(build(tape, vars));

  const double h = 1e-6;
  for (size_t li = 0; li < leaves.size(); ++li) {
    const Mat& g = tape.grad(vars[li]);
    REQUIRE(g.rows == leaves[li].rows);
    REQUIRE(g.cols == leaves[li].cols);
    for (size_t i = 0; i < leaves[li].v.size(); ++i) {
      auto eval = [&](double delta) {
        std::vector<Mat> shifted = leaves;
        shifted[li].v[i] += delta;
        Tape t2;
        std::vector<Var> v2;
        for (const Mat& m : shifted) v2.push_back(t2.leaf(m));
        return t2.scalar(build(t2, v2));
      };
      double fd = (eval(h) - eval(-h)) / (2.0 * h);
      CHECK(g.v[i] == doctest::Approx(fd).epsilon(tol));
    }
  }
}

}  // namespace

TEST_CASE("sumsq gradient is 2x") {
  Rng rng(1);
  Mat x = random_mat(3, 4, rng);
  Tape tape;
  Var v = tape.leaf(x);
  tape.backward(tape.sumsq(v));
  const Mat& g = tape.grad(v);
  for (size_t i = 0; i < x.v.size(); ++i) CHECK(g.v[i] == doctest::Approx(2.0 * x.v[i]).epsilon(1e-14));
}

TEST_CASE("add, sub, scale against finite differences") {
  Rng rng(2);
  std::vector<Mat> leaves{random_mat(2, 3, rng), random_mat(2, 3, rng)};
  check_against_fd(leaves, [](Tape& t, const std::vector<Var>& v) {
    return t.sumsq(t.sub(t.scale(t.add(v[0], v[1]), 0.75), v[1]));
  });
}

TEST_CASE("matmul against finite differences") {
  Rng rng(3);
  std::vector<Mat> leaves{random_mat(3, 4, rng), random_mat(4, 2, rng)};
  check_against_fd(leaves, [](Tape& t, const std::vector<Var>& v) {
    return t.sumsq(t.matmul(v[0], v[1]));
  });
}

TEST_CASE("tanh against finite differences") {
  Rng rng(4);
  std::vector<Mat> leaves{random_mat(2, 5, rng)};
  check_against_fd(leaves, [](Tape& t, const std::vector<Var>& v) {
    return t.sumsq(t.tanh_act(v[0]));
  });
}

TEST_CASE("add_row broadcast gradient accumulates over rows") {
  Rng rng(5);
  std::vector<Mat> leaves{random_mat(4, 3, rng), random_mat(1, 3, rng)};
  check_against_fd(leaves, [](Tape& t, const std::vector<Var>& v) {
    return t.sumsq(t.add_row(v[0], v[1]));
  });
}

TEST_CASE("row and column scaling against finite differences") {
  Rng rng(6);
  std::vector<Mat> leaves{random_mat(3, 4, rng)};
  check_against_fd(leaves, [](Tape& t, const std::vector<Var>& v) {
    Var r = t.row_scale(v[0], {0.5, -1.25, 2.0});
    Var c = t.col_scale(r, {1.0, 0.0, -0.5, 3.0});
    return t.sumsq(c);
  });
}

TEST_CASE("concat and slice against finite differences") {
  Rng rng(7);
  std::vector<Mat> leaves{random_mat(2, 3, rng), random_mat(2, 2, rng)};
  check_against_fd(leaves, [](Tape& t, const std::vector<Var>& v) {
    Var cat = t.concat_cols({v[0], v[1]});
    return t.sumsq(t.slice_cols(cat, 1, 3));
  });
}

TEST_CASE("slice excludes the dropped columns from the gradient") {
  Rng rng(8);
  Mat x = random_mat(2, 4, rng);
  Tape tape;
  Var v = tape.leaf(x);
  tape.backward(tape.sumsq(tape.slice_cols(v, 0, 2)));
  const Mat& g = tape.grad(v);
  for (int i = 0; i < 2; ++i) {
    CHECK(g(i, 2) == 0.0);
    CHECK(g(i, 3) == 0.0);
    CHECK(g(i, 0) != 0.0);
  }
}

TEST_CASE("dct node: gradient of coefficient energy is 2x") {
  // d/dx ||Dx||^2 = 2 D^T D x = 2x for an orthonormal D.
  const int L = 6, d = 2;
  DctPlan plan(L);
  Rng rng(9);
  Mat x = random_mat(1, L * d, rng);   // one row holding an L x d trajectory
  Tape tape;
  Var v = tape.leaf(x);
  tape.backward(tape.sumsq(tape.dct_cols(v, plan, d)));
  const Mat& g = tape.grad(v);
  for (size_t i = 0; i < x.v.size(); ++i) CHECK(g.v[i] == doctest::Approx(2.0 * x.v[i]).epsilon(1e-11));
}

TEST_CASE("dct node against finite differences") {
  const int L = 4, d = 3;
  DctPlan plan(L);
  Rng rng(10);
  std::vector<Mat> leaves{random_mat(2, L * d, rng)};
  check_against_fd(leaves, [&](Tape& t, const std::vector<Var>& v) {
    return t.sumsq(t.dct_cols(v[0], plan, d));
  });
}

TEST_CASE("constants carry no gradient") {
  Rng rng(11);
  Mat x = random_mat(2, 2, rng);
  Tape tape;
  Var leaf = tape.leaf(x);
  Var cst = tape.constant(x);
  tape.backward(tape.sumsq(tape.add(leaf, cst)));
  const Mat& gc = tape.grad(cst);
  for (double v : gc.v) CHECK(v == 0.0);
  CHECK(max_abs(tape.grad(leaf)) > 0.0);
}

TEST_CASE("mixed graph: deep composite against finite differences") {
  Rng rng(12);
  std::vector<Mat> leaves{random_mat(2, 3, rng), random_mat(3, 3, rng), random_mat(1, 3, rng)};
  check_against_fd(leaves, [](Tape& t, const std::vector<Var>& v) {
    Var h = t.tanh_act(t.add_row(t.matmul(v[0], v[1]), v[2]));
    Var h2 = t.matmul(h, v[1]);
    return t.sumsq(t.sub(h2, v[0]));
  });
}

TEST_CASE("backward twice on one tape throws") {
  Tape tape;
  Var v = tape.leaf(Mat(1, 1, 2.0));
  Var root = tape.sumsq(v);
  tape.backward(root);
  CHECK_THROWS(tape.backward(root));
}

TEST_CASE("backward requires a scalar root") {
  Tape tape;
  Var v = tape.leaf(Mat(2, 2, 1.0));
  CHECK_THROWS(tape.backward(v));
}

TEST_CASE("value and scalar accessors") {
  Tape tape;
  Mat x(1, 1, 3.5);
  Var v = tape.constant(x);
  CHECK(tape.value(v).v[0] == 3.5);
  CHECK(tape.scalar(v) == 3.5);
  Var wide = tape.constant(Mat(1, 2, 1.0));
  CHECK_THROWS(tape.scalar(wide));
}
