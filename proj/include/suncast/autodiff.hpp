#ifndef SUNCAST_AUTODIFF_HPP
#define SUNCAST_AUTODIFF_HPP

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "suncast/errors.hpp"

// Reverse-mode automatic differentiation over dense 2D matrices.
// Graphs are built define-by-run; backward() walks a topological order
// of the subgraph reachable from the root and accumulates adjoints.
namespace suncast::ad {

using Mat = Eigen::MatrixXd;

struct Node;
using NodePtr = std::shared_ptr<Node>;

struct Node {
  Mat value;
  Mat adjoint;  // same shape as value, zero until backward
  bool requires_grad = false;
  std::vector<NodePtr> parents;
  // pushes this node's adjoint into its parents' adjoints
  std::function<void(const Node&)> backprop;
  const char* op = "leaf";

  int rows() const { return static_cast<int>(value.rows()); }
  int cols() const { return static_cast<int>(value.cols()); }
  double scalar() const {
    if (value.size() != 1) throw ShapeError("scalar() on non-1x1 node");
    return value(0, 0);
  }
};

// Leaf constructors. leaf() rejects non-finite input; constant() is a
// requires_grad=false leaf.
NodePtr leaf(Mat value, bool requires_grad = true);
NodePtr constant(Mat value);
NodePtr constant_scalar(double v);

// Elementwise and structural primitives.
NodePtr add(const NodePtr& a, const NodePtr& b);
NodePtr sub(const NodePtr& a, const NodePtr& b);
NodePtr mul(const NodePtr& a, const NodePtr& b);  // elementwise
NodePtr matmul(const NodePtr& a, const NodePtr& b);
NodePtr scale(const NodePtr& a, double s);
NodePtr negate(const NodePtr& a);
NodePtr sigmoid(const NodePtr& a);
NodePtr tanh(const NodePtr& a);
NodePtr softplus(const NodePtr& a);  // overflow-safe: max(x,0)+log1p(exp(-|x|))
NodePtr log(const NodePtr& a);       // DomainError on non-positive entries
NodePtr exp(const NodePtr& a);
NodePtr square(const NodePtr& a);
NodePtr sum(const NodePtr& a);   // 1x1
NodePtr mean(const NodePtr& a);  // 1x1
NodePtr concat_rows(const NodePtr& a, const NodePtr& b);
NodePtr slice_rows(const NodePtr& a, int row0, int nrows);
NodePtr concat_cols(const NodePtr& a, const NodePtr& b);
NodePtr slice_cols(const NodePtr& a, int col0, int ncols);

// Seeds the 1x1 root with 1.0 and accumulates adjoints into every
// reachable requires_grad node. Adjoints add across fan-out.
void backward(const NodePtr& root);

// Zeroes adjoints of the subgraph reachable from root (for re-running
// backward on the same graph).
void zero_adjoints(const NodePtr& root);

// Topologically ordered node store for one reachable subgraph.
struct Graph {
  std::vector<Node*> order;  // parents precede children
  NodePtr root;
  static Graph from_root(const NodePtr& root);
};

// Gradient oracle: max over coordinates of
// |analytic - central_difference| / max(1, |analytic|).
double finite_difference_check(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& analytic_grad,
    const Eigen::VectorXd& point, double epsilon = 1e-5);

}  // namespace suncast::ad

#endif
