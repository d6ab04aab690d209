#include "suncast/autodiff.hpp"

#include <cmath>
#include <unordered_set>

namespace suncast::ad {

namespace {

NodePtr make_node(Mat value, std::vector<NodePtr> parents, const char* op) {
  auto n = std::make_shared<Node>();
  n->adjoint = Mat::Zero(value.rows(), value.cols());
  n->value = std::move(value);
  n->op = op;
  bool grad = false;
  for (const auto& p : parents) grad = grad || p->requires_grad;
  n->requires_grad = grad;
  n->parents = std::move(parents);
  return n;
}

void check_same_shape(const NodePtr& a, const NodePtr& b, const char* op) {
  if (a->rows() != b->rows() || a->cols() != b->cols())
    throw ShapeError(std::string(op) + ": shape mismatch (" +
                     std::to_string(a->rows()) + "x" + std::to_string(a->cols()) +
                     " vs " + std::to_string(b->rows()) + "x" +
                     std::to_string(b->cols()) + ")");
}

inline double softplus_scalar(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

}  // namespace

NodePtr leaf(Mat value, bool requires_grad) {
  if (!value.allFinite()) throw InvalidValue("leaf: non-finite value");
  auto n = std::make_shared<Node>();
  n->adjoint = Mat::Zero(value.rows(), value.cols());
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  return n;
}

NodePtr constant(Mat value) { return leaf(std::move(value), false); }

NodePtr constant_scalar(double v) {
  Mat m(1, 1);
  m(0, 0) = v;
  return constant(m);
}

NodePtr add(const NodePtr& a, const NodePtr& b) {
  check_same_shape(a, b, "add");
  auto n = make_node(a->value + b->value, {a, b}, "add");
  n->backprop = [](const Node& self) {
    if (self.parents[0]->requires_grad) self.parents[0]->adjoint += self.adjoint;
    if (self.parents[1]->requires_grad) self.parents[1]->adjoint += self.adjoint;
  };
  return n;
}

NodePtr sub(const NodePtr& a, const NodePtr& b) {
  check_same_shape(a, b, "sub");
  auto n = make_node(a->value - b->value, {a, b}, "sub");
  n->backprop = [](const Node& self) {
    if (self.parents[0]->requires_grad) self.parents[0]->adjoint += self.adjoint;
    if (self.parents[1]->requires_grad) self.parents[1]->adjoint -= self.adjoint;
  };
  return n;
}

NodePtr mul(const NodePtr& a, const NodePtr& b) {
  check_same_shape(a, b, "mul");
  auto n = make_node(a->value.cwiseProduct(b->value), {a, b}, "mul");
  n->backprop = [](const Node& self) {
    if (self.parents[0]->requires_grad)
      self.parents[0]->adjoint += self.adjoint.cwiseProduct(self.parents[1]->value);
    if (self.parents[1]->requires_grad)
      self.parents[1]->adjoint += self.adjoint.cwiseProduct(self.parents[0]->value);
  };
  return n;
}

NodePtr matmul(const NodePtr& a, const NodePtr& b) {
  if (a->cols() != b->rows())
    throw ShapeError("matmul: inner dimensions " + std::to_string(a->cols()) +
                     " vs " + std::to_string(b->rows()));
  auto n = make_node(a->value * b->value, {a, b}, "matmul");
  n->backprop = [](const Node& self) {
    if (self.parents[0]->requires_grad)
      self.parents[0]->adjoint += self.adjoint * self.parents[1]->value.transpose();
    if (self.parents[1]->requires_grad)
      self.parents[1]->adjoint += self.parents[0]->value.transpose() * self.adjoint;
  };
  return n;
}

NodePtr scale(const NodePtr& a, double s) {
  auto n = make_node(a->value * s, {a}, "scale");
  n->backprop = [s](const Node& self) {
    if (self.parents[0]->requires_grad) self.parents[0]->adjoint += self.adjoint * s;
  };
  return n;
}

NodePtr negate(const NodePtr& a) { return scale(a, -1.0); }

NodePtr sigmoid(const NodePtr& a) {
  Mat v = a->value.unaryExpr([](double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                  : std::exp(x) / (1.0 + std::exp(x));
  });
  auto n = make_node(std::move(v), {a}, "sigmoid");
  n->backprop = [](const Node& self) {
    if (!self.parents[0]->requires_grad) return;
    const Mat& s = self.value;
    self.parents[0]->adjoint +=
        self.adjoint.cwiseProduct(s.cwiseProduct(Mat::Ones(s.rows(), s.cols()) - s));
  };
  return n;
}

NodePtr tanh(const NodePtr& a) {
  Mat v = a->value.array().tanh();
  auto n = make_node(std::move(v), {a}, "tanh");
  n->backprop = [](const Node& self) {
    if (!self.parents[0]->requires_grad) return;
    self.parents[0]->adjoint += self.adjoint.cwiseProduct(
        (1.0 - self.value.array().square()).matrix());
  };
  return n;
}

NodePtr softplus(const NodePtr& a) {
  Mat v = a->value.unaryExpr([](double x) { return softplus_scalar(x); });
  auto n = make_node(std::move(v), {a}, "softplus");
  n->backprop = [](const Node& self) {
    if (!self.parents[0]->requires_grad) return;
    // d softplus / dx = sigmoid(x)
    Mat d = self.parents[0]->value.unaryExpr([](double x) {
      return x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                    : std::exp(x) / (1.0 + std::exp(x));
    });
    self.parents[0]->adjoint += self.adjoint.cwiseProduct(d);
  };
  return n;
}

NodePtr log(const NodePtr& a) {
  if ((a->value.array() <= 0.0).any())
    throw DomainError("log: non-positive entry");
  auto n = make_node(a->value.array().log().matrix(), {a}, "log");
  n->backprop = [](const Node& self) {
    if (!self.parents[0]->requires_grad) return;
    self.parents[0]->adjoint +=
        self.adjoint.cwiseQuotient(self.parents[0]->value);
  };
  return n;
}

NodePtr exp(const NodePtr& a) {
  auto n = make_node(a->value.array().exp().matrix(), {a}, "exp");
  n->backprop = [](const Node& self) {
    if (!self.parents[0]->requires_grad) return;
    self.parents[0]->adjoint += self.adjoint.cwiseProduct(self.value);
  };
  return n;
}

NodePtr square(const NodePtr& a) {
  auto n = make_node(a->value.array().square().matrix(), {a}, "square");
  n->backprop = [](const Node& self) {
    if (!self.parents[0]->requires_grad) return;
    self.parents[0]->adjoint +=
        2.0 * self.adjoint.cwiseProduct(self.parents[0]->value);
  };
  return n;
}

NodePtr sum(const NodePtr& a) {
  Mat v(1, 1);
  v(0, 0) = a->value.sum();
  auto n = make_node(std::move(v), {a}, "sum");
  n->backprop = [](const Node& self) {
    if (!self.parents[0]->requires_grad) return;
    self.parents[0]->adjoint.array() += self.adjoint(0, 0);
  };
  return n;
}

NodePtr mean(const NodePtr& a) {
  const double inv = 1.0 / static_cast<double>(a->value.size());
  Mat v(1, 1);
  v(0, 0) = a->value.mean();
  auto n = make_node(std::move(v), {a}, "mean");
  n->backprop = [inv](const Node& self) {
    if (!self.parents[0]->requires_grad) return;
    self.parents[0]->adjoint.array() += self.adjoint(0, 0) * inv;
  };
  return n;
}

NodePtr concat_rows(const NodePtr& a, const NodePtr& b) {
  if (a->cols() != b->cols())
    throw ShapeError("concat_rows: column counts differ");
  Mat v(a->rows() + b->rows(), a->cols());
  v.topRows(a->rows()) = a->value;
  v.bottomRows(b->rows()) = b->value;
  auto n = make_node(std::move(v), {a, b}, "concat_rows");
  n->backprop = [](const Node& self) {
    const int ra = self.parents[0]->rows();
    const int rb = self.parents[1]->rows();
    if (self.parents[0]->requires_grad)
      self.parents[0]->adjoint += self.adjoint.topRows(ra);
    if (self.parents[1]->requires_grad)
      self.parents[1]->adjoint += self.adjoint.bottomRows(rb);
  };
  return n;
}

NodePtr slice_rows(const NodePtr& a, int row0, int nrows) {
  if (row0 < 0 || nrows < 1 || row0 + nrows > a->rows())
    throw ShapeError("slice_rows: range out of bounds");
  auto n = make_node(a->value.middleRows(row0, nrows), {a}, "slice_rows");
  n->backprop = [row0, nrows](const Node& self) {
    if (!self.parents[0]->requires_grad) return;
    self.parents[0]->adjoint.middleRows(row0, nrows) += self.adjoint;
  };
  return n;
}

NodePtr concat_cols(const NodePtr& a, const NodePtr& b) {
  if (a->rows() != b->rows())
    throw ShapeError("concat_cols: row counts differ");
  Mat v(a->rows(), a->cols() + b->cols());
  v.leftCols(a->cols()) = a->value;
  v.rightCols(b->cols()) = b->value;
  auto n = make_node(std::move(v), {a, b}, "concat_cols");
  n->backprop = [](const Node& self) {
    const int ca = self.parents[0]->cols();
    const int cb = self.parents[1]->cols();
    if (self.parents[0]->requires_grad)
      self.parents[0]->adjoint += self.adjoint.leftCols(ca);
    if (self.parents[1]->requires_grad)
      self.parents[1]->adjoint += self.adjoint.rightCols(cb);
  };
  return n;
}

NodePtr slice_cols(const NodePtr& a, int col0, int ncols) {
  if (col0 < 0 || ncols < 1 || col0 + ncols > a->cols())
    throw ShapeError("slice_cols: range out of bounds");
  auto n = make_node(a->value.middleCols(col0, ncols), {a}, "slice_cols");
  n->backprop = [col0, ncols](const Node& self) {
    if (!self.parents[0]->requires_grad) return;
    self.parents[0]->adjoint.middleCols(col0, ncols) += self.adjoint;
  };
  return n;
}

Graph Graph::from_root(const NodePtr& root) {
  Graph g;
  g.root = root;
  std::unordered_set<const Node*> visited;
  // iterative post-order DFS
  struct Frame {
    Node* node;
    size_t next_parent;
  };
  std::vector<Frame> stack;
  stack.push_back({root.get(), 0});
  visited.insert(root.get());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_parent < f.node->parents.size()) {
      Node* p = f.node->parents[f.next_parent++].get();
      if (visited.insert(p).second) stack.push_back({p, 0});
    } else {
      g.order.push_back(f.node);
      stack.pop_back();
    }
  }
  return g;
}

void backward(const NodePtr& root) {
  if (root->value.size() != 1)
    throw ShapeError("backward: root must be scalar (1x1)");
  Graph g = Graph::from_root(root);
  root->adjoint(0, 0) = 1.0;
  for (auto it = g.order.rbegin(); it != g.order.rend(); ++it) {
    Node* n = *it;
    if (n->backprop && n->requires_grad) n->backprop(*n);
  }
}

void zero_adjoints(const NodePtr& root) {
  Graph g = Graph::from_root(root);
  for (Node* n : g.order) n->adjoint.setZero();
}

double finite_difference_check(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& analytic_grad,
    const Eigen::VectorXd& point, double epsilon) {
  if (epsilon <= 0) throw InvalidValue("finite_difference_check: epsilon <= 0");
  Eigen::VectorXd g = analytic_grad(point);
  if (g.size() != point.size())
    throw ShapeError("finite_difference_check: gradient length mismatch");
  double worst = 0.0;
  Eigen::VectorXd p = point;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    p(i) = point(i) + epsilon;
    const double fp = f(p);
    p(i) = point(i) - epsilon;
    const double fm = f(p);
    p(i) = point(i);
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw InvalidValue("finite_difference_check: non-finite function value");
    const double fd = (fp - fm) / (2.0 * epsilon);
    const double rel = std::abs(g(i) - fd) / std::max(1.0, std::abs(g(i)));
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace suncast::ad
