#include "hypad/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace hypad::ad {

namespace {

thread_local bool g_grad_enabled = true;
thread_local uint64_t g_seq = 0;

using Node = Tensor::Node;
using NodePtr = std::shared_ptr<Node>;

NodePtr new_node(Eigen::MatrixXd val) {
  auto n = std::make_shared<Node>();
  n->val = std::move(val);
  n->seq = ++g_seq;
  return n;
}

bool any_requires(const std::vector<NodePtr>& parents) {
  for (const auto& p : parents) {
    if (p->requires_grad) return true;
  }
  return false;
}

// Builds a graph node; parents and the closure are dropped when no gradient
// can flow, so inference builds no graph.
Tensor make_op(Eigen::MatrixXd val, std::vector<NodePtr> parents,
               std::function<void(Node&)> bw) {
  auto n = new_node(std::move(val));
  if (g_grad_enabled && any_requires(parents)) {
    n->requires_grad = true;
    n->parents = std::move(parents);
    n->backward = std::move(bw);
  }
  return Tensor::from_node(std::move(n));
}

void check_broadcast(const Tensor& a, const Tensor& b, const char* op) {
  const bool rows_ok = a.rows() == b.rows() || a.rows() == 1 || b.rows() == 1;
  const bool cols_ok = a.cols() == b.cols() || a.cols() == 1 || b.cols() == 1;
  if (!rows_ok || !cols_ok) {
    throw ShapeError(std::string(op) + ": incompatible shapes (" + std::to_string(a.rows()) +
                     "x" + std::to_string(a.cols()) + ") vs (" + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()) + ")");
  }
}

// Returns x itself when no broadcast is needed; otherwise materialises the
// replicated operand into `storage`.
const Eigen::MatrixXd& expand_into(const Eigen::MatrixXd& x, Eigen::Index rows, Eigen::Index cols,
                                   Eigen::MatrixXd& storage) {
  if (x.rows() == rows && x.cols() == cols) return x;
  storage = x.replicate(rows / x.rows(), cols / x.cols());
  return storage;
}

// Sums a full-shaped gradient back onto the (possibly broadcast) operand shape.
Eigen::MatrixXd reduce_to(const Eigen::MatrixXd& g, Eigen::Index rows, Eigen::Index cols) {
  if (g.rows() == rows && g.cols() == cols) return g;
  Eigen::MatrixXd out = g;
  if (rows == 1 && g.rows() > 1) out = out.colwise().sum().eval();
  if (cols == 1 && g.cols() > 1) out = out.rowwise().sum().eval();
  return out;
}

template <typename FwdFn, typename GradAFn, typename GradBFn>
Tensor binary_op(const Tensor& a, const Tensor& b, const char* name, FwdFn fwd, GradAFn grad_a,
                 GradBFn grad_b) {
  check_broadcast(a, b, name);
  const Eigen::Index rows = std::max(a.rows(), b.rows());
  const Eigen::Index cols = std::max(a.cols(), b.cols());
  Eigen::MatrixXd val;
  {
    Eigen::MatrixXd sa, sb;
    val = fwd(expand_into(a.value(), rows, cols, sa), expand_into(b.value(), rows, cols, sb));
  }
  auto pa = a.node();
  auto pb = b.node();
  return make_op(std::move(val), {pa, pb}, [pa, pb, grad_a, grad_b](Node& self) {
    Eigen::MatrixXd sa, sb;
    const Eigen::Index rows = self.grad.rows(), cols = self.grad.cols();
    const Eigen::MatrixXd& av = expand_into(pa->val, rows, cols, sa);
    const Eigen::MatrixXd& bv = expand_into(pb->val, rows, cols, sb);
    if (pa->requires_grad) {
      pa->grad_ref() += reduce_to(grad_a(av, bv, self.grad), pa->val.rows(), pa->val.cols());
    }
    if (pb->requires_grad) {
      pb->grad_ref() += reduce_to(grad_b(av, bv, self.grad), pb->val.rows(), pb->val.cols());
    }
  });
}

template <typename FwdFn, typename VjpFn>
Tensor unary_op(const Tensor& a, FwdFn fwd, VjpFn vjp) {
  Eigen::MatrixXd val = fwd(a.value());
  auto pa = a.node();
  return make_op(std::move(val), {pa}, [pa, vjp](Node& self) {
    if (pa->requires_grad) pa->grad_ref() += vjp(pa->val, self.val, self.grad);
  });
}

}  // namespace

Tensor::Tensor(Eigen::MatrixXd value, bool requires_grad) {
  node_ = new_node(std::move(value));
  node_->requires_grad = requires_grad;
}

Tensor::Tensor(double scalar, bool requires_grad)
    : Tensor(Eigen::MatrixXd::Constant(1, 1, scalar), requires_grad) {}

Tensor Tensor::zeros(Eigen::Index rows, Eigen::Index cols, bool requires_grad) {
  return Tensor(Eigen::MatrixXd::Zero(rows, cols), requires_grad);
}

double Tensor::scalar() const {
  if (!is_scalar()) throw ShapeError("scalar(): tensor has " + std::to_string(size()) + " elements");
  return node_->val(0, 0);
}

Tensor Tensor::detach() const { return Tensor(node_->val, false); }

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

void backward(const Tensor& loss) {
  if (!loss.is_scalar()) {
    throw ShapeError("backward: loss must be scalar, got " + std::to_string(loss.rows()) + "x" +
                     std::to_string(loss.cols()));
  }
  auto root = loss.node();
  if (!root->requires_grad) return;

  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<Node*> stack{root.get()};
  seen.insert(root.get());
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (const auto& p : n->parents) {
      if (p->requires_grad && seen.insert(p.get()).second) stack.push_back(p.get());
    }
  }
  std::sort(order.begin(), order.end(), [](Node* a, Node* b) { return a->seq > b->seq; });

  root->grad_ref().array() += 1.0;
  for (Node* n : order) {
    if (n->backward && n->grad.size() != 0) n->backward(*n);
  }
}

// ---- binary ----

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, "add", [](const auto& x, const auto& y) { return x + y; },
      [](const auto&, const auto&, const auto& g) { return g; },
      [](const auto&, const auto&, const auto& g) { return g; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, "sub", [](const auto& x, const auto& y) { return x - y; },
      [](const auto&, const auto&, const auto& g) { return g; },
      [](const auto&, const auto&, const auto& g) { return -g; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, "mul", [](const auto& x, const auto& y) { return x.cwiseProduct(y); },
      [](const auto&, const auto& y, const auto& g) { return g.cwiseProduct(y); },
      [](const auto& x, const auto&, const auto& g) { return g.cwiseProduct(x); });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, "div", [](const auto& x, const auto& y) { return x.cwiseQuotient(y); },
      [](const auto&, const auto& y, const auto& g) { return g.cwiseQuotient(y); },
      [](const auto& x, const auto& y, const auto& g) -> Eigen::MatrixXd {
        return -g.cwiseProduct(x).cwiseQuotient(y.cwiseProduct(y));
      });
}

Tensor add(const Tensor& a, double b) { return add(a, Tensor(b)); }
Tensor mul(const Tensor& a, double b) { return mul(a, Tensor(b)); }

Tensor neg(const Tensor& a) {
  return unary_op(
      a, [](const auto& x) { return -x; },
      [](const auto&, const auto&, const auto& g) -> Eigen::MatrixXd { return -g; });
}

// ---- contraction / structure ----

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                     std::to_string(b.rows()) + ")");
  }
  Eigen::MatrixXd val = a.value() * b.value();
  auto pa = a.node();
  auto pb = b.node();
  return make_op(std::move(val), {pa, pb}, [pa, pb](Node& self) {
    if (pa->requires_grad) pa->grad_ref().noalias() += self.grad * pb->val.transpose();
    if (pb->requires_grad) pb->grad_ref().noalias() += pa->val.transpose() * self.grad;
  });
}

Tensor transpose(const Tensor& a) {
  Eigen::MatrixXd val = a.value().transpose();
  auto pa = a.node();
  return make_op(std::move(val), {pa}, [pa](Node& self) {
    if (pa->requires_grad) pa->grad_ref() += self.grad.transpose();
  });
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
  if (parts.empty()) throw ShapeError("concat: no operands");
  if (axis != 0 && axis != 1) throw ShapeError("concat: axis must be 0 or 1");
  Eigen::Index rows = parts[0].rows(), cols = parts[0].cols();
  Eigen::Index total = axis == 0 ? rows : cols;
  for (size_t i = 1; i < parts.size(); ++i) {
    if (axis == 0) {
      if (parts[i].cols() != cols) throw ShapeError("concat: column mismatch");
      total += parts[i].rows();
    } else {
      if (parts[i].rows() != rows) throw ShapeError("concat: row mismatch");
      total += parts[i].cols();
    }
  }
  Eigen::MatrixXd val(axis == 0 ? total : rows, axis == 0 ? cols : total);
  std::vector<NodePtr> parents;
  parents.reserve(parts.size());
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    if (axis == 0) {
      val.middleRows(off, p.rows()) = p.value();
      off += p.rows();
    } else {
      val.middleCols(off, p.cols()) = p.value();
      off += p.cols();
    }
    parents.push_back(p.node());
  }
  return make_op(std::move(val), std::move(parents), [axis](Node& self) {
    Eigen::Index off = 0;
    for (auto& p : self.parents) {
      const Eigen::Index extent = axis == 0 ? p->val.rows() : p->val.cols();
      if (p->requires_grad) {
        if (axis == 0) {
          p->grad_ref() += self.grad.middleRows(off, extent);
        } else {
          p->grad_ref() += self.grad.middleCols(off, extent);
        }
      }
      off += extent;
    }
  });
}

Tensor slice(const Tensor& a, int axis, Eigen::Index start, Eigen::Index len) {
  if (axis != 0 && axis != 1) throw ShapeError("slice: axis must be 0 or 1");
  const Eigen::Index extent = axis == 0 ? a.rows() : a.cols();
  if (start < 0 || len < 0 || start + len > extent) {
    throw ShapeError("slice: range [" + std::to_string(start) + ", " + std::to_string(start + len) +
                     ") out of bounds for extent " + std::to_string(extent));
  }
  Eigen::MatrixXd val = axis == 0 ? a.value().middleRows(start, len).eval()
                                  : a.value().middleCols(start, len).eval();
  auto pa = a.node();
  return make_op(std::move(val), {pa}, [pa, axis, start, len](Node& self) {
    if (!pa->requires_grad) return;
    if (axis == 0) {
      pa->grad_ref().middleRows(start, len) += self.grad;
    } else {
      pa->grad_ref().middleCols(start, len) += self.grad;
    }
  });
}

// ---- reductions ----

Tensor sum(const Tensor& a) {
  Eigen::MatrixXd val = Eigen::MatrixXd::Constant(1, 1, a.value().sum());
  auto pa = a.node();
  return make_op(std::move(val), {pa}, [pa](Node& self) {
    if (pa->requires_grad) pa->grad_ref().array() += self.grad(0, 0);
  });
}

Tensor mean(const Tensor& a) {
  const double inv = 1.0 / static_cast<double>(a.size());
  Eigen::MatrixXd val = Eigen::MatrixXd::Constant(1, 1, a.value().sum() * inv);
  auto pa = a.node();
  return make_op(std::move(val), {pa}, [pa, inv](Node& self) {
    if (pa->requires_grad) pa->grad_ref().array() += self.grad(0, 0) * inv;
  });
}

Tensor sum(const Tensor& a, int axis) {
  if (axis != 0 && axis != 1) throw ShapeError("sum: axis must be 0 or 1");
  Eigen::MatrixXd val = axis == 0 ? Eigen::MatrixXd(a.value().colwise().sum())
                                  : Eigen::MatrixXd(a.value().rowwise().sum());
  auto pa = a.node();
  return make_op(std::move(val), {pa}, [pa, axis](Node& self) {
    if (!pa->requires_grad) return;
    if (axis == 0) {
      pa->grad_ref() += self.grad.replicate(pa->val.rows(), 1);
    } else {
      pa->grad_ref() += self.grad.replicate(1, pa->val.cols());
    }
  });
}

Tensor mean(const Tensor& a, int axis) {
  const double inv = 1.0 / static_cast<double>(axis == 0 ? a.rows() : a.cols());
  return mul(sum(a, axis), inv);
}

// ---- unary elementwise ----

Tensor abs(const Tensor& a) {
  return unary_op(
      a, [](const auto& x) { return x.cwiseAbs(); },
      [](const auto& x, const auto&, const auto& g) -> Eigen::MatrixXd {
        return g.cwiseProduct(x.unaryExpr([](double v) { return v < 0.0 ? -1.0 : (v > 0.0 ? 1.0 : 0.0); }));
      });
}

Tensor square(const Tensor& a) {
  return unary_op(
      a, [](const auto& x) { return x.cwiseProduct(x); },
      [](const auto& x, const auto&, const auto& g) -> Eigen::MatrixXd {
        return 2.0 * g.cwiseProduct(x);
      });
}

Tensor sqrt(const Tensor& a) {
  if ((a.value().array() < 0.0).any()) throw ValueError("sqrt: negative input");
  return unary_op(
      a, [](const auto& x) { return x.cwiseSqrt(); },
      [](const auto&, const auto& y, const auto& g) -> Eigen::MatrixXd {
        return (0.5 * g.array() / y.array().max(1e-150)).matrix();
      });
}

Tensor tanh(const Tensor& a) {
  return unary_op(
      a, [](const auto& x) { return x.array().tanh().matrix(); },
      [](const auto&, const auto& y, const auto& g) -> Eigen::MatrixXd {
        return (g.array() * (1.0 - y.array() * y.array())).matrix();
      });
}

Tensor sigmoid(const Tensor& a) {
  return unary_op(
      a,
      [](const auto& x) {
        return (1.0 / (1.0 + (-x.array()).exp())).matrix().eval();
      },
      [](const auto&, const auto& y, const auto& g) -> Eigen::MatrixXd {
        return (g.array() * y.array() * (1.0 - y.array())).matrix();
      });
}

Tensor relu(const Tensor& a) {
  return unary_op(
      a, [](const auto& x) { return x.cwiseMax(0.0); },
      [](const auto& x, const auto&, const auto& g) -> Eigen::MatrixXd {
        return (g.array() * (x.array() > 0.0).template cast<double>()).matrix();
      });
}

Tensor leaky_relu(const Tensor& a, double slope) {
  return unary_op(
      a,
      [slope](const auto& x) {
        return x.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; }).eval();
      },
      [slope](const auto& x, const auto&, const auto& g) -> Eigen::MatrixXd {
        return (g.array() * (x.array() > 0.0).select(Eigen::ArrayXXd::Constant(x.rows(), x.cols(), 1.0),
                                                     Eigen::ArrayXXd::Constant(x.rows(), x.cols(), slope)))
            .matrix();
      });
}

Tensor artanh(const Tensor& a) {
  if ((a.value().array().abs() >= 1.0).any()) {
    throw ValueError("artanh: input outside (-1, 1)");
  }
  return unary_op(
      a, [](const auto& x) { return x.unaryExpr([](double v) { return std::atanh(v); }).eval(); },
      [](const auto& x, const auto&, const auto& g) -> Eigen::MatrixXd {
        return (g.array() / (1.0 - x.array() * x.array())).matrix();
      });
}

Tensor acosh_stable(const Tensor& a, double grad_eps) {
  return unary_op(
      a,
      [](const auto& x) {
        return x.unaryExpr([](double v) { return std::acosh(std::max(1.0, v)); }).eval();
      },
      [grad_eps](const auto& x, const auto&, const auto& g) -> Eigen::MatrixXd {
        return (g.array() * x.unaryExpr([grad_eps](double v) {
                               const double c = std::max(v, 1.0 + grad_eps);
                               return 1.0 / std::sqrt(c * c - 1.0);
                             }).array())
            .matrix();
      });
}

namespace {

double tanhc_val(double x) {
  if (std::abs(x) < 1e-8) return 1.0;
  return std::tanh(x) / x;
}

double tanhc_deriv(double x) {
  const double ax = std::abs(x);
  if (ax < 1e-2) {
    // series of d/dx [tanh(x)/x]
    return -2.0 * x / 3.0 + 8.0 * x * x * x / 15.0;
  }
  const double t = std::tanh(x);
  const double sech2 = 1.0 - t * t;
  return (x * sech2 - t) / (x * x);
}

double artanhc_val(double x) {
  if (std::abs(x) < 1e-8) return 1.0;
  return std::atanh(x) / x;
}

double artanhc_deriv(double x) {
  const double ax = std::abs(x);
  if (ax < 1e-2) {
    return 2.0 * x / 3.0 + 4.0 * x * x * x / 5.0;
  }
  return (x / (1.0 - x * x) - std::atanh(x)) / (x * x);
}

}  // namespace

Tensor tanhc(const Tensor& a) {
  return unary_op(
      a, [](const auto& x) { return x.unaryExpr([](double v) { return tanhc_val(v); }).eval(); },
      [](const auto& x, const auto&, const auto& g) -> Eigen::MatrixXd {
        return (g.array() * x.unaryExpr([](double v) { return tanhc_deriv(v); }).array()).matrix();
      });
}

Tensor artanhc(const Tensor& a) {
  if ((a.value().array().abs() >= 1.0).any()) {
    throw ValueError("artanhc: input outside (-1, 1)");
  }
  return unary_op(
      a, [](const auto& x) { return x.unaryExpr([](double v) { return artanhc_val(v); }).eval(); },
      [](const auto& x, const auto&, const auto& g) -> Eigen::MatrixXd {
        return (g.array() * x.unaryExpr([](double v) { return artanhc_deriv(v); }).array()).matrix();
      });
}

Tensor norm2(const Tensor& a) {
  const double n = std::sqrt(a.value().squaredNorm() + 1e-300);
  Eigen::MatrixXd val = Eigen::MatrixXd::Constant(1, 1, n);
  auto pa = a.node();
  return make_op(std::move(val), {pa}, [pa, n](Node& self) {
    if (pa->requires_grad) pa->grad_ref() += (self.grad(0, 0) / n) * pa->val;
  });
}

Tensor row_norm2(const Tensor& a) {
  Eigen::VectorXd n = (a.value().rowwise().squaredNorm().array() + 1e-300).sqrt();
  Eigen::MatrixXd val = n;
  auto pa = a.node();
  return make_op(std::move(val), {pa}, [pa, n = std::move(n)](Node& self) {
    if (!pa->requires_grad) return;
    pa->grad_ref() += (self.grad.col(0).cwiseQuotient(n)).asDiagonal() * pa->val;
  });
}

Tensor row_sumsq(const Tensor& a) {
  Eigen::MatrixXd val = a.value().rowwise().squaredNorm();
  auto pa = a.node();
  return make_op(std::move(val), {pa}, [pa](Node& self) {
    if (!pa->requires_grad) return;
    pa->grad_ref() += 2.0 * self.grad.col(0).asDiagonal() * pa->val;
  });
}

Tensor clamp_ball_rows(const Tensor& a, double margin) {
  const double radius = 1.0 - margin;
  const Eigen::MatrixXd& x = a.value();
  Eigen::VectorXd norms = x.rowwise().norm();
  Eigen::MatrixXd val = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (norms(i) > radius) val.row(i) *= radius / norms(i);
  }
  auto pa = a.node();
  return make_op(std::move(val), {pa},
                 [pa, norms = std::move(norms), radius](Node& self) {
                   if (!pa->requires_grad) return;
                   Eigen::MatrixXd& g = pa->grad_ref();
                   for (Eigen::Index i = 0; i < self.grad.rows(); ++i) {
                     if (norms(i) <= radius) {
                       g.row(i) += self.grad.row(i);
                     } else {
                       // y = r x / |x|; J = r/|x| (I - xx^T/|x|^2)
                       const Eigen::RowVectorXd xh = pa->val.row(i) / norms(i);
                       const double proj = self.grad.row(i).dot(xh);
                       g.row(i) += (radius / norms(i)) * (self.grad.row(i) - proj * xh);
                     }
                   }
                 });
}

double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& point,
                  double step) {
  Tensor x(point.value(), true);
  Tensor y = f(x);
  if (!y.is_scalar()) throw ShapeError("grad_check: function must return a scalar");
  backward(y);
  Eigen::MatrixXd analytic = x.grad();

  double worst = 0.0;
  NoGradGuard no_grad;
  Eigen::MatrixXd probe = point.value();
  for (Eigen::Index j = 0; j < probe.cols(); ++j) {
    for (Eigen::Index i = 0; i < probe.rows(); ++i) {
      const double orig = probe(i, j);
      probe(i, j) = orig + step;
      const double up = f(Tensor(probe)).scalar();
      probe(i, j) = orig - step;
      const double down = f(Tensor(probe)).scalar();
      probe(i, j) = orig;
      const double fd = (up - down) / (2.0 * step);
      const double err = std::abs(analytic(i, j) - fd) / (std::abs(fd) + 1e-8);
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace hypad::ad
