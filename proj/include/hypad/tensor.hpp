#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "hypad/errors.hpp"

namespace hypad::ad {

// Dense fp64 matrix participating in reverse-mode differentiation.
// A Tensor is a cheap handle onto a graph node; operations on tensors with
// requires_grad record a backward closure so that backward(loss) can push
// adjoints to every leaf. Scalars are 1x1, row vectors 1xN.
//
// Graph nodes are confined to one thread; independent graphs may run in
// parallel threads.
class Tensor {
 public:
  struct Node {
    Eigen::MatrixXd val;
    Eigen::MatrixXd grad;  // empty until touched by backward / accumulation
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward;  // pushes node.grad into parents
    uint64_t seq = 0;                     // creation order; parents < children

    Eigen::MatrixXd& grad_ref() {
      if (grad.size() == 0) grad = Eigen::MatrixXd::Zero(val.rows(), val.cols());
      return grad;
    }
  };

  Tensor() = default;
  explicit Tensor(Eigen::MatrixXd value, bool requires_grad = false);
  explicit Tensor(double scalar, bool requires_grad = false);

  static Tensor zeros(Eigen::Index rows, Eigen::Index cols, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Eigen::MatrixXd& value() const { return node_->val; }
  Eigen::MatrixXd& mutable_value() { return node_->val; }
  const Eigen::MatrixXd& grad() const { return node_->grad_ref(); }
  Eigen::Index rows() const { return node_->val.rows(); }
  Eigen::Index cols() const { return node_->val.cols(); }
  Eigen::Index size() const { return node_->val.size(); }
  bool is_scalar() const { return size() == 1; }
  double scalar() const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool flag) { node_->requires_grad = flag; }
  void zero_grad() { node_->grad.setZero(); }

  // Value copy severed from the graph.
  Tensor detach() const;

  std::shared_ptr<Node> node() const { return node_; }

  static Tensor from_node(std::shared_ptr<Node> n) {
    Tensor t;
    t.node_ = std::move(n);
    return t;
  }

 private:
  std::shared_ptr<Node> node_;
};

// Gradient recording is on by default; inference paths disable it with a
// guard so no graph is built.
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Reverse pass from a scalar loss. Visits each reachable node exactly once
// in reverse creation order. Repeated calls accumulate into leaf grads.
void backward(const Tensor& loss);

// ---- elementwise / broadcast binary ----
// Operands must have equal shape, or one extent may be 1 along an axis
// (broadcast); gradients of broadcast operands are reduced back.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, double b);
Tensor mul(const Tensor& a, double b);
Tensor neg(const Tensor& a);

// ---- contractions / structure ----
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor concat(const std::vector<Tensor>& parts, int axis);
Tensor slice(const Tensor& a, int axis, Eigen::Index start, Eigen::Index len);

// ---- reductions ----
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor sum(const Tensor& a, int axis);   // keeps the reduced axis at extent 1
Tensor mean(const Tensor& a, int axis);

// ---- elementwise unary ----
Tensor abs(const Tensor& a);
Tensor square(const Tensor& a);
Tensor sqrt(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope = 0.2);
// artanh; inputs must lie strictly inside (-1, 1).
Tensor artanh(const Tensor& a);
// acosh with the argument clamped to >= 1; the derivative at the clamp is
// taken at 1 + grad_eps to avoid the boundary singularity.
Tensor acosh_stable(const Tensor& a, double grad_eps = 1e-7);
// tanh(x)/x and artanh(x)/x, smooth through x = 0. These make the radial
// maps of the ball differentiable at the origin when composed with norms.
Tensor tanhc(const Tensor& a);
Tensor artanhc(const Tensor& a);

// Full L2 norm as a 1x1 tensor.
Tensor norm2(const Tensor& a);
// Per-row L2 norm, Rx1. Smooth surrogate near zero rows.
Tensor row_norm2(const Tensor& a);
// Per-row squared L2 norm, Rx1.
Tensor row_sumsq(const Tensor& a);
// Rows with norm > 1 - margin are rescaled onto that radius; interior rows
// pass through. Piecewise-exact Jacobian.
Tensor clamp_ball_rows(const Tensor& a, double margin);

// Max over coordinates of |autodiff - central difference| / (|cd| + 1e-8)
// for a scalar-valued function evaluated at `point`.
double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& point,
                  double step = 1e-5);

}  // namespace hypad::ad
