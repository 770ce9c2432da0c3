#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hypad/geometry.hpp"
#include "hypad/tensor.hpp"

namespace hypad::optim {

struct AdamParams {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment estimates and step counter for one parameter tensor.
struct AdamState {
  Eigen::MatrixXd m;
  Eigen::MatrixXd v;
  int64_t t = 0;
};

// One bias-corrected Adam update, in place.
void adam_step(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad, AdamState& state,
               const AdamParams& hp);

// Adam on the Poincaré ball for row-vector parameters. The Euclidean
// gradient is rescaled by the inverse conformal metric (1/lambda_x^2),
// moments run on the rescaled gradients, and the step is applied through
// exp_map_0 and Möbius addition, then clamped back into the ball. Moment
// transport between steps is the identity.
void riemannian_adam_step(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad, AdamState& state,
                          const AdamParams& hp, const geo::GeometryConfig& geom);

// Convenience driver over a set of graph leaves. Parameters registered as
// ball rows take the Riemannian update; everything else takes Adam.
class Optimizer {
 public:
  Optimizer(AdamParams hp, geo::GeometryConfig geom) : hp_(hp), geom_(geom) {}

  void add_param(const ad::Tensor& p, bool on_ball = false);
  void step();
  void zero_grad();

  size_t size() const { return params_.size(); }
  const AdamState& state(size_t i) const { return states_[i]; }
  AdamState& state(size_t i) { return states_[i]; }
  const AdamParams& hyper() const { return hp_; }
  void set_lr(double lr) { hp_.lr = lr; }

 private:
  AdamParams hp_;
  geo::GeometryConfig geom_;
  std::vector<ad::Tensor> params_;
  std::vector<bool> on_ball_;
  std::vector<AdamState> states_;
};

}  // namespace hypad::optim
