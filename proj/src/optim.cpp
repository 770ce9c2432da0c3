#include "hypad/optim.hpp"

#include <cmath>

namespace hypad::optim {

namespace {

void ensure_state(AdamState& state, const Eigen::MatrixXd& like) {
  if (state.m.size() == 0) {
    state.m = Eigen::MatrixXd::Zero(like.rows(), like.cols());
    state.v = Eigen::MatrixXd::Zero(like.rows(), like.cols());
  }
}

}  // namespace

void adam_step(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad, AdamState& state,
               const AdamParams& hp) {
  if (param.rows() != grad.rows() || param.cols() != grad.cols()) {
    throw ShapeError("adam_step: parameter/gradient shape mismatch");
  }
  ensure_state(state, param);
  state.t += 1;
  state.m = hp.beta1 * state.m + (1.0 - hp.beta1) * grad;
  state.v = hp.beta2 * state.v + (1.0 - hp.beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.t));
  param.array() -=
      hp.lr * (state.m.array() / bc1) / ((state.v.array() / bc2).sqrt() + hp.eps);
}

void riemannian_adam_step(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad, AdamState& state,
                          const AdamParams& hp, const geo::GeometryConfig& geom) {
  if (param.rows() != 1) {
    throw ShapeError("riemannian_adam_step: ball parameters are row vectors");
  }
  if (param.rows() != grad.rows() || param.cols() != grad.cols()) {
    throw ShapeError("riemannian_adam_step: parameter/gradient shape mismatch");
  }
  ensure_state(state, param);

  const double sq_norm = param.squaredNorm();
  const double lambda = 2.0 / (1.0 - sq_norm);
  Eigen::MatrixXd rgrad = grad / (lambda * lambda);

  state.t += 1;
  state.m = hp.beta1 * state.m + (1.0 - hp.beta1) * rgrad;
  state.v = hp.beta2 * state.v + (1.0 - hp.beta2) * rgrad.cwiseProduct(rgrad);
  const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.t));
  Eigen::VectorXd step =
      (-hp.lr * (state.m.array() / bc1) / ((state.v.array() / bc2).sqrt() + hp.eps))
          .matrix()
          .transpose();

  geo::BallPoint current = geo::clamp_to_ball(param.transpose(), geom);
  geo::BallPoint moved = geo::mobius_add(current, geo::exp_map_0(step, geom), geom);
  param = moved.coords().transpose();
}

void Optimizer::add_param(const ad::Tensor& p, bool on_ball) {
  params_.push_back(p);
  on_ball_.push_back(on_ball);
  states_.emplace_back();
}

void Optimizer::step() {
  for (size_t i = 0; i < params_.size(); ++i) {
    ad::Tensor& p = params_[i];
    const Eigen::MatrixXd& g = p.grad();
    if (on_ball_[i]) {
      riemannian_adam_step(p.mutable_value(), g, states_[i], hp_, geom_);
    } else {
      adam_step(p.mutable_value(), g, states_[i], hp_);
    }
  }
}

void Optimizer::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

}  // namespace hypad::optim
