#pragma once

#include <Eigen/Dense>

#include "hypad/errors.hpp"

namespace hypad::geo {

// Unit Poincaré ball, curvature fixed at 1. `ball_margin` keeps points off
// the boundary so the conformal factor and distances stay finite;
// `acosh_eps` regularises the acosh derivative at coincident points.
struct GeometryConfig {
  double curvature_c = 1.0;
  double ball_margin = 1e-5;
  double acosh_eps = 1e-7;
};

// A point of the open unit ball. Construction goes through clamp_to_ball,
// so the norm never exceeds 1 - ball_margin.
class BallPoint {
 public:
  BallPoint() = default;
  const Eigen::VectorXd& coords() const { return coords_; }
  Eigen::Index dim() const { return coords_.size(); }
  double norm() const { return coords_.norm(); }
  double squared_norm() const { return coords_.squaredNorm(); }

  friend BallPoint clamp_to_ball(const Eigen::VectorXd& v, const GeometryConfig& cfg);

 private:
  explicit BallPoint(Eigen::VectorXd coords) : coords_(std::move(coords)) {}
  Eigen::VectorXd coords_;
};

// Projects v into the closed ball of radius 1 - ball_margin. Interior
// points pass through unchanged. Non-finite input raises ValueError.
BallPoint clamp_to_ball(const Eigen::VectorXd& v, const GeometryConfig& cfg);

// lambda_x = 2 / (1 - ||x||^2); always >= 2, equality only at the origin.
double conformal_factor(const BallPoint& x);

// Exponential map at the origin: tanh(||v||) * v / ||v||, then clamp.
BallPoint exp_map_0(const Eigen::VectorXd& v, const GeometryConfig& cfg);

// Inverse of exp_map_0 (below the clamp threshold): artanh(||x||) * x / ||x||.
Eigen::VectorXd log_map_0(const BallPoint& x);

// Gyro-addition a (+) b, clamped back to the ball.
BallPoint mobius_add(const BallPoint& a, const BallPoint& b, const GeometryConfig& cfg);

// acosh(1 + 2 ||h - h2||^2 / ((1 - ||h||^2)(1 - ||h2||^2))), argument
// clamped to >= 1. Symmetric, zero iff the points coincide.
double poincare_distance(const BallPoint& h, const BallPoint& h2, const GeometryConfig& cfg);

// 1 - ||h2||^2: 1 at the origin, ~0 at the clamped boundary.
double uncertainty(const BallPoint& h2);

}  // namespace hypad::geo
