#include "hypad/geometry.hpp"

#include <cmath>

namespace hypad::geo {

BallPoint clamp_to_ball(const Eigen::VectorXd& v, const GeometryConfig& cfg) {
  if (!v.allFinite()) {
    throw ValueError("clamp_to_ball: non-finite input vector");
  }
  const double max_norm = 1.0 - cfg.ball_margin;
  const double n = v.norm();
  if (n <= max_norm) {
    return BallPoint(v);
  }
  return BallPoint(v * (max_norm / n));
}

double conformal_factor(const BallPoint& x) {
  return 2.0 / (1.0 - x.squared_norm());
}

BallPoint exp_map_0(const Eigen::VectorXd& v, const GeometryConfig& cfg) {
  if (!v.allFinite()) {
    throw ValueError("exp_map_0: non-finite input vector");
  }
  const double n = v.norm();
  if (n == 0.0) {
    return clamp_to_ball(v, cfg);
  }
  return clamp_to_ball(std::tanh(n) / n * v, cfg);
}

Eigen::VectorXd log_map_0(const BallPoint& x) {
  const double n = x.norm();
  if (n == 0.0) {
    return x.coords();
  }
  return std::atanh(n) / n * x.coords();
}

BallPoint mobius_add(const BallPoint& a, const BallPoint& b, const GeometryConfig& cfg) {
  if (a.dim() != b.dim()) {
    throw ShapeError("mobius_add: dimension mismatch");
  }
  const double ab = a.coords().dot(b.coords());
  const double na2 = a.squared_norm();
  const double nb2 = b.squared_norm();
  const double denom = 1.0 + 2.0 * ab + na2 * nb2;
  Eigen::VectorXd num = (1.0 + 2.0 * ab + nb2) * a.coords() + (1.0 - na2) * b.coords();
  return clamp_to_ball(num / denom, cfg);
}

double poincare_distance(const BallPoint& h, const BallPoint& h2, const GeometryConfig& cfg) {
  if (h.dim() != h2.dim()) {
    throw ShapeError("poincare_distance: dimension mismatch");
  }
  const double num = (h.coords() - h2.coords()).squaredNorm();
  const double da = 1.0 - h.squared_norm();
  const double db = 1.0 - h2.squared_norm();
  const double arg = 1.0 + 2.0 * num / (da * db);
  return std::acosh(std::max(1.0, arg));
}

double uncertainty(const BallPoint& h2) {
  return 1.0 - h2.squared_norm();
}

}  // namespace hypad::geo
