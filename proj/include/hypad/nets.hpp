#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "hypad/geometry.hpp"
#include "hypad/optim.hpp"
#include "hypad/rng.hpp"
#include "hypad/tensor.hpp"

namespace hypad::nets {

struct NetConfig {
  int64_t window_width = 100;
  int64_t channels = 1;
  int64_t latent_dim = 20;    // d_z
  int64_t embed_dim = 20;     // d_h
  int64_t enc_hidden = 32;    // per direction
  int64_t dec_hidden = 32;    // per direction, both decoder layers
  int64_t critic_hidden = 100;
  double lambda_gp = 10.0;
  double cycle_weight = 10.0;
  geo::GeometryConfig geometry;

  int64_t flat_dim() const { return window_width * channels; }
};

struct Dense {
  ad::Tensor weight;  // in x out
  ad::Tensor bias;    // 1 x out
};

struct LstmCell {
  ad::Tensor weight;  // (in + hidden) x 4*hidden, gate order [i f o | g]
  ad::Tensor bias;    // 1 x 4*hidden
  int64_t hidden = 0;
};

struct BiLstm {
  LstmCell fwd;
  LstmCell bwd;
};

// One-layer bidirectional LSTM over the window followed by a projection of
// the final states of both directions to the latent code.
struct Encoder {
  BiLstm rnn;
  Dense proj;  // 2*enc_hidden -> latent_dim
};

// Two-layer bidirectional LSTM fed the latent code at every step, with a
// per-step readout back to channel space.
struct Decoder {
  BiLstm l1;
  BiLstm l2;
  Dense out;  // 2*dec_hidden -> channels
};

struct CriticX {
  Dense d1;  // flat window -> hidden
  Dense d2;  // hidden -> 1
};

struct CriticZ {
  Dense d1;  // latent -> 1
};

// Hyperbolic feed-forward layer shared between the input branch and the
// reconstruction branch: exp-map the flattened window, apply the Möbius
// matrix action exp(M log(x)), Möbius-add the ball bias, clamp.
struct HyperHead {
  ad::Tensor weight;  // flat_dim x embed_dim
  ad::Tensor bias;    // 1 x embed_dim, ball-constrained
};

struct ModelBundle {
  NetConfig cfg;
  Encoder encoder;
  Decoder decoder;
  CriticX critic_x;
  CriticZ critic_z;
  HyperHead head;

  std::vector<std::pair<std::string, ad::Tensor>> named_params() const;
  std::vector<ad::Tensor> generator_params() const;  // encoder + decoder + head.weight
  std::vector<ad::Tensor> critic_x_params() const;
  std::vector<ad::Tensor> critic_z_params() const;
};

ModelBundle init_model(const NetConfig& cfg, Rng& rng);

// Batched forward passes. Windows travel flattened as B x (width*channels),
// timestep-major rows.
ad::Tensor encode(const Encoder& enc, const ad::Tensor& flat_windows, const NetConfig& cfg);
ad::Tensor decode(const Decoder& dec, const ad::Tensor& z, const NetConfig& cfg);
ad::Tensor critic_x_score(const CriticX& critic, const ad::Tensor& flat_windows);
ad::Tensor critic_z_score(const CriticZ& critic, const ad::Tensor& z);
ad::Tensor project_hyperbolic(const HyperHead& head, const ad::Tensor& flat_windows,
                              const geo::GeometryConfig& geom);

// Row-wise ball operations on B x d matrices of ball points.
ad::Tensor exp_map_rows(const ad::Tensor& v, const geo::GeometryConfig& geom);
ad::Tensor log_map_rows(const ad::Tensor& x);
ad::Tensor mobius_add_rows(const ad::Tensor& a, const ad::Tensor& b,
                           const geo::GeometryConfig& geom);
ad::Tensor poincare_distance_rows(const ad::Tensor& h, const ad::Tensor& h2,
                                  const geo::GeometryConfig& geom);  // B x 1

// Mean Poincaré distance between paired embeddings (differentiable).
ad::Tensor hyperbolic_cycle_loss(const ad::Tensor& h, const ad::Tensor& h2,
                                 const geo::GeometryConfig& geom);
// Mean squared point-wise error over the flattened windows.
ad::Tensor euclidean_cycle_loss(const ad::Tensor& x, const ad::Tensor& x_rec);

struct LossReport {
  double critic_x_loss = 0.0;
  double critic_z_loss = 0.0;
  double generator_loss = 0.0;
  double cycle_loss = 0.0;
  double gradient_penalty = 0.0;
};

enum class TrainMode { Euclidean, Hyperbolic };

// Owns the three optimizers and the noise stream; one step runs
// `critic_iters` critic updates followed by one generator(+head) update.
// The head bias updates through Riemannian Adam, everything else through
// Adam.
class Trainer {
 public:
  Trainer(ModelBundle& model, TrainMode mode, optim::AdamParams hp, int critic_iters, Rng noise);

  LossReport step(const Eigen::MatrixXd& batch_flat);

  TrainMode mode() const { return mode_; }
  optim::Optimizer& generator_optimizer() { return opt_gen_; }
  optim::Optimizer& critic_x_optimizer() { return opt_cx_; }
  optim::Optimizer& critic_z_optimizer() { return opt_cz_; }

 private:
  ad::Tensor gradient_penalty(const std::function<ad::Tensor(const ad::Tensor&)>& critic,
                              const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake);

  ModelBundle& model_;
  TrainMode mode_;
  int critic_iters_;
  Rng noise_;
  optim::Optimizer opt_gen_;
  optim::Optimizer opt_cx_;
  optim::Optimizer opt_cz_;
};

// Deterministic uniform fill in column-major order; init helper shared by
// model construction and tests.
void fill_uniform(Eigen::MatrixXd& m, double bound, Rng& rng);

}  // namespace hypad::nets
