#include "hypad/nets.hpp"

#include <cmath>

namespace hypad::nets {

namespace ad = hypad::ad;

void fill_uniform(Eigen::MatrixXd& m, double bound, Rng& rng) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      m(i, j) = rng.uniform(-bound, bound);
    }
  }
}

namespace {

Dense make_dense(int64_t in, int64_t out, Rng& rng) {
  const double k = 1.0 / std::sqrt(static_cast<double>(in));
  Eigen::MatrixXd w(in, out), b(1, out);
  fill_uniform(w, k, rng);
  fill_uniform(b, k, rng);
  return Dense{ad::Tensor(std::move(w), true), ad::Tensor(std::move(b), true)};
}

LstmCell make_lstm(int64_t in, int64_t hidden, Rng& rng) {
  const double k = 1.0 / std::sqrt(static_cast<double>(hidden));
  Eigen::MatrixXd w(in + hidden, 4 * hidden), b(1, 4 * hidden);
  fill_uniform(w, k, rng);
  fill_uniform(b, k, rng);
  LstmCell cell{ad::Tensor(std::move(w), true), ad::Tensor(std::move(b), true), hidden};
  return cell;
}

BiLstm make_bilstm(int64_t in, int64_t hidden, Rng& rng) {
  return BiLstm{make_lstm(in, hidden, rng), make_lstm(in, hidden, rng)};
}

ad::Tensor dense_forward(const Dense& d, const ad::Tensor& x) {
  return ad::add(ad::matmul(x, d.weight), d.bias);
}

// Single LSTM pass over per-timestep inputs; returns per-step hidden states
// in input order. Gate layout [i f o | g].
std::vector<ad::Tensor> lstm_direction(const LstmCell& cell, const std::vector<ad::Tensor>& xs,
                                       bool reverse) {
  const int64_t H = cell.hidden;
  const Eigen::Index batch = xs.front().rows();
  ad::Tensor h = ad::Tensor::zeros(batch, H);
  ad::Tensor c = ad::Tensor::zeros(batch, H);
  std::vector<ad::Tensor> out(xs.size());
  for (size_t step = 0; step < xs.size(); ++step) {
    const size_t t = reverse ? xs.size() - 1 - step : step;
    ad::Tensor zin = ad::concat({xs[t], h}, 1);
    ad::Tensor gates = ad::add(ad::matmul(zin, cell.weight), cell.bias);
    ad::Tensor ifo = ad::sigmoid(ad::slice(gates, 1, 0, 3 * H));
    ad::Tensor g = ad::tanh(ad::slice(gates, 1, 3 * H, H));
    ad::Tensor i = ad::slice(ifo, 1, 0, H);
    ad::Tensor f = ad::slice(ifo, 1, H, H);
    ad::Tensor o = ad::slice(ifo, 1, 2 * H, H);
    c = ad::add(ad::mul(f, c), ad::mul(i, g));
    h = ad::mul(o, ad::tanh(c));
    out[t] = h;
  }
  return out;
}

std::vector<ad::Tensor> split_steps(const ad::Tensor& flat, int64_t width, int64_t channels) {
  if (flat.cols() != width * channels) {
    throw ShapeError("window batch has " + std::to_string(flat.cols()) +
                     " columns, expected width*channels = " + std::to_string(width * channels));
  }
  std::vector<ad::Tensor> xs(static_cast<size_t>(width));
  for (int64_t t = 0; t < width; ++t) {
    xs[static_cast<size_t>(t)] = ad::slice(flat, 1, t * channels, channels);
  }
  return xs;
}

}  // namespace

ModelBundle init_model(const NetConfig& cfg, Rng& rng) {
  ModelBundle m;
  m.cfg = cfg;
  m.encoder.rnn = make_bilstm(cfg.channels, cfg.enc_hidden, rng);
  m.encoder.proj = make_dense(2 * cfg.enc_hidden, cfg.latent_dim, rng);
  m.decoder.l1 = make_bilstm(cfg.latent_dim, cfg.dec_hidden, rng);
  m.decoder.l2 = make_bilstm(2 * cfg.dec_hidden, cfg.dec_hidden, rng);
  m.decoder.out = make_dense(2 * cfg.dec_hidden, cfg.channels, rng);
  m.critic_x.d1 = make_dense(cfg.flat_dim(), cfg.critic_hidden, rng);
  m.critic_x.d2 = make_dense(cfg.critic_hidden, 1, rng);
  m.critic_z.d1 = make_dense(cfg.latent_dim, 1, rng);

  const double k = 1.0 / std::sqrt(static_cast<double>(cfg.flat_dim()));
  Eigen::MatrixXd hw(cfg.flat_dim(), cfg.embed_dim);
  fill_uniform(hw, k, rng);
  m.head.weight = ad::Tensor(std::move(hw), true);
  m.head.bias = ad::Tensor(Eigen::MatrixXd::Zero(1, cfg.embed_dim), true);
  return m;
}

std::vector<std::pair<std::string, ad::Tensor>> ModelBundle::named_params() const {
  return {
      {"encoder.rnn.fwd.weight", encoder.rnn.fwd.weight},
      {"encoder.rnn.fwd.bias", encoder.rnn.fwd.bias},
      {"encoder.rnn.bwd.weight", encoder.rnn.bwd.weight},
      {"encoder.rnn.bwd.bias", encoder.rnn.bwd.bias},
      {"encoder.proj.weight", encoder.proj.weight},
      {"encoder.proj.bias", encoder.proj.bias},
      {"decoder.l1.fwd.weight", decoder.l1.fwd.weight},
      {"decoder.l1.fwd.bias", decoder.l1.fwd.bias},
      {"decoder.l1.bwd.weight", decoder.l1.bwd.weight},
      {"decoder.l1.bwd.bias", decoder.l1.bwd.bias},
      {"decoder.l2.fwd.weight", decoder.l2.fwd.weight},
      {"decoder.l2.fwd.bias", decoder.l2.fwd.bias},
      {"decoder.l2.bwd.weight", decoder.l2.bwd.weight},
      {"decoder.l2.bwd.bias", decoder.l2.bwd.bias},
      {"decoder.out.weight", decoder.out.weight},
      {"decoder.out.bias", decoder.out.bias},
      {"critic_x.d1.weight", critic_x.d1.weight},
      {"critic_x.d1.bias", critic_x.d1.bias},
      {"critic_x.d2.weight", critic_x.d2.weight},
      {"critic_x.d2.bias", critic_x.d2.bias},
      {"critic_z.d1.weight", critic_z.d1.weight},
      {"critic_z.d1.bias", critic_z.d1.bias},
      {"head.weight", head.weight},
      {"head.bias", head.bias},
  };
}

std::vector<ad::Tensor> ModelBundle::generator_params() const {
  return {encoder.rnn.fwd.weight, encoder.rnn.fwd.bias, encoder.rnn.bwd.weight,
          encoder.rnn.bwd.bias,   encoder.proj.weight,  encoder.proj.bias,
          decoder.l1.fwd.weight,  decoder.l1.fwd.bias,  decoder.l1.bwd.weight,
          decoder.l1.bwd.bias,    decoder.l2.fwd.weight, decoder.l2.fwd.bias,
          decoder.l2.bwd.weight,  decoder.l2.bwd.bias,  decoder.out.weight,
          decoder.out.bias,       head.weight};
}

std::vector<ad::Tensor> ModelBundle::critic_x_params() const {
  return {critic_x.d1.weight, critic_x.d1.bias, critic_x.d2.weight, critic_x.d2.bias};
}

std::vector<ad::Tensor> ModelBundle::critic_z_params() const {
  return {critic_z.d1.weight, critic_z.d1.bias};
}

ad::Tensor encode(const Encoder& enc, const ad::Tensor& flat_windows, const NetConfig& cfg) {
  auto xs = split_steps(flat_windows, cfg.window_width, cfg.channels);
  auto fwd = lstm_direction(enc.rnn.fwd, xs, false);
  auto bwd = lstm_direction(enc.rnn.bwd, xs, true);
  // final states of each direction
  ad::Tensor last = ad::concat({fwd.back(), bwd.front()}, 1);
  return dense_forward(enc.proj, last);
}

ad::Tensor decode(const Decoder& dec, const ad::Tensor& z, const NetConfig& cfg) {
  std::vector<ad::Tensor> zin(static_cast<size_t>(cfg.window_width), z);
  auto f1 = lstm_direction(dec.l1.fwd, zin, false);
  auto b1 = lstm_direction(dec.l1.bwd, zin, true);
  std::vector<ad::Tensor> mid(zin.size());
  for (size_t t = 0; t < zin.size(); ++t) mid[t] = ad::concat({f1[t], b1[t]}, 1);
  auto f2 = lstm_direction(dec.l2.fwd, mid, false);
  auto b2 = lstm_direction(dec.l2.bwd, mid, true);
  std::vector<ad::Tensor> outs(zin.size());
  for (size_t t = 0; t < zin.size(); ++t) {
    outs[t] = dense_forward(dec.out, ad::concat({f2[t], b2[t]}, 1));
  }
  return ad::concat(outs, 1);
}

ad::Tensor critic_x_score(const CriticX& critic, const ad::Tensor& flat_windows) {
  ad::Tensor h = ad::leaky_relu(dense_forward(critic.d1, flat_windows), 0.2);
  return dense_forward(critic.d2, h);
}

ad::Tensor critic_z_score(const CriticZ& critic, const ad::Tensor& z) {
  return dense_forward(critic.d1, z);
}

ad::Tensor exp_map_rows(const ad::Tensor& v, const geo::GeometryConfig& geom) {
  ad::Tensor scale = ad::tanhc(ad::row_norm2(v));
  return ad::clamp_ball_rows(ad::mul(v, scale), geom.ball_margin);
}

ad::Tensor log_map_rows(const ad::Tensor& x) {
  ad::Tensor scale = ad::artanhc(ad::row_norm2(x));
  return ad::mul(x, scale);
}

ad::Tensor mobius_add_rows(const ad::Tensor& a, const ad::Tensor& b,
                           const geo::GeometryConfig& geom) {
  ad::Tensor ab = ad::sum(ad::mul(a, b), 1);  // row dot products
  ad::Tensor na2 = ad::row_sumsq(a);
  ad::Tensor nb2 = ad::row_sumsq(b);
  ad::Tensor two_ab = ad::mul(ab, 2.0);
  ad::Tensor coef_a = ad::add(ad::add(two_ab, nb2), 1.0);
  ad::Tensor coef_b = ad::sub(ad::Tensor(1.0), na2);
  ad::Tensor denom = ad::add(ad::add(two_ab, ad::mul(na2, nb2)), 1.0);
  ad::Tensor num = ad::add(ad::mul(a, coef_a), ad::mul(b, coef_b));
  return ad::clamp_ball_rows(ad::div(num, denom), geom.ball_margin);
}

ad::Tensor project_hyperbolic(const HyperHead& head, const ad::Tensor& flat_windows,
                              const geo::GeometryConfig& geom) {
  ad::Tensor on_ball = exp_map_rows(flat_windows, geom);
  ad::Tensor tangent = log_map_rows(on_ball);
  ad::Tensor acted = exp_map_rows(ad::matmul(tangent, head.weight), geom);
  return mobius_add_rows(acted, head.bias, geom);
}

ad::Tensor poincare_distance_rows(const ad::Tensor& h, const ad::Tensor& h2,
                                  const geo::GeometryConfig& geom) {
  ad::Tensor diff2 = ad::row_sumsq(ad::sub(h, h2));
  ad::Tensor da = ad::sub(ad::Tensor(1.0), ad::row_sumsq(h));
  ad::Tensor db = ad::sub(ad::Tensor(1.0), ad::row_sumsq(h2));
  ad::Tensor arg = ad::add(ad::mul(ad::div(diff2, ad::mul(da, db)), 2.0), 1.0);
  return ad::acosh_stable(arg, geom.acosh_eps);
}

ad::Tensor hyperbolic_cycle_loss(const ad::Tensor& h, const ad::Tensor& h2,
                                 const geo::GeometryConfig& geom) {
  return ad::mean(poincare_distance_rows(h, h2, geom));
}

ad::Tensor euclidean_cycle_loss(const ad::Tensor& x, const ad::Tensor& x_rec) {
  return ad::mean(ad::square(ad::sub(x, x_rec)));
}

Trainer::Trainer(ModelBundle& model, TrainMode mode, optim::AdamParams hp, int critic_iters,
                 Rng noise)
    : model_(model),
      mode_(mode),
      critic_iters_(critic_iters),
      noise_(noise),
      opt_gen_(hp, model.cfg.geometry),
      opt_cx_(hp, model.cfg.geometry),
      opt_cz_(hp, model.cfg.geometry) {
  for (const auto& p : model_.generator_params()) opt_gen_.add_param(p);
  opt_gen_.add_param(model_.head.bias, /*on_ball=*/true);
  for (const auto& p : model_.critic_x_params()) opt_cx_.add_param(p);
  for (const auto& p : model_.critic_z_params()) opt_cz_.add_param(p);
}

namespace {

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

}  // namespace

// Penalty on interpolates between real and fake samples. The squared norm
// of the critic's input gradient is estimated from symmetric finite
// differences along random unit directions; the estimate is itself a
// function of critic outputs, so the penalty trains the critic without
// second-order differentiation.
ad::Tensor Trainer::gradient_penalty(const std::function<ad::Tensor(const ad::Tensor&)>& critic,
                                     const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake) {
  const Eigen::Index batch = real.rows();
  const Eigen::Index dim = real.cols();
  Eigen::VectorXd mixing(batch);
  for (Eigen::Index i = 0; i < batch; ++i) mixing(i) = noise_.uniform(0.0, 1.0);
  Eigen::MatrixXd interp =
      mixing.asDiagonal() * real + (Eigen::VectorXd::Ones(batch) - mixing).asDiagonal() * fake;

  constexpr int kDirections = 2;
  constexpr double kDelta = 1e-3;
  ad::Tensor grad_sq;
  for (int d = 0; d < kDirections; ++d) {
    Eigen::MatrixXd u = gaussian(batch, dim, noise_);
    for (Eigen::Index i = 0; i < batch; ++i) {
      const double n = u.row(i).norm();
      if (n > 0) u.row(i) /= n;
    }
    ad::Tensor up = critic(ad::Tensor(interp + kDelta * u));
    ad::Tensor down = critic(ad::Tensor(interp - kDelta * u));
    ad::Tensor slope = ad::mul(ad::sub(up, down), 1.0 / (2.0 * kDelta));
    ad::Tensor sq = ad::square(slope);
    grad_sq = grad_sq.defined() ? ad::add(grad_sq, sq) : sq;
  }
  grad_sq = ad::mul(grad_sq, static_cast<double>(dim) / kDirections);
  ad::Tensor grad_norm = ad::sqrt(ad::add(grad_sq, 1e-12));
  return ad::mul(ad::mean(ad::square(ad::add(grad_norm, -1.0))), model_.cfg.lambda_gp);
}

LossReport Trainer::step(const Eigen::MatrixXd& batch_flat) {
  const auto& cfg = model_.cfg;
  if (batch_flat.cols() != cfg.flat_dim()) {
    throw ShapeError("train step: batch has " + std::to_string(batch_flat.cols()) +
                     " columns, expected " + std::to_string(cfg.flat_dim()));
  }
  const Eigen::Index batch = batch_flat.rows();
  LossReport report;

  // latent codes of the real windows; fixed across critic iterations
  Eigen::MatrixXd enc_real;
  {
    ad::NoGradGuard no_grad;
    enc_real = encode(model_.encoder, ad::Tensor(batch_flat), cfg).value();
  }

  for (int it = 0; it < critic_iters_; ++it) {
    Eigen::MatrixXd fake_x;
    {
      ad::NoGradGuard no_grad;
      fake_x = decode(model_.decoder, ad::Tensor(gaussian(batch, cfg.latent_dim, noise_)), cfg)
                   .value();
    }
    ad::Tensor real_scores = critic_x_score(model_.critic_x, ad::Tensor(batch_flat));
    ad::Tensor fake_scores = critic_x_score(model_.critic_x, ad::Tensor(fake_x));
    ad::Tensor gp_x = gradient_penalty(
        [this](const ad::Tensor& t) { return critic_x_score(model_.critic_x, t); }, batch_flat,
        fake_x);
    ad::Tensor loss_cx =
        ad::add(ad::sub(ad::mean(fake_scores), ad::mean(real_scores)), gp_x);
    ad::backward(loss_cx);
    opt_cx_.step();
    opt_cx_.zero_grad();

    Eigen::MatrixXd z_real = gaussian(batch, cfg.latent_dim, noise_);
    ad::Tensor zr_scores = critic_z_score(model_.critic_z, ad::Tensor(z_real));
    ad::Tensor zf_scores = critic_z_score(model_.critic_z, ad::Tensor(enc_real));
    ad::Tensor gp_z = gradient_penalty(
        [this](const ad::Tensor& t) { return critic_z_score(model_.critic_z, t); }, z_real,
        enc_real);
    ad::Tensor loss_cz = ad::add(ad::sub(ad::mean(zf_scores), ad::mean(zr_scores)), gp_z);
    ad::backward(loss_cz);
    opt_cz_.step();
    opt_cz_.zero_grad();

    report.critic_x_loss += loss_cx.scalar();
    report.critic_z_loss += loss_cz.scalar();
    report.gradient_penalty += gp_x.scalar() + gp_z.scalar();
  }
  report.critic_x_loss /= critic_iters_;
  report.critic_z_loss /= critic_iters_;
  report.gradient_penalty /= critic_iters_;

  // generator + head update
  ad::Tensor real = ad::Tensor(batch_flat);
  ad::Tensor z_enc = encode(model_.encoder, real, cfg);
  ad::Tensor x_rec = decode(model_.decoder, z_enc, cfg);
  ad::Tensor x_gen =
      decode(model_.decoder, ad::Tensor(gaussian(batch, cfg.latent_dim, noise_)), cfg);
  ad::Tensor adv = ad::sub(ad::neg(ad::mean(critic_x_score(model_.critic_x, x_gen))),
                           ad::mean(critic_z_score(model_.critic_z, z_enc)));
  ad::Tensor cycle;
  if (mode_ == TrainMode::Hyperbolic) {
    ad::Tensor h = project_hyperbolic(model_.head, real, cfg.geometry);
    ad::Tensor h_rec = project_hyperbolic(model_.head, x_rec, cfg.geometry);
    cycle = hyperbolic_cycle_loss(h, h_rec, cfg.geometry);
  } else {
    cycle = euclidean_cycle_loss(real, x_rec);
  }
  ad::Tensor gen_loss = ad::add(adv, ad::mul(cycle, cfg.cycle_weight));
  ad::backward(gen_loss);
  opt_gen_.step();
  opt_gen_.zero_grad();
  opt_cx_.zero_grad();
  opt_cz_.zero_grad();

  report.generator_loss = gen_loss.scalar();
  report.cycle_loss = cycle.scalar();

  const bool finite = std::isfinite(report.critic_x_loss) &&
                      std::isfinite(report.critic_z_loss) &&
                      std::isfinite(report.generator_loss) && std::isfinite(report.cycle_loss) &&
                      std::isfinite(report.gradient_penalty);
  if (!finite) {
    throw DivergenceError("training diverged: non-finite loss (critic_x=" +
                          std::to_string(report.critic_x_loss) +
                          ", critic_z=" + std::to_string(report.critic_z_loss) +
                          ", generator=" + std::to_string(report.generator_loss) + ")");
  }
  return report;
}

}  // namespace hypad::nets
