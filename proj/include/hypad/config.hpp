#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "hypad/errors.hpp"
#include "hypad/geometry.hpp"
#include "hypad/nets.hpp"
#include "hypad/scoring.hpp"

namespace hypad {

// Full run configuration. Precedence: CLI flags > config file > defaults.
struct RunConfig {
  // data
  std::string data_path;
  std::string labels_path;
  std::string output_dir = "out";
  int64_t channels = 1;  // inferred from data at train time

  // windowing / split
  int64_t window_width = 100;
  int64_t stride = 1;
  double train_frac = 0.7;

  // model
  int64_t latent_dim = 20;
  int64_t embed_dim = 20;
  int64_t enc_hidden = 32;
  int64_t dec_hidden = 32;
  int64_t critic_hidden = 100;

  // training
  int64_t epochs = 30;
  int64_t batch_size = 64;
  double lr = 5e-4;
  int64_t critic_iters = 5;
  double lambda_gp = 10.0;
  double cycle_weight = 10.0;

  // scoring
  std::string mode = "hyperbolic_uncertainty";
  double threshold_k = 3.0;
  int64_t min_gap = 1;
  int64_t area_sub_len = 10;
  std::string aggregation = "median";
  int64_t profile_bins = 10;

  // geometry
  double ball_margin = 1e-5;
  double acosh_eps = 1e-7;

  uint64_t seed = 42;

  void validate() const;
  scoring::ScoreMode score_mode() const { return scoring::parse_mode(mode); }
  nets::TrainMode train_mode() const {
    return scoring::is_hyperbolic(score_mode()) ? nets::TrainMode::Hyperbolic
                                                : nets::TrainMode::Euclidean;
  }
  geo::GeometryConfig geometry() const {
    geo::GeometryConfig g;
    g.ball_margin = ball_margin;
    g.acosh_eps = acosh_eps;
    return g;
  }
  nets::NetConfig net_config() const;
  scoring::Aggregation aggregation_kind() const;
};

// Applies "key = value" lines from a keyed-text file.
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

// Applies a single "key" / "value" pair; unknown keys raise ConfigError.
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

// Sorted key=value rendering; the digest below is computed over this text.
std::string canonical_text(const RunConfig& cfg);

uint64_t fnv1a64(const std::string& text);
std::string digest_hex(uint64_t digest);

// Parses a canonical (or any keyed) config text back into a RunConfig.
RunConfig config_from_text(const std::string& text);

}  // namespace hypad
