#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "hypad/checkpoint.hpp"
#include "hypad/config.hpp"
#include "hypad/scoring.hpp"
#include "hypad/series.hpp"

namespace hypad::pipeline {

struct EpochLog {
  int64_t epoch = 0;
  nets::LossReport losses;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochLog> log;
};

// Splits chronologically, fits the scaler on the training prefix, trains
// `epochs` full passes and returns the final checkpoint. `on_epoch`, when
// given, runs after every epoch with the current snapshot (the CLI uses it
// to retain the last good checkpoint on divergence).
TrainResult train_on_frame(
    const series::SeriesFrame& frame, RunConfig cfg,
    const std::function<void(const Checkpoint&, const std::vector<EpochLog>&)>& on_epoch = {});

struct DetectResult {
  scoring::ScoreTrace trace;
  Eigen::MatrixXd window_h;      // per-window embeddings, hyperbolic modes only
  Eigen::MatrixXd window_h_rec;
  Eigen::VectorXd window_uncertainty;
};

// Scores the test split of `frame` with a trained checkpoint. The scoring
// mode comes from `cfg` and may pick any variant compatible with the
// checkpoint family.
DetectResult detect_on_frame(const series::SeriesFrame& frame, const Checkpoint& ckpt,
                             const RunConfig& cfg);

struct AnalyzeResult {
  scoring::UncertaintyProfile profile;
};

AnalyzeResult analyze_on_frame(const series::SeriesFrame& frame, const Checkpoint& ckpt,
                               const RunConfig& cfg);

// ---- file-level commands (CLI surface) ----

struct TrainArtifacts {
  std::filesystem::path checkpoint;
  std::filesystem::path log;
};
TrainArtifacts cmd_train(RunConfig cfg);

struct DetectArtifacts {
  std::filesystem::path scores;
  std::filesystem::path intervals;
  std::optional<std::filesystem::path> svg;
  scoring::ScoreTrace trace;
};
DetectArtifacts cmd_detect(RunConfig cfg, const std::filesystem::path& checkpoint_path,
                           bool write_svg);

struct AnalyzeArtifacts {
  std::filesystem::path bins;
  std::filesystem::path svg;
  scoring::UncertaintyProfile profile;
};
AnalyzeArtifacts cmd_analyze(RunConfig cfg, const std::filesystem::path& checkpoint_path);

// ---- artifact writers (deterministic text form) ----

void write_train_log(const std::filesystem::path& path, const std::vector<EpochLog>& log,
                     uint64_t digest);
void write_scores_csv(const std::filesystem::path& path, const scoring::ScoreTrace& trace,
                      uint64_t digest);
void write_intervals_csv(const std::filesystem::path& path, const scoring::ScoreTrace& trace,
                         uint64_t digest);
void write_bins_csv(const std::filesystem::path& path,
                    const scoring::UncertaintyProfile& profile, uint64_t digest);

// Flattens a width x channels window into a timestep-major row.
Eigen::RowVectorXd flatten_window(const Eigen::MatrixXd& window);

}  // namespace hypad::pipeline
