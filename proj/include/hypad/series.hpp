#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hypad/errors.hpp"
#include "hypad/rng.hpp"

namespace hypad::series {

using Interval = std::pair<int64_t, int64_t>;  // inclusive [start, end] in timestamp units

// Timestamped multichannel signal with optional ground-truth anomaly
// intervals. Timestamps are strictly increasing; intervals lie inside the
// timestamp range. A point anomaly is an interval with start == end.
struct SeriesFrame {
  std::vector<int64_t> timestamps;
  Eigen::MatrixXd values;  // T x C
  std::vector<Interval> labels;

  int64_t length() const { return values.rows(); }
  int64_t channels() const { return values.cols(); }
  void validate() const;
};

// Sliding windows over a frame. Window k covers row indices
// [origins[k], origins[k] + width).
struct WindowSet {
  std::vector<Eigen::MatrixXd> windows;  // each width x C
  std::vector<int64_t> origins;
  int64_t width = 0;
  int64_t stride = 1;

  int64_t count() const { return static_cast<int64_t>(windows.size()); }
};

// Per-channel affine map fitted on the training split; transforms values
// into [-1, 1]. A constant channel maps to zero (scale 1, centered offset).
struct MinMaxScaler {
  Eigen::VectorXd center;  // per channel
  Eigen::VectorXd half_range;

  Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd inverse(const Eigen::MatrixXd& x) const;
};

// CSV with header "timestamp,value[,value...]"; rows are sorted by
// timestamp, duplicates rejected. An optional label CSV holds one
// "start,end" interval per row.
SeriesFrame load_csv(const std::filesystem::path& data_path,
                     const std::optional<std::filesystem::path>& label_path = std::nullopt);

void save_csv(const SeriesFrame& frame, const std::filesystem::path& data_path);
void save_labels(const std::vector<Interval>& labels, const std::filesystem::path& path);
std::vector<Interval> load_labels(const std::filesystem::path& path);

MinMaxScaler fit_minmax(const Eigen::MatrixXd& train_values);

WindowSet make_windows(const SeriesFrame& frame, int64_t width = 100, int64_t stride = 1);
WindowSet make_windows(const Eigen::MatrixXd& values, int64_t width = 100, int64_t stride = 1);

// Contiguous prefix/suffix split. Every labeled anomaly must fall entirely
// in the test portion; otherwise a DataError suggests moving the split.
std::pair<SeriesFrame, SeriesFrame> chrono_split(const SeriesFrame& frame, double train_frac);

enum class AnomalyKind { Spike, LevelShift, AmplitudeBurst };

struct InjectedAnomaly {
  AnomalyKind kind = AnomalyKind::Spike;
  int64_t start = 0;
  int64_t end = 0;        // inclusive; == start for a spike
  double magnitude = 1.0;  // additive for spike/shift, multiplicative for burst
};

// Synthetic benchmark: base sine plus Gaussian noise with injected,
// exactly-labeled anomalies. Deterministic given the seed.
struct SynthSpec {
  int64_t length = 5000;
  double period = 50.0;
  double amplitude = 1.0;
  double noise_sigma = 0.05;
  uint64_t seed = 7;
  std::vector<InjectedAnomaly> anomalies;
};

SeriesFrame synth_generate(const SynthSpec& spec);

// Keyed-text document: "key = value" lines plus repeated
// "anomaly = <kind> <start> <end> <magnitude>" entries.
SynthSpec parse_synth_spec(const std::filesystem::path& path);

}  // namespace hypad::series
