#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hypad/errors.hpp"
#include "hypad/series.hpp"

namespace hypad::scoring {

enum class ScoreMode {
  EuclideanPointwise,
  EuclideanArea,
  EuclideanDtw,
  Hyperbolic,
  HyperbolicUncertainty,
};

ScoreMode parse_mode(const std::string& name);
std::string mode_name(ScoreMode mode);
bool is_hyperbolic(ScoreMode mode);

// Per-timestamp anomaly scores over the scored span plus detected
// intervals (timestamp units, inclusive, disjoint, sorted).
struct ScoreTrace {
  std::vector<int64_t> timestamps;
  Eigen::VectorXd re_raw;
  Eigen::VectorXd critic_raw;  // oriented so larger = more anomalous
  Eigen::VectorXd uncertainty;  // empty in euclidean modes
  Eigen::VectorXd z_re;
  Eigen::VectorXd z_critic;
  Eigen::VectorXd combined;
  std::vector<series::Interval> detected;
  ScoreMode mode = ScoreMode::EuclideanPointwise;
  double threshold = 0.0;
};

// Mean absolute difference over the window.
double re_pointwise(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x_rec);

// Mean over length-`sub_len` sub-windows of |trapezoidal integral of the
// residual| / (2 * sub_len); a short final chunk is padded with its last
// residual value.
double re_area(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x_rec, int64_t sub_len = 10);

// Dynamic time warping with absolute-difference local cost and steps
// left/up/diagonal, per channel, summed over channels. `radius` bounds
// |i - j| (Sakoe-Chiba); negative means unconstrained.
double re_dtw(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x_rec, int64_t radius = -1);

// (s - mean) / population std; all zeros when the std collapses.
Eigen::VectorXd z_normalize(const Eigen::VectorXd& scores);

// Eq-style product score: z_re * z_critic, attenuated by certainty
// (1 - u) when an uncertainty array is supplied.
Eigen::VectorXd combine_scores(const Eigen::VectorXd& z_re, const Eigen::VectorXd& z_critic,
                               const std::optional<Eigen::VectorXd>& u = std::nullopt);

enum class Aggregation { Median, Mean };

// Spreads stride-1 window scores onto timestamps: each timestamp gets the
// median (or mean) of the scores of every window covering it.
Eigen::VectorXd aggregate_to_timestamps(const Eigen::VectorXd& window_scores,
                                        const std::vector<int64_t>& origins, int64_t width,
                                        int64_t T, Aggregation agg = Aggregation::Median);

// Threshold at mean + k*std; maximal runs above the threshold become
// intervals (index units) and runs separated by <= min_gap merge.
std::vector<series::Interval> detect_intervals(const Eigen::VectorXd& trace, double k = 3.0,
                                               int64_t min_gap = 1, double* threshold_out = nullptr);

struct UncertaintyBin {
  double lo = 0.0;
  double hi = 0.0;
  int64_t count = 0;
  double mean_cosine = 0.0;
};

struct UncertaintyProfile {
  std::vector<UncertaintyBin> bins;  // all bins, including empty ones
  int64_t skipped = 0;               // zero-norm pairs
};

// Bins window pairs by uncertainty of the reconstruction embedding into
// equal-width bins over [0, 1] and reports the mean cosine distance
// 1 - <h, h_rec> / (|h| |h_rec|) per occupied bin.
UncertaintyProfile uncertainty_profile(const Eigen::MatrixXd& h, const Eigen::MatrixXd& h_rec,
                                       int bins = 10);

// Spearman rank correlation between occupied-bin index and mean cosine
// distance; NaN when fewer than two occupied bins.
double profile_spearman(const UncertaintyProfile& profile);

}  // namespace hypad::scoring
