#include "hypad/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hypad::scoring {

ScoreMode parse_mode(const std::string& name) {
  if (name == "euclidean_pointwise") return ScoreMode::EuclideanPointwise;
  if (name == "euclidean_area") return ScoreMode::EuclideanArea;
  if (name == "euclidean_dtw") return ScoreMode::EuclideanDtw;
  if (name == "hyperbolic") return ScoreMode::Hyperbolic;
  if (name == "hyperbolic_uncertainty") return ScoreMode::HyperbolicUncertainty;
  throw ConfigError("unknown mode '" + name +
                    "' (expected euclidean_pointwise|euclidean_area|euclidean_dtw|hyperbolic|"
                    "hyperbolic_uncertainty)");
}

std::string mode_name(ScoreMode mode) {
  switch (mode) {
    case ScoreMode::EuclideanPointwise: return "euclidean_pointwise";
    case ScoreMode::EuclideanArea: return "euclidean_area";
    case ScoreMode::EuclideanDtw: return "euclidean_dtw";
    case ScoreMode::Hyperbolic: return "hyperbolic";
    case ScoreMode::HyperbolicUncertainty: return "hyperbolic_uncertainty";
  }
  return "?";
}

bool is_hyperbolic(ScoreMode mode) {
  return mode == ScoreMode::Hyperbolic || mode == ScoreMode::HyperbolicUncertainty;
}

double re_pointwise(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x_rec) {
  if (x.rows() != x_rec.rows() || x.cols() != x_rec.cols()) {
    throw ShapeError("re_pointwise: shape mismatch");
  }
  return (x - x_rec).cwiseAbs().mean();
}

double re_area(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x_rec, int64_t sub_len) {
  if (x.rows() != x_rec.rows() || x.cols() != x_rec.cols()) {
    throw ShapeError("re_area: shape mismatch");
  }
  if (sub_len < 2) throw ValueError("re_area: sub_len must be >= 2");
  const int64_t w = x.rows();
  double total = 0.0;
  int64_t chunks = 0;
  for (int64_t c = 0; c < x.cols(); ++c) {
    for (int64_t start = 0; start < w; start += sub_len) {
      // residual chunk, padded with its last value when the window does not
      // divide evenly
      Eigen::VectorXd r(sub_len);
      for (int64_t i = 0; i < sub_len; ++i) {
        const int64_t idx = std::min(start + i, w - 1);
        r(i) = x(idx, c) - x_rec(idx, c);
      }
      double integral = 0.0;
      for (int64_t i = 0; i + 1 < sub_len; ++i) integral += 0.5 * (r(i) + r(i + 1));
      total += std::abs(integral) / (2.0 * static_cast<double>(sub_len));
      ++chunks;
    }
  }
  return total / static_cast<double>(chunks);
}

double re_dtw(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x_rec, int64_t radius) {
  if (x.cols() != x_rec.cols()) throw ShapeError("re_dtw: channel mismatch");
  const int64_t n = x.rows();
  const int64_t m = x_rec.rows();
  if (n == 0 || m == 0) throw ValueError("re_dtw: empty sequence");
  const double inf = std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (int64_t c = 0; c < x.cols(); ++c) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Constant(n + 1, m + 1, inf);
    D(0, 0) = 0.0;
    for (int64_t i = 1; i <= n; ++i) {
      int64_t j_lo = 1, j_hi = m;
      if (radius >= 0) {
        j_lo = std::max<int64_t>(1, i - radius);
        j_hi = std::min<int64_t>(m, i + radius);
      }
      for (int64_t j = j_lo; j <= j_hi; ++j) {
        const double cost = std::abs(x(i - 1, c) - x_rec(j - 1, c));
        D(i, j) = cost + std::min({D(i - 1, j), D(i, j - 1), D(i - 1, j - 1)});
      }
    }
    total += D(n, m);
  }
  return total;
}

Eigen::VectorXd z_normalize(const Eigen::VectorXd& scores) {
  if (scores.size() < 2) throw ValueError("z_normalize: need at least 2 scores");
  const double mean = scores.mean();
  const double var = (scores.array() - mean).square().mean();
  const double sd = std::sqrt(var);
  if (sd < 1e-12) return Eigen::VectorXd::Zero(scores.size());
  return (scores.array() - mean) / sd;
}

Eigen::VectorXd combine_scores(const Eigen::VectorXd& z_re, const Eigen::VectorXd& z_critic,
                               const std::optional<Eigen::VectorXd>& u) {
  if (z_re.size() != z_critic.size()) throw ShapeError("combine_scores: length mismatch");
  Eigen::VectorXd out = z_re.cwiseProduct(z_critic);
  if (u) {
    if (u->size() != z_re.size()) throw ShapeError("combine_scores: uncertainty length mismatch");
    out = out.cwiseProduct((1.0 - u->array()).matrix());
  }
  return out;
}

Eigen::VectorXd aggregate_to_timestamps(const Eigen::VectorXd& window_scores,
                                        const std::vector<int64_t>& origins, int64_t width,
                                        int64_t T, Aggregation agg) {
  if (window_scores.size() != static_cast<Eigen::Index>(origins.size())) {
    throw ShapeError("aggregate_to_timestamps: scores/origins length mismatch");
  }
  Eigen::VectorXd trace = Eigen::VectorXd::Zero(T);
  // origins are sorted ascending; windows covering t have origin in
  // [t - width + 1, t]
  std::vector<double> bucket;
  size_t lo = 0;
  for (int64_t t = 0; t < T; ++t) {
    while (lo < origins.size() && origins[lo] + width - 1 < t) ++lo;
    bucket.clear();
    for (size_t k = lo; k < origins.size() && origins[k] <= t; ++k) {
      bucket.push_back(window_scores(static_cast<Eigen::Index>(k)));
    }
    if (bucket.empty()) {
      trace(t) = 0.0;
      continue;
    }
    if (agg == Aggregation::Mean) {
      trace(t) = std::accumulate(bucket.begin(), bucket.end(), 0.0) /
                 static_cast<double>(bucket.size());
    } else {
      std::sort(bucket.begin(), bucket.end());
      const size_t n = bucket.size();
      trace(t) = n % 2 == 1 ? bucket[n / 2] : 0.5 * (bucket[n / 2 - 1] + bucket[n / 2]);
    }
  }
  return trace;
}

std::vector<series::Interval> detect_intervals(const Eigen::VectorXd& trace, double k,
                                               int64_t min_gap, double* threshold_out) {
  if (!trace.allFinite()) throw ValueError("detect_intervals: non-finite trace");
  const double mean = trace.mean();
  const double sd = std::sqrt((trace.array() - mean).square().mean());
  const double theta = mean + k * sd;
  if (threshold_out) *threshold_out = theta;

  std::vector<series::Interval> runs;
  int64_t start = -1;
  for (int64_t t = 0; t < trace.size(); ++t) {
    const bool above = sd > 0.0 && trace(t) > theta;
    if (above && start < 0) start = t;
    if (!above && start >= 0) {
      runs.emplace_back(start, t - 1);
      start = -1;
    }
  }
  if (start >= 0) runs.emplace_back(start, trace.size() - 1);

  std::vector<series::Interval> merged;
  for (const auto& r : runs) {
    if (!merged.empty() && r.first - merged.back().second - 1 <= min_gap) {
      merged.back().second = r.second;
    } else {
      merged.push_back(r);
    }
  }
  return merged;
}

UncertaintyProfile uncertainty_profile(const Eigen::MatrixXd& h, const Eigen::MatrixXd& h_rec,
                                       int bins) {
  if (h.rows() != h_rec.rows() || h.cols() != h_rec.cols()) {
    throw ShapeError("uncertainty_profile: embedding shape mismatch");
  }
  if (bins < 1) throw ValueError("uncertainty_profile: bins must be >= 1");
  UncertaintyProfile prof;
  prof.bins.resize(static_cast<size_t>(bins));
  std::vector<double> sums(static_cast<size_t>(bins), 0.0);
  for (int b = 0; b < bins; ++b) {
    prof.bins[static_cast<size_t>(b)].lo = static_cast<double>(b) / bins;
    prof.bins[static_cast<size_t>(b)].hi = static_cast<double>(b + 1) / bins;
  }
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    const double na = h.row(i).norm();
    const double nb = h_rec.row(i).norm();
    if (na < 1e-15 || nb < 1e-15) {
      ++prof.skipped;
      continue;
    }
    const double u = std::clamp(1.0 - h_rec.row(i).squaredNorm(), 0.0, 1.0);
    const double cosd = 1.0 - h.row(i).dot(h_rec.row(i)) / (na * nb);
    int b = std::min(bins - 1, static_cast<int>(u * bins));
    prof.bins[static_cast<size_t>(b)].count += 1;
    sums[static_cast<size_t>(b)] += cosd;
  }
  for (int b = 0; b < bins; ++b) {
    auto& bin = prof.bins[static_cast<size_t>(b)];
    if (bin.count > 0) bin.mean_cosine = sums[static_cast<size_t>(b)] / bin.count;
  }
  return prof;
}

double profile_spearman(const UncertaintyProfile& profile) {
  std::vector<double> xs, ys;
  for (size_t b = 0; b < profile.bins.size(); ++b) {
    if (profile.bins[b].count > 0) {
      xs.push_back(static_cast<double>(b));
      ys.push_back(profile.bins[b].mean_cosine);
    }
  }
  const size_t n = xs.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();

  auto ranks = [](const std::vector<double>& v) {
    std::vector<size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    size_t i = 0;
    while (i < idx.size()) {
      size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
      for (size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const std::vector<double> rx = ranks(xs), ry = ranks(ys);
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double cov = 0.0, vx = 0.0, vy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    cov += (rx[i] - mx) * (ry[i] - my);
    vx += (rx[i] - mx) * (rx[i] - mx);
    vy += (ry[i] - my) * (ry[i] - my);
  }
  if (vx == 0.0 || vy == 0.0) return 0.0;
  return cov / std::sqrt(vx * vy);
}

}  // namespace hypad::scoring
