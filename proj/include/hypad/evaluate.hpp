#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "hypad/series.hpp"

namespace hypad::eval {

struct EvalReport {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double g_measure = 0.0;
};

// Overlap rules: a truth interval overlapped by any prediction is a TP, a
// truth interval overlapped by none is an FN, and a predicted interval
// overlapping no truth interval is an FP. Counting is per truth interval,
// so one prediction spanning two truths yields two TPs, and two
// predictions on the same truth yield one TP and no FP.
// Both lists must be disjoint and sorted.
void overlap_confusion(const std::vector<series::Interval>& predicted,
                       const std::vector<series::Interval>& truth, int64_t& tp, int64_t& fp,
                       int64_t& fn);

// Precision/recall/F1/g-measure with zero-denominator conventions.
EvalReport prf(int64_t tp, int64_t fp, int64_t fn);

EvalReport evaluate_intervals(const std::vector<series::Interval>& predicted,
                              const std::vector<series::Interval>& truth);

// Aligned text table, one row per (label, report).
void print_report_table(std::ostream& os,
                        const std::vector<std::pair<std::string, EvalReport>>& rows);

void write_report_csv(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, EvalReport>>& rows);

// Minimal SVG line plot of a score trace with the detection threshold and
// ground-truth bands.
void write_trace_svg(const std::filesystem::path& path, const std::vector<int64_t>& timestamps,
                     const Eigen::VectorXd& trace, double threshold,
                     const std::vector<series::Interval>& truth,
                     const std::vector<series::Interval>& detected);

// Bar plot of per-bin mean cosine distance against uncertainty bins.
void write_bins_svg(const std::filesystem::path& path, const std::vector<double>& bin_lo,
                    const std::vector<double>& bin_hi, const std::vector<int64_t>& counts,
                    const std::vector<double>& means);

}  // namespace hypad::eval
