#include "hypad/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace hypad::eval {

namespace {

void check_disjoint_sorted(const std::vector<series::Interval>& v, const char* which) {
  for (size_t i = 0; i < v.size(); ++i) {
    if (v[i].first > v[i].second) {
      throw ValueError(std::string(which) + ": interval with start > end");
    }
    if (i > 0 && v[i].first <= v[i - 1].second) {
      throw ValueError(std::string(which) + ": intervals must be disjoint and sorted");
    }
  }
}

bool overlaps(const series::Interval& a, const series::Interval& b) {
  return a.first <= b.second && b.first <= a.second;
}

}  // namespace

void overlap_confusion(const std::vector<series::Interval>& predicted,
                       const std::vector<series::Interval>& truth, int64_t& tp, int64_t& fp,
                       int64_t& fn) {
  check_disjoint_sorted(predicted, "predicted");
  check_disjoint_sorted(truth, "truth");
  tp = fp = fn = 0;
  for (const auto& t : truth) {
    bool hit = false;
    for (const auto& p : predicted) {
      if (overlaps(p, t)) {
        hit = true;
        break;
      }
    }
    if (hit) {
      ++tp;
    } else {
      ++fn;
    }
  }
  for (const auto& p : predicted) {
    bool hit = false;
    for (const auto& t : truth) {
      if (overlaps(p, t)) {
        hit = true;
        break;
      }
    }
    if (!hit) ++fp;
  }
}

EvalReport prf(int64_t tp, int64_t fp, int64_t fn) {
  if (tp < 0 || fp < 0 || fn < 0) throw ValueError("prf: negative counts");
  EvalReport r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  r.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  r.f1 = (r.precision + r.recall) > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  r.g_measure = std::sqrt(r.precision * r.recall);
  return r;
}

EvalReport evaluate_intervals(const std::vector<series::Interval>& predicted,
                              const std::vector<series::Interval>& truth) {
  int64_t tp = 0, fp = 0, fn = 0;
  overlap_confusion(predicted, truth, tp, fp, fn);
  return prf(tp, fp, fn);
}

void print_report_table(std::ostream& os,
                        const std::vector<std::pair<std::string, EvalReport>>& rows) {
  size_t name_w = 4;
  for (const auto& [name, _] : rows) name_w = std::max(name_w, name.size());
  os << std::left << std::setw(static_cast<int>(name_w + 2)) << "mode" << std::right
     << std::setw(5) << "tp" << std::setw(5) << "fp" << std::setw(5) << "fn" << std::setw(11)
     << "precision" << std::setw(9) << "recall" << std::setw(9) << "f1" << std::setw(10)
     << "g" << "\n";
  for (const auto& [name, r] : rows) {
    os << std::left << std::setw(static_cast<int>(name_w + 2)) << name << std::right
       << std::setw(5) << r.tp << std::setw(5) << r.fp << std::setw(5) << r.fn << std::fixed
       << std::setprecision(4) << std::setw(11) << r.precision << std::setw(9) << r.recall
       << std::setw(9) << r.f1 << std::setw(10) << r.g_measure << "\n";
    os.unsetf(std::ios::fixed);
  }
}

void write_report_csv(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, EvalReport>>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "mode,tp,fp,fn,precision,recall,f1,g_measure\n";
  out.precision(10);
  for (const auto& [name, r] : rows) {
    out << name << "," << r.tp << "," << r.fp << "," << r.fn << "," << r.precision << ","
        << r.recall << "," << r.f1 << "," << r.g_measure << "\n";
  }
}

namespace {

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(6) << v;
  return ss.str();
}

}  // namespace

void write_trace_svg(const std::filesystem::path& path, const std::vector<int64_t>& timestamps,
                     const Eigen::VectorXd& trace, double threshold,
                     const std::vector<series::Interval>& truth,
                     const std::vector<series::Interval>& detected) {
  if (trace.size() == 0 || static_cast<size_t>(trace.size()) != timestamps.size()) {
    throw ShapeError("write_trace_svg: trace/timestamp mismatch");
  }
  const double W = 960, H = 320, ml = 50, mr = 10, mt = 10, mb = 30;
  const double t0 = static_cast<double>(timestamps.front());
  const double t1 = static_cast<double>(timestamps.back());
  double lo = std::min(trace.minCoeff(), threshold);
  double hi = std::max(trace.maxCoeff(), threshold);
  if (hi - lo < 1e-12) {
    hi += 1.0;
    lo -= 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  auto X = [&](double t) { return ml + (t - t0) / std::max(1.0, t1 - t0) * (W - ml - mr); };
  auto Y = [&](double v) { return mt + (hi - v) / (hi - lo) * (H - mt - mb); };

  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  for (const auto& [s, e] : truth) {
    out << "<rect x='" << fmt(X(static_cast<double>(s))) << "' y='" << fmt(mt) << "' width='"
        << fmt(std::max(1.0, X(static_cast<double>(e)) - X(static_cast<double>(s)))) << "' height='"
        << fmt(H - mt - mb) << "' fill='#8fd18f' fill-opacity='0.5'/>\n";
  }
  out << "<polyline fill='none' stroke='#3465a4' stroke-width='1' points='";
  for (Eigen::Index i = 0; i < trace.size(); ++i) {
    out << fmt(X(static_cast<double>(timestamps[static_cast<size_t>(i)]))) << ","
        << fmt(Y(trace(i))) << " ";
  }
  out << "'/>\n";
  out << "<line x1='" << fmt(ml) << "' y1='" << fmt(Y(threshold)) << "' x2='" << fmt(W - mr)
      << "' y2='" << fmt(Y(threshold)) << "' stroke='red' stroke-width='1.2'/>\n";
  for (const auto& [s, e] : detected) {
    out << "<rect x='" << fmt(X(static_cast<double>(s))) << "' y='" << fmt(H - mb + 4)
        << "' width='" << fmt(std::max(1.0, X(static_cast<double>(e)) - X(static_cast<double>(s))))
        << "' height='6' fill='#cc0000'/>\n";
  }
  out << "<text x='" << fmt(ml) << "' y='" << fmt(H - 6)
      << "' font-size='12' fill='#555'>score trace; red line = threshold, green = truth, red "
         "marks = detected</text>\n";
  out << "</svg>\n";
}

void write_bins_svg(const std::filesystem::path& path, const std::vector<double>& bin_lo,
                    const std::vector<double>& bin_hi, const std::vector<int64_t>& counts,
                    const std::vector<double>& means) {
  const size_t n = bin_lo.size();
  if (bin_hi.size() != n || counts.size() != n || means.size() != n) {
    throw ShapeError("write_bins_svg: column length mismatch");
  }
  const double W = 640, H = 320, ml = 50, mr = 10, mt = 10, mb = 40;
  double hi = 1e-9;
  for (size_t i = 0; i < n; ++i) {
    if (counts[i] > 0) hi = std::max(hi, means[i]);
  }
  hi *= 1.05;
  const double bw = (W - ml - mr) / static_cast<double>(n);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  for (size_t i = 0; i < n; ++i) {
    if (counts[i] == 0) continue;
    const double h = means[i] / hi * (H - mt - mb);
    out << "<rect x='" << fmt(ml + static_cast<double>(i) * bw + 2) << "' y='" << fmt(H - mb - h)
        << "' width='" << fmt(bw - 4) << "' height='" << fmt(h) << "' fill='#3465a4'/>\n";
  }
  for (size_t i = 0; i <= n; i += 2) {
    out << "<text x='" << fmt(ml + static_cast<double>(i) * bw) << "' y='" << fmt(H - mb + 14)
        << "' font-size='10' fill='#555'>" << fmt(static_cast<double>(i) / static_cast<double>(n))
        << "</text>\n";
  }
  out << "<text x='" << fmt(ml) << "' y='" << fmt(H - 6)
      << "' font-size='12' fill='#555'>mean cosine distance per uncertainty bin</text>\n";
  out << "</svg>\n";
}

}  // namespace hypad::eval
