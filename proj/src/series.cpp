#include "hypad/series.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace hypad::series {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, size_t line_no, const char* what) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(std::string("line ") + std::to_string(line_no) + ": malformed " + what +
                    " '" + s + "'");
  }
}

int64_t parse_int(const std::string& s, size_t line_no, const char* what) {
  const double v = parse_double(s, line_no, what);
  const double r = std::round(v);
  if (std::abs(v - r) > 1e-9) {
    throw DataError(std::string("line ") + std::to_string(line_no) + ": non-integer " + what +
                    " '" + s + "'");
  }
  return static_cast<int64_t>(r);
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

void SeriesFrame::validate() const {
  if (static_cast<int64_t>(timestamps.size()) != values.rows()) {
    throw DataError("frame: timestamp count does not match value rows");
  }
  for (size_t i = 1; i < timestamps.size(); ++i) {
    if (timestamps[i] <= timestamps[i - 1]) {
      throw DataError("frame: timestamps not strictly increasing at row " + std::to_string(i));
    }
  }
  if (!labels.empty() && !timestamps.empty()) {
    for (const auto& [s, e] : labels) {
      if (s > e) throw DataError("frame: label interval with start > end");
      if (s < timestamps.front() || e > timestamps.back()) {
        throw DataError("frame: label interval outside the timestamp range");
      }
    }
  }
}

SeriesFrame load_csv(const std::filesystem::path& data_path,
                     const std::optional<std::filesystem::path>& label_path) {
  std::ifstream in(data_path);
  if (!in) throw DataError("cannot open " + data_path.string());

  std::string line;
  size_t line_no = 0;
  if (!std::getline(in, line)) throw DataError(data_path.string() + ": empty file");
  ++line_no;
  auto header = split_csv_line(line);
  if (header.empty() || trim(header[0]) != "timestamp") {
    throw DataError(data_path.string() + ": header must start with 'timestamp'");
  }
  const int64_t channels = static_cast<int64_t>(header.size()) - 1;
  if (channels < 1) throw DataError(data_path.string() + ": no value columns");

  std::vector<std::pair<int64_t, std::vector<double>>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (static_cast<int64_t>(fields.size()) != channels + 1) {
      throw DataError(data_path.string() + ": line " + std::to_string(line_no) + ": expected " +
                      std::to_string(channels + 1) + " fields, got " +
                      std::to_string(fields.size()));
    }
    std::vector<double> vals(channels);
    const int64_t ts = parse_int(fields[0], line_no, "timestamp");
    for (int64_t c = 0; c < channels; ++c) {
      vals[c] = parse_double(fields[c + 1], line_no, "value");
    }
    rows.emplace_back(ts, std::move(vals));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].first == rows[i - 1].first) {
      throw DataError(data_path.string() + ": duplicate timestamp " +
                      std::to_string(rows[i].first));
    }
  }

  SeriesFrame frame;
  frame.timestamps.reserve(rows.size());
  frame.values.resize(static_cast<int64_t>(rows.size()), channels);
  for (size_t i = 0; i < rows.size(); ++i) {
    frame.timestamps.push_back(rows[i].first);
    for (int64_t c = 0; c < channels; ++c) frame.values(static_cast<int64_t>(i), c) = rows[i].second[c];
  }
  if (label_path) frame.labels = load_labels(*label_path);
  frame.validate();
  return frame;
}

std::vector<Interval> load_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<Interval> labels;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty()) continue;
    if (line_no == 1 && t == "start,end") continue;  // optional header
    auto fields = split_csv_line(t);
    if (fields.size() < 2) {
      throw DataError(path.string() + ": line " + std::to_string(line_no) +
                      ": expected 'start,end'");
    }
    const int64_t s = parse_int(fields[0], line_no, "start");
    const int64_t e = parse_int(fields[1], line_no, "end");
    if (s > e) {
      throw DataError(path.string() + ": line " + std::to_string(line_no) + ": start > end");
    }
    labels.emplace_back(s, e);
  }
  std::sort(labels.begin(), labels.end());
  return labels;
}

void save_csv(const SeriesFrame& frame, const std::filesystem::path& data_path) {
  std::ofstream out(data_path);
  if (!out) throw DataError("cannot write " + data_path.string());
  out << "timestamp";
  for (int64_t c = 0; c < frame.channels(); ++c) out << ",value" << (c + 1);
  out << "\n";
  out.precision(17);
  for (int64_t i = 0; i < frame.length(); ++i) {
    out << frame.timestamps[static_cast<size_t>(i)];
    for (int64_t c = 0; c < frame.channels(); ++c) out << "," << frame.values(i, c);
    out << "\n";
  }
}

void save_labels(const std::vector<Interval>& labels, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "start,end\n";
  for (const auto& [s, e] : labels) out << s << "," << e << "\n";
}

Eigen::MatrixXd MinMaxScaler::transform(const Eigen::MatrixXd& x) const {
  if (x.cols() != center.size()) throw ShapeError("scaler: channel count mismatch");
  return (x.rowwise() - center.transpose()).array().rowwise() /
         half_range.transpose().array();
}

Eigen::MatrixXd MinMaxScaler::inverse(const Eigen::MatrixXd& x) const {
  if (x.cols() != center.size()) throw ShapeError("scaler: channel count mismatch");
  return (x.array().rowwise() * half_range.transpose().array()).matrix().rowwise() +
         center.transpose();
}

MinMaxScaler fit_minmax(const Eigen::MatrixXd& train_values) {
  if (train_values.rows() == 0) throw DataError("fit_minmax: empty training split");
  MinMaxScaler s;
  Eigen::VectorXd lo = train_values.colwise().minCoeff();
  Eigen::VectorXd hi = train_values.colwise().maxCoeff();
  s.center = 0.5 * (lo + hi);
  s.half_range = 0.5 * (hi - lo);
  for (Eigen::Index c = 0; c < s.half_range.size(); ++c) {
    if (s.half_range(c) < 1e-12) s.half_range(c) = 1.0;  // constant channel
  }
  return s;
}

WindowSet make_windows(const Eigen::MatrixXd& values, int64_t width, int64_t stride) {
  if (width <= 0 || stride <= 0) throw ValueError("make_windows: width/stride must be positive");
  const int64_t T = values.rows();
  if (T < width) {
    throw DataError("make_windows: series length " + std::to_string(T) +
                    " shorter than window width " + std::to_string(width));
  }
  WindowSet ws;
  ws.width = width;
  ws.stride = stride;
  const int64_t n = (T - width) / stride + 1;
  ws.windows.reserve(static_cast<size_t>(n));
  ws.origins.reserve(static_cast<size_t>(n));
  for (int64_t k = 0; k < n; ++k) {
    const int64_t start = k * stride;
    ws.windows.push_back(values.middleRows(start, width));
    ws.origins.push_back(start);
  }
  return ws;
}

WindowSet make_windows(const SeriesFrame& frame, int64_t width, int64_t stride) {
  return make_windows(frame.values, width, stride);
}

std::pair<SeriesFrame, SeriesFrame> chrono_split(const SeriesFrame& frame, double train_frac) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw ValueError("chrono_split: train_frac must lie in (0, 1)");
  }
  const int64_t T = frame.length();
  const int64_t n_train = static_cast<int64_t>(static_cast<double>(T) * train_frac);
  if (n_train <= 0 || n_train >= T) throw DataError("chrono_split: degenerate split");

  const int64_t split_ts = frame.timestamps[static_cast<size_t>(n_train)];
  for (const auto& [s, e] : frame.labels) {
    if (s < split_ts) {
      throw DataError("chrono_split: anomaly [" + std::to_string(s) + ", " + std::to_string(e) +
                      "] falls in the training span; choose a split before timestamp " +
                      std::to_string(s));
    }
  }

  SeriesFrame train, test;
  train.timestamps.assign(frame.timestamps.begin(), frame.timestamps.begin() + n_train);
  train.values = frame.values.topRows(n_train);
  test.timestamps.assign(frame.timestamps.begin() + n_train, frame.timestamps.end());
  test.values = frame.values.bottomRows(T - n_train);
  test.labels = frame.labels;
  return {std::move(train), std::move(test)};
}

SeriesFrame synth_generate(const SynthSpec& spec) {
  if (spec.length <= 0) throw ValueError("synth_generate: length must be positive");
  if (spec.period <= 0) throw ValueError("synth_generate: period must be positive");
  std::vector<InjectedAnomaly> sorted = spec.anomalies;
  std::sort(sorted.begin(), sorted.end(),
            [](const InjectedAnomaly& a, const InjectedAnomaly& b) { return a.start < b.start; });
  for (const auto& a : sorted) {
    if (a.start > a.end || a.start < 0 || a.end >= spec.length) {
      throw ValueError("synth_generate: anomaly outside series range");
    }
  }
  for (size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].start <= sorted[i - 1].end) {
      throw ValueError("synth_generate: overlapping injected anomalies");
    }
  }

  Rng rng(spec.seed);
  SeriesFrame frame;
  frame.timestamps.resize(static_cast<size_t>(spec.length));
  frame.values.resize(spec.length, 1);
  for (int64_t t = 0; t < spec.length; ++t) {
    frame.timestamps[static_cast<size_t>(t)] = t;
    const double base = spec.amplitude * std::sin(2.0 * kPi * static_cast<double>(t) / spec.period);
    const double noise = spec.noise_sigma > 0 ? rng.normal(0.0, spec.noise_sigma) : 0.0;
    frame.values(t, 0) = base + noise;
  }
  for (const auto& a : sorted) {
    for (int64_t t = a.start; t <= a.end; ++t) {
      switch (a.kind) {
        case AnomalyKind::Spike:
        case AnomalyKind::LevelShift:
          frame.values(t, 0) += a.magnitude;
          break;
        case AnomalyKind::AmplitudeBurst: {
          const double base =
              spec.amplitude * std::sin(2.0 * kPi * static_cast<double>(t) / spec.period);
          frame.values(t, 0) += (a.magnitude - 1.0) * base;
          break;
        }
      }
    }
    frame.labels.emplace_back(a.start, a.end);
  }
  std::sort(frame.labels.begin(), frame.labels.end());
  frame.validate();
  return frame;
}

SynthSpec parse_synth_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  SynthSpec spec;
  spec.anomalies.clear();
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw DataError(path.string() + ": line " + std::to_string(line_no) +
                      ": expected 'key = value'");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key == "length") {
      spec.length = parse_int(value, line_no, "length");
    } else if (key == "period") {
      spec.period = parse_double(value, line_no, "period");
    } else if (key == "amplitude") {
      spec.amplitude = parse_double(value, line_no, "amplitude");
    } else if (key == "noise_sigma") {
      spec.noise_sigma = parse_double(value, line_no, "noise_sigma");
    } else if (key == "seed") {
      spec.seed = static_cast<uint64_t>(parse_int(value, line_no, "seed"));
    } else if (key == "anomaly") {
      std::istringstream ss(value);
      std::string kind;
      int64_t s = 0, e = 0;
      double mag = 0.0;
      if (!(ss >> kind >> s >> e >> mag)) {
        throw DataError(path.string() + ": line " + std::to_string(line_no) +
                        ": expected 'anomaly = <kind> <start> <end> <magnitude>'");
      }
      InjectedAnomaly a;
      if (kind == "spike") {
        a.kind = AnomalyKind::Spike;
      } else if (kind == "level_shift") {
        a.kind = AnomalyKind::LevelShift;
      } else if (kind == "amplitude_burst") {
        a.kind = AnomalyKind::AmplitudeBurst;
      } else {
        throw DataError(path.string() + ": line " + std::to_string(line_no) +
                        ": unknown anomaly kind '" + kind + "'");
      }
      a.start = s;
      a.end = e;
      a.magnitude = mag;
      if (a.kind == AnomalyKind::Spike && s != e) {
        throw DataError(path.string() + ": line " + std::to_string(line_no) +
                        ": spike must have start == end");
      }
      spec.anomalies.push_back(a);
    } else {
      throw DataError(path.string() + ": line " + std::to_string(line_no) + ": unknown key '" +
                      key + "'");
    }
  }
  return spec;
}

}  // namespace hypad::series
