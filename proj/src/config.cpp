#include "hypad/config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace hypad {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int64_t to_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    int64_t r = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected integer, got '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected number, got '" + v + "'");
  }
}

std::string render_double(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

}  // namespace

void RunConfig::validate() const {
  if (window_width <= 0) throw ConfigError("window_width must be positive");
  if (stride <= 0) throw ConfigError("stride must be positive");
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw ConfigError("train_frac must lie in (0,1)");
  if (latent_dim <= 0 || embed_dim <= 0) throw ConfigError("latent/embed dims must be positive");
  if (enc_hidden <= 0 || dec_hidden <= 0 || critic_hidden <= 0) {
    throw ConfigError("hidden sizes must be positive");
  }
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size <= 0) throw ConfigError("batch_size must be positive");
  if (lr < 0) throw ConfigError("lr must be >= 0");
  if (critic_iters <= 0) throw ConfigError("critic_iters must be positive");
  if (threshold_k < 0) throw ConfigError("threshold_k must be >= 0");
  if (!(ball_margin > 0 && ball_margin < 1e-2)) {
    throw ConfigError("ball_margin must lie in (0, 1e-2)");
  }
  if (acosh_eps <= 0) throw ConfigError("acosh_eps must be positive");
  if (aggregation != "median" && aggregation != "mean") {
    throw ConfigError("aggregation must be 'median' or 'mean'");
  }
  scoring::parse_mode(mode);
}

nets::NetConfig RunConfig::net_config() const {
  nets::NetConfig nc;
  nc.window_width = window_width;
  nc.channels = channels;
  nc.latent_dim = latent_dim;
  nc.embed_dim = embed_dim;
  nc.enc_hidden = enc_hidden;
  nc.dec_hidden = dec_hidden;
  nc.critic_hidden = critic_hidden;
  nc.lambda_gp = lambda_gp;
  nc.cycle_weight = cycle_weight;
  nc.geometry = geometry();
  return nc;
}

scoring::Aggregation RunConfig::aggregation_kind() const {
  return aggregation == "mean" ? scoring::Aggregation::Mean : scoring::Aggregation::Median;
}

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "data_path") cfg.data_path = value;
  else if (key == "labels_path") cfg.labels_path = value;
  else if (key == "output_dir") cfg.output_dir = value;
  else if (key == "channels") cfg.channels = to_int(key, value);
  else if (key == "window_width") cfg.window_width = to_int(key, value);
  else if (key == "stride") cfg.stride = to_int(key, value);
  else if (key == "train_frac") cfg.train_frac = to_double(key, value);
  else if (key == "latent_dim") cfg.latent_dim = to_int(key, value);
  else if (key == "embed_dim") cfg.embed_dim = to_int(key, value);
  else if (key == "enc_hidden") cfg.enc_hidden = to_int(key, value);
  else if (key == "dec_hidden") cfg.dec_hidden = to_int(key, value);
  else if (key == "critic_hidden") cfg.critic_hidden = to_int(key, value);
  else if (key == "epochs") cfg.epochs = to_int(key, value);
  else if (key == "batch_size") cfg.batch_size = to_int(key, value);
  else if (key == "lr") cfg.lr = to_double(key, value);
  else if (key == "critic_iters") cfg.critic_iters = to_int(key, value);
  else if (key == "lambda_gp") cfg.lambda_gp = to_double(key, value);
  else if (key == "cycle_weight") cfg.cycle_weight = to_double(key, value);
  else if (key == "mode") cfg.mode = value;
  else if (key == "threshold_k") cfg.threshold_k = to_double(key, value);
  else if (key == "min_gap") cfg.min_gap = to_int(key, value);
  else if (key == "area_sub_len") cfg.area_sub_len = to_int(key, value);
  else if (key == "aggregation") cfg.aggregation = value;
  else if (key == "profile_bins") cfg.profile_bins = to_int(key, value);
  else if (key == "ball_margin") cfg.ball_margin = to_double(key, value);
  else if (key == "acosh_eps") cfg.acosh_eps = to_double(key, value);
  else if (key == "seed") cfg.seed = static_cast<uint64_t>(to_int(key, value));
  else throw ConfigError("unknown config key '" + key + "'");
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ": line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    apply_config_entry(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
}

std::string canonical_text(const RunConfig& cfg) {
  std::map<std::string, std::string> kv = {
      {"acosh_eps", render_double(cfg.acosh_eps)},
      {"aggregation", cfg.aggregation},
      {"area_sub_len", std::to_string(cfg.area_sub_len)},
      {"ball_margin", render_double(cfg.ball_margin)},
      {"batch_size", std::to_string(cfg.batch_size)},
      {"channels", std::to_string(cfg.channels)},
      {"critic_hidden", std::to_string(cfg.critic_hidden)},
      {"critic_iters", std::to_string(cfg.critic_iters)},
      {"cycle_weight", render_double(cfg.cycle_weight)},
      {"data_path", cfg.data_path},
      {"dec_hidden", std::to_string(cfg.dec_hidden)},
      {"embed_dim", std::to_string(cfg.embed_dim)},
      {"enc_hidden", std::to_string(cfg.enc_hidden)},
      {"epochs", std::to_string(cfg.epochs)},
      {"labels_path", cfg.labels_path},
      {"latent_dim", std::to_string(cfg.latent_dim)},
      {"lambda_gp", render_double(cfg.lambda_gp)},
      {"lr", render_double(cfg.lr)},
      {"min_gap", std::to_string(cfg.min_gap)},
      {"mode", cfg.mode},
      {"output_dir", cfg.output_dir},
      {"profile_bins", std::to_string(cfg.profile_bins)},
      {"seed", std::to_string(cfg.seed)},
      {"stride", std::to_string(cfg.stride)},
      {"threshold_k", render_double(cfg.threshold_k)},
      {"train_frac", render_double(cfg.train_frac)},
      {"window_width", std::to_string(cfg.window_width)},
  };
  std::string out;
  for (const auto& [k, v] : kv) {
    out += k;
    out += " = ";
    out += v;
    out += "\n";
  }
  return out;
}

uint64_t fnv1a64(const std::string& text) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string digest_hex(uint64_t digest) {
  static const char* hex = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<size_t>(i)] = hex[digest & 0xf];
    digest >>= 4;
  }
  return s;
}

RunConfig config_from_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("config text: expected 'key = value'");
    apply_config_entry(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

}  // namespace hypad
