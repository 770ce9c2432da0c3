#include "hypad/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>

namespace hypad {

namespace {

constexpr char kMagic[8] = {'H', 'Y', 'P', 'A', 'D', 'C', 'K', '1'};
constexpr uint32_t kVersion = 1;

void write_u32(std::ostream& out, uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }
void write_u64(std::ostream& out, uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); }

uint32_t read_u32(std::istream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  if (!in) throw DataError("checkpoint: truncated file");
  return v;
}

uint64_t read_u64(std::istream& in) {
  uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  if (!in) throw DataError("checkpoint: truncated file");
  return v;
}

void write_array(std::ostream& out, const std::string& name, const Eigen::MatrixXd& m) {
  write_u32(out, static_cast<uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_u32(out, static_cast<uint32_t>(m.rows()));
  write_u32(out, static_cast<uint32_t>(m.cols()));
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(m.size())));
}

std::pair<std::string, Eigen::MatrixXd> read_array(std::istream& in) {
  const uint32_t name_len = read_u32(in);
  std::string name(name_len, '\0');
  in.read(name.data(), name_len);
  const uint32_t rows = read_u32(in);
  const uint32_t cols = read_u32(in);
  Eigen::MatrixXd m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(m.size())));
  if (!in) throw DataError("checkpoint: truncated array '" + name + "'");
  return {std::move(name), std::move(m)};
}

void collect_states(std::map<std::string, Eigen::MatrixXd>& arrays, const std::string& prefix,
                    const std::vector<optim::AdamState>& states) {
  for (size_t i = 0; i < states.size(); ++i) {
    const auto& s = states[i];
    if (s.m.size() == 0) continue;  // never stepped
    const std::string base = prefix + "." + std::to_string(i);
    arrays[base + ".m"] = s.m;
    arrays[base + ".v"] = s.v;
    arrays[base + ".t"] = Eigen::MatrixXd::Constant(1, 1, static_cast<double>(s.t));
  }
}

void restore_states(const std::map<std::string, Eigen::MatrixXd>& arrays,
                    const std::string& prefix, size_t count,
                    std::vector<optim::AdamState>& states) {
  states.assign(count, optim::AdamState{});
  for (size_t i = 0; i < count; ++i) {
    const std::string base = prefix + "." + std::to_string(i);
    auto m = arrays.find(base + ".m");
    auto v = arrays.find(base + ".v");
    auto t = arrays.find(base + ".t");
    if (m == arrays.end() || v == arrays.end() || t == arrays.end()) continue;
    states[i].m = m->second;
    states[i].v = v->second;
    states[i].t = static_cast<int64_t>(t->second(0, 0));
  }
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out.write(kMagic, 8);
  write_u32(out, kVersion);

  const std::string text =
      ckpt.config_text.empty() ? canonical_text(ckpt.config) : ckpt.config_text;
  write_u64(out, fnv1a64(text));
  write_u32(out, static_cast<uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));

  std::map<std::string, Eigen::MatrixXd> arrays;
  for (const auto& [name, tensor] : ckpt.model.named_params()) {
    arrays[name] = tensor.value();
  }
  arrays["scaler.center"] = ckpt.scaler.center;
  arrays["scaler.half_range"] = ckpt.scaler.half_range;
  collect_states(arrays, "opt.gen", ckpt.gen_state);
  collect_states(arrays, "opt.cx", ckpt.critic_x_state);
  collect_states(arrays, "opt.cz", ckpt.critic_z_state);

  write_u32(out, static_cast<uint32_t>(arrays.size()));
  for (const auto& [name, m] : arrays) write_array(out, name, m);
  if (!out) throw DataError("checkpoint write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw DataError("checkpoint: bad magic in " + path.string());
  }
  const uint32_t version = read_u32(in);
  if (version != kVersion) {
    throw DataError("checkpoint: unsupported format version " + std::to_string(version));
  }
  const uint64_t digest = read_u64(in);
  const uint32_t text_len = read_u32(in);
  std::string text(text_len, '\0');
  in.read(text.data(), text_len);
  if (!in) throw DataError("checkpoint: truncated config text");
  if (fnv1a64(text) != digest) {
    throw DataError("checkpoint: config digest mismatch (corrupt or tampered file)");
  }

  Checkpoint ckpt;
  ckpt.config = config_from_text(text);
  ckpt.config_text = text;
  ckpt.digest = digest;

  const uint32_t count = read_u32(in);
  std::map<std::string, Eigen::MatrixXd> arrays;
  for (uint32_t i = 0; i < count; ++i) {
    auto [name, m] = read_array(in);
    arrays[name] = std::move(m);
  }

  Rng init_rng(0);  // overwritten immediately
  ckpt.model = nets::init_model(ckpt.config.net_config(), init_rng);
  for (auto&& [name, tensor] : ckpt.model.named_params()) {
    auto it = arrays.find(name);
    if (it == arrays.end()) throw DataError("checkpoint: missing parameter '" + name + "'");
    if (it->second.rows() != tensor.rows() || it->second.cols() != tensor.cols()) {
      throw DataError("checkpoint: shape mismatch for '" + name + "'");
    }
    ad::Tensor handle = tensor;  // shares the underlying node
    handle.mutable_value() = it->second;
  }

  auto center = arrays.find("scaler.center");
  auto half = arrays.find("scaler.half_range");
  if (center == arrays.end() || half == arrays.end()) {
    throw DataError("checkpoint: missing scaler arrays");
  }
  ckpt.scaler.center = center->second.col(0);
  ckpt.scaler.half_range = half->second.col(0);

  restore_states(arrays, "opt.gen", ckpt.model.generator_params().size() + 1, ckpt.gen_state);
  restore_states(arrays, "opt.cx", ckpt.model.critic_x_params().size(), ckpt.critic_x_state);
  restore_states(arrays, "opt.cz", ckpt.model.critic_z_params().size(), ckpt.critic_z_state);
  return ckpt;
}

void check_compatible(const Checkpoint& ckpt, const RunConfig& run) {
  const RunConfig& c = ckpt.config;
  auto mismatch = [](const std::string& what, auto a, auto b) {
    throw ConfigError("checkpoint/config mismatch: " + what + " (checkpoint " +
                      std::to_string(a) + ", run " + std::to_string(b) + ")");
  };
  if (c.window_width != run.window_width) mismatch("window_width", c.window_width, run.window_width);
  if (c.channels != run.channels) mismatch("channels", c.channels, run.channels);
  if (c.latent_dim != run.latent_dim) mismatch("latent_dim", c.latent_dim, run.latent_dim);
  if (c.embed_dim != run.embed_dim) mismatch("embed_dim", c.embed_dim, run.embed_dim);
  if (c.enc_hidden != run.enc_hidden) mismatch("enc_hidden", c.enc_hidden, run.enc_hidden);
  if (c.dec_hidden != run.dec_hidden) mismatch("dec_hidden", c.dec_hidden, run.dec_hidden);
  if (c.critic_hidden != run.critic_hidden) {
    mismatch("critic_hidden", c.critic_hidden, run.critic_hidden);
  }
  const bool ckpt_hyp = scoring::is_hyperbolic(c.score_mode());
  const bool run_hyp = scoring::is_hyperbolic(run.score_mode());
  if (run_hyp && !ckpt_hyp) {
    throw ConfigError("checkpoint was trained in euclidean mode; hyperbolic scoring needs a "
                      "hyperbolic checkpoint");
  }
}

}  // namespace hypad
