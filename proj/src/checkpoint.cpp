#include "rnnt/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace rnnt {

namespace {

constexpr char kMagic[8] = {'R', 'N', 'N', 'T', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

const char* kConfigKeys[] = {"model.encoder_dim", "model.feature_dim", "model.joint_dim",
                             "model.predictor_dim", "model.seed", "model.vocab_size"};

void put_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }

std::uint32_t get_u32(std::istream& is) {
  std::uint32_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), 4)) throw std::runtime_error("checkpoint: truncated");
  return v;
}

std::string get_bytes(std::istream& is, std::uint32_t n) {
  std::string s(n, '\0');
  if (n > 0 && !is.read(s.data(), n)) throw std::runtime_error("checkpoint: truncated");
  return s;
}

std::map<std::string, std::string> config_entries(const ModelConfig& c) {
  return {{"model.encoder_dim", std::to_string(c.encoder_dim)},
          {"model.feature_dim", std::to_string(c.feature_dim)},
          {"model.joint_dim", std::to_string(c.joint_dim)},
          {"model.predictor_dim", std::to_string(c.predictor_dim)},
          {"model.seed", std::to_string(c.seed)},
          {"model.vocab_size", std::to_string(c.vocab_size)}};
}

}  // namespace

void write_checkpoint(std::ostream& os, const Checkpoint& ckpt) {
  std::map<std::string, std::string> header = config_entries(ckpt.config);
  for (const auto& [k, v] : ckpt.metadata) {
    if (k.rfind("model.", 0) == 0) throw std::invalid_argument("metadata key uses reserved prefix: " + k);
    if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw std::invalid_argument("metadata entries cannot contain '=' in keys or newlines");
    }
    header[k] = v;
  }
  std::string text;
  for (const auto& [k, v] : header) text += k + "=" + v + "\n";

  os.write(kMagic, sizeof(kMagic));
  put_u32(os, kVersion);
  put_u32(os, static_cast<std::uint32_t>(text.size()));
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  const auto tensors = ckpt.params.tensors();
  put_u32(os, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    put_u32(os, static_cast<std::uint32_t>(t.name.size()));
    os.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put_u32(os, static_cast<std::uint32_t>(t.rows));
    put_u32(os, static_cast<std::uint32_t>(t.cols));
    os.write(reinterpret_cast<const char*>(t.data), static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
}

Checkpoint read_checkpoint(std::istream& is) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw std::runtime_error("checkpoint: bad magic");
  }
  const std::uint32_t version = get_u32(is);
  if (version != kVersion) throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  const std::string text = get_bytes(is, get_u32(is));

  std::map<std::string, std::string> header;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("checkpoint: malformed header line");
    header[line.substr(0, eq)] = line.substr(eq + 1);
  }
  Checkpoint ckpt;
  for (const char* key : kConfigKeys) {
    if (!header.count(key)) throw std::runtime_error(std::string("checkpoint: missing ") + key);
  }
  ckpt.config.encoder_dim = std::stoi(header["model.encoder_dim"]);
  ckpt.config.feature_dim = std::stoi(header["model.feature_dim"]);
  ckpt.config.joint_dim = std::stoi(header["model.joint_dim"]);
  ckpt.config.predictor_dim = std::stoi(header["model.predictor_dim"]);
  ckpt.config.seed = std::stoull(header["model.seed"]);
  ckpt.config.vocab_size = std::stoi(header["model.vocab_size"]);
  for (const auto& [k, v] : header) {
    if (k.rfind("model.", 0) != 0) ckpt.metadata[k] = v;
  }

  ckpt.params = Parameters::zeros(ckpt.config);
  auto tensors = ckpt.params.tensors();
  if (get_u32(is) != tensors.size()) throw std::runtime_error("checkpoint: wrong tensor count");
  for (auto& t : tensors) {
    const std::string name = get_bytes(is, get_u32(is));
    const std::uint32_t rows = get_u32(is);
    const std::uint32_t cols = get_u32(is);
    if (name != t.name || rows != static_cast<std::uint32_t>(t.rows) ||
        cols != static_cast<std::uint32_t>(t.cols)) {
      std::ostringstream os;
      os << "checkpoint: tensor " << name << " (" << rows << "x" << cols << ") does not match "
         << t.name << " (" << t.rows << "x" << t.cols << ")";
      throw std::runtime_error(os.str());
    }
    if (!is.read(reinterpret_cast<char*>(t.data), static_cast<std::streamsize>(t.size() * sizeof(double)))) {
      throw std::runtime_error("checkpoint: truncated tensor " + name);
    }
  }
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_checkpoint(os, ckpt);
  if (!os) throw std::runtime_error("failed writing " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint " + path);
  return read_checkpoint(is);
}

}  // namespace rnnt
