#include "absa/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace absa::model {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'A', 'B', 'S', 'A', 'C', 'K', 'P', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

template <class T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint truncated");
  return v;
}

void write_string(std::ostream& out, const std::string& s) {
  write_pod<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  const auto len = read_pod<uint32_t>(in);
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw std::runtime_error("checkpoint truncated");
  return s;
}

json config_json(const ModelConfig& cfg) {
  return json{{"d", cfg.d},
              {"layers_enc", cfg.layers_enc},
              {"layers_dec", cfg.layers_dec},
              {"heads", cfg.heads},
              {"ffn_dim", cfg.ffn_dim},
              {"vocab_size", cfg.vocab_size},
              {"num_classes", cfg.num_classes},
              {"alpha", cfg.alpha},
              {"dropout", cfg.dropout},
              {"seed", cfg.seed},
              {"max_src_len", cfg.max_src_len},
              {"max_tgt_len", cfg.max_tgt_len},
              {"scaled_logits", cfg.scaled_logits}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig cfg;
  cfg.d = j.at("d").get<int>();
  cfg.layers_enc = j.at("layers_enc").get<int>();
  cfg.layers_dec = j.at("layers_dec").get<int>();
  cfg.heads = j.at("heads").get<int>();
  cfg.ffn_dim = j.at("ffn_dim").get<int>();
  cfg.vocab_size = j.value("vocab_size", 0);
  cfg.num_classes = j.value("num_classes", 4);
  cfg.alpha = j.at("alpha").get<double>();
  cfg.dropout = j.at("dropout").get<double>();
  cfg.seed = j.at("seed").get<unsigned long long>();
  cfg.max_src_len = j.value("max_src_len", 192);
  cfg.max_tgt_len = j.value("max_tgt_len", 128);
  cfg.scaled_logits = j.value("scaled_logits", false);
  return cfg;
}

}  // namespace

std::string model_config_to_json(const ModelConfig& cfg) { return config_json(cfg).dump(); }

ModelConfig model_config_from_json(const std::string& text) {
  return config_from_json(json::parse(text));
}

Checkpoint to_checkpoint(const Transformer& model, std::string extra) {
  Checkpoint ckpt;
  ckpt.config = model.config();
  ckpt.vocab = model.vocab().tokens();
  ckpt.classes = model.classes().tokens();
  ckpt.multitask = model.multitask();
  ckpt.extra = std::move(extra);
  for (const auto& p : model.parameters()) ckpt.tensors.emplace_back(p.name, p.value);
  return ckpt;
}

Transformer from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.version != 1)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(ckpt.version));
  Transformer model(ckpt.config, Vocabulary(ckpt.vocab), ClassTokenList(ckpt.classes),
                    ckpt.multitask);

  std::map<std::string, const ad::Matrix<float>*> by_name;
  for (const auto& [name, value] : ckpt.tensors)
    if (!by_name.emplace(name, &value).second)
      throw std::runtime_error("checkpoint names tensor twice: " + name);

  size_t used = 0;
  for (auto& p : model.parameters()) {
    auto it = by_name.find(p.name);
    if (it == by_name.end()) throw std::runtime_error("checkpoint missing tensor: " + p.name);
    if (it->second->rows() != p.value.rows() || it->second->cols() != p.value.cols())
      throw std::runtime_error("checkpoint tensor shape mismatch for " + p.name);
    p.value = *it->second;
    ++used;
  }
  if (used != by_name.size())
    throw std::runtime_error("checkpoint carries unknown tensors");
  return model;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod<uint32_t>(out, static_cast<uint32_t>(ckpt.version));

  json header;
  header["model"] = config_json(ckpt.config);
  header["vocab"] = ckpt.vocab;
  header["classes"] = ckpt.classes;
  header["multitask"] = ckpt.multitask;
  header["extra"] = json::parse(ckpt.extra.empty() ? "{}" : ckpt.extra);
  write_string(out, header.dump());

  write_pod<uint32_t>(out, static_cast<uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, value] : ckpt.tensors) {
    write_string(out, name);
    write_pod<uint32_t>(out, 2);
    write_pod<uint64_t>(out, static_cast<uint64_t>(value.rows()));
    write_pod<uint64_t>(out, static_cast<uint64_t>(value.cols()));
    for (Eigen::Index r = 0; r < value.rows(); ++r)
      for (Eigen::Index c = 0; c < value.cols(); ++c) write_pod<float>(out, value(r, c));
  }
  if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);

  Checkpoint ckpt;
  ckpt.version = static_cast<int>(read_pod<uint32_t>(in));
  json header = json::parse(read_string(in));
  ckpt.config = config_from_json(header.at("model"));
  ckpt.vocab = header.at("vocab").get<std::vector<std::string>>();
  ckpt.classes = header.at("classes").get<std::vector<std::string>>();
  ckpt.multitask = header.at("multitask").get<bool>();
  ckpt.extra = header.at("extra").dump();

  const auto count = read_pod<uint32_t>(in);
  for (uint32_t i = 0; i < count; ++i) {
    std::string name = read_string(in);
    const auto ndim = read_pod<uint32_t>(in);
    if (ndim != 2) throw std::runtime_error("unexpected tensor rank in checkpoint");
    const auto rows = static_cast<Eigen::Index>(read_pod<uint64_t>(in));
    const auto cols = static_cast<Eigen::Index>(read_pod<uint64_t>(in));
    ad::Matrix<float> value(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) value(r, c) = read_pod<float>(in);
    ckpt.tensors.emplace_back(std::move(name), std::move(value));
  }
  return ckpt;
}

}  // namespace absa::model
