#pragma once

#include <string>
#include <utility>
#include <vector>

#include "absa/model.hpp"

namespace absa::model {

// On-disk model snapshot: versioned header with the config as JSON, then
// named tensors as little-endian 32-bit floats with explicit shapes.
struct Checkpoint {
  int version = 1;
  ModelConfig config;
  std::vector<std::string> vocab;    // full token list, specials first
  std::vector<std::string> classes;  // class token list
  bool multitask = false;
  std::string extra = "{}";          // opaque JSON blob for callers
  std::vector<std::pair<std::string, ad::Matrix<float>>> tensors;
};

Checkpoint to_checkpoint(const Transformer& model, std::string extra = "{}");

// Validates that every expected parameter is named exactly once with a shape
// consistent with the config.
Transformer from_checkpoint(const Checkpoint& ckpt);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

std::string model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const std::string& text);

}  // namespace absa::model
