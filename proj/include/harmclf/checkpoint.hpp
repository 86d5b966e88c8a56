#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "harmclf/featurizer.hpp"
#include "harmclf/model.hpp"

namespace harmclf {

// Layout (all integers little-endian):
//   "HPC1"                      4 bytes magic
//   version                     1 byte, currently 1
//   header_length               u32, bytes of config fields that follow
//   config fields               u32 each: vocab_size, embed_dim, hidden_dim,
//                               num_classes, num_targets, seed_lo, seed_hi,
//                               max_tokens, hash_bits, ngram
//   tensors                     f32 row-major, ModelParams declaration order
//   crc32                       u32 over every preceding byte

inline constexpr std::uint8_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams params;
  ModelConfig model;
  FeatureConfig features;
};

std::vector<std::uint8_t> encode_checkpoint(const ModelParams& params, const ModelConfig& model,
                                            const FeatureConfig& features);

/// Throws FormatError naming the byte offset of the first problem.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_params(const ModelParams& params, const ModelConfig& model,
                 const FeatureConfig& features, const std::filesystem::path& path);

Checkpoint load_params(const std::filesystem::path& path);

}  // namespace harmclf
