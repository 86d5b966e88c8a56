#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace harmclf {

struct FeatureConfig {
  int max_tokens = 512;
  int hash_bits = 15;
  int ngram = 1;  // 2 adds adjacent-token bigrams

  /// Throws ConfigError when a field is out of range.
  void validate() const;
  std::int32_t vocab_size() const { return std::int32_t{1} << hash_bits; }
  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

struct EncodedDoc {
  std::vector<std::int32_t> ids;
  std::size_t length() const { return ids.size(); }
  friend bool operator==(const EncodedDoc&, const EncodedDoc&) = default;
};

/// Splits on Unicode whitespace; each maximal run of punctuation becomes its
/// own token. All other code points (any script, marks, symbols) are word
/// characters.
std::vector<std::string> tokenize(std::string_view text);

/// 64-bit FNV-1a over the UTF-8 bytes followed by a splitmix64 finalizer.
std::uint64_t token_hash(std::string_view token);

/// Maps tokens to hashed ids and keeps the first `cfg.max_tokens` of them.
/// With ngram = 2 the id stream interleaves unigrams and bigrams:
/// t0, t1, (t0 t1), t2, (t1 t2), ...
EncodedDoc encode(std::span<const std::string> tokens, const FeatureConfig& cfg);

std::vector<EncodedDoc> batch_encode(std::span<const std::string> docs,
                                     const FeatureConfig& cfg);

}  // namespace harmclf
