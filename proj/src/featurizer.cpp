#include "harmclf/featurizer.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "harmclf/error.hpp"
#include "harmclf/rng.hpp"

namespace harmclf {

namespace {

constexpr std::uint64_t kFnvOffset = 0xCBF29CE484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x00000100000001B3ULL;
// Multiplier for folding two token hashes into a bigram hash.
constexpr std::uint64_t kBigramMul = 0x9E3779B97F4A7C15ULL;

enum class CharClass { Space, Punct, Word };

CharClass classify(UChar32 c) {
  if (c < 0 || u_isUWhiteSpace(c)) return CharClass::Space;
  if (u_ispunct(c)) return CharClass::Punct;
  return CharClass::Word;
}

}  // namespace

void FeatureConfig::validate() const {
  if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
  if (hash_bits < 8 || hash_bits > 22) throw ConfigError("hash_bits must be in [8, 22]");
  if (ngram != 1 && ngram != 2) throw ConfigError("ngram must be 1 or 2");
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  CharClass current_class = CharClass::Space;
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(bytes, i, length, c);  // invalid sequences yield c < 0
    const CharClass cls = classify(c);
    if (cls != current_class && !current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
    current_class = cls;
    if (cls != CharClass::Space) current.append(text.substr(start, i - start));
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::uint64_t token_hash(std::string_view token) {
  std::uint64_t h = kFnvOffset;
  for (unsigned char b : token) {
    h ^= b;
    h *= kFnvPrime;
  }
  return splitmix64(h);
}

EncodedDoc encode(std::span<const std::string> tokens, const FeatureConfig& cfg) {
  const std::uint64_t mask = (std::uint64_t{1} << cfg.hash_bits) - 1;
  const auto limit = static_cast<std::size_t>(cfg.max_tokens);
  EncodedDoc doc;
  doc.ids.reserve(std::min(limit, tokens.size() * static_cast<std::size_t>(cfg.ngram)));
  std::uint64_t prev = 0;
  for (std::size_t i = 0; i < tokens.size() && doc.ids.size() < limit; ++i) {
    const std::uint64_t h = token_hash(tokens[i]);
    doc.ids.push_back(static_cast<std::int32_t>(h & mask));
    if (cfg.ngram == 2 && i > 0 && doc.ids.size() < limit) {
      doc.ids.push_back(static_cast<std::int32_t>(splitmix64(prev * kBigramMul + h) & mask));
    }
    prev = h;
  }
  return doc;
}

std::vector<EncodedDoc> batch_encode(std::span<const std::string> docs, const FeatureConfig& cfg) {
  std::vector<EncodedDoc> out;
  out.reserve(docs.size());
  for (const auto& text : docs) {
    const auto tokens = tokenize(text);
    out.push_back(encode(tokens, cfg));
  }
  return out;
}

}  // namespace harmclf
