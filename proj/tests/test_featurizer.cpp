#include <doctest.h>

#include "harmclf/error.hpp"
#include "harmclf/featurizer.hpp"
#include "harmclf/rng.hpp"

using namespace harmclf;
using Tokens = std::vector<std::string>;

TEST_CASE("tokenize") {
  CHECK(tokenize("hello, world") == Tokens{"hello", ",", "world"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("   ").empty());
  CHECK(tokenize("नमस्ते hello") == Tokens{"नमस्ते", "hello"});
  CHECK(tokenize("wow!!! ok?") == Tokens{"wow", "!!!", "ok", "?"});
  CHECK(tokenize("see <url> <user>") == Tokens{"see", "<url>", "<user>"});
  // Devanagari danda is punctuation.
  CHECK(tokenize("राम।श्याम") == Tokens{"राम", "।", "श्याम"});
}

TEST_CASE("token_hash matches the reference constants") {
  // Frozen from tests/oracles/derived_values.py.
  CHECK(token_hash("hello") == 0xf3e8eec5eb46e500ULL);
  CHECK(token_hash("नमस्ते") == 0xaa5f721242f356f0ULL);
  CHECK(token_hash(",") == 0xe2419745464dabe0ULL);
  const auto doc = encode(Tokens{"hello", "नमस्ते"}, FeatureConfig{});
  CHECK(doc.ids == std::vector<std::int32_t>{25856, 22256});
}

TEST_CASE("encode truncation and determinism") {
  FeatureConfig cfg;
  Tokens many;
  for (int i = 0; i < 600; ++i) many.push_back("t" + std::to_string(i));
  const auto doc = encode(many, cfg);
  CHECK(doc.length() == 512);

  CHECK(encode(Tokens{}, cfg).ids.empty());
  CHECK(encode(Tokens{}, cfg).length() == 0);

  const auto twice = encode(Tokens{"same", "same"}, cfg);
  CHECK(twice.ids[0] == twice.ids[1]);
}

TEST_CASE("encode properties: id range and prefix under truncation") {
  Engine eng(17);
  for (int trial = 0; trial < 200; ++trial) {
    FeatureConfig full;
    full.hash_bits = 8 + static_cast<int>(uniform_index(eng, 15));
    full.ngram = 1 + static_cast<int>(uniform_index(eng, 2));
    full.max_tokens = 100000;
    Tokens toks;
    const auto n = uniform_index(eng, 60);
    for (std::uint64_t i = 0; i < n; ++i) toks.push_back("w" + std::to_string(uniform_index(eng, 50)));
    const auto untruncated = encode(toks, full);

    FeatureConfig cut = full;
    cut.max_tokens = 1 + static_cast<int>(uniform_index(eng, 40));
    const auto truncated = encode(toks, cut);
    CHECK(truncated.length() <= static_cast<std::size_t>(cut.max_tokens));
    REQUIRE(truncated.length() <= untruncated.length());
    CHECK(std::equal(truncated.ids.begin(), truncated.ids.end(), untruncated.ids.begin()));
    for (auto id : untruncated.ids) {
      CHECK(id >= 0);
      CHECK(id < full.vocab_size());
    }
  }
}

TEST_CASE("bigrams interleave with unigrams") {
  FeatureConfig uni;
  FeatureConfig bi;
  bi.ngram = 2;
  const Tokens toks{"a", "b", "c"};
  const auto u = encode(toks, uni);
  const auto b = encode(toks, bi);
  REQUIRE(b.length() == 5);
  CHECK(b.ids[0] == u.ids[0]);
  CHECK(b.ids[1] == u.ids[1]);
  CHECK(b.ids[3] == u.ids[2]);
  // Bigram (a b) differs from (b a).
  const auto rev = encode(Tokens{"b", "a"}, bi);
  CHECK(rev.ids[2] != b.ids[2]);
}

TEST_CASE("batch_encode equals the per-document loop") {
  FeatureConfig cfg;
  CHECK(batch_encode(std::vector<std::string>{}, cfg).empty());

  Engine eng(3);
  std::vector<std::string> docs;
  for (int d = 0; d < 1000; ++d) {
    std::string text;
    const auto n = uniform_index(eng, 30);
    for (std::uint64_t i = 0; i < n; ++i) {
      text += "x" + std::to_string(uniform_index(eng, 500));
      text += uniform_index(eng, 5) == 0 ? ", " : " ";
    }
    docs.push_back(text);
  }
  const auto batch = batch_encode(docs, cfg);
  REQUIRE(batch.size() == docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto toks = tokenize(docs[i]);
    CHECK(batch[i] == encode(toks, cfg));
  }
}

TEST_CASE("FeatureConfig validation") {
  FeatureConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.hash_bits = 7;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.hash_bits = 23;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = FeatureConfig{};
  cfg.max_tokens = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = FeatureConfig{};
  cfg.ngram = 3;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
