#include "harmclf/synth.hpp"

#include <array>
#include <cmath>
#include <cstdio>

#include "harmclf/error.hpp"
#include "harmclf/rng.hpp"

namespace harmclf {

namespace {

constexpr std::array<const char*, 20> kSyllables = {
    "ka", "lo", "mi", "nu", "pe", "ra", "si", "to", "vu", "ze",
    "ba", "do", "fi", "gu", "he", "ja", "ko", "li", "mo", "ne"};

// Word-index ranges: shared words first, then class words, then target markers.
constexpr int kTargetWordsPer = 2;
constexpr double kTargetRate = 0.3;
constexpr int kTargetBase = 7000;

}  // namespace

void SynthConfig::validate() const {
  if (classes < 2 || classes > kNumHarmClasses) throw ConfigError("classes must be in [2, 4]");
  if (docs_per_class < 1) throw ConfigError("docs_per_class must be >= 1");
  if (!(overlap >= 0.0 && overlap < 1.0)) throw ConfigError("overlap must be in [0, 1)");
  if (vocab_per_class < 1 || vocab_per_class > 1000) {
    throw ConfigError("vocab_per_class must be in [1, 1000]");
  }
  if (min_len < 1 || max_len < min_len) throw ConfigError("need 1 <= min_len <= max_len");
}

std::string synth_word(int i) {
  return std::string(kSyllables[static_cast<std::size_t>(i % 20)]) +
         kSyllables[static_cast<std::size_t>((i / 20) % 20)] +
         kSyllables[static_cast<std::size_t>((i / 400) % 20)];
}

std::vector<LabeledExample> generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  const int shared = static_cast<int>(std::lround(cfg.overlap * cfg.vocab_per_class));
  const int own = cfg.vocab_per_class - shared;
  if (own < 1) throw ConfigError("overlap leaves no class-specific words");

  Engine eng(cfg.seed);
  std::vector<LabeledExample> docs;
  docs.reserve(static_cast<std::size_t>(cfg.classes * cfg.docs_per_class));
  for (int c = 0; c < cfg.classes; ++c) {
    for (int d = 0; d < cfg.docs_per_class; ++d) {
      const auto span = static_cast<std::uint64_t>(cfg.max_len - cfg.min_len + 1);
      const int len = cfg.min_len + static_cast<int>(uniform_index(eng, span));
      std::string text;
      for (int t = 0; t < len; ++t) {
        const int pick =
            static_cast<int>(uniform_index(eng, static_cast<std::uint64_t>(cfg.vocab_per_class)));
        const int word = pick < shared ? pick : shared + c * own + (pick - shared);
        if (!text.empty()) text += ' ';
        text += synth_word(word);
      }
      LabeledExample ex;
      ex.harm = HarmLabel(c);
      if (cfg.with_targets) {
        IdentityTargets targets{};
        for (int k = 0; k < kNumTargets; ++k) {
          if (uniform_unit(eng) < kTargetRate) {
            targets[static_cast<std::size_t>(k)] = true;
            const int marker = kTargetBase + k * kTargetWordsPer +
                               static_cast<int>(uniform_index(eng, kTargetWordsPer));
            text += ' ' + synth_word(marker);
          }
        }
        ex.targets = targets;
      }
      ex.text = std::move(text);
      docs.push_back(std::move(ex));
    }
  }
  shuffle(docs, eng);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "syn-%06zu", i);
    docs[i].id = id;
  }
  return docs;
}

}  // namespace harmclf
