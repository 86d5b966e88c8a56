#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "harmclf/corpus.hpp"

namespace harmclf {

/// Keyword corpus with controllable class confusability.
///
/// Each class draws its tokens uniformly from a class vocabulary of
/// `vocab_per_class` pseudo-words. round(overlap * vocab_per_class) of those
/// words are shared by every class; the rest belong to that class alone.
/// overlap = 0 gives perfectly separable classes.
struct SynthConfig {
  int classes = 4;
  int docs_per_class = 500;
  double overlap = 0.0;
  int vocab_per_class = 5;
  int min_len = 4;
  int max_len = 16;
  bool with_targets = false;  // add target-marker words and a targets field
  std::uint64_t seed = 0;

  void validate() const;
};

/// Deterministic pseudo-word for index i (distinct for i < 8000).
std::string synth_word(int i);

std::vector<LabeledExample> generate_synthetic(const SynthConfig& cfg);

}  // namespace harmclf
