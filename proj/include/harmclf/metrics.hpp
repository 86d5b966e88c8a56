#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "harmclf/corpus.hpp"
#include "harmclf/model.hpp"

namespace harmclf {

/// Rows are gold classes, columns are predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes);

  int num_classes() const { return n_; }
  std::size_t at(int gold, int pred) const { return counts_[index(gold, pred)]; }
  void add(int gold, int pred) { ++counts_[index(gold, pred)]; }
  std::size_t total() const;
  std::size_t trace() const;

 private:
  std::size_t index(int gold, int pred) const;

  int n_;
  std::vector<std::size_t> counts_;
};

ConfusionMatrix confusion(std::span<const int> gold, std::span<const int> pred,
                          int num_classes = kNumHarmClasses);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct MetricsReport {
  std::vector<ClassScores> per_class;
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
  double weighted_f1 = 0.0;
  std::optional<ConfusionMatrix> confusion;

  nlohmann::json to_json() const;
};

/// Precision, recall and F1 with the 0/0 -> 0 convention throughout.
MetricsReport classification_report(const ConfusionMatrix& cm);

/// Decisions are sigma >= eta for every (document, target) pair; micro F1
/// pools all of them, macro averages per-target F1.
MetricsReport multilabel_report(std::span<const IdentityTargets> gold,
                                std::span<const std::vector<double>> sigmas, double eta);

/// Mean of (1 - cosine) over all pairs with different labels.
double mean_interclass_cosine_distance(std::span<const RowVector> reps,
                                       std::span<const int> labels);

}  // namespace harmclf
