#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "harmclf/corpus.hpp"
#include "harmclf/featurizer.hpp"
#include "harmclf/model.hpp"

namespace harmclf {

enum class Task { Harm, Targets };

Task parse_task(std::string_view name);
std::string_view task_name(Task task);

struct ContrastiveConfig {
  double tau = 0.1;     // temperature
  double lambda = 0.5;  // weight of the contrastive term

  void validate() const;
};

/// One encoded training document with both label kinds.
struct TrainingExample {
  EncodedDoc doc;
  int label = 0;
  IdentityTargets targets{};
};

/// Class used to pick contrastive positives: the harm label, or the exact
/// target set (as a bitmask) for the targets task.
int contrastive_label(const TrainingExample& ex, Task task);

/// Normalized representations and their class labels.
struct ContrastiveBatch {
  std::vector<RowVector> reps;
  std::vector<int> labels;
};

/// x.y / (|x||y|), or 0 when either vector is zero.
double cosine_sim(std::span<const double> x, std::span<const double> y);

/// -ln(max(p[true_class], 1e-12)).
double cross_entropy(std::span<const double> probs, int true_class);

/// Mean over targets of the clamped binary log loss.
double binary_cross_entropy(std::span<const double> sigmas, const IdentityTargets& targets);

/// Supervised in-batch InfoNCE. Positives of anchor i are the other members
/// sharing its label; the softmax runs over every j != i. Each anchor
/// averages over its positives, anchors without positives are skipped, and
/// the result is the mean over contributing anchors (0 if there are none).
double info_nce(const ContrastiveBatch& batch, double tau);

double combined_loss(double ce, double nce, const ContrastiveConfig& cfg);

/// Partial derivatives shaped like ModelParams. Embedding gradients are kept
/// only for rows referenced by the batch; every other row is exactly zero.
struct GradientSet {
  std::vector<std::int32_t> embedding_rows;  // sorted, unique
  Matrix embedding;                          // embedding_rows.size() x embed_dim
  Matrix hidden_weight;
  RowVector hidden_bias;
  Matrix class_weight;
  RowVector class_bias;
  Matrix target_weight;
  RowVector target_bias;

  /// Gradient for an arbitrary embedding entry (zero for untouched rows).
  double embedding_at(std::int32_t row, Eigen::Index col) const;
};

struct LossTerms {
  double supervised = 0.0;   // mean CE (harm) or mean BCE (targets)
  double contrastive = 0.0;  // info_nce over the batch
  double total = 0.0;
};

struct LossAndGradients {
  LossTerms loss;
  GradientSet grads;
};

/// Loss value only, assembled from forward() and the scalar loss functions
/// above. Serves as the reference the analytic gradients are checked against.
LossTerms batch_loss(const ModelParams& params, std::span<const TrainingExample> batch,
                     Task task, const ContrastiveConfig& cfg);

/// Batch-mean combined loss and its exact gradient. Throws DivergenceError
/// naming the term that went non-finite.
LossAndGradients gradients(const ModelParams& params, std::span<const TrainingExample> batch,
                           Task task, const ContrastiveConfig& cfg);

}  // namespace harmclf
