#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "harmclf/corpus.hpp"
#include "harmclf/featurizer.hpp"
#include "harmclf/losses.hpp"
#include "harmclf/model.hpp"
#include "harmclf/optimizer.hpp"

namespace harmclf {

struct TrainConfig {
  int epochs = 20;
  int batch_size = 32;
  double learning_rate = 0.05;
  OptimizerKind optimizer = OptimizerKind::Adam;
  std::uint64_t seed = 0;
  ContrastiveConfig contrastive;
  Task task = Task::Harm;
  double eta = 0.5;  // multi-label decision threshold

  void validate() const;
};

struct TrainReport {
  std::vector<double> train_loss;  // per epoch
  std::vector<double> val_f1;      // macro (harm) or micro (targets), per epoch
  int best_epoch = -1;             // index into val_f1
  double best_val_f1 = 0.0;
  std::string best_checkpoint;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

struct TrainResult {
  ModelParams best;  // float32-rounded, identical to the saved checkpoint
  TrainReport report;
};

/// Featurizes records and checks that they carry the label `task` needs.
std::vector<TrainingExample> encode_examples(const std::vector<LabeledExample>& data,
                                             const FeatureConfig& features, Task task);

using Batch = std::vector<std::size_t>;

/// Shuffles indices [0, n) with a stream keyed by (seed, epoch) and cuts
/// them into batches. A final batch smaller than 2 is dropped when
/// `drop_singleton` is set (contrastive training has no pairs in it).
std::vector<Batch> make_batches(std::size_t n, int batch_size, std::uint64_t seed, int epoch,
                                bool drop_singleton);

/// One pass of optimizer updates; returns the mean batch loss.
double train_epoch(ModelParams& params, Optimizer& optimizer,
                   std::span<const TrainingExample> data, const std::vector<Batch>& batches,
                   Task task, const ContrastiveConfig& contrastive);

/// Validation score used for model selection: macro F1 for harm, micro F1
/// over thresholded decisions for targets.
double evaluate_f1(const ModelParams& params, std::span<const TrainingExample> data, Task task,
                   double eta);

/// Trains from `init_params(model)` and keeps the epoch with the best
/// validation score (earliest on ties). Writes the checkpoint when a path is
/// given.
TrainResult train(const std::vector<LabeledExample>& train_set,
                  const std::vector<LabeledExample>& val_set, const ModelConfig& model,
                  const FeatureConfig& features, const TrainConfig& cfg,
                  const std::optional<std::filesystem::path>& checkpoint = std::nullopt);

inline constexpr double kGradCheckTolerance = 1e-4;
inline constexpr double kGradCheckStep = 1e-4;

struct GradCheckReport {
  int trials = 0;
  std::size_t entries_checked = 0;
  double max_rel_error = 0.0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::string worst_setting;  // task / tau / lambda of the worst entry

  bool passed() const { return max_rel_error < kGradCheckTolerance; }
  void merge(const GradCheckReport& other);
};

/// Compares analytic gradients with central finite differences on random
/// small models and batches. `model` supplies the dimensions.
GradCheckReport grad_check(const ModelConfig& model, const ContrastiveConfig& contrastive,
                           Task task, int trials, std::uint64_t seed);

/// grad_check over tau in {0.05, 0.1, 1.0}, lambda in {0, 0.5, 1.0} and both
/// tasks; `trials` random (model, batch) pairs per setting.
GradCheckReport grad_check_sweep(int trials, std::uint64_t seed);

ModelConfig small_model_config();

}  // namespace harmclf
