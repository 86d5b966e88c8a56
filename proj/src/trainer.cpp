#include "harmclf/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "harmclf/checkpoint.hpp"
#include "harmclf/error.hpp"
#include "harmclf/metrics.hpp"
#include "harmclf/rng.hpp"

namespace harmclf {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (contrastive.lambda > 0.0 && batch_size < 2) {
    throw ConfigError("batch_size must be >= 2 when lambda > 0");
  }
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("eta must lie in (0, 1)");
  contrastive.validate();
}

nlohmann::json TrainReport::to_json() const {
  return {{"train_loss", train_loss},   {"val_f1", val_f1},
          {"best_epoch", best_epoch},   {"best_val_f1", best_val_f1},
          {"best_checkpoint", best_checkpoint}, {"warnings", warnings}};
}

std::vector<TrainingExample> encode_examples(const std::vector<LabeledExample>& data,
                                             const FeatureConfig& features, Task task) {
  std::vector<TrainingExample> out;
  out.reserve(data.size());
  for (const auto& ex : data) {
    TrainingExample te;
    const auto tokens = tokenize(ex.text);
    te.doc = encode(tokens, features);
    if (task == Task::Harm) {
      if (!ex.harm) throw DataError("record '" + ex.id + "' has no harm label");
      te.label = ex.harm->value();
    } else {
      if (!ex.targets) throw DataError("record '" + ex.id + "' has no targets");
      te.targets = *ex.targets;
    }
    out.push_back(std::move(te));
  }
  return out;
}

std::vector<Batch> make_batches(std::size_t n, int batch_size, std::uint64_t seed, int epoch,
                                bool drop_singleton) {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  Batch order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Engine eng(derive_seed(seed, static_cast<std::uint64_t>(epoch)));
  shuffle(order, eng);

  std::vector<Batch> batches;
  const auto size = static_cast<std::size_t>(batch_size);
  for (std::size_t start = 0; start < n; start += size) {
    const std::size_t end = std::min(n, start + size);
    if (drop_singleton && end - start < 2) break;
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

double train_epoch(ModelParams& params, Optimizer& optimizer,
                   std::span<const TrainingExample> data, const std::vector<Batch>& batches,
                   Task task, const ContrastiveConfig& contrastive) {
  if (batches.empty()) return 0.0;
  std::vector<TrainingExample> batch;
  double total = 0.0;
  for (const auto& indices : batches) {
    batch.clear();
    for (const auto i : indices) batch.push_back(data[i]);
    const auto lg = gradients(params, batch, task, contrastive);
    optimizer.step(params, lg.grads);
    total += lg.loss.total;
  }
  return total / static_cast<double>(batches.size());
}

double evaluate_f1(const ModelParams& params, std::span<const TrainingExample> data, Task task,
                   double eta) {
  if (data.empty()) throw DataError("cannot evaluate an empty set");
  if (task == Task::Harm) {
    std::vector<int> gold, pred;
    for (const auto& ex : data) {
      gold.push_back(ex.label);
      pred.push_back(predict_label(params, ex.doc));
    }
    return classification_report(confusion(gold, pred, static_cast<int>(params.class_bias.size())))
        .macro_f1;
  }
  std::vector<IdentityTargets> gold;
  std::vector<std::vector<double>> sigmas;
  for (const auto& ex : data) {
    gold.push_back(ex.targets);
    sigmas.push_back(target_sigmas(forward(params, ex.doc)));
  }
  return multilabel_report(gold, sigmas, eta).micro_f1;
}

TrainResult train(const std::vector<LabeledExample>& train_set,
                  const std::vector<LabeledExample>& val_set, const ModelConfig& model,
                  const FeatureConfig& features, const TrainConfig& cfg,
                  const std::optional<std::filesystem::path>& checkpoint) {
  cfg.validate();
  model.validate();
  features.validate();
  if (model.vocab_size != features.vocab_size()) {
    throw ConfigError("vocab_size " + std::to_string(model.vocab_size) +
                      " must equal 2^hash_bits = " + std::to_string(features.vocab_size()));
  }
  if (train_set.empty() || val_set.empty()) throw DataError("train and val sets must be nonempty");

  const auto train_data = encode_examples(train_set, features, cfg.task);
  const auto val_data = encode_examples(val_set, features, cfg.task);

  TrainResult result;
  auto& report = result.report;
  if (cfg.task == Task::Harm && cfg.contrastive.lambda > 0.0) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(model.num_classes), 0);
    for (const auto& ex : train_data) {
      if (ex.label >= model.num_classes) throw DataError("label exceeds num_classes");
      ++counts[static_cast<std::size_t>(ex.label)];
    }
    for (std::size_t c = 0; c < counts.size(); ++c) {
      if (counts[c] == 0) {
        report.warnings.push_back("class " + std::to_string(c) +
                                  " is absent from the training set");
      }
    }
  }

  ModelParams params = init_params(model);
  Optimizer optimizer(cfg.optimizer, cfg.learning_rate, params);
  const bool drop_singleton = cfg.contrastive.lambda > 0.0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto batches = make_batches(train_data.size(), cfg.batch_size, cfg.seed, epoch,
                                      drop_singleton);
    report.train_loss.push_back(
        train_epoch(params, optimizer, train_data, batches, cfg.task, cfg.contrastive));

    // Score the checkpoint precision so the saved model reproduces the score.
    ModelParams snapshot = round_to_float(params);
    const double f1 = evaluate_f1(snapshot, val_data, cfg.task, cfg.eta);
    report.val_f1.push_back(f1);
    if (report.best_epoch < 0 || f1 > report.best_val_f1) {
      report.best_epoch = epoch;
      report.best_val_f1 = f1;
      result.best = std::move(snapshot);
    }
  }

  if (checkpoint) {
    save_params(result.best, model, features, *checkpoint);
    report.best_checkpoint = checkpoint->string();
  }
  return result;
}

void GradCheckReport::merge(const GradCheckReport& other) {
  trials += other.trials;
  entries_checked += other.entries_checked;
  if (other.max_rel_error > max_rel_error || worst_tensor.empty()) {
    max_rel_error = other.max_rel_error;
    worst_tensor = other.worst_tensor;
    worst_index = other.worst_index;
    worst_analytic = other.worst_analytic;
    worst_numeric = other.worst_numeric;
    worst_setting = other.worst_setting;
  }
}

ModelConfig small_model_config() {
  ModelConfig cfg;
  cfg.vocab_size = 64;
  cfg.embed_dim = 8;
  cfg.hidden_dim = 8;
  return cfg;
}

namespace {

// Entries whose analytic and numeric values are both below this magnitude
// are compared on absolute rather than relative error.
constexpr double kGradCheckFloor = 1e-6;

double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), kGradCheckFloor});
  return std::abs(analytic - numeric) / scale;
}

std::vector<double> analytic_flat(const GradientSet& g, const ModelParams& shape,
                                  std::string_view tensor) {
  if (tensor == "embedding") {
    std::vector<double> out(static_cast<std::size_t>(shape.embedding.size()), 0.0);
    const auto cols = shape.embedding.cols();
    for (std::size_t r = 0; r < g.embedding_rows.size(); ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        out[static_cast<std::size_t>(g.embedding_rows[r] * cols + c)] =
            g.embedding(static_cast<Eigen::Index>(r), c);
      }
    }
    return out;
  }
  auto flat = [](const auto& m) { return std::vector<double>(m.data(), m.data() + m.size()); };
  if (tensor == "hidden_weight") return flat(g.hidden_weight);
  if (tensor == "hidden_bias") return flat(g.hidden_bias);
  if (tensor == "class_weight") return flat(g.class_weight);
  if (tensor == "class_bias") return flat(g.class_bias);
  if (tensor == "target_weight") return flat(g.target_weight);
  return flat(g.target_bias);
}

}  // namespace

GradCheckReport grad_check(const ModelConfig& model, const ContrastiveConfig& contrastive,
                           Task task, int trials, std::uint64_t seed) {
  if (trials < 1) throw ConfigError("grad_check needs trials >= 1");
  contrastive.validate();
  std::ostringstream setting;
  setting << "task=" << task_name(task) << " tau=" << contrastive.tau
          << " lambda=" << contrastive.lambda;

  GradCheckReport report;
  for (int trial = 0; trial < trials; ++trial) {
    Engine eng(derive_seed(seed, static_cast<std::uint64_t>(trial)));
    ModelConfig cfg = model;
    cfg.seed = eng();
    ModelParams params = init_params(cfg);
    // Nonzero biases so every term is exercised away from the init point.
    for (auto* bias : {&params.hidden_bias, &params.class_bias, &params.target_bias}) {
      for (Eigen::Index k = 0; k < bias->size(); ++k) (*bias)[k] = uniform_unit(eng) - 0.5;
    }

    std::vector<TrainingExample> batch(6);
    for (auto& ex : batch) {
      const auto len = uniform_index(eng, 9);  // 0..8 tokens; empty docs allowed
      for (std::uint64_t t = 0; t < len; ++t) {
        ex.doc.ids.push_back(static_cast<std::int32_t>(
            uniform_index(eng, static_cast<std::uint64_t>(cfg.vocab_size))));
      }
      ex.label = static_cast<int>(uniform_index(eng, 3));
      for (auto& bit : ex.targets) bit = uniform_index(eng, 2) == 1;
    }

    const auto lg = gradients(params, batch, task, contrastive);
    ModelParams probe = params;
    std::vector<std::pair<std::string, std::span<double>>> tensors;
    probe.for_each_tensor([&](std::string_view name, std::span<double> d) {
      tensors.emplace_back(std::string(name), d);
    });
    for (auto& [name, data] : tensors) {
      const auto analytic = analytic_flat(lg.grads, params, name);
      for (std::size_t k = 0; k < data.size(); ++k) {
        const double saved = data[k];
        auto central = [&](double h) {
          data[k] = saved + h;
          const double up = batch_loss(probe, batch, task, contrastive).total;
          data[k] = saved - h;
          const double down = batch_loss(probe, batch, task, contrastive).total;
          data[k] = saved;
          return (up - down) / (2.0 * h);
        };
        // Richardson extrapolation of two central differences cancels the
        // O(h^2) truncation term, which dominates at small tau.
        const double numeric =
            (4.0 * central(kGradCheckStep / 2.0) - central(kGradCheckStep)) / 3.0;
        const double err = relative_error(analytic[k], numeric);
        ++report.entries_checked;
        if (err > report.max_rel_error || report.worst_tensor.empty()) {
          report.max_rel_error = err;
          report.worst_tensor = name;
          report.worst_index = k;
          report.worst_analytic = analytic[k];
          report.worst_numeric = numeric;
          report.worst_setting = setting.str();
        }
      }
    }
    ++report.trials;
  }
  return report;
}

GradCheckReport grad_check_sweep(int trials, std::uint64_t seed) {
  GradCheckReport total;
  std::uint64_t stream = 0;
  for (Task task : {Task::Harm, Task::Targets}) {
    for (double tau : {0.05, 0.1, 1.0}) {
      for (double lambda : {0.0, 0.5, 1.0}) {
        ContrastiveConfig cc{tau, lambda};
        total.merge(grad_check(small_model_config(), cc, task, trials,
                               derive_seed(seed, ++stream)));
      }
    }
  }
  return total;
}

}  // namespace harmclf
