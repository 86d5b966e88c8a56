#include "harmclf/losses.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "harmclf/error.hpp"

namespace harmclf {

namespace {

constexpr double kLogClamp = 1e-12;

std::span<const double> view(const RowVector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

void check_finite(double value, const char* term) {
  if (!std::isfinite(value)) {
    throw DivergenceError(std::string(term) + " loss is non-finite (" + std::to_string(value) +
                          "); lower the learning rate or raise tau");
  }
}

}  // namespace

Task parse_task(std::string_view name) {
  if (name == "harm") return Task::Harm;
  if (name == "targets") return Task::Targets;
  throw ConfigError("unknown task '" + std::string(name) + "' (expected harm|targets)");
}

std::string_view task_name(Task task) { return task == Task::Harm ? "harm" : "targets"; }

void ContrastiveConfig::validate() const {
  if (!(tau > 0.0)) throw ConfigError("tau must be > 0");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
}

int contrastive_label(const TrainingExample& ex, Task task) {
  if (task == Task::Harm) return ex.label;
  int mask = 0;
  for (int k = 0; k < kNumTargets; ++k) mask |= ex.targets[k] ? (1 << k) : 0;
  return mask;
}

double cosine_sim(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DataError("cosine_sim dimension mismatch: " + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()));
  }
  double dot = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    xx += x[i] * x[i];
    yy += y[i] * y[i];
  }
  if (xx == 0.0 || yy == 0.0) return 0.0;
  return dot / (std::sqrt(xx) * std::sqrt(yy));
}

double cross_entropy(std::span<const double> probs, int true_class) {
  if (true_class < 0 || static_cast<std::size_t>(true_class) >= probs.size()) {
    throw DataError("class index " + std::to_string(true_class) + " out of range");
  }
  return -std::log(std::max(probs[static_cast<std::size_t>(true_class)], kLogClamp));
}

double binary_cross_entropy(std::span<const double> sigmas, const IdentityTargets& targets) {
  if (sigmas.size() != targets.size()) throw DataError("expected 5 target probabilities");
  double total = 0.0;
  for (std::size_t k = 0; k < sigmas.size(); ++k) {
    total -= targets[k] ? std::log(std::max(sigmas[k], kLogClamp))
                        : std::log(std::max(1.0 - sigmas[k], kLogClamp));
  }
  return total / static_cast<double>(sigmas.size());
}

double info_nce(const ContrastiveBatch& batch, double tau) {
  const std::size_t n = batch.reps.size();
  if (n < 2) throw DataError("info_nce needs at least 2 samples, got " + std::to_string(n));
  if (batch.labels.size() != n) throw DataError("info_nce: labels and reps differ in length");
  if (!(tau > 0.0)) throw ConfigError("tau must be > 0");

  double total = 0.0;
  std::size_t anchors = 0;
  std::vector<double> sims(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t positives = 0;
    double top = -INFINITY;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sims[j] = cosine_sim(view(batch.reps[i]), view(batch.reps[j])) / tau;
      top = std::max(top, sims[j]);
      if (batch.labels[j] == batch.labels[i]) ++positives;
    }
    if (positives == 0) continue;
    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) denom += std::exp(sims[j] - top);
    }
    const double log_denom = top + std::log(denom);
    double anchor_loss = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && batch.labels[j] == batch.labels[i]) anchor_loss -= sims[j] - log_denom;
    }
    total += anchor_loss / static_cast<double>(positives);
    ++anchors;
  }
  return anchors == 0 ? 0.0 : total / static_cast<double>(anchors);
}

double combined_loss(double ce, double nce, const ContrastiveConfig& cfg) {
  return ce + cfg.lambda * nce;
}

double GradientSet::embedding_at(std::int32_t row, Eigen::Index col) const {
  const auto it = std::lower_bound(embedding_rows.begin(), embedding_rows.end(), row);
  if (it == embedding_rows.end() || *it != row) return 0.0;
  return embedding(it - embedding_rows.begin(), col);
}

LossTerms batch_loss(const ModelParams& params, std::span<const TrainingExample> batch, Task task,
                     const ContrastiveConfig& cfg) {
  LossTerms loss;
  if (batch.empty()) return loss;
  ContrastiveBatch cb;
  for (const auto& ex : batch) {
    const auto out = forward(params, ex.doc);
    if (task == Task::Harm) {
      loss.supervised += cross_entropy(softmax(view(out.class_logits)), ex.label);
    } else {
      loss.supervised += binary_cross_entropy(target_sigmas(out), ex.targets);
    }
    cb.reps.push_back(out.rep.z_hat);
    cb.labels.push_back(contrastive_label(ex, task));
  }
  loss.supervised /= static_cast<double>(batch.size());
  if (cfg.lambda > 0.0) loss.contrastive = info_nce(cb, cfg.tau);
  loss.total = combined_loss(loss.supervised, loss.contrastive, cfg);
  return loss;
}

namespace {

/// Gradient of the InfoNCE value with respect to each normalized vector.
std::vector<RowVector> info_nce_backward(const std::vector<RowVector>& reps,
                                         const std::vector<int>& labels, double tau) {
  const std::size_t n = reps.size();
  std::vector<RowVector> grad(n, RowVector::Zero(reps.front().size()));

  std::vector<std::size_t> positives(n, 0);
  std::size_t anchors = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) positives[i] += j != i && labels[j] == labels[i];
    anchors += positives[i] > 0;
  }
  if (anchors == 0) return grad;

  std::vector<double> sims(n), q(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (positives[i] == 0) continue;
    double top = -INFINITY;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sims[j] = reps[i].dot(reps[j]) / tau;
      top = std::max(top, sims[j]);
    }
    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      q[j] = std::exp(sims[j] - top);
      denom += q[j];
    }
    const double scale = 1.0 / static_cast<double>(anchors);
    const double pos_weight = 1.0 / static_cast<double>(positives[i]);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      // dL_i / ds_ij, with s_ij = <r_i, r_j> / tau
      double coef = q[j] / denom - (labels[j] == labels[i] ? pos_weight : 0.0);
      coef *= scale / tau;
      grad[i] += coef * reps[j];
      grad[j] += coef * reps[i];
    }
  }
  return grad;
}

/// Back-propagates through z_hat = z / |z|; zero vectors pass no gradient.
RowVector normalize_backward(const RowVector& z, const RowVector& z_hat, const RowVector& g) {
  const double norm = z.norm();
  if (norm == 0.0) return RowVector::Zero(z.size());
  return (g - z_hat * z_hat.dot(g)) / norm;
}

}  // namespace

LossAndGradients gradients(const ModelParams& params, std::span<const TrainingExample> batch,
                           Task task, const ContrastiveConfig& cfg) {
  const std::size_t n = batch.size();
  if (n == 0) throw DataError("gradients: empty batch");
  if (cfg.lambda > 0.0 && n < 2) throw DataError("contrastive loss needs batches of at least 2");

  std::vector<ForwardResult> outs;
  outs.reserve(n);
  for (const auto& ex : batch) outs.push_back(forward(params, ex.doc));

  LossAndGradients result;
  auto& loss = result.loss;
  auto& g = result.grads;
  const auto hidden = params.hidden_weight.cols();
  g.hidden_weight = Matrix::Zero(params.hidden_weight.rows(), hidden);
  g.hidden_bias = RowVector::Zero(hidden);
  g.class_weight = Matrix::Zero(params.class_weight.rows(), params.class_weight.cols());
  g.class_bias = RowVector::Zero(params.class_bias.size());
  g.target_weight = Matrix::Zero(params.target_weight.rows(), params.target_weight.cols());
  g.target_bias = RowVector::Zero(params.target_bias.size());

  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<RowVector> dz(n);

  // Supervised head.
  for (std::size_t i = 0; i < n; ++i) {
    const auto& out = outs[i];
    if (task == Task::Harm) {
      const auto probs = softmax(view(out.class_logits));
      loss.supervised += cross_entropy(probs, batch[i].label);
      RowVector dlogits = Eigen::Map<const RowVector>(probs.data(), static_cast<Eigen::Index>(probs.size()));
      dlogits[batch[i].label] -= 1.0;
      // Clamped CE is flat where p_true < 1e-12.
      if (probs[static_cast<std::size_t>(batch[i].label)] < kLogClamp) dlogits.setZero();
      dlogits *= inv_n;
      g.class_weight += out.rep.z.transpose() * dlogits;
      g.class_bias += dlogits;
      dz[i] = dlogits * params.class_weight.transpose();
    } else {
      const auto sig = target_sigmas(out);
      loss.supervised += binary_cross_entropy(sig, batch[i].targets);
      RowVector dlogits(static_cast<Eigen::Index>(sig.size()));
      for (std::size_t k = 0; k < sig.size(); ++k) {
        const double t = batch[i].targets[k] ? 1.0 : 0.0;
        double d = 0.0;
        if (t > 0.0 && sig[k] >= kLogClamp) d -= (1.0 - sig[k]);
        if (t == 0.0 && 1.0 - sig[k] >= kLogClamp) d += sig[k];
        dlogits[static_cast<Eigen::Index>(k)] = d * inv_n / static_cast<double>(sig.size());
      }
      g.target_weight += out.rep.z.transpose() * dlogits;
      g.target_bias += dlogits;
      dz[i] = dlogits * params.target_weight.transpose();
    }
  }
  loss.supervised /= static_cast<double>(n);
  check_finite(loss.supervised, task == Task::Harm ? "cross_entropy" : "binary_cross_entropy");

  // Contrastive term on the normalized hidden vectors.
  if (cfg.lambda > 0.0) {
    ContrastiveBatch cb;
    for (std::size_t i = 0; i < n; ++i) {
      cb.reps.push_back(outs[i].rep.z_hat);
      cb.labels.push_back(contrastive_label(batch[i], task));
    }
    loss.contrastive = info_nce(cb, cfg.tau);
    check_finite(loss.contrastive, "info_nce");
    const auto dhat = info_nce_backward(cb.reps, cb.labels, cfg.tau);
    for (std::size_t i = 0; i < n; ++i) {
      dz[i] += cfg.lambda * normalize_backward(outs[i].rep.z, outs[i].rep.z_hat, dhat[i]);
    }
  }
  loss.total = combined_loss(loss.supervised, loss.contrastive, cfg);
  check_finite(loss.total, "combined");

  // Hidden layer and embedding rows.
  std::map<std::int32_t, RowVector> rows;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& out = outs[i];
    const RowVector da = dz[i].array() * (1.0 - out.rep.z.array().square());
#ifdef HARMCLF_MUTATE_BACKWARD
    g.hidden_bias -= da;
#else
    g.hidden_bias += da;
#endif
    g.hidden_weight += out.pooled.transpose() * da;
    const auto& ids = batch[i].doc.ids;
    if (ids.empty()) continue;
    const RowVector dpooled =
        (da * params.hidden_weight.transpose()) / static_cast<double>(ids.size());
    for (const std::int32_t id : ids) {
      auto [it, inserted] = rows.try_emplace(id, RowVector::Zero(params.embedding.cols()));
      it->second += dpooled;
    }
  }
  g.embedding_rows.reserve(rows.size());
  g.embedding.resize(static_cast<Eigen::Index>(rows.size()), params.embedding.cols());
  Eigen::Index r = 0;
  for (auto& [id, grad] : rows) {
    g.embedding_rows.push_back(id);
    g.embedding.row(r++) = grad;
  }
  return result;
}

}  // namespace harmclf
