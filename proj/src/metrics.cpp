#include "harmclf/metrics.hpp"

#include <numeric>
#include <string>

#include "harmclf/error.hpp"
#include "harmclf/losses.hpp"

namespace harmclf {

ConfusionMatrix::ConfusionMatrix(int num_classes)
    : n_(num_classes), counts_(static_cast<std::size_t>(num_classes * num_classes), 0) {
  if (num_classes < 1) throw ConfigError("confusion matrix needs at least one class");
}

std::size_t ConfusionMatrix::index(int gold, int pred) const {
  if (gold < 0 || gold >= n_ || pred < 0 || pred >= n_) {
    throw DataError("class index out of range in confusion matrix (gold " +
                    std::to_string(gold) + ", pred " + std::to_string(pred) + ")");
  }
  return static_cast<std::size_t>(gold * n_ + pred);
}

std::size_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t t = 0;
  for (int c = 0; c < n_; ++c) t += at(c, c);
  return t;
}

ConfusionMatrix confusion(std::span<const int> gold, std::span<const int> pred, int num_classes) {
  if (gold.size() != pred.size()) {
    throw DataError("gold/pred length mismatch: " + std::to_string(gold.size()) + " vs " +
                    std::to_string(pred.size()));
  }
  if (gold.empty()) throw DataError("confusion matrix of zero examples");
  ConfusionMatrix cm(num_classes);
  for (std::size_t i = 0; i < gold.size(); ++i) cm.add(gold[i], pred[i]);
  return cm;
}

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

ClassScores score(std::size_t tp, std::size_t fp, std::size_t fn) {
  ClassScores s;
  s.precision = ratio(tp, tp + fp);
  s.recall = ratio(tp, tp + fn);
  s.f1 = s.precision + s.recall == 0.0
             ? 0.0
             : 2.0 * s.precision * s.recall / (s.precision + s.recall);
  s.support = tp + fn;
  return s;
}

void aggregate(MetricsReport& r, std::size_t tp, std::size_t fp, std::size_t fn) {
  double f1_sum = 0.0, weighted = 0.0;
  std::size_t support = 0;
  for (const auto& c : r.per_class) {
    f1_sum += c.f1;
    weighted += c.f1 * static_cast<double>(c.support);
    support += c.support;
  }
  r.macro_f1 = r.per_class.empty() ? 0.0 : f1_sum / static_cast<double>(r.per_class.size());
  r.weighted_f1 = support == 0 ? 0.0 : weighted / static_cast<double>(support);
  r.micro_f1 = ratio(2 * tp, 2 * tp + fp + fn);
}

}  // namespace

MetricsReport classification_report(const ConfusionMatrix& cm) {
  MetricsReport r;
  std::size_t tp_all = 0, fp_all = 0, fn_all = 0;
  for (int c = 0; c < cm.num_classes(); ++c) {
    std::size_t tp = cm.at(c, c), fp = 0, fn = 0;
    for (int k = 0; k < cm.num_classes(); ++k) {
      if (k == c) continue;
      fp += cm.at(k, c);
      fn += cm.at(c, k);
    }
    r.per_class.push_back(score(tp, fp, fn));
    tp_all += tp;
    fp_all += fp;
    fn_all += fn;
  }
  aggregate(r, tp_all, fp_all, fn_all);
  r.confusion = cm;
  return r;
}

MetricsReport multilabel_report(std::span<const IdentityTargets> gold,
                                std::span<const std::vector<double>> sigmas, double eta) {
  if (gold.size() != sigmas.size()) {
    throw DataError("gold/prediction length mismatch: " + std::to_string(gold.size()) + " vs " +
                    std::to_string(sigmas.size()));
  }
  if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("threshold eta must lie in (0, 1)");
  std::vector<std::size_t> tp(kNumTargets), fp(kNumTargets), fn(kNumTargets);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (sigmas[i].size() != kNumTargets) throw DataError("expected 5 target probabilities");
    for (std::size_t k = 0; k < kNumTargets; ++k) {
      const bool predicted = sigmas[i][k] >= eta;
      const bool truth = gold[i][k];
      tp[k] += predicted && truth;
      fp[k] += predicted && !truth;
      fn[k] += !predicted && truth;
    }
  }
  MetricsReport r;
  for (std::size_t k = 0; k < kNumTargets; ++k) r.per_class.push_back(score(tp[k], fp[k], fn[k]));
  aggregate(r, std::accumulate(tp.begin(), tp.end(), std::size_t{0}),
            std::accumulate(fp.begin(), fp.end(), std::size_t{0}),
            std::accumulate(fn.begin(), fn.end(), std::size_t{0}));
  return r;
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j;
  j["per_class"] = nlohmann::json::array();
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    const auto& s = per_class[c];
    j["per_class"].push_back({{"class", c},
                              {"precision", s.precision},
                              {"recall", s.recall},
                              {"f1", s.f1},
                              {"support", s.support}});
  }
  j["macro_f1"] = macro_f1;
  j["micro_f1"] = micro_f1;
  j["weighted_f1"] = weighted_f1;
  if (confusion) {
    auto rows = nlohmann::json::array();
    for (int g = 0; g < confusion->num_classes(); ++g) {
      auto row = nlohmann::json::array();
      for (int p = 0; p < confusion->num_classes(); ++p) row.push_back(confusion->at(g, p));
      rows.push_back(std::move(row));
    }
    j["confusion"] = std::move(rows);
  }
  return j;
}

double mean_interclass_cosine_distance(std::span<const RowVector> reps,
                                       std::span<const int> labels) {
  if (reps.size() != labels.size()) throw DataError("reps/labels length mismatch");
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    for (std::size_t j = i + 1; j < reps.size(); ++j) {
      if (labels[i] == labels[j]) continue;
      total += 1.0 - cosine_sim({reps[i].data(), static_cast<std::size_t>(reps[i].size())},
                                {reps[j].data(), static_cast<std::size_t>(reps[j].size())});
      ++pairs;
    }
  }
  return pairs == 0 ? 0.0 : total / static_cast<double>(pairs);
}

}  // namespace harmclf
