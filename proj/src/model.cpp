#include "harmclf/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "harmclf/error.hpp"
#include "harmclf/rng.hpp"

namespace harmclf {

void ModelConfig::validate() const {
  if (vocab_size < 1 || embed_dim < 1 || hidden_dim < 1 || num_classes < 1 ||
      num_targets < 1) {
    throw ConfigError("model dimensions must all be >= 1");
  }
}

bool ModelParams::matches(const ModelConfig& cfg) const {
  return embedding.rows() == cfg.vocab_size && embedding.cols() == cfg.embed_dim &&
         hidden_weight.rows() == cfg.embed_dim && hidden_weight.cols() == cfg.hidden_dim &&
         hidden_bias.size() == cfg.hidden_dim && class_weight.rows() == cfg.hidden_dim &&
         class_weight.cols() == cfg.num_classes && class_bias.size() == cfg.num_classes &&
         target_weight.rows() == cfg.hidden_dim && target_weight.cols() == cfg.num_targets &&
         target_bias.size() == cfg.num_targets;
}

bool operator==(const ModelParams& a, const ModelParams& b) {
  bool equal = true;
  std::vector<std::span<const double>> lhs;
  a.for_each_tensor([&](std::string_view, std::span<const double> d) { lhs.push_back(d); });
  std::size_t k = 0;
  b.for_each_tensor([&](std::string_view, std::span<const double> d) {
    equal = equal && d.size() == lhs[k].size() && std::equal(d.begin(), d.end(), lhs[k].begin());
    ++k;
  });
  return equal;
}

namespace {

Matrix glorot(Eigen::Index rows, Eigen::Index cols, Engine& eng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    double x = static_cast<float>((2.0 * uniform_unit(eng) - 1.0) * bound);
    // float rounding may land on the bound itself; keep it open.
    while (std::abs(x) >= bound) x = std::nextafter(static_cast<float>(x), 0.0f);
    m.data()[i] = x;
  }
  return m;
}

}  // namespace

ModelParams init_params(const ModelConfig& cfg) {
  cfg.validate();
  Engine eng(cfg.seed);
  ModelParams p;
  p.embedding = glorot(cfg.vocab_size, cfg.embed_dim, eng);
  p.hidden_weight = glorot(cfg.embed_dim, cfg.hidden_dim, eng);
  p.hidden_bias = RowVector::Zero(cfg.hidden_dim);
  p.class_weight = glorot(cfg.hidden_dim, cfg.num_classes, eng);
  p.class_bias = RowVector::Zero(cfg.num_classes);
  p.target_weight = glorot(cfg.hidden_dim, cfg.num_targets, eng);
  p.target_bias = RowVector::Zero(cfg.num_targets);
  return p;
}

ModelParams round_to_float(const ModelParams& params) {
  ModelParams out = params;
  out.for_each_tensor([](std::string_view, std::span<double> d) {
    for (double& x : d) x = static_cast<float>(x);
  });
  return out;
}

RowVector l2_normalize(const RowVector& v) {
  const double norm = v.norm();
  if (norm == 0.0) return RowVector::Zero(v.size());
  return v / norm;
}

ForwardResult forward(const ModelParams& params, const EncodedDoc& doc) {
  const auto vocab = params.embedding.rows();
  ForwardResult out;
  out.pooled = RowVector::Zero(params.embedding.cols());
  for (const std::int32_t id : doc.ids) {
    if (id < 0 || id >= vocab) {
      throw DataError("token id " + std::to_string(id) + " outside vocabulary of " +
                      std::to_string(vocab));
    }
    out.pooled += params.embedding.row(id);
  }
  if (!doc.ids.empty()) out.pooled /= static_cast<double>(doc.ids.size());

  out.rep.z = (out.pooled * params.hidden_weight + params.hidden_bias).array().tanh().matrix();
  out.rep.z_hat = l2_normalize(out.rep.z);
  out.class_logits = out.rep.z * params.class_weight + params.class_bias;
  out.target_logits = out.rep.z * params.target_weight + params.target_bias;
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    total += p[i];
  }
  for (double& x : p) x /= total;
  return p;
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

int argmax(std::span<const double> values) {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

int predict_label(const ModelParams& params, const EncodedDoc& doc) {
  const auto out = forward(params, doc);
  const auto probs = softmax({out.class_logits.data(), static_cast<std::size_t>(out.class_logits.size())});
  return argmax(probs);
}

std::vector<double> target_sigmas(const ForwardResult& out) {
  std::vector<double> s(static_cast<std::size_t>(out.target_logits.size()));
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = sigmoid(out.target_logits[static_cast<Eigen::Index>(k)]);
  return s;
}

IdentityTargets select_targets(std::span<const double> sigmas, double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("threshold eta must lie in (0, 1)");
  if (sigmas.size() != kNumTargets) throw DataError("expected 5 target probabilities");
  IdentityTargets t{};
  bool any = false;
  for (std::size_t k = 0; k < sigmas.size(); ++k) {
    t[k] = sigmas[k] >= eta;
    any = any || t[k];
  }
  if (!any) t[static_cast<std::size_t>(argmax(sigmas))] = true;
  return t;
}

IdentityTargets predict_multilabel(const ModelParams& params, const EncodedDoc& doc, double eta) {
  return select_targets(target_sigmas(forward(params, doc)), eta);
}

}  // namespace harmclf
