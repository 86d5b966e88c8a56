#include "harmclf/optimizer.hpp"

#include <cmath>
#include <string>

#include "harmclf/error.hpp"

namespace harmclf {

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::Sgd;
  if (name == "adam") return OptimizerKind::Adam;
  throw ConfigError("unknown optimizer '" + std::string(name) + "' (expected sgd|adam)");
}

std::string_view optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::Sgd ? "sgd" : "adam";
}

namespace {

ModelParams zeros_like(const ModelParams& p) {
  ModelParams z = p;
  z.for_each_tensor([](std::string_view, std::span<double> d) {
    std::fill(d.begin(), d.end(), 0.0);
  });
  return z;
}

}  // namespace

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, const ModelParams& shape,
                     AdamHyper hyper)
    : kind_(kind), lr_(learning_rate), hyper_(hyper) {
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
  if (kind_ == OptimizerKind::Adam) {
    m_ = zeros_like(shape);
    v_ = zeros_like(shape);
  }
}

void Optimizer::adam_update(double* param, double* m, double* v, const double* grad,
                            Eigen::Index count, double lr_t) const {
  for (Eigen::Index k = 0; k < count; ++k) {
    m[k] = hyper_.beta1 * m[k] + (1.0 - hyper_.beta1) * grad[k];
    v[k] = hyper_.beta2 * v[k] + (1.0 - hyper_.beta2) * grad[k] * grad[k];
    param[k] -= lr_t * m[k] / (std::sqrt(v[k]) + hyper_.epsilon);
  }
}

void Optimizer::step(ModelParams& params, const GradientSet& grads) {
  ++steps_;
  const auto cols = params.embedding.cols();

  if (kind_ == OptimizerKind::Sgd) {
    for (std::size_t r = 0; r < grads.embedding_rows.size(); ++r) {
      params.embedding.row(grads.embedding_rows[r]) -=
          lr_ * grads.embedding.row(static_cast<Eigen::Index>(r));
    }
    params.hidden_weight -= lr_ * grads.hidden_weight;
    params.hidden_bias -= lr_ * grads.hidden_bias;
    params.class_weight -= lr_ * grads.class_weight;
    params.class_bias -= lr_ * grads.class_bias;
    params.target_weight -= lr_ * grads.target_weight;
    params.target_bias -= lr_ * grads.target_bias;
    return;
  }

  const double t = static_cast<double>(steps_);
  // Bias correction folded into the step size.
  const double lr_t = lr_ * std::sqrt(1.0 - std::pow(hyper_.beta2, t)) /
                      (1.0 - std::pow(hyper_.beta1, t));

  for (std::size_t r = 0; r < grads.embedding_rows.size(); ++r) {
    const auto row = grads.embedding_rows[r];
    adam_update(params.embedding.row(row).data(), m_.embedding.row(row).data(),
                v_.embedding.row(row).data(),
                grads.embedding.row(static_cast<Eigen::Index>(r)).data(), cols, lr_t);
  }
  auto dense = [&](auto& p, auto& m, auto& v, const auto& g) {
    adam_update(p.data(), m.data(), v.data(), g.data(), p.size(), lr_t);
  };
  dense(params.hidden_weight, m_.hidden_weight, v_.hidden_weight, grads.hidden_weight);
  dense(params.hidden_bias, m_.hidden_bias, v_.hidden_bias, grads.hidden_bias);
  dense(params.class_weight, m_.class_weight, v_.class_weight, grads.class_weight);
  dense(params.class_bias, m_.class_bias, v_.class_bias, grads.class_bias);
  dense(params.target_weight, m_.target_weight, v_.target_weight, grads.target_weight);
  dense(params.target_bias, m_.target_bias, v_.target_bias, grads.target_bias);
}

}  // namespace harmclf
