#pragma once

#include <cstdint>
#include <string_view>

#include "harmclf/losses.hpp"
#include "harmclf/model.hpp"

namespace harmclf {

enum class OptimizerKind { Sgd, Adam };

OptimizerKind parse_optimizer(std::string_view name);
std::string_view optimizer_name(OptimizerKind kind);

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Applies GradientSet updates to ModelParams.
///
/// Adam keeps moment estimates for every parameter, but embedding rows are
/// updated lazily: only rows present in the current gradient have their
/// moments and values advanced (the sparse-Adam convention). Dense tensors
/// follow textbook Adam with bias correction by the global step count.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate, const ModelParams& shape,
            AdamHyper hyper = {});

  void step(ModelParams& params, const GradientSet& grads);

  std::int64_t steps() const { return steps_; }

 private:
  void adam_update(double* param, double* m, double* v, const double* grad, Eigen::Index count,
                   double lr_t) const;

  OptimizerKind kind_;
  double lr_;
  AdamHyper hyper_;
  std::int64_t steps_ = 0;
  ModelParams m_;
  ModelParams v_;
};

}  // namespace harmclf
