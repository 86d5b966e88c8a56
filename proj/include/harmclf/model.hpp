#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "harmclf/corpus.hpp"
#include "harmclf/featurizer.hpp"

namespace harmclf {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;

struct ModelConfig {
  std::int32_t vocab_size = 1 << 15;
  std::int32_t embed_dim = 64;
  std::int32_t hidden_dim = 64;
  std::int32_t num_classes = kNumHarmClasses;
  std::int32_t num_targets = kNumTargets;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Trainable arrays: token embeddings, one tanh hidden layer, and the two
/// linear heads (harm classes and identity targets).
struct ModelParams {
  Matrix embedding;      // vocab_size x embed_dim
  Matrix hidden_weight;  // embed_dim x hidden_dim
  RowVector hidden_bias;
  Matrix class_weight;   // hidden_dim x num_classes
  RowVector class_bias;
  Matrix target_weight;  // hidden_dim x num_targets
  RowVector target_bias;

  /// Visits every tensor in declaration order as (name, contiguous data).
  template <typename F>
  void for_each_tensor(F&& f) {
    f(std::string_view("embedding"), span_of(embedding));
    f(std::string_view("hidden_weight"), span_of(hidden_weight));
    f(std::string_view("hidden_bias"), span_of(hidden_bias));
    f(std::string_view("class_weight"), span_of(class_weight));
    f(std::string_view("class_bias"), span_of(class_bias));
    f(std::string_view("target_weight"), span_of(target_weight));
    f(std::string_view("target_bias"), span_of(target_bias));
  }
  template <typename F>
  void for_each_tensor(F&& f) const {
    const_cast<ModelParams&>(*this).for_each_tensor(
        [&](std::string_view name, std::span<double> data) {
          f(name, std::span<const double>(data));
        });
  }

  /// Shape compatibility with `cfg`.
  bool matches(const ModelConfig& cfg) const;
  friend bool operator==(const ModelParams& a, const ModelParams& b);

 private:
  template <typename M>
  static std::span<double> span_of(M& m) {
    return {m.data(), static_cast<std::size_t>(m.size())};
  }
};

/// Hidden activation z and its L2-normalized copy (zero stays zero).
struct Representation {
  RowVector z;
  RowVector z_hat;
};

struct ForwardResult {
  RowVector pooled;  // mean of embedding rows
  Representation rep;
  RowVector class_logits;
  RowVector target_logits;
};

/// Glorot-uniform weights, zero biases. Weights are float32-representable so
/// a freshly initialized model survives a checkpoint round trip bit-exactly.
ModelParams init_params(const ModelConfig& cfg);

/// Rounds every parameter to the nearest float32 (the checkpoint precision).
ModelParams round_to_float(const ModelParams& params);

ForwardResult forward(const ModelParams& params, const EncodedDoc& doc);

RowVector l2_normalize(const RowVector& v);

/// Max-shifted softmax.
std::vector<double> softmax(std::span<const double> logits);

double sigmoid(double x);

/// Index of the largest entry; ties go to the smallest index.
int argmax(std::span<const double> values);

int predict_label(const ModelParams& params, const EncodedDoc& doc);

/// Targets with probability >= eta; if none qualify, the single most
/// probable target.
IdentityTargets select_targets(std::span<const double> sigmas, double eta);

IdentityTargets predict_multilabel(const ModelParams& params, const EncodedDoc& doc,
                                   double eta);

std::vector<double> target_sigmas(const ForwardResult& out);

}  // namespace harmclf
