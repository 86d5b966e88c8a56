#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "harmclf/metrics.hpp"

namespace harmclf {

struct DocProbs {
  std::string id;
  std::vector<double> probs;
  std::optional<int> label;  // as written in the file; aggregation ignores it
};

/// One model's class distributions, one row per document.
struct MemberPrediction {
  std::string member_id;
  std::vector<DocProbs> docs;
};

enum class EnsembleStrategy { Vote, Average, WeightedAverage };

EnsembleStrategy parse_strategy(std::string_view name);
std::string_view strategy_name(EnsembleStrategy s);

struct EnsembleConfig {
  EnsembleStrategy strategy = EnsembleStrategy::Average;
  std::optional<std::vector<double>> weights;  // w-avg only
};

/// Aggregated row. For averaging strategies `probs` is the combined
/// distribution; for voting it is the share of members voting each label.
struct EnsembleRow {
  std::string id;
  std::vector<double> probs;
  int label = 0;
};

/// Modal argmax label per document. Ties go to the tied label with the
/// highest summed probability, then to the smallest label.
std::vector<EnsembleRow> majority_vote(std::span<const MemberPrediction> members);

std::vector<EnsembleRow> average_ensemble(std::span<const MemberPrediction> members);

/// Convex combination of member distributions. Weights must be nonnegative,
/// one per member, and sum to 1 within 1e-9.
std::vector<EnsembleRow> weighted_average_ensemble(std::span<const MemberPrediction> members,
                                                   std::span<const double> weights);

/// Weights proportional to each member's validation macro F1; uniform when
/// every F1 is zero.
std::vector<double> derive_weights(std::span<const double> member_f1);
std::vector<double> derive_weights(std::span<const MetricsReport> val_reports);

std::vector<EnsembleRow> run_ensemble(std::span<const MemberPrediction> members,
                                      const EnsembleConfig& cfg);

}  // namespace harmclf
