#include "harmclf/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "harmclf/error.hpp"
#include "harmclf/model.hpp"

namespace harmclf {

EnsembleStrategy parse_strategy(std::string_view name) {
  if (name == "vote") return EnsembleStrategy::Vote;
  if (name == "avg") return EnsembleStrategy::Average;
  if (name == "w-avg") return EnsembleStrategy::WeightedAverage;
  throw ConfigError("unknown strategy '" + std::string(name) + "' (expected vote|avg|w-avg)");
}

std::string_view strategy_name(EnsembleStrategy s) {
  switch (s) {
    case EnsembleStrategy::Vote: return "vote";
    case EnsembleStrategy::Average: return "avg";
    case EnsembleStrategy::WeightedAverage: return "w-avg";
  }
  return "?";
}

namespace {

constexpr double kDistributionTolerance = 1e-6;

/// Per-document rows of every member, reordered to the first member's order.
struct Aligned {
  std::vector<std::string> ids;
  // rows[doc][member]
  std::vector<std::vector<const std::vector<double>*>> rows;
  std::size_t num_classes = 0;
};

Aligned align(std::span<const MemberPrediction> members) {
  if (members.size() < 2) {
    throw DataError("an ensemble needs at least 2 members, got " + std::to_string(members.size()));
  }
  Aligned out;
  const auto& first = members.front();
  std::set<std::string> reference;
  for (const auto& d : first.docs) {
    if (!reference.insert(d.id).second) {
      throw DataError("member '" + first.member_id + "' repeats id '" + d.id + "'");
    }
  }

  std::vector<std::unordered_map<std::string, const std::vector<double>*>> lookup(members.size());
  std::string problems;
  for (std::size_t m = 0; m < members.size(); ++m) {
    for (const auto& d : members[m].docs) {
      if (!lookup[m].emplace(d.id, &d.probs).second) {
        throw DataError("member '" + members[m].member_id + "' repeats id '" + d.id + "'");
      }
    }
    std::vector<std::string> missing, extra;
    for (const auto& id : reference) {
      if (!lookup[m].contains(id)) missing.push_back(id);
    }
    for (const auto& d : members[m].docs) {
      if (!reference.contains(d.id)) extra.push_back(d.id);
    }
    auto list = [](const std::vector<std::string>& ids) {
      std::string s;
      for (const auto& id : ids) s += (s.empty() ? "" : ", ") + id;
      return s;
    };
    if (!missing.empty()) {
      problems += "; member '" + members[m].member_id + "' is missing ids: " + list(missing);
    }
    if (!extra.empty()) {
      problems += "; member '" + members[m].member_id + "' has ids absent from '" +
                  first.member_id + "': " + list(extra);
    }
  }
  if (!problems.empty()) throw DataError("misaligned ensemble members" + problems);

  out.num_classes = first.docs.empty() ? 0 : first.docs.front().probs.size();
  for (const auto& d : first.docs) {
    out.ids.push_back(d.id);
    auto& row = out.rows.emplace_back();
    for (std::size_t m = 0; m < members.size(); ++m) {
      const auto* probs = lookup[m].at(d.id);
      if (probs->size() != out.num_classes || probs->empty()) {
        throw DataError("member '" + members[m].member_id + "' row '" + d.id +
                        "' has the wrong number of classes");
      }
      double sum = 0.0;
      for (double p : *probs) {
        if (!(p >= 0.0 && p <= 1.0)) {
          throw DataError("member '" + members[m].member_id + "' row '" + d.id +
                          "' has a probability outside [0, 1]");
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > kDistributionTolerance) {
        throw DataError("member '" + members[m].member_id + "' row '" + d.id +
                        "' does not sum to 1");
      }
      row.push_back(probs);
    }
  }
  return out;
}

std::vector<EnsembleRow> combine(const Aligned& a, std::span<const double> weights) {
  std::vector<EnsembleRow> out;
  out.reserve(a.ids.size());
  for (std::size_t d = 0; d < a.ids.size(); ++d) {
    EnsembleRow row{a.ids[d], std::vector<double>(a.num_classes, 0.0), 0};
    for (std::size_t m = 0; m < weights.size(); ++m) {
      const auto& p = *a.rows[d][m];
      for (std::size_t c = 0; c < a.num_classes; ++c) row.probs[c] += weights[m] * p[c];
    }
    row.label = argmax(row.probs);
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

std::vector<EnsembleRow> majority_vote(std::span<const MemberPrediction> members) {
  const auto a = align(members);
  std::vector<EnsembleRow> out;
  out.reserve(a.ids.size());
  const double share = 1.0 / static_cast<double>(members.size());
  for (std::size_t d = 0; d < a.ids.size(); ++d) {
    std::vector<std::size_t> votes(a.num_classes, 0);
    std::vector<double> mass(a.num_classes, 0.0);
    for (const auto* p : a.rows[d]) {
      ++votes[static_cast<std::size_t>(argmax(*p))];
      for (std::size_t c = 0; c < a.num_classes; ++c) mass[c] += (*p)[c];
    }
    EnsembleRow row{a.ids[d], std::vector<double>(a.num_classes), 0};
    std::size_t best = 0;
    for (std::size_t c = 0; c < a.num_classes; ++c) {
      row.probs[c] = static_cast<double>(votes[c]) * share;
      if (votes[c] > votes[best] || (votes[c] == votes[best] && mass[c] > mass[best])) best = c;
    }
    row.label = static_cast<int>(best);
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<EnsembleRow> average_ensemble(std::span<const MemberPrediction> members) {
  const auto a = align(members);
  const auto count = static_cast<double>(members.size());
  std::vector<EnsembleRow> out;
  out.reserve(a.ids.size());
  for (std::size_t d = 0; d < a.ids.size(); ++d) {
    // Sum, then divide: identical members reproduce their row exactly.
    EnsembleRow row{a.ids[d], std::vector<double>(a.num_classes, 0.0), 0};
    for (const auto* p : a.rows[d]) {
      for (std::size_t c = 0; c < a.num_classes; ++c) row.probs[c] += (*p)[c];
    }
    for (double& x : row.probs) x /= count;
    row.label = argmax(row.probs);
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<EnsembleRow> weighted_average_ensemble(std::span<const MemberPrediction> members,
                                                   std::span<const double> weights) {
  if (weights.size() != members.size()) {
    throw ConfigError("got " + std::to_string(weights.size()) + " weights for " +
                      std::to_string(members.size()) + " members");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ConfigError("ensemble weights must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("ensemble weights must sum to 1");
  return combine(align(members), weights);
}

std::vector<double> derive_weights(std::span<const double> member_f1) {
  if (member_f1.size() < 2) throw DataError("derive_weights needs at least 2 members");
  double total = 0.0;
  for (double f : member_f1) {
    if (!(f >= 0.0)) throw DataError("member F1 must be >= 0");
    total += f;
  }
  std::vector<double> w(member_f1.size(), 1.0 / static_cast<double>(member_f1.size()));
  if (total == 0.0) return w;
  for (std::size_t m = 0; m < w.size(); ++m) w[m] = member_f1[m] / total;
  return w;
}

std::vector<double> derive_weights(std::span<const MetricsReport> val_reports) {
  std::vector<double> f1;
  for (const auto& r : val_reports) f1.push_back(r.macro_f1);
  return derive_weights(f1);
}

std::vector<EnsembleRow> run_ensemble(std::span<const MemberPrediction> members,
                                      const EnsembleConfig& cfg) {
  switch (cfg.strategy) {
    case EnsembleStrategy::Vote: return majority_vote(members);
    case EnsembleStrategy::Average: return average_ensemble(members);
    case EnsembleStrategy::WeightedAverage:
      if (!cfg.weights) throw ConfigError("w-avg requires weights");
      return weighted_average_ensemble(members, *cfg.weights);
  }
  throw ConfigError("unknown strategy");
}

}  // namespace harmclf
