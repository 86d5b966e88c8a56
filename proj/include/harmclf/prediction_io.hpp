#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "harmclf/corpus.hpp"
#include "harmclf/ensemble.hpp"

namespace harmclf {

// Prediction files hold one JSON object per line.
//   harm:    {"id": ..., "probs": [p0, p1, p2, p3], "label": k}
//   targets: {"id": ..., "sigmas": [s0..s4], "targets": [0/1 x5]}

struct TargetPrediction {
  std::string id;
  std::vector<double> sigmas;
  IdentityTargets targets{};
};

/// Reads a harm prediction file; the member id is the file stem.
MemberPrediction read_member(const std::filesystem::path& path);

std::vector<TargetPrediction> read_target_predictions(const std::filesystem::path& path);

void write_predictions(const std::filesystem::path& path, std::span<const EnsembleRow> rows);

void write_target_predictions(const std::filesystem::path& path,
                              std::span<const TargetPrediction> rows);

}  // namespace harmclf
