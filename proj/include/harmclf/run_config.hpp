#pragma once

#include <filesystem>
#include <optional>
#include <string_view>

#include "harmclf/featurizer.hpp"
#include "harmclf/model.hpp"
#include "harmclf/trainer.hpp"

namespace harmclf {

/// Everything `train` needs, read from a flat `key = value` file.
///
/// Keys are the field names of FeatureConfig, ModelConfig, TrainConfig and
/// ContrastiveConfig, plus the paths train_file, val_file, checkpoint and
/// report. `seed` drives both parameter initialization and batch shuffling.
/// Blank lines and lines starting with '#' are ignored. Unknown or repeated
/// keys are errors. Relative paths resolve against the config file's
/// directory.
struct RunConfig {
  FeatureConfig features;
  ModelConfig model;
  TrainConfig train;
  std::filesystem::path train_file;
  std::filesystem::path val_file;
  std::filesystem::path checkpoint;
  std::optional<std::filesystem::path> report;

  static RunConfig parse(std::string_view text, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);
};

}  // namespace harmclf
