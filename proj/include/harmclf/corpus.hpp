#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace harmclf {

inline constexpr int kNumHarmClasses = 4;
inline constexpr int kNumTargets = 5;

/// Harm-potential rating, 0 (harmless) .. 3.
class HarmLabel {
 public:
  /// Throws DataError when `value` is outside [0, 3].
  explicit HarmLabel(int value);
  int value() const { return value_; }
  friend bool operator==(HarmLabel, HarmLabel) = default;

 private:
  int value_;
};

/// One flag per target-identity category.
using IdentityTargets = std::array<bool, kNumTargets>;

struct LabeledExample {
  std::string id;
  std::string text;
  std::optional<HarmLabel> harm;
  std::optional<IdentityTargets> targets;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

/// Which label fields a loader requires on every record. `Both` accepts
/// records carrying either kind; `Unlabeled` (inference input) requires none.
enum class LabelTask { Harm, Targets, Both, Unlabeled };

LabelTask parse_label_task(std::string_view name);

struct SplitRatio {
  int train = 4;
  int val = 1;

  /// Parses "4:1". Throws ConfigError on anything else.
  static SplitRatio parse(std::string_view text);
  std::string to_string() const;
};

struct DatasetSplit {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> val;
  std::uint64_t seed = 0;
  SplitRatio ratio;
  bool stratified = true;
};

/// NFC, URL and @mention placeholders, whitespace collapse, lowercase.
/// Idempotent: normalize_text(normalize_text(s)) == normalize_text(s).
std::string normalize_text(std::string_view text);

/// Reads one JSON record per line. Records are validated against `task`;
/// errors name the 1-based line number. Blank lines are skipped.
std::vector<LabeledExample> load_jsonl(const std::filesystem::path& path,
                                       LabelTask task);

/// Parses already-read lines; `load_jsonl` is this plus file reading.
std::vector<LabeledExample> parse_jsonl(std::string_view contents, LabelTask task);

void save_jsonl(const std::filesystem::path& path,
                const std::vector<LabeledExample>& data);

/// Stratifies on the harm label; records without one form a single stratum.
/// Every stratum keeps at least one member on each side.
DatasetSplit split_train_val(const std::vector<LabeledExample>& data,
                             SplitRatio ratio, std::uint64_t seed,
                             bool stratify = true);

/// Writes <stem>.train.jsonl, <stem>.val.jsonl and <stem>.split.json.
void save_split(const DatasetSplit& split, const std::filesystem::path& stem);

std::array<std::size_t, kNumHarmClasses> class_distribution(
    const std::vector<LabeledExample>& data);

}  // namespace harmclf
