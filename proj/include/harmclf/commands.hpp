#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "harmclf/corpus.hpp"
#include "harmclf/ensemble.hpp"
#include "harmclf/losses.hpp"
#include "harmclf/synth.hpp"

namespace harmclf::cli {

// Process exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDiverged = 3;

/// Runs `body`, printing any library error to `err` and translating it into
/// the exit-code contract.
int guarded(std::ostream& err, const std::function<int()>& body);

using std::filesystem::path;

int cmd_gen_synth(const SynthConfig& cfg, const path& out, std::ostream& log);

int cmd_split(const path& input, const path& out_stem, LabelTask task, SplitRatio ratio,
              std::uint64_t seed, bool stratify, std::ostream& log);

/// Writes the checkpoint and the TrainReport (to `report` from the config,
/// or to `out` when the config names none).
int cmd_train(const path& config, std::ostream& out, std::ostream& log);

int cmd_predict(const path& checkpoint, const path& input, Task task, double eta,
                const path& out, std::ostream& log);

int cmd_evaluate(const path& predictions, const path& gold, Task task, double eta,
                 const std::optional<path>& report, std::ostream& out);

struct EnsembleArgs {
  std::vector<path> members;
  EnsembleStrategy strategy = EnsembleStrategy::Average;
  std::optional<std::vector<double>> weights;
  std::vector<path> member_reports;  // MetricsReport JSON, one per member (w-avg)
  std::optional<path> gold;
  std::optional<path> report;
  path out;
};

int cmd_ensemble(const EnsembleArgs& args, std::ostream& out);

int cmd_gradcheck(int trials, std::uint64_t seed, std::ostream& out);

}  // namespace harmclf::cli
