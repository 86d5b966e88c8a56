// harmclf: train, evaluate and ensemble harm-potential text classifiers.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "harmclf/commands.hpp"
#include "harmclf/error.hpp"

namespace {

using namespace harmclf;

struct Options {
  // gen-synth
  SynthConfig synth;
  std::string out;
  // split
  std::string input;
  std::string out_stem;
  std::string label_task = "harm";
  std::string ratio = "4:1";
  std::uint64_t seed = 0;
  bool no_stratify = false;
  // train
  std::string config;
  // predict / evaluate
  std::string checkpoint;
  std::string task = "harm";
  double eta = 0.5;
  std::string predictions;
  std::string gold;
  std::string report;
  // ensemble
  std::vector<std::string> members;
  std::string strategy = "avg";
  std::vector<double> weights;
  std::vector<std::string> member_reports;
  // gradcheck
  int trials = 20;
};

std::optional<std::filesystem::path> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::filesystem::path(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harm-potential text classification: train, predict, evaluate, ensemble"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen-synth", "Generate a synthetic keyword corpus");
  gen->add_option("--classes", o.synth.classes, "Number of classes (2-4)")->capture_default_str();
  gen->add_option("--docs-per-class", o.synth.docs_per_class)->capture_default_str();
  gen->add_option("--overlap", o.synth.overlap, "Fraction of each class vocabulary shared")
      ->capture_default_str();
  gen->add_option("--vocab-per-class", o.synth.vocab_per_class)->capture_default_str();
  gen->add_option("--min-len", o.synth.min_len)->capture_default_str();
  gen->add_option("--max-len", o.synth.max_len)->capture_default_str();
  gen->add_flag("--with-targets", o.synth.with_targets, "Also emit identity-target labels");
  gen->add_option("--seed", o.synth.seed)->capture_default_str();
  gen->add_option("--out", o.out, "Output JSONL")->required();

  auto* split = app.add_subcommand("split", "Split a labeled corpus into train/val");
  split->add_option("--input", o.input)->required();
  split->add_option("--out-stem", o.out_stem, "Writes <stem>.train.jsonl, .val.jsonl, .split.json")
      ->required();
  split->add_option("--task", o.label_task, "harm|targets|both")->capture_default_str();
  split->add_option("--ratio", o.ratio)->capture_default_str();
  split->add_option("--seed", o.seed)->capture_default_str();
  split->add_flag("--no-stratify", o.no_stratify, "Plain random split");

  auto* train = app.add_subcommand("train", "Train a model from a config file");
  train->add_option("--config", o.config)->required();

  auto* predict = app.add_subcommand("predict", "Score documents with a checkpoint");
  predict->add_option("--checkpoint", o.checkpoint)->required();
  predict->add_option("--input", o.input)->required();
  predict->add_option("--task", o.task, "harm|targets")->capture_default_str();
  predict->add_option("--eta", o.eta, "Multi-label threshold")->capture_default_str();
  predict->add_option("--out", o.out)->required();

  auto* evaluate = app.add_subcommand("evaluate", "Score a prediction file against gold labels");
  evaluate->add_option("--predictions", o.predictions)->required();
  evaluate->add_option("--gold", o.gold)->required();
  evaluate->add_option("--task", o.task, "harm|targets")->capture_default_str();
  evaluate->add_option("--eta", o.eta)->capture_default_str();
  evaluate->add_option("--report", o.report, "Write the metrics report as JSON");

  auto* ensemble = app.add_subcommand("ensemble", "Combine member prediction files");
  ensemble->add_option("members", o.members, "Member prediction files")->required();
  ensemble->add_option("--strategy", o.strategy, "vote|avg|w-avg")->capture_default_str();
  ensemble->add_option("--weights", o.weights, "Per-member weights for w-avg")->delimiter(',');
  ensemble->add_option("--member-report", o.member_reports,
                       "Per-member validation report (derives w-avg weights)");
  ensemble->add_option("--gold", o.gold, "Gold corpus; also prints metrics");
  ensemble->add_option("--report", o.report);
  ensemble->add_option("--out", o.out)->required();

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient verification");
  gradcheck->add_option("--trials", o.trials, "Trials per (task, tau, lambda) setting")
      ->capture_default_str();
  gradcheck->add_option("--seed", o.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitUsage;
  }

  return cli::guarded(std::cerr, [&]() -> int {
    if (*gen) return cli::cmd_gen_synth(o.synth, o.out, std::cerr);
    if (*split) {
      return cli::cmd_split(o.input, o.out_stem, parse_label_task(o.label_task),
                            SplitRatio::parse(o.ratio), o.seed, !o.no_stratify, std::cerr);
    }
    if (*train) return cli::cmd_train(o.config, std::cout, std::cerr);
    if (*predict) {
      return cli::cmd_predict(o.checkpoint, o.input, parse_task(o.task), o.eta, o.out, std::cerr);
    }
    if (*evaluate) {
      return cli::cmd_evaluate(o.predictions, o.gold, parse_task(o.task), o.eta,
                               opt_path(o.report), std::cout);
    }
    if (*ensemble) {
      cli::EnsembleArgs args;
      for (const auto& m : o.members) args.members.emplace_back(m);
      args.strategy = parse_strategy(o.strategy);
      if (!o.weights.empty()) args.weights = o.weights;
      for (const auto& r : o.member_reports) args.member_reports.emplace_back(r);
      args.gold = opt_path(o.gold);
      args.report = opt_path(o.report);
      args.out = o.out;
      return cli::cmd_ensemble(args, std::cout);
    }
    return cli::cmd_gradcheck(o.trials, o.seed, std::cout);
  });
}
