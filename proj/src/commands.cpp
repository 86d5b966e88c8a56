#include "harmclf/commands.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "harmclf/checkpoint.hpp"
#include "harmclf/error.hpp"
#include "harmclf/metrics.hpp"
#include "harmclf/prediction_io.hpp"
#include "harmclf/run_config.hpp"
#include "harmclf/trainer.hpp"

namespace harmclf::cli {

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const DivergenceError& e) {
    err << "error: training diverged: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

namespace {

void write_json(const path& p, const nlohmann::json& j) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + p.string());
  out << j.dump(2) << '\n';
  if (!out) throw DataError("write failed: " + p.string());
}

void print_scores(std::ostream& out, const MetricsReport& r) {
  out << std::fixed << std::setprecision(4) << "macro_f1=" << r.macro_f1
      << " micro_f1=" << r.micro_f1 << " weighted_f1=" << r.weighted_f1 << '\n';
  out << std::defaultfloat;
}

template <typename Row>
std::map<std::string, const Row*> index_by_id(const std::vector<Row>& rows, const char* what) {
  std::map<std::string, const Row*> out;
  for (const auto& r : rows) {
    if (!out.emplace(r.id, &r).second) {
      throw DataError(std::string(what) + " repeats id '" + r.id + "'");
    }
  }
  return out;
}

/// Gold records and prediction rows must cover the same ids.
template <typename Row>
void check_same_ids(const std::vector<LabeledExample>& gold,
                    const std::map<std::string, const Row*>& preds) {
  std::string missing;
  std::size_t matched = 0;
  for (const auto& g : gold) {
    if (preds.contains(g.id)) {
      ++matched;
    } else {
      missing += (missing.empty() ? "" : ", ") + g.id;
    }
  }
  if (!missing.empty()) throw DataError("predictions missing ids: " + missing);
  if (matched != preds.size()) throw DataError("predictions contain ids absent from gold");
}

MetricsReport harm_report(const std::vector<LabeledExample>& gold,
                          const std::vector<EnsembleRow>& rows) {
  const auto by_id = index_by_id(rows, "predictions");
  check_same_ids(gold, by_id);
  std::vector<int> g, p;
  for (const auto& ex : gold) {
    g.push_back(ex.harm->value());
    p.push_back(by_id.at(ex.id)->label);
  }
  return classification_report(confusion(g, p));
}

}  // namespace

int cmd_gen_synth(const SynthConfig& cfg, const path& out, std::ostream& log) {
  const auto docs = generate_synthetic(cfg);
  save_jsonl(out, docs);
  log << "wrote " << docs.size() << " documents to " << out.string() << '\n';
  return kExitOk;
}

int cmd_split(const path& input, const path& out_stem, LabelTask task, SplitRatio ratio,
              std::uint64_t seed, bool stratify, std::ostream& log) {
  const auto data = load_jsonl(input, task);
  const auto split = split_train_val(data, ratio, seed, stratify);
  save_split(split, out_stem);
  log << "train=" << split.train.size() << " val=" << split.val.size() << " ratio "
      << ratio.to_string() << (stratify ? " stratified" : "") << '\n';
  return kExitOk;
}

int cmd_train(const path& config, std::ostream& out, std::ostream& log) {
  const auto cfg = RunConfig::load(config);
  const auto label_task = cfg.train.task == Task::Harm ? LabelTask::Harm : LabelTask::Targets;
  const auto train_set = load_jsonl(cfg.train_file, label_task);
  const auto val_set = load_jsonl(cfg.val_file, label_task);
  const auto result = train(train_set, val_set, cfg.model, cfg.features, cfg.train, cfg.checkpoint);

  for (const auto& w : result.report.warnings) log << "warning: " << w << '\n';
  const auto json = result.report.to_json();
  if (cfg.report) {
    write_json(*cfg.report, json);
  } else {
    out << json.dump(2) << '\n';
  }
  log << "best epoch " << result.report.best_epoch << " val_f1 " << result.report.best_val_f1
      << " -> " << cfg.checkpoint.string() << '\n';
  return kExitOk;
}

int cmd_predict(const path& checkpoint, const path& input, Task task, double eta, const path& out,
                std::ostream& log) {
  if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("eta must lie in (0, 1)");
  const auto ck = load_params(checkpoint);
  const auto docs = load_jsonl(input, LabelTask::Unlabeled);
  std::vector<std::string> texts;
  for (const auto& d : docs) texts.push_back(d.text);
  const auto encoded = batch_encode(texts, ck.features);

  if (task == Task::Harm) {
    std::vector<EnsembleRow> rows;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      const auto f = forward(ck.params, encoded[i]);
      auto probs = softmax({f.class_logits.data(), static_cast<std::size_t>(f.class_logits.size())});
      const int label = argmax(probs);
      rows.push_back({docs[i].id, std::move(probs), label});
    }
    write_predictions(out, rows);
  } else {
    std::vector<TargetPrediction> rows;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      auto sig = target_sigmas(forward(ck.params, encoded[i]));
      const auto chosen = select_targets(sig, eta);
      rows.push_back({docs[i].id, std::move(sig), chosen});
    }
    write_target_predictions(out, rows);
  }
  log << "wrote " << docs.size() << " predictions to " << out.string() << '\n';
  return kExitOk;
}

int cmd_evaluate(const path& predictions, const path& gold, Task task, double eta,
                 const std::optional<path>& report, std::ostream& out) {
  MetricsReport r;
  if (task == Task::Harm) {
    const auto gold_set = load_jsonl(gold, LabelTask::Harm);
    const auto member = read_member(predictions);
    std::vector<EnsembleRow> rows;
    for (const auto& d : member.docs) {
      rows.push_back({d.id, d.probs, d.label ? *d.label : argmax(d.probs)});
    }
    r = harm_report(gold_set, rows);
  } else {
    const auto gold_set = load_jsonl(gold, LabelTask::Targets);
    const auto preds = read_target_predictions(predictions);
    const auto by_id = index_by_id(preds, "predictions");
    check_same_ids(gold_set, by_id);
    std::vector<IdentityTargets> g;
    std::vector<std::vector<double>> s;
    for (const auto& ex : gold_set) {
      g.push_back(*ex.targets);
      s.push_back(by_id.at(ex.id)->sigmas);
    }
    r = multilabel_report(g, s, eta);
  }
  print_scores(out, r);
  if (report) write_json(*report, r.to_json());
  return kExitOk;
}

int cmd_ensemble(const EnsembleArgs& args, std::ostream& out) {
  if (args.members.size() < 2) {
    throw ConfigError("ensemble needs at least 2 member files, got " +
                      std::to_string(args.members.size()));
  }
  std::vector<MemberPrediction> members;
  for (const auto& p : args.members) members.push_back(read_member(p));

  EnsembleConfig cfg{args.strategy, args.weights};
  if (cfg.strategy == EnsembleStrategy::WeightedAverage && !cfg.weights) {
    if (args.member_reports.size() != args.members.size()) {
      throw ConfigError("w-avg needs --weights or one --member-report per member");
    }
    std::vector<double> f1;
    for (const auto& rp : args.member_reports) {
      std::ifstream in(rp);
      if (!in) throw DataError("cannot open member report " + rp.string());
      try {
        f1.push_back(nlohmann::json::parse(in).at("macro_f1").get<double>());
      } catch (const nlohmann::json::exception& e) {
        throw DataError(rp.string() + ": " + e.what());
      }
    }
    cfg.weights = derive_weights(f1);
  }
  const auto rows = run_ensemble(members, cfg);
  write_predictions(args.out, rows);
  out << "ensemble " << strategy_name(cfg.strategy) << " over " << members.size()
      << " members: " << rows.size() << " documents -> " << args.out.string() << '\n';

  if (args.gold) {
    const auto r = harm_report(load_jsonl(*args.gold, LabelTask::Harm), rows);
    print_scores(out, r);
    if (args.report) write_json(*args.report, r.to_json());
  }
  return kExitOk;
}

int cmd_gradcheck(int trials, std::uint64_t seed, std::ostream& out) {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  const auto r = grad_check_sweep(trials, seed);
  out << "gradcheck: " << r.trials << " trials, " << r.entries_checked
      << " partials, max relative error " << std::scientific << std::setprecision(3)
      << r.max_rel_error << std::defaultfloat << '\n';
  out << "  worst: " << r.worst_tensor << "[" << r.worst_index << "] analytic "
      << r.worst_analytic << " numeric " << r.worst_numeric << " (" << r.worst_setting << ")\n";
  out << (r.passed() ? "PASS" : "FAIL") << " (tolerance " << kGradCheckTolerance << ")\n";
  return r.passed() ? kExitOk : kExitCheckFailed;
}

}  // namespace harmclf::cli
