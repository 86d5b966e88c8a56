#include "harmclf/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "harmclf/error.hpp"

namespace harmclf {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("invalid value '" + std::string(value) + "' for key '" + std::string(key) +
                      "'");
  }
  return out;
}

}  // namespace

RunConfig RunConfig::parse(std::string_view text, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  bool vocab_given = false;
  auto path_of = [&](std::string_view v) {
    std::filesystem::path p{std::string(v)};
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };

  using Setter = std::function<void(std::string_view key, std::string_view value)>;
  const std::map<std::string, Setter, std::less<>> setters = {
      {"train_file", [&](auto, auto v) { cfg.train_file = path_of(v); }},
      {"val_file", [&](auto, auto v) { cfg.val_file = path_of(v); }},
      {"checkpoint", [&](auto, auto v) { cfg.checkpoint = path_of(v); }},
      {"report", [&](auto, auto v) { cfg.report = path_of(v); }},
      {"max_tokens", [&](auto k, auto v) { cfg.features.max_tokens = parse_number<int>(k, v); }},
      {"hash_bits", [&](auto k, auto v) { cfg.features.hash_bits = parse_number<int>(k, v); }},
      {"ngram", [&](auto k, auto v) { cfg.features.ngram = parse_number<int>(k, v); }},
      {"vocab_size",
       [&](auto k, auto v) {
         cfg.model.vocab_size = parse_number<std::int32_t>(k, v);
         vocab_given = true;
       }},
      {"embed_dim", [&](auto k, auto v) { cfg.model.embed_dim = parse_number<std::int32_t>(k, v); }},
      {"hidden_dim", [&](auto k, auto v) { cfg.model.hidden_dim = parse_number<std::int32_t>(k, v); }},
      {"num_classes", [&](auto k, auto v) { cfg.model.num_classes = parse_number<std::int32_t>(k, v); }},
      {"num_targets", [&](auto k, auto v) { cfg.model.num_targets = parse_number<std::int32_t>(k, v); }},
      {"seed",
       [&](auto k, auto v) {
         cfg.model.seed = cfg.train.seed = parse_number<std::uint64_t>(k, v);
       }},
      {"epochs", [&](auto k, auto v) { cfg.train.epochs = parse_number<int>(k, v); }},
      {"batch_size", [&](auto k, auto v) { cfg.train.batch_size = parse_number<int>(k, v); }},
      {"learning_rate", [&](auto k, auto v) { cfg.train.learning_rate = parse_number<double>(k, v); }},
      {"optimizer", [&](auto, auto v) { cfg.train.optimizer = parse_optimizer(v); }},
      {"tau", [&](auto k, auto v) { cfg.train.contrastive.tau = parse_number<double>(k, v); }},
      {"lambda", [&](auto k, auto v) { cfg.train.contrastive.lambda = parse_number<double>(k, v); }},
      {"task", [&](auto, auto v) { cfg.train.task = parse_task(v); }},
      {"eta", [&](auto k, auto v) { cfg.train.eta = parse_number<double>(k, v); }},
  };

  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(where + "expected 'key = value', got '" + std::string(line) + "'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(where + "unknown key '" + std::string(key) + "'");
    if (!seen.insert(std::string(key)).second) {
      throw ConfigError(where + "duplicate key '" + std::string(key) + "'");
    }
    try {
      it->second(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + "key '" + std::string(key) + "': " + e.what());
    }
  }

  for (const char* required : {"train_file", "val_file", "checkpoint"}) {
    if (!seen.contains(required)) {
      throw ConfigError("missing required key '" + std::string(required) + "'");
    }
  }
  try {
    cfg.features.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("feature config: ") + e.what());
  }
  if (!vocab_given) cfg.model.vocab_size = cfg.features.vocab_size();
  if (cfg.model.vocab_size != cfg.features.vocab_size()) {
    throw ConfigError("key 'vocab_size' must equal 2^hash_bits");
  }
  cfg.model.validate();
  cfg.train.validate();
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  auto cfg = parse(buf.str(), path.parent_path());
  for (const auto* p : {&cfg.train_file, &cfg.val_file}) {
    if (!std::filesystem::exists(*p)) {
      throw ConfigError("file not found: " + p->string() + " (key '" +
                        (p == &cfg.train_file ? "train_file" : "val_file") + "')");
    }
  }
  return cfg;
}

}  // namespace harmclf
