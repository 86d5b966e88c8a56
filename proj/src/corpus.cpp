#include "harmclf/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>
#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/regex.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "harmclf/error.hpp"
#include "harmclf/rng.hpp"

namespace harmclf {

using nlohmann::json;

HarmLabel::HarmLabel(int value) : value_(value) {
  if (value < 0 || value >= kNumHarmClasses) {
    throw DataError("harm label " + std::to_string(value) + " outside [0, 3]");
  }
}

LabelTask parse_label_task(std::string_view name) {
  if (name == "harm") return LabelTask::Harm;
  if (name == "targets") return LabelTask::Targets;
  if (name == "both") return LabelTask::Both;
  throw ConfigError("unknown task '" + std::string(name) + "' (expected harm|targets|both)");
}

SplitRatio SplitRatio::parse(std::string_view text) {
  const auto colon = text.find(':');
  SplitRatio r;
  auto parse_part = [&](std::string_view part, int& out) {
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    return ec == std::errc{} && ptr == part.data() + part.size() && out >= 1;
  };
  if (colon == std::string_view::npos || !parse_part(text.substr(0, colon), r.train) ||
      !parse_part(text.substr(colon + 1), r.val)) {
    throw ConfigError("invalid ratio '" + std::string(text) + "' (expected e.g. 4:1)");
  }
  return r;
}

std::string SplitRatio::to_string() const {
  return std::to_string(train) + ":" + std::to_string(val);
}

namespace {

std::unique_ptr<icu::RegexPattern> compile(const char* pattern, uint32_t flags) {
  UErrorCode status = U_ZERO_ERROR;
  UParseError perr;
  std::unique_ptr<icu::RegexPattern> re(
      icu::RegexPattern::compile(icu::UnicodeString::fromUTF8(pattern), flags, perr, status));
  if (U_FAILURE(status)) throw Error(std::string("regex compile failed: ") + u_errorName(status));
  return re;
}

// Compiled patterns are immutable and may be shared across threads.
const icu::RegexPattern& url_pattern() {
  static const auto re = compile(R"((?:https?://|www\.)\S+)", UREGEX_CASE_INSENSITIVE);
  return *re;
}

const icu::RegexPattern& mention_pattern() {
  static const auto re = compile(R"((?<![\p{L}\p{N}_])@[\p{L}\p{N}_]+)", 0);
  return *re;
}

icu::UnicodeString replace_all(const icu::UnicodeString& input, const icu::RegexPattern& re,
                               const char* replacement) {
  UErrorCode status = U_ZERO_ERROR;
  std::unique_ptr<icu::RegexMatcher> matcher(re.matcher(input, status));
  if (U_FAILURE(status)) throw Error(std::string("regex matcher failed: ") + u_errorName(status));
  auto out = matcher->replaceAll(icu::UnicodeString::fromUTF8(replacement), status);
  if (U_FAILURE(status)) throw Error(std::string("regex replace failed: ") + u_errorName(status));
  return out;
}

icu::UnicodeString nfc(const icu::UnicodeString& s) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  auto out = norm->normalize(s, status);
  if (U_FAILURE(status)) throw Error(std::string("NFC failed: ") + u_errorName(status));
  return out;
}

icu::UnicodeString collapse_whitespace(const icu::UnicodeString& s) {
  icu::UnicodeString out;
  bool pending_space = false;
  for (int32_t i = 0; i < s.length();) {
    const UChar32 c = s.char32At(i);
    i += U16_LENGTH(c);
    if (u_isUWhiteSpace(c)) {
      pending_space = !out.isEmpty();
      continue;
    }
    if (pending_space) out.append(static_cast<UChar>(' '));
    pending_space = false;
    out.append(c);
  }
  return out;
}

IdentityTargets parse_targets(const json& j) {
  if (!j.is_array() || j.size() != kNumTargets) {
    throw DataError("'targets' must be an array of 5 integers");
  }
  IdentityTargets t{};
  for (int k = 0; k < kNumTargets; ++k) {
    if (!j[k].is_number_integer() || (j[k] != 0 && j[k] != 1)) {
      throw DataError("'targets' entries must be 0 or 1");
    }
    t[k] = j[k] == 1;
  }
  return t;
}

LabeledExample parse_record(const json& j, LabelTask task) {
  if (!j.is_object()) throw DataError("record is not a JSON object");
  if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty()) {
    throw DataError("missing or empty string field 'id'");
  }
  if (!j.contains("text") || !j["text"].is_string()) {
    throw DataError("missing string field 'text'");
  }
  LabeledExample ex;
  ex.id = j["id"].get<std::string>();
  ex.text = normalize_text(j["text"].get<std::string>());
  if (j.contains("label") && !j["label"].is_null()) {
    if (!j["label"].is_number_integer()) throw DataError("'label' must be an integer");
    ex.harm = HarmLabel(j["label"].get<int>());
  }
  if (j.contains("targets") && !j["targets"].is_null()) ex.targets = parse_targets(j["targets"]);

  const bool need_harm = task == LabelTask::Harm;
  const bool need_targets = task == LabelTask::Targets;
  if (need_harm && !ex.harm) throw DataError("missing 'label' for harm task");
  if (need_targets && !ex.targets) throw DataError("missing 'targets' for targets task");
  if (task != LabelTask::Unlabeled && !ex.harm && !ex.targets) {
    throw DataError("record carries neither 'label' nor 'targets'");
  }
  return ex;
}

}  // namespace

std::string normalize_text(std::string_view text) {
  icu::UnicodeString s = nfc(icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size()))));
  s = replace_all(s, url_pattern(), "<url>");
  s = replace_all(s, mention_pattern(), "<user>");
  s = collapse_whitespace(s);
  s.toLower(icu::Locale::getRoot());
  s = nfc(s);
  std::string out;
  s.toUTF8String(out);
  return out;
}

std::vector<LabeledExample> parse_jsonl(std::string_view contents, LabelTask task) {
  std::vector<LabeledExample> out;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    const auto end = std::min(contents.find('\n', pos), contents.size());
    std::string_view line = contents.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    const std::string where = "line " + std::to_string(line_no) + ": ";
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(where + "malformed JSON (" + e.what() + ")");
    }
    try {
      auto ex = parse_record(j, task);
      if (!seen.insert(ex.id).second) throw DataError("duplicate id '" + ex.id + "'");
      out.push_back(std::move(ex));
    } catch (const Error& e) {
      throw DataError(where + e.what());
    }
  }
  return out;
}

std::vector<LabeledExample> load_jsonl(const std::filesystem::path& path, LabelTask task) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_jsonl(buf.str(), task);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void save_jsonl(const std::filesystem::path& path, const std::vector<LabeledExample>& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& ex : data) {
    json j = {{"id", ex.id}, {"text", ex.text}};
    if (ex.harm) j["label"] = ex.harm->value();
    if (ex.targets) {
      json t = json::array();
      for (bool b : *ex.targets) t.push_back(b ? 1 : 0);
      j["targets"] = std::move(t);
    }
    out << j.dump() << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

DatasetSplit split_train_val(const std::vector<LabeledExample>& data, SplitRatio ratio,
                             std::uint64_t seed, bool stratify) {
  if (ratio.train < 1 || ratio.val < 1) throw ConfigError("split ratio parts must be >= 1");
  if (data.size() < 5) {
    throw DataError("need at least 5 examples to split, got " + std::to_string(data.size()));
  }

  // Stratum key: harm label, or -1 for records without one.
  std::map<int, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int key = stratify && data[i].harm ? data[i].harm->value() : -1;
    strata[key].push_back(i);
  }

  Engine eng(seed);
  std::vector<char> in_train(data.size(), 0);
  const std::size_t parts = static_cast<std::size_t>(ratio.train + ratio.val);
  for (auto& [key, members] : strata) {
    const std::size_t n = members.size();
    if (stratify && n < 2) {
      throw DataError("stratum " + std::to_string(key) + " has a single member; cannot stratify");
    }
    // Round half up: floor(n * train / parts + 1/2).
    std::size_t n_train = (2 * n * static_cast<std::size_t>(ratio.train) + parts) / (2 * parts);
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    shuffle(members, eng);
    for (std::size_t k = 0; k < n_train; ++k) in_train[members[k]] = 1;
  }

  DatasetSplit split;
  split.seed = seed;
  split.ratio = ratio;
  split.stratified = stratify;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (in_train[i] ? split.train : split.val).push_back(data[i]);
  }
  return split;
}

void save_split(const DatasetSplit& split, const std::filesystem::path& stem) {
  const std::string base = stem.string();
  save_jsonl(base + ".train.jsonl", split.train);
  save_jsonl(base + ".val.jsonl", split.val);
  json meta = {{"seed", split.seed},
               {"ratio", split.ratio.to_string()},
               {"stratify", split.stratified},
               {"train", split.train.size()},
               {"val", split.val.size()}};
  std::ofstream out(base + ".split.json", std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + base + ".split.json");
  out << meta.dump(2) << '\n';
}

std::array<std::size_t, kNumHarmClasses> class_distribution(
    const std::vector<LabeledExample>& data) {
  std::array<std::size_t, kNumHarmClasses> counts{};
  for (const auto& ex : data) {
    if (!ex.harm) throw DataError("record '" + ex.id + "' has no harm label");
    ++counts[static_cast<std::size_t>(ex.harm->value())];
  }
  return counts;
}

}  // namespace harmclf
