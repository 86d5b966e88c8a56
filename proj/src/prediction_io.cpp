#include "harmclf/prediction_io.hpp"

#include <fstream>

#include <json.hpp>

#include "harmclf/error.hpp"

namespace harmclf {

using nlohmann::json;

namespace {

template <typename F>
void for_each_line(const std::filesystem::path& path, F&& f) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = path.string() + ": line " + std::to_string(line_no) + ": ";
    try {
      const auto j = json::parse(line);
      if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) {
        throw DataError("record needs a string 'id'");
      }
      f(j);
    } catch (const json::exception& e) {
      throw DataError(where + e.what());
    } catch (const Error& e) {
      throw DataError(where + e.what());
    }
  }
}

std::vector<double> number_array(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) {
    throw DataError(std::string("missing numeric array '") + key + "'");
  }
  std::vector<double> out;
  for (const auto& v : j[key]) {
    if (!v.is_number()) throw DataError(std::string("non-numeric entry in '") + key + "'");
    out.push_back(v.get<double>());
  }
  return out;
}

void write_lines(const std::filesystem::path& path, const std::vector<json>& lines) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& j : lines) out << j.dump() << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace

MemberPrediction read_member(const std::filesystem::path& path) {
  MemberPrediction m;
  m.member_id = path.stem().string();
  for_each_line(path, [&](const json& j) {
    DocProbs d{j["id"].get<std::string>(), number_array(j, "probs"), std::nullopt};
    if (j.contains("label")) {
      if (!j["label"].is_number_integer()) throw DataError("'label' must be an integer");
      d.label = j["label"].get<int>();
    }
    m.docs.push_back(std::move(d));
  });
  return m;
}

std::vector<TargetPrediction> read_target_predictions(const std::filesystem::path& path) {
  std::vector<TargetPrediction> out;
  for_each_line(path, [&](const json& j) {
    TargetPrediction p{j["id"].get<std::string>(), number_array(j, "sigmas"), {}};
    if (p.sigmas.size() != kNumTargets) throw DataError("'sigmas' must hold 5 values");
    const auto t = number_array(j, "targets");
    if (t.size() != kNumTargets) throw DataError("'targets' must hold 5 values");
    for (std::size_t k = 0; k < kNumTargets; ++k) p.targets[k] = t[k] != 0.0;
    out.push_back(std::move(p));
  });
  return out;
}

void write_predictions(const std::filesystem::path& path, std::span<const EnsembleRow> rows) {
  std::vector<json> lines;
  for (const auto& r : rows) lines.push_back({{"id", r.id}, {"probs", r.probs}, {"label", r.label}});
  write_lines(path, lines);
}

void write_target_predictions(const std::filesystem::path& path,
                              std::span<const TargetPrediction> rows) {
  std::vector<json> lines;
  for (const auto& r : rows) {
    json t = json::array();
    for (bool b : r.targets) t.push_back(b ? 1 : 0);
    lines.push_back({{"id", r.id}, {"sigmas", r.sigmas}, {"targets", std::move(t)}});
  }
  write_lines(path, lines);
}

}  // namespace harmclf
