#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "harmclf/ensemble.hpp"
#include "harmclf/error.hpp"
#include "harmclf/prediction_io.hpp"
#include "harmclf/rng.hpp"
#include "test_helpers.hpp"

using namespace harmclf;
using harmclf::testing::TempDir;

namespace {

const std::filesystem::path kFixtures = std::filesystem::path(HARMCLF_FIXTURES) / "ensemble";

std::vector<MemberPrediction> fixture_members() {
  return {read_member(kFixtures / "member_a.jsonl"), read_member(kFixtures / "member_b.jsonl"),
          read_member(kFixtures / "member_c.jsonl")};
}

std::vector<EnsembleRow> expected(const std::string& name) {
  std::vector<EnsembleRow> rows;
  std::ifstream in(kFixtures / name);
  std::string line;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    rows.push_back({j.at("id"), j.at("probs").get<std::vector<double>>(), j.at("label")});
  }
  return rows;
}

void check_rows(const std::vector<EnsembleRow>& got, const std::vector<EnsembleRow>& want) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CAPTURE(want[i].id);
    CHECK(got[i].id == want[i].id);
    CHECK(got[i].label == want[i].label);
    REQUIRE(got[i].probs.size() == want[i].probs.size());
    for (std::size_t c = 0; c < got[i].probs.size(); ++c) {
      CHECK(std::abs(got[i].probs[c] - want[i].probs[c]) < 1e-12);
    }
  }
}

MemberPrediction member(std::string id, std::vector<std::vector<double>> rows) {
  MemberPrediction m{std::move(id), {}};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    m.docs.push_back({"doc" + std::to_string(i), std::move(rows[i]), std::nullopt});
  }
  return m;
}

std::vector<double> random_distribution(Engine& eng) {
  std::vector<double> p(4);
  double sum = 0.0;
  for (double& x : p) sum += (x = uniform_unit(eng) + 1e-3);
  for (double& x : p) x /= sum;
  return p;
}

}  // namespace

TEST_CASE("fixture expectations") {
  const auto members = fixture_members();
  CHECK(members[0].member_id == "member_a");
  check_rows(majority_vote(members), expected("expected_vote.jsonl"));
  check_rows(average_ensemble(members), expected("expected_avg.jsonl"));
  const std::vector<double> w{0.5, 0.3, 0.2};
  check_rows(weighted_average_ensemble(members, w), expected("expected_wavg.jsonl"));
}

TEST_CASE("majority vote") {
  auto vote_of = [](std::vector<std::vector<double>> rows) {
    std::vector<MemberPrediction> ms;
    for (std::size_t m = 0; m < rows.size(); ++m) ms.push_back(member("m" + std::to_string(m), {rows[m]}));
    return majority_vote(ms).front();
  };
  CHECK(vote_of({{0, 0, 1, 0}, {0, 0, 1, 0}, {0, 1, 0, 0}}).label == 2);
  CHECK(vote_of({{0, 0, 0, 1}, {0, 0, 0, 1}, {0, 0, 0, 1}}).label == 3);
  // One vote each for 0 and 1; summed mass 1.1 vs 0.9.
  const auto tie = vote_of({{0.9, 0.1, 0, 0}, {0.2, 0.8, 0, 0}});
  CHECK(tie.label == 0);
  CHECK(tie.probs == std::vector<double>{0.5, 0.5, 0.0, 0.0});
  // Same votes and same mass: smallest label.
  CHECK(vote_of({{0.25, 0.75, 0, 0}, {0.75, 0.25, 0, 0}}).label == 0);
  CHECK(vote_of({{0, 0, 0.75, 0.25}, {0, 0, 0.25, 0.75}}).label == 2);
}

TEST_CASE("averaging") {
  const std::vector<MemberPrediction> two{member("a", {{0.6, 0.4}}), member("b", {{0.2, 0.8}})};
  const auto avg = average_ensemble(two);
  CHECK(avg[0].probs[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(avg[0].probs[1] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(avg[0].label == 1);

  const std::vector<MemberPrediction> opposite{member("a", {{1, 0}}), member("b", {{0, 1}})};
  CHECK(average_ensemble(opposite)[0].label == 0);
  CHECK(average_ensemble(opposite)[0].probs == std::vector<double>{0.5, 0.5});

  const std::vector<double> w{0.75, 0.25};
  const auto wa = weighted_average_ensemble(opposite, w);
  CHECK(wa[0].probs == std::vector<double>{0.75, 0.25});
  CHECK(wa[0].label == 0);

  Engine eng(31);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 20; ++i) rows.push_back(random_distribution(eng));
  const std::vector<MemberPrediction> same{member("a", rows), member("b", rows), member("c", rows)};
  const auto idem = average_ensemble(same);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < 4; ++c) CHECK(std::abs(idem[i].probs[c] - rows[i][c]) < 1e-15);
    CHECK(idem[i].label == argmax(rows[i]));
  }

  const std::vector<double> one_zero{1.0, 0.0, 0.0};
  const std::vector<MemberPrediction> mixed{member("a", rows), member("b", std::vector(20, std::vector{0.25, 0.25, 0.25, 0.25})),
                                            member("c", std::vector(20, std::vector{1.0, 0.0, 0.0, 0.0}))};
  const auto first_only = weighted_average_ensemble(mixed, one_zero);
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(first_only[i].probs == rows[i]);
}

TEST_CASE("ensemble properties on random members") {
  Engine eng(5150);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = 2 + uniform_index(eng, 4);
    const auto docs = 1 + uniform_index(eng, 10);
    std::vector<MemberPrediction> ms;
    for (std::uint64_t k = 0; k < m; ++k) {
      std::vector<std::vector<double>> rows;
      for (std::uint64_t d = 0; d < docs; ++d) rows.push_back(random_distribution(eng));
      ms.push_back(member("m" + std::to_string(k), rows));
    }
    const std::vector<double> uniform(m, 1.0 / static_cast<double>(m));
    const auto avg = average_ensemble(ms);
    const auto wavg = weighted_average_ensemble(ms, uniform);
    const auto vote = majority_vote(ms);
    for (std::size_t d = 0; d < docs; ++d) {
      double sum = 0.0;
      for (std::size_t c = 0; c < 4; ++c) {
        CHECK(std::abs(avg[d].probs[c] - wavg[d].probs[c]) < 1e-12);
        CHECK(avg[d].probs[c] >= 0.0);
        sum += avg[d].probs[c];
      }
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }

    // Member order does not matter.
    auto reversed = ms;
    std::reverse(reversed.begin(), reversed.end());
    const auto avg_r = average_ensemble(reversed);
    const auto vote_r = majority_vote(reversed);
    for (std::size_t d = 0; d < docs; ++d) {
      CHECK(avg_r[d].label == avg[d].label);
      CHECK(vote_r[d].label == vote[d].label);
      for (std::size_t c = 0; c < 4; ++c) CHECK(std::abs(avg_r[d].probs[c] - avg[d].probs[c]) < 1e-12);
    }

    // Consensus is preserved: sharpen every member toward one label.
    const int label = static_cast<int>(uniform_index(eng, 4));
    auto agree = ms;
    for (auto& mp : agree) {
      for (auto& doc : mp.docs) {
        for (double& x : doc.probs) x *= 0.1;
        doc.probs[static_cast<std::size_t>(label)] += 0.9;
      }
    }
    const auto w = derive_weights(std::vector<double>(m, 0.3));
    for (const auto& rows : {majority_vote(agree), average_ensemble(agree), weighted_average_ensemble(agree, w)}) {
      for (const auto& row : rows) CHECK(row.label == label);
    }
  }
}

TEST_CASE("weights") {
  const auto w = derive_weights(std::vector<double>{0.700, 0.695});
  CHECK(std::abs(w[0] - 0.5017921146953405) < 1e-12);
  CHECK(std::abs(w[1] - 0.4982078853046595) < 1e-12);
  CHECK(derive_weights(std::vector<double>{0.4, 0.4, 0.4}) == std::vector<double>(3, 1.0 / 3.0));
  CHECK(derive_weights(std::vector<double>{0.0, 0.0}) == std::vector<double>{0.5, 0.5});

  MetricsReport a, b;
  a.macro_f1 = 0.6;
  b.macro_f1 = 0.2;
  const std::vector<MetricsReport> reports{a, b};
  const auto rw = derive_weights(reports);
  CHECK(rw[0] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(rw[1] == doctest::Approx(0.25).epsilon(1e-15));

  const auto members = fixture_members();
  CHECK_THROWS_AS(weighted_average_ensemble(members, std::vector<double>{0.5, 0.5}), ConfigError);
  CHECK_THROWS_AS(weighted_average_ensemble(members, std::vector<double>{0.5, 0.3, 0.3}), ConfigError);
  CHECK_THROWS_AS(weighted_average_ensemble(members, std::vector<double>{1.2, -0.1, -0.1}), ConfigError);
  CHECK_NOTHROW(weighted_average_ensemble(members, std::vector<double>{0.5, 0.3, 0.2 + 5e-10}));
}

TEST_CASE("alignment and validation") {
  auto members = fixture_members();
  // Different order in one member is fine.
  std::reverse(members[1].docs.begin(), members[1].docs.end());
  check_rows(average_ensemble(members), expected("expected_avg.jsonl"));

  CHECK_THROWS_AS(average_ensemble(std::span(members).first(1)), DataError);

  auto missing = fixture_members();
  missing[2].docs.erase(missing[2].docs.begin() + 3);
  missing[2].docs.push_back({"zz", {1, 0, 0, 0}, std::nullopt});
  try {
    majority_vote(missing);
    FAIL("expected misalignment error");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("d4") != std::string::npos);
    CHECK(msg.find("zz") != std::string::npos);
    CHECK(msg.find("member_c") != std::string::npos);
  }

  auto invalid = fixture_members();
  invalid[0].docs[0].probs = {0.5, 0.5, 0.5, 0.0};
  CHECK_THROWS_AS(average_ensemble(invalid), DataError);

  EnsembleConfig cfg;
  cfg.strategy = parse_strategy("w-avg");
  cfg.weights = std::vector<double>{0.5, 0.3, 0.2};
  check_rows(run_ensemble(fixture_members(), cfg), expected("expected_wavg.jsonl"));
  cfg.strategy = parse_strategy("vote");
  check_rows(run_ensemble(fixture_members(), cfg), expected("expected_vote.jsonl"));
  CHECK(strategy_name(EnsembleStrategy::WeightedAverage) == "w-avg");
  CHECK_THROWS_AS(parse_strategy("stack"), ConfigError);
}

TEST_CASE("prediction files round-trip") {
  TempDir dir("ens");
  const auto rows = average_ensemble(fixture_members());
  write_predictions(dir / "out.jsonl", rows);
  const auto back = read_member(dir / "out.jsonl");
  CHECK(back.member_id == "out");
  REQUIRE(back.docs.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back.docs[i].id == rows[i].id);
    CHECK(back.docs[i].probs == rows[i].probs);
    CHECK(back.docs[i].label == rows[i].label);
  }

  const std::vector<TargetPrediction> tp{{"x", {0.9, 0.1, 0.5, 0.2, 0.7}, {true, false, true, false, true}}};
  write_target_predictions(dir / "t.jsonl", tp);
  const auto tb = read_target_predictions(dir / "t.jsonl");
  REQUIRE(tb.size() == 1);
  CHECK(tb[0].sigmas == tp[0].sigmas);
  CHECK(tb[0].targets == tp[0].targets);

  harmclf::testing::write_file(dir / "bad.jsonl", "{\"id\":\"a\",\"probs\":[0.5,0.5]}\n{\"id\":\"b\"}\n");
  try {
    read_member(dir / "bad.jsonl");
    FAIL("expected parse error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(read_member(dir / "absent.jsonl"), DataError);
}
