#include <doctest.h>

#include <numeric>

#include "harmclf/error.hpp"
#include "harmclf/metrics.hpp"
#include "harmclf/rng.hpp"

using namespace harmclf;

TEST_CASE("confusion matrix") {
  const auto cm = confusion(std::vector<int>{0, 1}, std::vector<int>{0, 1});
  CHECK(cm.at(0, 0) == 1);
  CHECK(cm.at(1, 1) == 1);
  CHECK(cm.at(0, 1) == 0);
  CHECK(cm.at(1, 0) == 0);
  CHECK(cm.total() == 2);

  const auto one = confusion(std::vector<int>{0}, std::vector<int>{3});
  CHECK(one.at(0, 3) == 1);
  CHECK(one.trace() == 0);

  CHECK_THROWS_AS(confusion(std::vector<int>{0, 1}, std::vector<int>{0}), DataError);
  CHECK_THROWS_AS(confusion(std::vector<int>{}, std::vector<int>{}), DataError);
  CHECK_THROWS_AS(confusion(std::vector<int>{4}, std::vector<int>{0}), DataError);

  Engine eng(10);
  std::vector<int> gold(1000), pred(1000);
  std::array<std::size_t, 4> tally{};
  for (std::size_t i = 0; i < gold.size(); ++i) {
    gold[i] = static_cast<int>(uniform_index(eng, 4));
    pred[i] = static_cast<int>(uniform_index(eng, 4));
    ++tally[static_cast<std::size_t>(gold[i])];
  }
  const auto big = confusion(gold, pred);
  for (int g = 0; g < 4; ++g) {
    std::size_t row = 0;
    for (int p = 0; p < 4; ++p) row += big.at(g, p);
    CHECK(row == tally[static_cast<std::size_t>(g)]);
  }
  CHECK(big.total() == 1000);
}

TEST_CASE("classification report fixtures") {
  const auto perfect = classification_report(confusion(std::vector<int>{0, 1, 2, 3, 3},
                                                       std::vector<int>{0, 1, 2, 3, 3}));
  for (const auto& c : perfect.per_class) CHECK(c.f1 == 1.0);
  CHECK(perfect.macro_f1 == 1.0);
  CHECK(perfect.micro_f1 == 1.0);
  CHECK(perfect.weighted_f1 == 1.0);

  // Class 0: TP=1, FP=1, FN=0. Class 1: TP=0, FP=0, FN=1. Classes 2, 3 unseen.
  const auto r = classification_report(confusion(std::vector<int>{0, 1}, std::vector<int>{0, 0}));
  CHECK(std::abs(r.per_class[0].precision - 0.5) < 1e-9);
  CHECK(std::abs(r.per_class[0].recall - 1.0) < 1e-9);
  CHECK(std::abs(r.per_class[0].f1 - 2.0 / 3.0) < 1e-9);
  CHECK(r.per_class[1].precision == 0.0);  // 0/0
  CHECK(r.per_class[1].recall == 0.0);
  CHECK(r.per_class[1].f1 == 0.0);
  for (int c : {2, 3}) {
    CHECK(r.per_class[static_cast<std::size_t>(c)].precision == 0.0);
    CHECK(r.per_class[static_cast<std::size_t>(c)].recall == 0.0);
    CHECK(r.per_class[static_cast<std::size_t>(c)].f1 == 0.0);
    CHECK(r.per_class[static_cast<std::size_t>(c)].support == 0);
  }
  // Unseen classes still count toward the macro mean.
  CHECK(std::abs(r.macro_f1 - (2.0 / 3.0) / 4.0) < 1e-9);
  CHECK(std::abs(r.micro_f1 - 0.5) < 1e-9);
  CHECK(std::abs(r.weighted_f1 - (2.0 / 3.0) / 2.0) < 1e-9);

  // 3-class hand example.
  // gold: 0 0 0 1 1 2 ; pred: 0 0 1 1 2 2
  // class 0: P=1, R=2/3, F1=0.8; class 1: P=1/2, R=1/2, F1=1/2; class 2: P=1/2, R=1, F1=2/3
  const auto h = classification_report(
      confusion(std::vector<int>{0, 0, 0, 1, 1, 2}, std::vector<int>{0, 0, 1, 1, 2, 2}, 3));
  CHECK(std::abs(h.per_class[0].f1 - 0.8) < 1e-9);
  CHECK(std::abs(h.per_class[1].f1 - 0.5) < 1e-9);
  CHECK(std::abs(h.per_class[2].f1 - 2.0 / 3.0) < 1e-9);
  CHECK(std::abs(h.macro_f1 - (0.8 + 0.5 + 2.0 / 3.0) / 3.0) < 1e-9);
  CHECK(std::abs(h.weighted_f1 - (3 * 0.8 + 2 * 0.5 + 1 * 2.0 / 3.0) / 6.0) < 1e-9);
  CHECK(std::abs(h.micro_f1 - 4.0 / 6.0) < 1e-9);
}

TEST_CASE("micro F1 equals accuracy and metrics are order-free") {
  Engine eng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = 1 + uniform_index(eng, 40);
    std::vector<int> gold(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      gold[i] = static_cast<int>(uniform_index(eng, 4));
      pred[i] = uniform_index(eng, 3) == 0 ? gold[i] : static_cast<int>(uniform_index(eng, 4));
    }
    const auto cm = confusion(gold, pred);
    const auto r = classification_report(cm);
    CHECK(std::abs(r.micro_f1 - static_cast<double>(cm.trace()) / static_cast<double>(cm.total())) < 1e-12);
    CHECK(r.macro_f1 <= 1.0);
    for (const auto& c : r.per_class) {
      CHECK((c.precision >= 0.0 && c.precision <= 1.0 && c.recall >= 0.0 && c.recall <= 1.0));
    }

    bool diagonal = cm.trace() == cm.total();
    bool all_supported = true;
    for (const auto& c : r.per_class) all_supported = all_supported && c.support > 0;
    CHECK((r.macro_f1 == 1.0) == (diagonal && all_supported));

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    shuffle(perm, eng);
    std::vector<int> pg(n), pp(n);
    for (std::size_t i = 0; i < n; ++i) {
      pg[i] = gold[perm[i]];
      pp[i] = pred[perm[i]];
    }
    const auto r2 = classification_report(confusion(pg, pp));
    CHECK(r2.to_json().dump() == r.to_json().dump());
  }
}

TEST_CASE("multi-label report") {
  using T = IdentityTargets;
  const std::vector<T> gold{T{true, false, true, false, false}, T{false, true, false, false, false}};
  const std::vector<std::vector<double>> sig{{0.9, 0.1, 0.2, 0.3, 0.0}, {0.1, 0.6, 0.4, 0.5, 0.2}};
  const auto r = multilabel_report(gold, sig, 0.5);
  CHECK(std::abs(r.micro_f1 - 0.6666666666666666) < 1e-9);
  CHECK(r.per_class.size() == 5);
  CHECK(r.per_class[0].f1 == 1.0);
  CHECK(r.per_class[2].recall == 0.0);
  CHECK(r.per_class[3].precision == 0.0);

  std::vector<std::vector<double>> exact;
  for (const auto& g : gold) {
    std::vector<double> row;
    for (bool b : g) row.push_back(b ? 1.0 : 0.0);
    exact.push_back(row);
  }
  CHECK(multilabel_report(gold, exact, 0.5).micro_f1 == 1.0);

  const std::vector<std::vector<double>> zeros(2, std::vector<double>(5, 0.0));
  const auto z = multilabel_report(gold, zeros, 0.5);
  CHECK(z.micro_f1 == 0.0);
  for (const auto& c : z.per_class) CHECK(c.recall == 0.0);

  // The threshold is inclusive.
  const std::vector<std::vector<double>> edge{{0.5, 0, 0.5, 0, 0}, {0, 0.5, 0, 0, 0}};
  CHECK(multilabel_report(gold, edge, 0.5).micro_f1 == 1.0);

  CHECK_THROWS_AS(multilabel_report(gold, std::span(sig).first(1), 0.5), DataError);
  CHECK_THROWS_AS(multilabel_report(gold, sig, 0.0), ConfigError);
  CHECK_THROWS_AS(multilabel_report(gold, sig, 1.0), ConfigError);
}

TEST_CASE("report JSON") {
  const auto r = classification_report(confusion(std::vector<int>{0, 1, 1}, std::vector<int>{0, 1, 0}));
  const auto j = r.to_json();
  CHECK(j.at("per_class").size() == 4);
  CHECK(j.at("per_class")[1].at("support") == 2);
  CHECK(j.at("per_class")[1].at("class") == 1);
  CHECK(j.at("macro_f1").get<double>() == r.macro_f1);
  CHECK(j.contains("micro_f1"));
  CHECK(j.contains("weighted_f1"));
  CHECK(j.at("confusion")[1][0] == 1);
  CHECK(j.dump() == classification_report(confusion(std::vector<int>{0, 1, 1}, std::vector<int>{0, 1, 0})).to_json().dump());
}

TEST_CASE("inter-class cosine distance") {
  auto v = [](double a, double b) {
    RowVector r(2);
    r << a, b;
    return r;
  };
  const std::vector<RowVector> reps{v(1, 0), v(1, 0), v(0, 1), v(-1, 0)};
  // Cross pairs: (0,2) 1, (0,3) 2, (1,2) 1, (1,3) 2, (2,3) 1
  CHECK(mean_interclass_cosine_distance(reps, std::vector<int>{0, 0, 1, 2}) ==
        doctest::Approx(7.0 / 5.0).epsilon(1e-12));
  CHECK(mean_interclass_cosine_distance(reps, std::vector<int>{0, 0, 0, 0}) == 0.0);
}
