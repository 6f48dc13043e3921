#include <algorithm>
#include <set>

#include "cpforge/active_learning.hpp"
#include "cpforge/error.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cpforge;
using cpforge::test::default_pipeline;

namespace {

bool has_reason(const OracleVerdict& v, OracleReason r) {
  return std::find(v.reasons.begin(), v.reasons.end(), r) != v.reasons.end();
}

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

void check_bookkeeping(const ALSession& s) {
  const std::set<int> held(s.holdout().begin(), s.holdout().end());
  std::size_t total = s.pool().size() + held.size();
  for (const auto& [id, label] : s.labeled()) {
    CHECK_FALSE(s.pool().count(id));
    CHECK_FALSE(held.count(id));
  }
  total += s.labeled().size();
  for (int id : s.pool()) CHECK_FALSE(held.count(id));
  CHECK(total == s.dataset().size());
  CHECK(s.queries_made() <= s.budget());
  CHECK(s.queries_made() == static_cast<int>(s.labeled().size()));
}

std::shared_ptr<const Dataset> small_dataset(int n, std::uint64_t seed) {
  SamplerParams p;
  p.seed = seed;
  return std::make_shared<const Dataset>(sample_dataset(n, p));
}

double holdout_accuracy_of(const QualityModel& m, const ALSession& s) {
  int ok = 0;
  for (int id : s.holdout())
    ok += (predict(m, s.record(id).features) >= 0.5) == (oracle_label(s.record(id).grid).label == Label::Accept);
  return static_cast<double>(ok) / static_cast<double>(s.holdout().size());
}

}  // namespace

TEST_SUITE("active_learning") {
  TEST_CASE("oracle accepts flat ground") {
    const OracleVerdict v = oracle_label(SegmentGrid::flat(2));
    CHECK(v.label == Label::Accept);
    CHECK(v.reasons.empty());
  }

  TEST_CASE("oracle rejects a 6-wide gap") {
    SegmentGrid g = SegmentGrid::flat(2);
    cpforge::test::dig(g, 5, 10);
    const OracleVerdict v = oracle_label(g);
    CHECK(v.label == Label::Reject);
    CHECK(has_reason(v, OracleReason::MaxGap));
    CHECK(has_reason(v, OracleReason::Unplayable));
  }

  TEST_CASE("oracle rejects an enemy hanging over a gap") {
    const SegmentGrid g = cpforge::test::grid_of({
        "----------------",
        "----------------",
        "----------------",
        "----------------",
        "----------------",
        "----------------",
        "----------------",
        "----------------",
        "----------------",
        "----------------",
        "------E---------",
        "----------------",
        "XXXXX---XXXXXXXX",
        "XXXXX---XXXXXXXX",
    });
    // Hand check: the only enemy is at (10,6); rows 11..13 of column 6 are air.
    const auto rows = segment_rows(g);
    REQUIRE(rows[10][6] == 'E');
    REQUIRE(rows[11][6] == '-');
    const OracleVerdict v = oracle_label(g);
    CHECK(v.label == Label::Reject);
    CHECK(v.reasons == std::vector<OracleReason>{OracleReason::FloatingEnemy});
  }

  TEST_CASE("oracle reasons cover density, pipes and boundary ground") {
    SegmentGrid sparse = SegmentGrid::flat(1);  // 16/224 < 0.1
    CHECK(oracle_label(sparse).reasons == std::vector<OracleReason>{OracleReason::Density});
    SegmentGrid pipe = SegmentGrid::flat(2);
    pipe.set(9, 4, Tile::PipeTop);  // body missing at rows 10..11
    CHECK(has_reason(oracle_label(pipe), OracleReason::PipeIntegrity));
    SegmentGrid edge = SegmentGrid::flat(3);
    cpforge::test::dig(edge, 15, 15);
    CHECK(has_reason(oracle_label(edge), OracleReason::BoundaryGround));
  }

  TEST_CASE("holdout size and medoid seeding") {
    const auto& p = default_pipeline();
    SessionOptions o;
    o.seed = 3;
    ALSession s(p.dataset, p.clusters.medoid_ids, o);
    CHECK(s.holdout().size() == 1000);
    for (int m : p.clusters.medoid_ids) CHECK_FALSE(std::binary_search(s.holdout().begin(), s.holdout().end(), m));
    check_bookkeeping(s);
  }

  TEST_CASE("budget 0 leaves the zero model and no queries") {
    const auto ds = small_dataset(200, 1);
    SessionOptions o;
    o.budget = 0;
    ALSession s(ds, std::vector<int>{1, 2, 3}, o);
    CHECK(s.queries_made() == 0);
    CHECK(s.model().weights == QualityModel::zero().weights);
    CHECK(code_of([&] { s.next_query(); }) == ErrorCode::BudgetExhausted);
    o.strict = true;
    CHECK(code_of([&] { ALSession strict(ds, std::vector<int>{1, 2, 3}, o); }) == ErrorCode::BudgetTooSmall);
  }

  TEST_CASE("budget equal to the medoid count labels exactly the medoids") {
    const auto ds = small_dataset(300, 2);
    const std::vector<int> medoids = {5, 40, 77, 120, 200, 260};
    SessionOptions o;
    o.budget = 6;
    ALSession s(ds, medoids, o);
    s.seed_with([](const DatasetRecord& r) { return oracle_label(r.grid).label; });
    std::vector<int> labeled;
    for (const auto& [id, l] : s.labeled()) labeled.push_back(id);
    CHECK(labeled == medoids);
    CHECK(code_of([&] { s.next_query(); }) == ErrorCode::BudgetExhausted);
    CHECK(code_of([&] { s.submit_label(*s.pool().begin(), Label::Accept); }) == ErrorCode::BudgetExhausted);

    const OracleRun run = run_with_oracle(ds, medoids, o);
    CHECK(run.curve.size() == 1);
    CHECK(run.curve[0].queries == 6);
  }

  TEST_CASE("next_query on the zero model returns the lowest unlabeled id") {
    const auto ds = small_dataset(200, 3);
    SessionOptions o;
    o.holdout_frac = 0.0;
    ALSession s(ds, std::vector<int>{}, o);
    CHECK(s.next_query() == 0);
    s.submit_label(0, Label::Accept);
    CHECK(s.next_query() == 1);  // still the zero model: one class only
  }

  TEST_CASE("next_query agrees with a brute-force scan and is pure") {
    const auto& p = default_pipeline();
    SessionOptions o;
    o.budget = 60;
    o.seed = 5;
    ALSession s(p.dataset, p.clusters.medoid_ids, o);
    s.seed_with([](const DatasetRecord& r) { return oracle_label(r.grid).label; });
    for (int step = 0; step < 30; ++step) {
      int best = -1;
      double best_u = -1;
      for (int id : s.pool()) {
        const double u = uncertainty(s.model(), s.record(id).features);
        if (u > best_u) best_u = u, best = id;
      }
      const int q = s.next_query();
      CHECK(q == best);
      CHECK(s.next_query() == q);
      const std::set<int> held(s.holdout().begin(), s.holdout().end());
      CHECK_FALSE(held.count(q));
      s.submit_label(q, oracle_label(s.record(q).grid).label);
      check_bookkeeping(s);
    }
  }

  TEST_CASE("submit_label errors and bookkeeping") {
    const auto ds = small_dataset(300, 4);
    SessionOptions o;
    o.budget = 10;
    ALSession s(ds, std::vector<int>{7}, o);
    const auto pool_before = s.pool().size();
    s.submit_label(7, Label::Accept);
    CHECK(s.labeled().size() == 1);
    CHECK(s.pool().size() == pool_before - 1);
    CHECK(code_of([&] { s.submit_label(7, Label::Reject); }) == ErrorCode::AlreadyLabeled);
    CHECK(code_of([&] { s.submit_label(5000, Label::Reject); }) == ErrorCode::UnknownId);
    CHECK(code_of([&] { s.submit_label(s.holdout().front(), Label::Reject); }) == ErrorCode::UnknownId);
    check_bookkeeping(s);
  }

  TEST_CASE("oracle runs are reproducible byte for byte") {
    const auto ds = small_dataset(600, 6);
    SessionOptions o;
    o.budget = 40;
    o.seed = 9;
    const std::vector<int> medoids = {3, 100, 250, 400};
    const OracleRun a = run_with_oracle(ds, medoids, o);
    const OracleRun b = run_with_oracle(ds, medoids, o);
    CHECK(curve_to_csv(a.curve) == curve_to_csv(b.curve));
    CHECK(model_to_text(a.model) == model_to_text(b.model));
    CHECK(a.labels == b.labels);
    CHECK(a.curve.size() == 1 + 40 - 4);
  }

  TEST_CASE("replaying the label sequence rebuilds the same model") {
    const auto& p = default_pipeline();
    SessionOptions o;
    o.budget = 200;
    o.seed = 7;
    const ALSession s = replay_labels(p.dataset, p.clusters.medoid_ids, o, p.run.labels);
    CHECK(model_to_text(s.model()) == model_to_text(p.run.model));
  }

  TEST_CASE("200 oracle labels reach holdout accuracy >= 0.90") {
    const auto& run = default_pipeline().run;
    REQUIRE(run.curve.back().queries == 200);
    CHECK(run.curve.back().holdout_accuracy >= 0.90);
  }

  TEST_CASE("active beats random queries at budget 100 in at least 8 of 10 seeds") {
    const auto& p = default_pipeline();
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      SessionOptions o;
      o.budget = 100;
      o.seed = seed;
      const double active = run_with_oracle(p.dataset, p.clusters.medoid_ids, o).curve.back().holdout_accuracy;
      const double random =
          run_with_oracle(p.dataset, p.clusters.medoid_ids, o, QueryStrategy::Random).curve.back().holdout_accuracy;
      wins += active >= random;
    }
    CHECK(wins >= 8);
  }

  TEST_CASE("an unlimited-budget session ends with the model trained on the whole pool") {
    const auto ds = small_dataset(150, 8);
    SessionOptions o;
    o.budget = 1000;
    o.seed = 2;
    const std::vector<int> medoids = {10, 60, 110};
    const OracleRun run = run_with_oracle(ds, medoids, o);
    ALSession fresh(ds, medoids, o);
    std::vector<LabeledExample> all;
    for (int id : fresh.pool()) all.push_back({fresh.record(id).features, oracle_label(fresh.record(id).grid).label});
    CHECK(run.labels.size() == fresh.pool().size());
    CHECK(model_to_text(run.model) == model_to_text(train(all, o.hyper)));
  }

  TEST_CASE("labelling the whole pool is no worse than a fixed budget by more than 0.02") {
    const auto& p = default_pipeline();
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      CAPTURE(seed);
      SessionOptions o;
      o.seed = seed;
      o.budget = 200;
      const OracleRun fixed = run_with_oracle(p.dataset, p.clusters.medoid_ids, o);
      ALSession s(p.dataset, p.clusters.medoid_ids, o);
      std::vector<LabeledExample> all;
      for (int id : s.pool()) all.push_back({s.record(id).features, oracle_label(s.record(id).grid).label});
      const double unlimited = holdout_accuracy_of(train(all, o.hyper), s);
      double best = 0;
      for (const auto& point : fixed.curve) best = std::max(best, point.holdout_accuracy);
      CHECK(unlimited >= best - 0.02);
    }
  }
}
