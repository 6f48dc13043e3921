#include <cmath>
#include <string>

#include "cpforge/error.hpp"
#include "cpforge/quality_model.hpp"
#include "cpforge/rng.hpp"
#include "cpforge/sampler.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cpforge;

using cpforge::test::enemy_fixture;
using cpforge::test::noisy_fixture;
using cpforge::test::objective_for;
using cpforge::test::random_features;
using cpforge::test::sampled_fixture;

namespace {

double accuracy(const QualityModel& m, const std::vector<LabeledExample>& ex) {
  int ok = 0;
  for (const auto& e : ex) ok += (predict(m, e.features) >= 0.5) == (e.label == Label::Accept);
  return static_cast<double>(ok) / static_cast<double>(ex.size());
}

}  // namespace

TEST_SUITE("quality_model") {
  TEST_CASE("zero-epoch training and the zero model predict 0.5") {
    const auto ex = enemy_fixture(1);
    TrainingHyper h;
    h.epochs = 0;
    const QualityModel m = train(ex, h);
    for (double w : m.weights) CHECK(w == 0.0);
    CHECK(m.bias == 0.0);
    Rng rng(2);
    for (int i = 0; i < 100; ++i) {
      const ContentFeatures f = random_features(rng);
      CHECK(predict(m, f) == 0.5);
      CHECK(predict(QualityModel::zero(), f) == 0.5);
    }
  }

  TEST_CASE("separable toy set trained to convergence reaches accuracy >= 0.99") {
    TrainingHyper converged;
    converged.epochs = 3000;
    for (std::uint64_t seed : {1u, 3u, 5u}) CHECK(accuracy(train(enemy_fixture(seed), converged), enemy_fixture(seed)) >= 0.99);
  }

  TEST_CASE("analytic gradient matches central differences at 20 random points") {
    const auto ex = noisy_fixture(4);
    const LogisticObjective obj = objective_for(ex, 0.01);
    const double worst = cpforge::test::worst_gradient_error(obj, 20, 5);
    CHECK(worst < 1e-4);
  }

  TEST_CASE("loss matches a direct evaluation") {
    const auto ex = noisy_fixture(6);
    const LogisticObjective obj = objective_for(ex, 0.5);
    std::vector<double> w(LogisticObjective::kParamCount, 0.0);
    w[1] = 0.7;
    w[11] = -0.2;
    Points raw(0, kFeatureCount);
    for (const auto& e : ex) raw.push_back(e.features.to_vector());
    const Points z = Standardization::fit(raw).apply(raw);
    double total = 0;
    for (std::size_t i = 0; i < ex.size(); ++i) {
      const double s = 0.7 * z.row(i)[1] - 0.2;
      const double p = 1 / (1 + std::exp(-s));
      total -= ex[i].label == Label::Accept ? std::log(p) : std::log(1 - p);
    }
    CHECK(obj.loss(w) == doctest::Approx(total / ex.size() + 0.25 * 0.49).epsilon(1e-12));
  }

  TEST_CASE("training loss never increases") {
    for (const auto& ex : {enemy_fixture(7), noisy_fixture(8), sampled_fixture()}) {
      std::vector<double> history;
      train(ex, {}, &history);
      REQUIRE(history.size() == 301);
      int increases = 0;
      for (std::size_t i = 1; i < history.size(); ++i) increases += history[i] > history[i - 1];
      CHECK(increases == 0);
      CHECK(history.back() <= history.front());
    }
  }

  TEST_CASE("huge L2 shrinks the weights") {
    TrainingHyper h;
    h.l2 = 1e6;
    const QualityModel m = train(noisy_fixture(9), h);
    for (double w : m.weights) CHECK(std::abs(w) < 1e-3);
  }

  TEST_CASE("single-class training is rejected") {
    auto ex = enemy_fixture(10);
    for (auto& e : ex) e.label = Label::Accept;
    try {
      train(ex);
      FAIL("expected SingleClass");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SingleClass);
    }
  }

  TEST_CASE("predictions stay inside (0,1)") {
    const QualityModel m = train(enemy_fixture(11));
    Rng rng(12);
    for (int i = 0; i < 10000; ++i) {
      ContentFeatures f = random_features(rng);
      f.enemy_count = rng.range(0, 400);
      const double p = predict(m, f);
      REQUIRE(p > 0.0);
      REQUIRE(p < 1.0);
    }
  }

  TEST_CASE("raising only enemy_count lowers p when its weight is negative") {
    const auto& model = cpforge::test::default_pipeline().run.model;
    // Reject when enemies are plentiful: train on the inverted toy rule.
    auto ex = enemy_fixture(13);
    for (auto& e : ex) e.label = e.label == Label::Accept ? Label::Reject : Label::Accept;
    const QualityModel m = train(ex);
    REQUIRE(m.weights[2] < 0);
    Rng rng(14);
    for (int i = 0; i < 100; ++i) {
      ContentFeatures f = random_features(rng);
      const double before = predict(m, f);
      f.enemy_count += 1;
      CHECK(predict(m, f) < before);
    }
    if (model.weights[2] < 0) {
      ContentFeatures f;
      f.density = 0.3;
      const double before = predict(model, f);
      f.enemy_count = 3;
      CHECK(predict(model, f) < before);
    }
  }

  TEST_CASE("uncertainty") {
    CHECK(uncertainty_from_probability(0.5) == 1.0);
    CHECK(uncertainty_from_probability(0.9) == doctest::Approx(0.2));
    CHECK(uncertainty_from_probability(0.1) == doctest::Approx(0.2));
    const auto& p = cpforge::test::default_pipeline();
    int best_u = -1, best_gap = -1;
    double u_max = -1, gap_min = 2;
    for (int id = 0; id < 1000; ++id) {
      const auto& f = (*p.dataset)[id].features;
      const double u = uncertainty(p.run.model, f);
      const double gap = std::abs(predict(p.run.model, f) - 0.5);
      if (u > u_max) u_max = u, best_u = id;
      if (gap < gap_min) gap_min = gap, best_gap = id;
    }
    CHECK(best_u == best_gap);
  }

  TEST_CASE("save and load round-trip exactly") {
    const QualityModel m = train(noisy_fixture(15));
    cpforge::test::TempDir dir;
    save_model(m, dir.file("m.txt"));
    const QualityModel back = load_model(dir.file("m.txt"));
    CHECK(back == m);
    Rng rng(16);
    for (int i = 0; i < 100; ++i) {
      const ContentFeatures f = random_features(rng);
      CHECK(predict(back, f) == predict(m, f));
    }
    CHECK(model_id(back) == model_id(m));
  }

  TEST_CASE("malformed model files") {
    const std::string text = model_to_text(train(noisy_fixture(17)));
    auto code = [](const std::string& t) {
      try {
        model_from_text(t);
      } catch (const Error& e) {
        return e.code();
      }
      return ErrorCode::IoError;
    };
    CHECK(code(text.substr(0, text.size() / 2)) == ErrorCode::ParseError);
    std::string ten = text;
    const auto at = ten.find("weight.floating_count");
    ten.erase(at, ten.find('\n', at) - at + 1);
    CHECK(code(ten) == ErrorCode::MissingField);
    std::string bad = text;
    bad.replace(bad.find("bias = ") + 7, 1, "x");
    CHECK(code(bad) == ErrorCode::ParseError);
    CHECK_THROWS_AS(load_model("/nonexistent/model.txt"), Error);
  }
}
