#include <string>

#include "cpforge/adaptive_dda.hpp"
#include "cpforge/error.hpp"
#include "cpforge/online_generator.hpp"
#include "cpforge/records.hpp"
#include "cpforge/validate.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cpforge;
using cpforge::test::default_pipeline;

namespace {

bool mentions(const ValidationReport& r, const std::string& a, const std::string& b) {
  for (const auto& issue : r.issues)
    if (issue.find(a) != std::string::npos && issue.find(b) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_SUITE("validate") {
  TEST_CASE("every artifact kind is sniffed") {
    const auto& p = default_pipeline();
    Dataset few(p.dataset->begin(), p.dataset->begin() + 20);
    CHECK(sniff_artifact(dataset_to_text(few)) == ArtifactKind::Dataset);
    CHECK(sniff_artifact(labeled_to_text(p.run.labeled)) == ArtifactKind::LabeledSet);
    CHECK(sniff_artifact(cluster_report_json(p.clusters)) == ArtifactKind::ClusterReport);
    CHECK(sniff_artifact(model_to_text(p.run.model)) == ArtifactKind::Model);
    CHECK(sniff_artifact(cpset_to_text(p.cps)) == ArtifactKind::CpSet);
    CHECK(sniff_artifact(level_to_text(generate_level(p.cps, 3, {}, 1))) == ArtifactKind::Level);
    CHECK(sniff_artifact(trace_to_csv(run_adaptive(p.cps, {}, 20, 1))) == ArtifactKind::Trace);
    CHECK_THROWS_AS(sniff_artifact("hello\n"), Error);
    try {
      sniff_artifact("");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
    }
  }

  TEST_CASE("pipeline artifacts validate clean") {
    const auto& p = default_pipeline();
    CHECK(validate_text(model_to_text(p.run.model)).clean());
    CHECK(validate_text(cluster_report_json(p.clusters)).clean());
    CHECK(validate_text(labeled_to_text(p.run.labeled)).clean());
    CHECK(validate_text(cpset_to_text(p.cps), &p.run.model).clean());
    const Level level = generate_level(p.cps, 12, {}, 2);
    const ValidationReport r = validate_text(level_to_text(level), &p.run.model);
    CHECK(r.kind == ArtifactKind::Level);
    CHECK(r.clean());
    CHECK(validate_text(trace_to_csv(run_adaptive(p.cps, {}, 150, 2))).clean());
  }

  TEST_CASE("a widened gap is reported at its segment") {
    const auto& p = default_pipeline();
    Level level = generate_level(p.cps, 5, {}, 3);
    cpforge::test::dig(level.segments[2], 5, 10);
    const ValidationReport r = validate_text(level_to_text(level));
    CHECK_FALSE(r.clean());
    CHECK(mentions(r, "segment 2", "R1_MAX_GAP"));
    CHECK_FALSE(mentions(r, "segment 1", "R1_MAX_GAP"));
  }

  TEST_CASE("a CP below the threshold is flagged") {
    const auto& p = default_pipeline();
    CPSet set = p.cps;
    set.cps.resize(50);
    set.cps[7].p = 0.4;
    const ValidationReport r = validate_text(cpset_to_text(set));
    CHECK(r.kind == ArtifactKind::CpSet);
    CHECK(mentions(r, "7", "below theta"));
    CPSet wrong_model = p.cps;
    wrong_model.model_id = "0000";
    CHECK(mentions(validate_text(cpset_to_text(wrong_model), &p.run.model), "model id", "differs"));
  }

  TEST_CASE("dataset and trace defects") {
    const auto& p = default_pipeline();
    Dataset few(p.dataset->begin(), p.dataset->begin() + 5);
    few[3].features.enemy_count += 1;
    CHECK(mentions(validate_text(dataset_to_text(few)), "3", "recorded features"));
    EpisodeTrace trace = run_adaptive(p.cps, {}, 30, 3);
    trace[10].reward += 0.5;
    CHECK(mentions(validate_text(trace_to_csv(trace)), "10", "reward"));
  }

  TEST_CASE("validate_file reads from disk") {
    cpforge::test::TempDir dir;
    save_model(default_pipeline().run.model, dir.file("m.txt"));
    CHECK(validate_file(dir.file("m.txt")).kind == ArtifactKind::Model);
    CHECK_THROWS_AS(validate_file(dir.file("none.txt")), Error);
  }
}
