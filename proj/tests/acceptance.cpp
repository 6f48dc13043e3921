// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "cpforge/adaptive_dda.hpp"
#include "cpforge/io_util.hpp"
#include "cpforge/online_generator.hpp"
#include "cpforge/reachability.hpp"
#include "cpforge/validate.hpp"
#include "support.hpp"

using namespace cpforge;
using cpforge::test::default_pipeline;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << v;
  return s.str();
}

int run_cli(const std::string& args, const std::string& log) {
  const std::string cmd = std::string(CPFORGE_BIN) + " " + args + " >>" + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// The scripted end-to-end pipeline in `dir`; returns the first failing step
// or an empty string.
std::string cli_pipeline(const std::filesystem::path& dir) {
  auto f = [&](const char* name) { return (dir / name).string(); };
  const std::string log = f("log.txt");
  const std::vector<std::pair<std::string, std::string>> steps = {
      {"sample", "sample --count 5000 --seed 7 --out " + f("dataset.jsonl")},
      {"cluster", "cluster --in " + f("dataset.jsonl") + " --out " + f("clusters.json") + " --seed 7"},
      {"annotate", "annotate --oracle --in " + f("dataset.jsonl") + " --clusters " + f("clusters.json") +
                       " --budget 200 --seed 7 --out " + f("model_al.txt") + " --labels-out " +
                       f("labeled.jsonl") + " --curve " + f("curve.csv")},
      {"train", "train --in " + f("labeled.jsonl") + " --out " + f("model.txt")},
      {"gen-cps", "gen-cps --model " + f("model.txt") + " --count 1000 --seed 7 --out " + f("cps.jsonl")},
      {"gen-level", "gen-level --cps " + f("cps.jsonl") + " --length 12 --seed 7 --out " + f("level.txt")},
      {"adapt", "adapt --cps " + f("cps.jsonl") + " --player 0.5 --episodes 500 --seed 7 --out " +
                    f("trace.csv") + " --summary " + f("summary.json")},
      {"validate", "validate --model " + f("model.txt") + " " + f("dataset.jsonl") + " " + f("clusters.json") +
                       " " + f("labeled.jsonl") + " " + f("model.txt") + " " + f("cps.jsonl") + " " +
                       f("level.txt") + " " + f("trace.csv")},
  };
  for (const auto& [name, args] : steps)
    if (run_cli(args, log) != 0) return name;
  return {};
}

Verdict ac1_round_trips() {
  Rng rng(2024);
  const std::string alphabet = "-X#oET|";
  int mismatches = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string text;
    for (int r = 0; r < kRows; ++r) {
      for (int c = 0; c < kCols; ++c) text += alphabet[rng.below(alphabet.size())];
      text += '\n';
    }
    const SegmentGrid g = decode_segment(text);
    mismatches += encode_segment(g) != text || decode_segment(encode_segment(g)) != g;
  }
  const auto& p = default_pipeline();
  cpforge::test::TempDir dir;
  save_model(p.run.model, dir.file("model.txt"));
  const int model_bad = load_model(dir.file("model.txt")) != p.run.model;
  int level_bad = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Level level = generate_level(p.cps, 12, {}, seed);
    write_level(level, dir.file("level.txt"));
    level_bad += read_level(dir.file("level.txt")) != level;
  }
  return {mismatches + model_bad + level_bad == 0,
          "segment mismatches " + std::to_string(mismatches) + "/10000, model " + std::to_string(model_bad) +
              ", levels " + std::to_string(level_bad) + "/100"};
}

Verdict ac2_determinism() {
  cpforge::test::TempDir a, b;
  for (const auto* dir : {&a, &b})
    if (const std::string step = cli_pipeline(dir->path()); !step.empty())
      return {false, "pipeline step '" + step + "' failed"};
  std::string differing;
  for (const char* name : {"dataset.jsonl", "clusters.json", "model.txt", "labeled.jsonl", "cps.jsonl",
                           "level.txt", "trace.csv"})
    if (read_file(a.file(name)) != read_file(b.file(name))) differing += std::string(" ") + name;
  return {differing.empty(), differing.empty() ? "7 artifacts byte-identical" : "differ:" + differing};
}

Verdict ac3_active_learning() {
  const auto& p = default_pipeline();
  const double acc = p.run.curve.back().holdout_accuracy;
  SessionOptions probe;
  const ALSession shape(p.dataset, p.clusters.medoid_ids, probe);
  int wins = 0;
  std::string pairs;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SessionOptions o;
    o.seed = seed;
    const double active = run_with_oracle(p.dataset, p.clusters.medoid_ids, o).curve.back().holdout_accuracy;
    const double random =
        run_with_oracle(p.dataset, p.clusters.medoid_ids, o, QueryStrategy::Random).curve.back().holdout_accuracy;
    wins += active > random;
    pairs += " " + fmt(active, 3) + "/" + fmt(random, 3);
  }
  return {acc >= 0.90 && wins >= 8 && shape.holdout().size() == 1000,
          "pool " + std::to_string(p.dataset->size()) + ", holdout " + std::to_string(shape.holdout().size()) +
              ", accuracy " + fmt(acc) + ", active wins " + std::to_string(wins) + "/10 (active/random:" +
              pairs + ")"};
}

Verdict ac4_rule_fixtures() {
  int wrong = 0, rule_fixtures = 0, clean = 0;
  for (const auto& f : cpforge::test::rule_fixtures()) {
    const RuleVerdict v = rule_filter(f.grid);
    wrong += v.violations != f.expected || v.pass != f.expected.empty();
    (f.expected.empty() ? clean : rule_fixtures)++;
  }
  return {wrong == 0 && rule_fixtures >= 12,
          std::to_string(rule_fixtures) + " violating and " + std::to_string(clean) + " clean fixtures, " +
              std::to_string(wrong) + " wrong"};
}

Verdict ac5_reachability() {
  SamplerParams p;
  p.seed = 555;
  p.gap_prob = 0.15;
  p.max_gap = 7;
  p.elev_step_prob = 0.3;
  int agree = 0, unreachable = 0;
  for (const auto& rec : sample_dataset(500, p)) {
    const bool ours = reachable_left_to_right(rec.grid);
    agree += ours == cpforge::test::reachable_by_closure(rec.grid);
    unreachable += !ours;
  }
  return {agree == 500,
          std::to_string(agree) + "/500 agree (" + std::to_string(unreachable) + " unreachable segments)"};
}

Verdict ac6_level_soundness() {
  const auto& p = default_pipeline();
  int not_cp = 0, bad_boundary = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const Level level = generate_level(p.cps, 12, {}, seed);
    for (std::size_t i = 0; i < level.segments.size(); ++i) {
      not_cp += !is_cp(p.run.model, level.segments[i], p.cps.theta);
      if (i + 1 < level.segments.size())
        bad_boundary += std::abs(extract_features(level.segments[i]).elev_end -
                                 extract_features(level.segments[i + 1]).elev_start) > 2;
    }
  }
  ControlParams band;
  band.enemy_density = Band{0.2, 0.4};
  int out_of_band = 0, banded_levels = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Level level = generate_level(p.cps, 12, band, seed);
    ++banded_levels;
    for (const auto& g : level.segments)
      out_of_band += !band.enemy_density->contains(extract_features(g).enemy_count / 16.0);
  }
  return {not_cp == 0 && bad_boundary == 0 && out_of_band == 0,
          "1000 levels: " + std::to_string(not_cp) + " non-CP segments, " + std::to_string(bad_boundary) +
              " bad boundaries; " + std::to_string(banded_levels) + " enemy-band levels: " +
              std::to_string(out_of_band) + " segments out of band"};
}

Verdict ac7_dda() {
  const auto& cps = default_pipeline().cps;
  int ordered = 0, perf_in_band = 0;
  double perf_sum = 0;
  std::string per_seed;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const double novice = converged_difficulty(run_adaptive(cps, {0.2, 5.0, 3}, 500, seed));
    const EpisodeTrace mid = run_adaptive(cps, {0.5, 5.0, 3}, 500, seed);
    const double expert = converged_difficulty(run_adaptive(cps, {0.8, 5.0, 3}, 500, seed));
    const double experienced = converged_difficulty(mid);
    const double perf = tail_mean_perf(mid);
    ordered += novice < experienced && experienced < expert;
    perf_in_band += perf >= 0.45 && perf <= 0.75;
    perf_sum += perf;
    per_seed += " [" + fmt(novice, 2) + " " + fmt(experienced, 2) + " " + fmt(expert, 2) + " p=" + fmt(perf, 2) + "]";
  }
  return {ordered >= 9 && perf_in_band == 10,
          "ordering " + std::to_string(ordered) + "/10, 0.5-player tail perf in band " +
              std::to_string(perf_in_band) + "/10 (mean " + fmt(perf_sum / 10, 3) + "); d(0.2 0.5 0.8):" +
              per_seed};
}

Verdict ac8_difficulty_spread() {
  const auto& ds = *default_pipeline().dataset;
  double lo = 1, hi = 0;
  int bins[kDifficultyBins] = {};
  for (const auto& rec : ds) {
    const double d = difficulty_score(rec.features);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
    ++bins[difficulty_bin(d)];
  }
  bool populated = true;
  std::string mass;
  for (int b : bins) {
    const double share = static_cast<double>(b) / static_cast<double>(ds.size());
    populated = populated && share >= 0.02;
    mass += " " + fmt(share, 3);
  }
  return {lo <= 0.0 && hi >= 0.7 && populated,
          "range [" + fmt(lo, 3) + ", " + fmt(hi, 3) + "], bin mass" + mass};
}

Verdict ac9_classifier_numerics() {
  using namespace cpforge::test;
  const double worst = worst_gradient_error(objective_for(noisy_fixture(4), 0.01), 20, 5);
  int increases = 0;
  for (const auto& ex : {enemy_fixture(7), noisy_fixture(8), sampled_fixture()}) increases += loss_increases(ex);
  return {worst < 1e-4 && increases == 0,
          "worst gradient rel. error " + std::to_string(worst) + ", loss increases " + std::to_string(increases)};
}

Verdict ac10_cli_pipeline() {
  cpforge::test::TempDir dir;
  const std::string step = cli_pipeline(dir.path());
  if (!step.empty()) return {false, "step '" + step + "' failed: " + read_file(dir.file("log.txt"))};
  const std::string log = read_file(dir.file("log.txt"));
  int ok_lines = 0;
  for (std::size_t at = log.find("ok: "); at != std::string::npos; at = log.find("ok: ", at + 1)) ++ok_lines;
  return {ok_lines == 7, "all steps exit 0, validate ok for " + std::to_string(ok_lines) + "/7 artifacts"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"AC1 round-trips", ac1_round_trips},
      {"AC2 determinism", ac2_determinism},
      {"AC3 active-learning efficacy", ac3_active_learning},
      {"AC4 rule filter fixtures", ac4_rule_fixtures},
      {"AC5 reachability oracle", ac5_reachability},
      {"AC6 level soundness", ac6_level_soundness},
      {"AC7 DDA convergence and ordering", ac7_dda},
      {"AC8 difficulty spread", ac8_difficulty_spread},
      {"AC9 classifier numerics", ac9_classifier_numerics},
      {"AC10 end-to-end CLI", ac10_cli_pipeline},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !v.pass;
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << " (" << fmt(secs, 1) << " s): " << v.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
