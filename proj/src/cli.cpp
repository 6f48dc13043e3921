#include "cpforge/cli.hpp"

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cpforge/active_learning.hpp"
#include "cpforge/adaptive_dda.hpp"
#include "cpforge/clustering.hpp"
#include "cpforge/config.hpp"
#include "cpforge/cp_pipeline.hpp"
#include "cpforge/error.hpp"
#include "cpforge/io_util.hpp"
#include "cpforge/online_generator.hpp"
#include "cpforge/records.hpp"
#include "cpforge/server.hpp"
#include "cpforge/validate.hpp"

namespace cpforge {

namespace {

// CP generation draws from its own stream so it does not replay the dataset
// when both use the same --seed.
constexpr std::uint64_t kCpStream = 0x637073;

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

const CLI::Validator kBand(
    [](std::string& text) {
      try {
        parse_band(text);
        return std::string();
      } catch (const Error& e) {
        return std::string(e.what());
      }
    },
    "LO:HI");

const CLI::Validator kSkillChange(
    [](std::string& text) {
      const auto colon = text.find(':');
      if (colon == std::string::npos) return std::string("expected EPISODE:SKILL");
      try {
        std::size_t used = 0;
        const int ep = std::stoi(text.substr(0, colon), &used);
        const double skill = std::stod(text.substr(colon + 1));
        if (ep < 0 || !(skill >= 0.0 && skill <= 1.0)) return std::string("need EPISODE >= 0 and SKILL in [0,1]");
      } catch (const std::exception&) {
        return std::string("expected EPISODE:SKILL");
      }
      return std::string();
    },
    "EPISODE:SKILL");

struct SamplerFlags {
  std::optional<double> gap_prob, enemy_rate, coin_rate, pipe_prob, platform_prob, elev_step_prob;
  std::optional<int> max_gap, base_elev;

  void add(CLI::App* app) {
    app->add_option("--gap-prob", gap_prob, "Per-column chance of opening a gap run");
    app->add_option("--max-gap", max_gap, "Longest gap run");
    app->add_option("--enemy-rate", enemy_rate, "Expected enemies per segment");
    app->add_option("--coin-rate", coin_rate, "Expected coins per segment");
    app->add_option("--pipe-prob", pipe_prob, "Chance of a pipe per segment");
    app->add_option("--platform-prob", platform_prob, "Chance of a platform run per segment");
    app->add_option("--elev-step-prob", elev_step_prob, "Per-column chance of an elevation step");
    app->add_option("--base-elev", base_elev, "Ground elevation of the first column");
  }

  void apply(SamplerParams& p) const {
    if (gap_prob) p.gap_prob = *gap_prob;
    if (max_gap) p.max_gap = *max_gap;
    if (enemy_rate) p.enemy_rate = *enemy_rate;
    if (coin_rate) p.coin_rate = *coin_rate;
    if (pipe_prob) p.pipe_prob = *pipe_prob;
    if (platform_prob) p.platform_prob = *platform_prob;
    if (elev_step_prob) p.elev_step_prob = *elev_step_prob;
    if (base_elev) p.base_elev = *base_elev;
  }
};

template <typename T>
T pick(const std::optional<T>& flag, const T& fallback) {
  return flag ? *flag : fallback;
}

struct Flags {
  std::optional<std::string> config;

  std::optional<int> count, k, k_min, k_max, budget, epochs, length, episodes, port, max_attempts;
  std::optional<std::uint64_t> seed;
  std::optional<double> holdout_frac, l2, lr, theta, player;
  std::optional<std::string> in, out, clusters, model, cps, labels_out, curve, summary, ui_dir, session_dir;
  std::optional<std::string> enemy_density, gap_frequency, difficulty;
  std::string host = "127.0.0.1";
  std::vector<std::string> skill_changes;
  std::vector<std::string> paths;
  int tail = 100;
  bool oracle = false;
  bool serve = false;
  SamplerFlags sampler;
};

ControlParams control_from(const Flags& f) {
  ControlParams c;
  if (f.enemy_density) c.enemy_density = parse_band(*f.enemy_density);
  if (f.gap_frequency) c.gap_frequency = parse_band(*f.gap_frequency);
  if (f.difficulty) c.difficulty = parse_band(*f.difficulty);
  c.validate();
  return c;
}

SamplerParams sampler_from(const Flags& f, const Config& cfg) {
  SamplerParams p = cfg.sampler;
  f.sampler.apply(p);
  p.seed = pick(f.seed, cfg.seed);
  p.validate();
  return p;
}

int cmd_sample(const Flags& f, const Config& cfg, std::ostream& out) {
  const SamplerParams p = sampler_from(f, cfg);
  const std::string path = pick(f.out, cfg.paths.dataset);
  const Dataset ds = sample_dataset(pick(f.count, cfg.sample_count), p);
  write_dataset(ds, path);
  out << "sample: wrote " << ds.size() << " segments to " << path << "\n";
  return kExitOk;
}

int cmd_cluster(const Flags& f, const Config& cfg, std::ostream& out) {
  const Dataset ds = read_dataset(pick(f.in, cfg.paths.dataset));
  int lo = pick(f.k_min, cfg.k_min);
  int hi = pick(f.k_max, cfg.k_max);
  if (f.k) lo = hi = *f.k;
  const ClusterResult result = cluster_dataset(ds, lo, hi, pick(f.seed, cfg.seed));
  const std::string path = pick(f.out, cfg.paths.clusters);
  write_cluster_report(result, path);
  out << "cluster: k=" << result.k << " silhouette=" << fmt("%.4f", result.silhouette) << " medoids=[";
  for (std::size_t i = 0; i < result.medoid_ids.size(); ++i) out << (i ? "," : "") << result.medoid_ids[i];
  out << "] -> " << path << "\n";
  return kExitOk;
}

SessionOptions session_options(const Flags& f, const Config& cfg) {
  SessionOptions so;
  so.budget = pick(f.budget, cfg.budget);
  so.seed = pick(f.seed, cfg.seed);
  so.holdout_frac = pick(f.holdout_frac, cfg.holdout_frac);
  so.hyper = cfg.hyper;
  return so;
}

int cmd_annotate_oracle(const Flags& f, const Config& cfg, std::ostream& out) {
  auto ds = std::make_shared<const Dataset>(read_dataset(pick(f.in, cfg.paths.dataset)));
  const ClusterReport report = read_cluster_report(pick(f.clusters, cfg.paths.clusters));
  const OracleRun run = run_with_oracle(ds, report.medoid_ids, session_options(f, cfg));
  const std::string model_path = pick(f.out, cfg.paths.model);
  const std::string labels_path = pick(f.labels_out, cfg.paths.labeled);
  save_model(run.model, model_path);
  write_labeled(run.labeled, labels_path);
  if (f.curve) write_file(*f.curve, curve_to_csv(run.curve));
  out << "annotate: " << run.labels.size() << " oracle labels";
  if (!run.curve.empty() && run.curve.back().holdout_accuracy == run.curve.back().holdout_accuracy)
    out << ", holdout accuracy " << fmt("%.4f", run.curve.back().holdout_accuracy);
  out << " -> " << model_path << ", " << labels_path << "\n";
  return kExitOk;
}

int cmd_annotate_serve(const Flags& f, const Config& cfg, std::ostream& out) {
  ServiceOptions so;
  so.session_dir = pick(f.session_dir, cfg.paths.sessions);
  so.default_clusters = pick(f.clusters, cfg.paths.clusters);
  so.ui_dir = pick(f.ui_dir, cfg.ui_dir);
  so.hyper = cfg.hyper;
  so.holdout_frac = pick(f.holdout_frac, cfg.holdout_frac);
  read_cluster_report(so.default_clusters);  // fail fast on a missing report
  AnnotationService service(so);
  const int port = service.bind(f.host, pick(f.port, cfg.port));
  out << "annotate: serving on http://" << f.host << ":" << port << std::endl;
  service.run();
  return kExitOk;
}

int cmd_train(const Flags& f, const Config& cfg, std::ostream& out) {
  const auto records = read_labeled(pick(f.in, cfg.paths.labeled));
  std::vector<LabeledExample> examples;
  for (const auto& r : records) examples.push_back({r.record.features, r.label});
  TrainingHyper hyper = cfg.hyper;
  hyper.l2 = pick(f.l2, hyper.l2);
  hyper.lr = pick(f.lr, hyper.lr);
  hyper.epochs = pick(f.epochs, hyper.epochs);
  const QualityModel model = train(examples, hyper);
  const std::string path = pick(f.out, cfg.paths.model);
  save_model(model, path);
  out << "train: " << examples.size() << " examples, model " << model_id(model) << " -> " << path << "\n";
  return kExitOk;
}

int cmd_gen_cps(const Flags& f, const Config& cfg, std::ostream& out) {
  const QualityModel model = load_model(pick(f.model, cfg.paths.model));
  SamplerParams p = sampler_from(f, cfg);
  p.seed = derive_seed(p.seed, kCpStream);
  const int count = pick(f.count, cfg.cp_count);
  const int attempts = pick(f.max_attempts, count * cfg.cp_attempts_per_cp);
  const CPGeneration gen = generate_cps(model, count, p, pick(f.theta, cfg.theta), attempts);
  const std::string path = pick(f.out, cfg.paths.cps);
  write_cpset(gen.set, path);
  out << "gen-cps: kept " << gen.stats.kept << " of " << gen.stats.attempts << " samples (acceptance rate "
      << fmt("%.4f", gen.stats.acceptance_rate()) << "), bins [";
  const auto bins = gen.set.bins();
  for (std::size_t b = 0; b < bins.size(); ++b) out << (b ? "," : "") << bins[b].size();
  out << "] -> " << path << "\n";
  return kExitOk;
}

int cmd_gen_level(const Flags& f, const Config& cfg, std::ostream& out) {
  const ControlParams control = control_from(f);
  const int length = pick(f.length, cfg.level_length);
  const std::uint64_t seed = pick(f.seed, cfg.seed);
  Level level;
  if (f.model) {
    const QualityModel model = load_model(*f.model);
    SamplerParams p = sampler_from(f, cfg);
    p.seed = derive_seed(p.seed, kCpStream);
    level = generate_level(model, p, pick(f.theta, cfg.theta), length, control, seed);
  } else {
    level = generate_level(read_cpset(pick(f.cps, cfg.paths.cps)), length, control, seed);
  }
  const std::string path = pick(f.out, cfg.paths.level);
  write_level(level, path);
  double mean = 0.0;
  for (double d : level.meta.difficulty) mean += d;
  out << "gen-level: " << level.segments.size() << " segments, mean difficulty "
      << fmt("%.4f", mean / static_cast<double>(level.segments.size())) << " -> " << path << "\n";
  return kExitOk;
}

int cmd_adapt(const Flags& f, const Config& cfg, std::ostream& out) {
  const CPSet cps = read_cpset(pick(f.cps, cfg.paths.cps));
  PlayerSim player;
  player.skill = pick(f.player, 0.5);
  player.persistence = cfg.persistence;
  if (!(player.skill >= 0.0 && player.skill <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "--player skill must lie in [0,1]");
  std::vector<SkillChange> schedule;
  for (const auto& s : f.skill_changes) {
    const auto colon = s.find(':');
    schedule.push_back({std::stoi(s.substr(0, colon)), std::stod(s.substr(colon + 1))});
  }
  const int episodes = pick(f.episodes, cfg.episodes);
  const EpisodeTrace trace = run_adaptive(cps, player, episodes, pick(f.seed, cfg.seed), schedule, nullptr, cfg.dda);
  const std::string path = pick(f.out, cfg.paths.trace);
  write_trace(trace, path);
  const int tail = std::min(f.tail, episodes);
  const std::string summary = trace_summary_json(trace, tail);
  if (f.summary) write_file(*f.summary, summary);
  out << "adapt: " << trace.size() << " episodes -> " << path << "\n" << summary;
  return kExitOk;
}

int cmd_validate(const Flags& f, std::ostream& out) {
  std::optional<QualityModel> model;
  if (f.model) model = load_model(*f.model);
  std::size_t total = 0;
  for (const auto& path : f.paths) {
    const ValidationReport report = validate_file(path, model ? &*model : nullptr);
    if (report.clean()) {
      out << "ok: " << artifact_kind_name(report.kind) << " " << path << "\n";
      continue;
    }
    for (const auto& issue : report.issues) out << path << ": " << issue << "\n";
    out << "invalid: " << artifact_kind_name(report.kind) << " " << path << " (" << report.issues.size()
        << " issues)\n";
    total += report.issues.size();
  }
  return total == 0 ? kExitOk : kExitDomain;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"cpforge: learned constructive primitives for a 2-D platformer"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);

  auto* sample = app.add_subcommand("sample", "Sample a dataset of random segments");
  sample->add_option("--count", f.count, "Number of segments");
  sample->add_option("--seed", f.seed, "Random seed");
  sample->add_option("--out", f.out, "Dataset file (JSONL)");
  f.sampler.add(sample);

  auto* cluster = app.add_subcommand("cluster", "Cluster a dataset and pick medoids");
  cluster->add_option("--in", f.in, "Dataset file");
  cluster->add_option("--out", f.out, "Cluster report file");
  cluster->add_option("--k", f.k, "Fixed number of clusters")->check(CLI::Range(2, 1 << 20));
  cluster->add_option("--k-min", f.k_min, "Smallest k tried");
  cluster->add_option("--k-max", f.k_max, "Largest k tried");
  cluster->add_option("--seed", f.seed, "Random seed");

  auto* annotate = app.add_subcommand("annotate", "Active learning with the oracle or a served UI");
  auto* mode = annotate->add_option_group("mode");
  mode->add_flag("--oracle", f.oracle, "Label with the golden oracle");
  mode->add_flag("--serve", f.serve, "Serve the annotation HTTP API");
  mode->require_option(1);
  annotate->add_option("--in", f.in, "Dataset file");
  annotate->add_option("--clusters", f.clusters, "Cluster report file");
  annotate->add_option("--budget", f.budget, "Query budget")->check(CLI::NonNegativeNumber);
  annotate->add_option("--seed", f.seed, "Session seed");
  annotate->add_option("--holdout-frac", f.holdout_frac, "Holdout fraction")->check(CLI::Range(0.0, 0.999));
  annotate->add_option("--out", f.out, "Model file (--oracle)");
  annotate->add_option("--labels-out", f.labels_out, "Labeled set file (--oracle)");
  annotate->add_option("--curve", f.curve, "Learning curve CSV (--oracle)");
  annotate->add_option("--port", f.port, "Port (--serve); 0 picks a free port")->check(CLI::Range(0, 65535));
  annotate->add_option("--host", f.host, "Bind address (--serve)");
  annotate->add_option("--ui-dir", f.ui_dir, "Static UI bundle served at /ui (--serve)");
  annotate->add_option("--session-dir", f.session_dir, "Where finished sessions are written (--serve)");

  auto* trainc = app.add_subcommand("train", "Train the quality model from a labeled set");
  trainc->add_option("--in", f.in, "Labeled set file");
  trainc->add_option("--out", f.out, "Model file");
  trainc->add_option("--l2", f.l2, "L2 strength")->check(CLI::NonNegativeNumber);
  trainc->add_option("--lr", f.lr, "Learning rate")->check(CLI::PositiveNumber);
  trainc->add_option("--epochs", f.epochs, "Gradient descent epochs")->check(CLI::NonNegativeNumber);

  auto* gencps = app.add_subcommand("gen-cps", "Generate constructive primitives");
  gencps->add_option("--model", f.model, "Model file");
  gencps->add_option("--count", f.count, "Number of CPs to keep")->check(CLI::PositiveNumber);
  gencps->add_option("--theta", f.theta, "Classifier threshold");
  gencps->add_option("--seed", f.seed, "Random seed");
  gencps->add_option("--max-attempts", f.max_attempts, "Sampling budget")->check(CLI::PositiveNumber);
  gencps->add_option("--out", f.out, "CP set file");
  f.sampler.add(gencps);

  auto* genlevel = app.add_subcommand("gen-level", "Assemble a level from CPs");
  auto* source = genlevel->add_option_group("source");
  source->add_option("--cps", f.cps, "CP set file");
  source->add_option("--model", f.model, "Model file (CPs are generated on the fly)");
  source->require_option(0, 1);
  genlevel->add_option("--length", f.length, "Segments per level")->check(CLI::PositiveNumber);
  genlevel->add_option("--seed", f.seed, "Random seed");
  genlevel->add_option("--theta", f.theta, "Classifier threshold (--model)");
  genlevel->add_option("--enemy-density", f.enemy_density, "Enemies per column band")->check(kBand);
  genlevel->add_option("--gap-frequency", f.gap_frequency, "Gaps per segment band")->check(kBand);
  genlevel->add_option("--difficulty", f.difficulty, "Difficulty band")->check(kBand);
  genlevel->add_option("--out", f.out, "Level file");
  f.sampler.add(genlevel);

  auto* adapt = app.add_subcommand("adapt", "Run adaptive difficulty against a simulated player");
  adapt->add_option("--cps", f.cps, "CP set file");
  adapt->add_option("--player", f.player, "Simulated player skill in [0,1]")->check(CLI::Range(0.0, 1.0));
  adapt->add_option("--episodes", f.episodes, "Episodes")->check(CLI::PositiveNumber);
  adapt->add_option("--seed", f.seed, "Random seed");
  adapt->add_option("--out", f.out, "Trace CSV");
  adapt->add_option("--summary", f.summary, "Tail summary JSON");
  adapt->add_option("--tail", f.tail, "Tail length for the summary")->check(CLI::PositiveNumber);
  adapt->add_option("--skill-change", f.skill_changes, "Change skill at an episode")->check(kSkillChange);

  auto* validate = app.add_subcommand("validate", "Re-check the invariants of artifact files");
  validate->add_option("paths", f.paths, "Files to check")->required();
  validate->add_option("--model", f.model, "Model to check CP sets and levels against");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const Config cfg = f.config ? load_config(*f.config) : default_config();
    if (sample->parsed()) return cmd_sample(f, cfg, out);
    if (cluster->parsed()) return cmd_cluster(f, cfg, out);
    if (annotate->parsed()) return f.serve ? cmd_annotate_serve(f, cfg, out) : cmd_annotate_oracle(f, cfg, out);
    if (trainc->parsed()) return cmd_train(f, cfg, out);
    if (gencps->parsed()) return cmd_gen_cps(f, cfg, out);
    if (genlevel->parsed()) return cmd_gen_level(f, cfg, out);
    if (adapt->parsed()) return cmd_adapt(f, cfg, out);
    if (validate->parsed()) return cmd_validate(f, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}

}  // namespace cpforge
