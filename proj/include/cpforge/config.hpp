#pragma once

// Run configuration shared by the CLI and the annotation server: file paths,
// seeds, server port and every module hyperparameter.

#include <cstdint>
#include <string>

#include "cpforge/active_learning.hpp"
#include "cpforge/adaptive_dda.hpp"
#include "cpforge/cp_pipeline.hpp"
#include "cpforge/sampler.hpp"

namespace cpforge {

inline constexpr int kDefaultPort = 8714;

struct Paths {
  std::string dataset = "dataset.jsonl";
  std::string clusters = "clusters.json";
  std::string model = "model.txt";
  std::string labeled = "labeled.jsonl";
  std::string cps = "cps.jsonl";
  std::string level = "level.txt";
  std::string trace = "trace.csv";
  std::string sessions = ".";  // where the server persists finished sessions
};

struct Config {
  std::uint64_t seed = 7;
  Paths paths;
  int port = kDefaultPort;
  std::string ui_dir;  // static bundle mounted at /ui when non-empty

  SamplerParams sampler;
  int sample_count = 5000;
  int k_min = 4;
  int k_max = 12;
  TrainingHyper hyper;
  int budget = 200;
  double holdout_frac = 0.2;
  double theta = kDefaultTheta;
  int cp_count = 1000;
  int cp_attempts_per_cp = 50;
  int level_length = 12;
  QPolicyParams dda;
  int persistence = 3;
  int episodes = 500;
};

// Defaults, with the port taken from CPFORGE_PORT when that is set.
// Throws Error{InvalidArgument} if CPFORGE_PORT is not a port number.
Config default_config();

// Overlays a JSON config document onto `base`. Sections: seed, port, ui_dir,
// paths{...}, sampler{...}, clustering{k_min,k_max}, training{l2,lr,epochs},
// active_learning{budget,holdout_frac}, cp{theta,count,attempts_per_cp},
// level{length}, dda{alpha,gamma,epsilon_start,epsilon_decay,epsilon_floor,
// initial_q,bucket_bias,persistence,episodes}. Unknown keys throw
// Error{UnknownConfigKey}; malformed values throw Error{ParseError}; the
// result is validated (Error{InvalidArgument}). CPFORGE_PORT still wins over
// a port given in the file.
Config parse_config(const std::string& text, const Config& base);
Config load_config(const std::string& path);

// Throws Error{InvalidArgument} naming the first bad field.
void validate_config(const Config& config);

int parse_port(const std::string& text);

}  // namespace cpforge
