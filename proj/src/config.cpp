#include "cpforge/config.hpp"

#include <cstdlib>
#include <functional>
#include <map>
#include <type_traits>

#include "cpforge/error.hpp"
#include "cpforge/io_util.hpp"
#include "json.hpp"

namespace cpforge {

using json = nlohmann::json;

int parse_port(const std::string& text) {
  std::size_t used = 0;
  int port = -1;
  try {
    port = std::stoi(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || port < 0 || port > 65535)
    throw Error(ErrorCode::InvalidArgument, "port must be an integer in [0,65535], got '" + text + "'");
  return port;
}

namespace {

void apply_env_port(Config& c) {
  if (const char* env = std::getenv("CPFORGE_PORT"); env && *env) c.port = parse_port(env);
}

using Setter = std::function<void(const json&)>;

struct BadValue {};

void apply(const json& obj, const std::string& where, const std::map<std::string, Setter>& setters) {
  if (!obj.is_object()) throw Error(ErrorCode::ParseError, "config: " + where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    const auto it = setters.find(key);
    const std::string path = where.empty() ? key : where + "." + key;
    if (it == setters.end()) throw Error(ErrorCode::UnknownConfigKey, "config: unknown key '" + path + "'");
    try {
      it->second(value);
    } catch (const BadValue&) {
      throw Error(ErrorCode::ParseError, "config: bad value for '" + path + "'");
    } catch (const json::exception&) {
      throw Error(ErrorCode::ParseError, "config: bad value for '" + path + "'");
    }
  }
}

template <typename T>
Setter to(T& field) {
  return [&field](const json& v) {
    if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw BadValue{};
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw BadValue{};
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) throw BadValue{};
    } else {
      if (!v.is_number_integer()) throw BadValue{};
    }
    field = v.get<T>();
  };
}

}  // namespace

Config default_config() {
  Config c;
  apply_env_port(c);
  return c;
}

void validate_config(const Config& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::InvalidArgument, std::string("config: ") + what);
  };
  c.sampler.validate();
  require(c.port >= 0 && c.port <= 65535, "port must lie in [0,65535]");
  require(c.sample_count >= 1, "sample count must be >= 1");
  require(c.k_min >= 2 && c.k_min <= c.k_max, "clustering needs 2 <= k_min <= k_max");
  require(c.hyper.l2 >= 0 && c.hyper.lr > 0 && c.hyper.epochs >= 0, "bad training hyperparameters");
  require(c.budget >= 0, "budget must be >= 0");
  require(c.holdout_frac >= 0 && c.holdout_frac < 1, "holdout_frac must lie in [0,1)");
  require(c.theta >= 0 && c.theta <= 1, "theta must lie in [0,1]");
  require(c.cp_count >= 1 && c.cp_attempts_per_cp >= 1, "cp count and attempts must be >= 1");
  require(c.level_length >= 1, "level length must be >= 1");
  require(c.dda.alpha > 0 && c.dda.alpha <= 1, "dda alpha must lie in (0,1]");
  require(c.dda.gamma >= 0 && c.dda.gamma < 1, "dda gamma must lie in [0,1)");
  require(c.dda.epsilon_floor >= 0 && c.dda.epsilon_floor <= c.dda.epsilon_start && c.dda.epsilon_start <= 1,
          "dda epsilon must satisfy 0 <= floor <= start <= 1");
  require(c.dda.epsilon_decay > 0 && c.dda.epsilon_decay <= 1, "dda epsilon_decay must lie in (0,1]");
  require(c.persistence >= 1, "persistence must be >= 1");
  require(c.episodes >= 1, "episodes must be >= 1");
}

Config parse_config(const std::string& text, const Config& base) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
  }
  Config c = base;
  auto section = [](std::map<std::string, Setter> setters, std::string name) -> Setter {
    return [setters = std::move(setters), name = std::move(name)](const json& v) { apply(v, name, setters); };
  };
  apply(doc, "",
        {
            {"seed", to(c.seed)},
            {"port", to(c.port)},
            {"ui_dir", to(c.ui_dir)},
            {"paths", section({{"dataset", to(c.paths.dataset)},
                               {"clusters", to(c.paths.clusters)},
                               {"model", to(c.paths.model)},
                               {"labeled", to(c.paths.labeled)},
                               {"cps", to(c.paths.cps)},
                               {"level", to(c.paths.level)},
                               {"trace", to(c.paths.trace)},
                               {"sessions", to(c.paths.sessions)}},
                              "paths")},
            {"sampler", section({{"gap_prob", to(c.sampler.gap_prob)},
                                 {"max_gap", to(c.sampler.max_gap)},
                                 {"enemy_rate", to(c.sampler.enemy_rate)},
                                 {"coin_rate", to(c.sampler.coin_rate)},
                                 {"pipe_prob", to(c.sampler.pipe_prob)},
                                 {"platform_prob", to(c.sampler.platform_prob)},
                                 {"elev_step_prob", to(c.sampler.elev_step_prob)},
                                 {"base_elev", to(c.sampler.base_elev)},
                                 {"count", to(c.sample_count)}},
                                "sampler")},
            {"clustering", section({{"k_min", to(c.k_min)}, {"k_max", to(c.k_max)}}, "clustering")},
            {"training", section({{"l2", to(c.hyper.l2)}, {"lr", to(c.hyper.lr)}, {"epochs", to(c.hyper.epochs)}},
                                 "training")},
            {"active_learning",
             section({{"budget", to(c.budget)}, {"holdout_frac", to(c.holdout_frac)}}, "active_learning")},
            {"cp", section({{"theta", to(c.theta)},
                            {"count", to(c.cp_count)},
                            {"attempts_per_cp", to(c.cp_attempts_per_cp)}},
                           "cp")},
            {"level", section({{"length", to(c.level_length)}}, "level")},
            {"dda", section({{"alpha", to(c.dda.alpha)},
                             {"gamma", to(c.dda.gamma)},
                             {"epsilon_start", to(c.dda.epsilon_start)},
                             {"epsilon_decay", to(c.dda.epsilon_decay)},
                             {"epsilon_floor", to(c.dda.epsilon_floor)},
                             {"initial_q", to(c.dda.initial_q)},
                             {"bucket_bias", to(c.dda.bucket_bias)},
                             {"persistence", to(c.persistence)},
                             {"episodes", to(c.episodes)}},
                            "dda")},
        });
  apply_env_port(c);
  validate_config(c);
  return c;
}

Config load_config(const std::string& path) { return parse_config(read_file(path), default_config()); }

}  // namespace cpforge
