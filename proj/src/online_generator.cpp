#include "cpforge/online_generator.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "cpforge/error.hpp"
#include "cpforge/io_util.hpp"
#include "cpforge/records.hpp"

namespace cpforge {

using json = nlohmann::json;

bool matches_control(const ContentFeatures& f, const ControlParams& c) {
  if (c.enemy_density && !c.enemy_density->contains(static_cast<double>(f.enemy_count) / kCols))
    return false;
  if (c.gap_frequency && !c.gap_frequency->contains(static_cast<double>(f.gap_count))) return false;
  if (c.difficulty && !c.difficulty->contains(difficulty_score(f))) return false;
  return true;
}

bool compatible(const SegmentGrid& a, const SegmentGrid& b) {
  return std::abs(column_elevation(a, kCols - 1) - column_elevation(b, 0)) <= kMaxBoundaryStep;
}

namespace {

LevelMetadata describe(const std::vector<SegmentGrid>& segments, const ControlParams& control,
                       std::uint64_t seed, const std::string& model, double theta) {
  LevelMetadata meta;
  meta.seed = seed;
  meta.control = control;
  meta.model_id = model;
  meta.theta = theta;
  std::array<double, kFeatureCount> sum{};
  for (const auto& g : segments) {
    const ContentFeatures f = extract_features(g);
    meta.difficulty.push_back(difficulty_score(f));
    const auto v = f.to_vector();
    for (std::size_t j = 0; j < kFeatureCount; ++j) sum[j] += v[j];
  }
  const auto& names = feature_names();
  for (std::size_t j = 0; j < kFeatureCount; ++j)
    meta.mean_features[std::string(names[j])] = sum[j] / static_cast<double>(segments.size());
  return meta;
}

}  // namespace

Level generate_level(const CPSet& cps, int length, const ControlParams& control, std::uint64_t seed) {
  if (length < 1) throw Error(ErrorCode::InvalidArgument, "level length must be >= 1");
  control.validate();
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < cps.cps.size(); ++i)
    if (matches_control(cps.cps[i].features, control)) pool.push_back(i);
  if (pool.empty())
    throw Error(ErrorCode::InsufficientCPs, "no CP matches the control parameters");

  Rng rng(seed);
  const auto L = static_cast<std::size_t>(length);
  std::vector<std::size_t> chosen;
  std::vector<std::set<std::size_t>> tried(L);
  std::size_t deepest = 0;
  int attempts = 0;

  while (chosen.size() < L) {
    const std::size_t pos = chosen.size();
    std::vector<std::size_t> candidates;
    for (std::size_t idx : pool) {
      if (tried[pos].count(idx)) continue;
      if (pos > 0 && !compatible(cps.cps[chosen.back()].grid, cps.cps[idx].grid)) continue;
      candidates.push_back(idx);
    }
    if (!candidates.empty()) {
      if (++attempts > kMaxAssemblyAttempts)
        throw Error(ErrorCode::AssemblyFailed, "gave up after " + std::to_string(kMaxAssemblyAttempts) +
                                                   " segment picks");
      const std::size_t pick = candidates[static_cast<std::size_t>(rng.below(candidates.size()))];
      tried[pos].insert(pick);
      chosen.push_back(pick);
      deepest = std::max(deepest, chosen.size());
      continue;
    }
    if (pos == 0)
      throw Error(ErrorCode::AssemblyFailed, "every starting CP leads to a dead end");
    // Dead end at pos: step back, or restart once the backtrack window is spent.
    tried[pos].clear();
    if (deepest - pos >= static_cast<std::size_t>(kMaxBacktrack) || pos == 1) {
      for (std::size_t k = 1; k < L; ++k) tried[k].clear();
      chosen.clear();
      deepest = 0;
    } else {
      chosen.pop_back();
    }
  }

  Level level;
  for (std::size_t idx : chosen) level.segments.push_back(cps.cps[idx].grid);
  level.meta = describe(level.segments, control, seed, cps.model_id, cps.theta);
  return level;
}

SamplerParams sampler_for_control(const SamplerParams& base, const ControlParams& control) {
  SamplerParams p = base;
  if (control.enemy_density) {
    const double mid = 0.5 * (control.enemy_density->lo + control.enemy_density->hi);
    p.enemy_rate = std::max(0.0, mid * kCols);
  }
  if (control.gap_frequency) {
    const double mid = 0.5 * (control.gap_frequency->lo + control.gap_frequency->hi);
    p.gap_prob = std::clamp(mid / 12.0, 0.0, 1.0);
  }
  return p;
}

Level generate_level(const QualityModel& model, const SamplerParams& params, double theta,
                     int length, const ControlParams& control, std::uint64_t seed) {
  const SamplerParams steered = sampler_for_control(params, control);
  int target = std::max(8 * length, 64);
  constexpr int kRounds = 5;
  for (int round = 0;; ++round) {
    SamplerParams p = steered;
    p.seed = derive_seed(seed, static_cast<std::uint64_t>(round));
    CPSet set;
    try {
      set = generate_cps(model, target, p, theta, target * 50).set;
    } catch (const YieldTooLowError& e) {
      set = e.partial().set;
    }
    // Keep only the CPs that match; the assembler would filter them anyway.
    std::erase_if(set.cps, [&](const auto& cp) { return !matches_control(cp.features, control); });
    try {
      return generate_level(set, length, control, seed);
    } catch (const Error& e) {
      const bool retry = e.code() == ErrorCode::InsufficientCPs || e.code() == ErrorCode::AssemblyFailed;
      if (!retry || round + 1 == kRounds) throw;
    }
    target *= 2;
  }
}

namespace {

constexpr std::string_view kLevelMagic = "#cpforge-level 1";
constexpr std::string_view kSegmentDelimiter = "%% segment ";

json band_json(const std::optional<Band>& b) {
  if (!b) return nullptr;
  return json::array({b->lo, b->hi});
}

std::optional<Band> band_from(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  const auto& a = j[key];
  if (!a.is_array() || a.size() != 2) throw Error(ErrorCode::ParseError, std::string("control.") + key);
  Band b{a[0].get<double>(), a[1].get<double>()};
  if (!(b.lo <= b.hi)) throw Error(ErrorCode::ParseError, std::string("control.") + key + " has lo > hi");
  return b;
}

}  // namespace

std::string level_to_text(const Level& level) {
  json meta;
  meta["seed"] = level.meta.seed;
  meta["length"] = level.segments.size();
  meta["model_id"] = level.meta.model_id;
  meta["theta"] = level.meta.theta;
  meta["control"] = {{"enemy_density", band_json(level.meta.control.enemy_density)},
                     {"gap_frequency", band_json(level.meta.control.gap_frequency)},
                     {"difficulty", band_json(level.meta.control.difficulty)}};
  meta["difficulty"] = level.meta.difficulty;
  meta["mean_features"] = level.meta.mean_features;
  std::string out(kLevelMagic);
  out += "\n" + meta.dump() + "\n";
  for (std::size_t i = 0; i < level.segments.size(); ++i) {
    out += std::string(kSegmentDelimiter) + std::to_string(i) + "\n";
    out += encode_segment(level.segments[i]);
  }
  return out;
}

Level level_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kLevelMagic)
    throw Error(ErrorCode::ParseError, "level: missing '#cpforge-level 1' header");
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "level: missing metadata line");
  const json meta = parse_json_line(line, 2, "level");

  Level level;
  std::size_t length = 0;
  try {
    for (const char* key : {"seed", "length", "model_id", "theta", "control", "difficulty", "mean_features"})
      if (!meta.contains(key)) throw Error(ErrorCode::ParseError, std::string("level: header missing ") + key);
    level.meta.seed = meta["seed"].get<std::uint64_t>();
    length = meta["length"].get<std::size_t>();
    level.meta.model_id = meta["model_id"].get<std::string>();
    level.meta.theta = meta["theta"].get<double>();
    level.meta.control.enemy_density = band_from(meta["control"], "enemy_density");
    level.meta.control.gap_frequency = band_from(meta["control"], "gap_frequency");
    level.meta.control.difficulty = band_from(meta["control"], "difficulty");
    level.meta.difficulty = meta["difficulty"].get<std::vector<double>>();
    level.meta.mean_features = meta["mean_features"].get<std::map<std::string, double>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("level: bad metadata: ") + e.what());
  }

  int lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string expected = std::string(kSegmentDelimiter) + std::to_string(level.segments.size());
    if (line != expected)
      throw Error(ErrorCode::ParseError, "level line " + std::to_string(lineno) + ": expected '" +
                                             expected + "'");
    std::vector<std::string> rows;
    for (int r = 0; r < kRows; ++r) {
      if (!std::getline(in, line))
        throw Error(ErrorCode::ParseError, "level: truncated segment " + std::to_string(level.segments.size()));
      ++lineno;
      rows.push_back(line);
    }
    try {
      level.segments.push_back(decode_rows(rows));
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, "level segment " + std::to_string(level.segments.size()) +
                                             ": " + e.what());
    }
  }
  if (level.segments.size() != length)
    throw Error(ErrorCode::ParseError, "level: header length " + std::to_string(length) + " but " +
                                           std::to_string(level.segments.size()) + " segments");
  if (length == 0) throw Error(ErrorCode::ParseError, "level: no segments");
  return level;
}

void write_level(const Level& level, const std::string& path) { write_file(path, level_to_text(level)); }

Level read_level(const std::string& path) { return level_from_text(read_file(path)); }

std::vector<LevelIssue> validate_level(const Level& level, const QualityModel* model) {
  std::vector<LevelIssue> issues;
  const std::string id = model ? model_id(*model) : std::string();
  if (model && id != level.meta.model_id)
    issues.push_back({-1, "model id " + id + " differs from level header " + level.meta.model_id});
  if (level.meta.difficulty.size() != level.segments.size())
    issues.push_back({-1, "difficulty list length differs from segment count"});
  for (std::size_t i = 0; i < level.segments.size(); ++i) {
    const int idx = static_cast<int>(i);
    const SegmentGrid& g = level.segments[i];
    const ContentFeatures f = extract_features(g);
    const RuleVerdict verdict = rule_filter(g);
    for (RuleId r : verdict.violations) issues.push_back({idx, std::string(rule_name(r))});
    if (i + 1 < level.segments.size() && !compatible(g, level.segments[i + 1]))
      issues.push_back({idx, "boundary incompatible with segment " + std::to_string(i + 1)});
    if (!matches_control(f, level.meta.control)) issues.push_back({idx, "outside control bands"});
    if (i < level.meta.difficulty.size() && std::abs(level.meta.difficulty[i] - difficulty_score(f)) > 1e-12)
      issues.push_back({idx, "recorded difficulty differs from recomputed value"});
    if (model) {
      const double p = predict(*model, f);
      if (!(p >= level.meta.theta))
        issues.push_back({idx, "classifier p=" + format_double(p) + " below theta"});
    }
  }
  return issues;
}

}  // namespace cpforge
