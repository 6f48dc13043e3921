#include "cpforge/cp_pipeline.hpp"

#include <sstream>
#include <unordered_set>

#include "cpforge/io_util.hpp"
#include "cpforge/reachability.hpp"
#include "cpforge/records.hpp"

namespace cpforge {

using json = nlohmann::json;

std::string_view rule_name(RuleId id) {
  switch (id) {
    case RuleId::R1_MAX_GAP: return "R1_MAX_GAP";
    case RuleId::R2_FLOATING_ENEMY: return "R2_FLOATING_ENEMY";
    case RuleId::R3_PIPE_INTEGRITY: return "R3_PIPE_INTEGRITY";
    case RuleId::R4_BOUNDARY_GROUND: return "R4_BOUNDARY_GROUND";
    case RuleId::R5_UNREACHABLE: return "R5_UNREACHABLE";
    case RuleId::R6_EMBEDDED_ITEM: return "R6_EMBEDDED_ITEM";
  }
  return "?";
}

bool has_floating_enemy(const SegmentGrid& g) {
  for (int r = 0; r < kRows; ++r)
    for (int c = 0; c < kCols; ++c) {
      if (g.at(r, c) != Tile::Enemy) continue;
      if (r + 1 >= kRows) return true;
      const Tile below = g.at(r + 1, c);
      if (below != Tile::Ground && below != Tile::Platform) return true;
    }
  return false;
}

bool pipes_intact(const SegmentGrid& g) {
  for (int r = 0; r < kRows; ++r)
    for (int c = 0; c < kCols; ++c) {
      const Tile t = g.at(r, c);
      if (t == Tile::PipeBody) {
        const Tile above = r > 0 ? g.at(r - 1, c) : Tile::Air;
        if (above != Tile::PipeTop && above != Tile::PipeBody) return false;
      } else if (t == Tile::PipeTop) {
        int rr = r + 1;
        while (rr < kRows && g.at(rr, c) == Tile::PipeBody) ++rr;
        if (rr >= kRows || g.at(rr, c) != Tile::Ground) return false;
      }
    }
  return true;
}

bool has_embedded_coin(const SegmentGrid& g) {
  for (int c = 0; c < kCols; ++c) {
    const int elev = column_elevation(g, c);
    if (elev == 0) continue;
    for (int r = kRows - elev + 1; r < kRows; ++r)
      if (g.at(r, c) == Tile::Coin) return true;
  }
  return false;
}

RuleVerdict rule_filter(const SegmentGrid& grid) {
  RuleVerdict v;
  const ContentFeatures f = extract_features(grid);
  auto flag = [&](bool violated, RuleId id) {
    if (violated) v.violations.push_back(id);
  };
  flag(f.max_gap_width > kMaxGapWidth, RuleId::R1_MAX_GAP);
  flag(has_floating_enemy(grid), RuleId::R2_FLOATING_ENEMY);
  flag(!pipes_intact(grid), RuleId::R3_PIPE_INTEGRITY);
  flag(column_elevation(grid, 0) == 0 || column_elevation(grid, kCols - 1) == 0,
       RuleId::R4_BOUNDARY_GROUND);
  flag(!reachable_left_to_right(grid), RuleId::R5_UNREACHABLE);
  flag(has_embedded_coin(grid), RuleId::R6_EMBEDDED_ITEM);
  v.pass = v.violations.empty();
  return v;
}

bool is_cp(const QualityModel& model, const SegmentGrid& grid, double theta) {
  if (!rule_filter(grid).pass) return false;
  return predict(model, extract_features(grid)) >= theta;
}

std::vector<std::vector<std::size_t>> CPSet::bins() const {
  std::vector<std::vector<std::size_t>> out(kDifficultyBins);
  for (std::size_t i = 0; i < cps.size(); ++i) out[static_cast<std::size_t>(cps[i].bin)].push_back(i);
  return out;
}

ConstructivePrimitive make_cp(const QualityModel& model, const SegmentGrid& grid) {
  ConstructivePrimitive cp;
  cp.grid = grid;
  cp.features = extract_features(grid);
  cp.p = predict(model, cp.features);
  cp.d = difficulty_score(cp.features);
  cp.bin = difficulty_bin(cp.d);
  return cp;
}

YieldTooLowError::YieldTooLowError(CPGeneration partial, int target)
    : Error(ErrorCode::YieldTooLow, "found " + std::to_string(partial.set.cps.size()) + " of " +
                                        std::to_string(target) + " CPs in " +
                                        std::to_string(partial.stats.attempts) + " attempts"),
      partial_(std::move(partial)) {}

CPGeneration generate_cps(const QualityModel& model, int target_count, const SamplerParams& params,
                          double theta, int max_attempts) {
  if (target_count < 1) throw Error(ErrorCode::InvalidArgument, "target_count must be >= 1");
  if (max_attempts < target_count)
    throw Error(ErrorCode::InvalidArgument, "max_attempts must be >= target_count");
  params.validate();

  CPGeneration out;
  out.set.model_id = model_id(model);
  out.set.theta = theta;
  out.set.seed = params.seed;
  std::unordered_set<std::string> seen;
  auto& st = out.stats;
  while (st.kept < target_count && st.attempts < max_attempts) {
    const SegmentGrid g = sample_segment_at(params, static_cast<std::uint64_t>(st.attempts));
    ++st.attempts;
    ++st.rule_evaluations;
    if (!rule_filter(g).pass) {
      ++st.rule_rejections;
      continue;
    }
    ++st.classifier_evaluations;
    ConstructivePrimitive cp = make_cp(model, g);
    if (!(cp.p >= theta)) {
      ++st.classifier_rejections;
      continue;
    }
    if (!seen.insert(encode_segment(g)).second) {
      ++st.duplicates;
      continue;
    }
    out.set.cps.push_back(std::move(cp));
    ++st.kept;
  }
  if (st.kept < target_count) throw YieldTooLowError(std::move(out), target_count);
  return out;
}

std::string cpset_to_text(const CPSet& set) {
  json header;
  header["format"] = "cpforge-cpset";
  header["version"] = kCpSetVersion;
  header["model_id"] = set.model_id;
  header["theta"] = set.theta;
  header["seed"] = set.seed;
  header["count"] = set.cps.size();
  std::string out = header.dump() + "\n";
  for (const auto& cp : set.cps) {
    json j;
    j["grid"] = grid_to_json(cp.grid);
    j["features"] = features_to_json(cp.features);
    j["p"] = cp.p;
    j["d"] = cp.d;
    j["bin"] = cp.bin;
    out += j.dump() + "\n";
  }
  return out;
}

CPSet cpset_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  CPSet set;
  std::size_t expected = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json j = parse_json_line(line, lineno, "cp set");
    try {
      if (!have_header) {
        if (j.value("format", "") != "cpforge-cpset")
          throw Error(ErrorCode::ParseError, "cp set: missing cpforge-cpset header");
        for (const char* key : {"version", "model_id", "theta", "seed", "count"})
          if (!j.contains(key)) throw Error(ErrorCode::MissingField, std::string("cp set header.") + key);
        if (j["version"].get<int>() != kCpSetVersion)
          throw Error(ErrorCode::ParseError, "cp set: unsupported version");
        set.model_id = j["model_id"].get<std::string>();
        set.theta = j["theta"].get<double>();
        set.seed = j["seed"].get<std::uint64_t>();
        expected = j["count"].get<std::size_t>();
        have_header = true;
        continue;
      }
      for (const char* key : {"grid", "features", "p", "d", "bin"})
        if (!j.contains(key)) throw Error(ErrorCode::MissingField, std::string("cp record.") + key);
      ConstructivePrimitive cp;
      cp.grid = grid_from_json(j["grid"]);
      cp.features = features_from_json(j["features"]);
      cp.p = j["p"].get<double>();
      cp.d = j["d"].get<double>();
      cp.bin = j["bin"].get<int>();
      if (cp.bin < 0 || cp.bin >= kDifficultyBins)
        throw Error(ErrorCode::ParseError, "cp set line " + std::to_string(lineno) + ": bin out of range");
      set.cps.push_back(std::move(cp));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, "cp set line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_header) throw Error(ErrorCode::ParseError, "cp set: empty file");
  if (set.cps.size() != expected)
    throw Error(ErrorCode::ParseError, "cp set: header count " + std::to_string(expected) +
                                           " but " + std::to_string(set.cps.size()) + " records");
  return set;
}

void write_cpset(const CPSet& set, const std::string& path) { write_file(path, cpset_to_text(set)); }

CPSet read_cpset(const std::string& path) { return cpset_from_text(read_file(path)); }

}  // namespace cpforge
