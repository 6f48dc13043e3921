#include "cpforge/validate.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include "cpforge/adaptive_dda.hpp"
#include "cpforge/clustering.hpp"
#include "cpforge/cp_pipeline.hpp"
#include "cpforge/error.hpp"
#include "cpforge/io_util.hpp"
#include "cpforge/online_generator.hpp"
#include "cpforge/records.hpp"

namespace cpforge {

using json = nlohmann::json;

std::string_view artifact_kind_name(ArtifactKind kind) {
  switch (kind) {
    case ArtifactKind::Dataset: return "dataset";
    case ArtifactKind::LabeledSet: return "labeled set";
    case ArtifactKind::ClusterReport: return "cluster report";
    case ArtifactKind::Model: return "model";
    case ArtifactKind::CpSet: return "cp set";
    case ArtifactKind::Level: return "level";
    case ArtifactKind::Trace: return "trace";
  }
  return "?";
}

namespace {

std::string first_line(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) return line;
  return {};
}

std::string at(std::size_t i) { return "record " + std::to_string(i) + ": "; }

void check_round_trip(const std::string& text, const std::string& rewritten, std::vector<std::string>& issues) {
  if (text != rewritten) issues.push_back("file does not round-trip byte-identically through its parser");
}

void check_features(const SegmentGrid& grid, const ContentFeatures& recorded, const std::string& where,
                    std::vector<std::string>& issues) {
  if (extract_features(grid) != recorded) issues.push_back(where + "recorded features differ from the grid");
}

void validate_dataset(const std::string& text, std::vector<std::string>& issues) {
  const Dataset ds = dataset_from_text(text);
  if (ds.empty()) issues.push_back("dataset is empty");
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds[i].id != static_cast<int>(i)) issues.push_back(at(i) + "id " + std::to_string(ds[i].id) + " out of sequence");
    check_features(ds[i].grid, ds[i].features, at(i), issues);
  }
  check_round_trip(text, dataset_to_text(ds), issues);
}

void validate_labeled(const std::string& text, std::vector<std::string>& issues) {
  const auto records = labeled_from_text(text);
  std::set<int> ids;
  int prev = -1;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i].record;
    if (!ids.insert(r.id).second) issues.push_back(at(i) + "duplicate id " + std::to_string(r.id));
    if (r.id < prev) issues.push_back(at(i) + "ids not in ascending order");
    prev = r.id;
    check_features(r.grid, r.features, at(i), issues);
  }
  check_round_trip(text, labeled_to_text(records), issues);
}

void validate_clusters(const std::string& text, std::vector<std::string>& issues) {
  const ClusterReport rep = parse_cluster_report(text);
  if (rep.k < 2) issues.push_back("k must be >= 2");
  if (static_cast<int>(rep.medoid_ids.size()) != rep.k) issues.push_back("medoid count differs from k");
  if (static_cast<int>(rep.sizes.size()) != rep.k) issues.push_back("size count differs from k");
  if (std::set<int>(rep.medoid_ids.begin(), rep.medoid_ids.end()).size() != rep.medoid_ids.size())
    issues.push_back("duplicate medoid ids");
  for (int s : rep.sizes)
    if (s < 1) issues.push_back("empty cluster in sizes");
  if (!(rep.silhouette >= -1.0 && rep.silhouette <= 1.0)) issues.push_back("silhouette outside [-1,1]");
}

void validate_model(const std::string& text, std::vector<std::string>& issues) {
  const QualityModel m = model_from_text(text);
  if (!std::isfinite(m.bias)) issues.push_back("bias is not finite");
  const auto& names = feature_names();
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    const std::string name(names[j]);
    if (!std::isfinite(m.weights[j])) issues.push_back("weight." + name + " is not finite");
    if (!std::isfinite(m.standardization.mean[j])) issues.push_back("mean." + name + " is not finite");
    if (!(m.standardization.stddev[j] >= 0.0) || !std::isfinite(m.standardization.stddev[j]))
      issues.push_back("std." + name + " must be finite and >= 0");
  }
  check_round_trip(text, model_to_text(m), issues);
}

void validate_cpset(const std::string& text, const QualityModel* model, std::vector<std::string>& issues) {
  const CPSet set = cpset_from_text(text);
  if (model && model_id(*model) != set.model_id)
    issues.push_back("model id " + model_id(*model) + " differs from cp set header " + set.model_id);
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < set.cps.size(); ++i) {
    const auto& cp = set.cps[i];
    for (RuleId r : rule_filter(cp.grid).violations) issues.push_back(at(i) + std::string(rule_name(r)));
    check_features(cp.grid, cp.features, at(i), issues);
    if (!(cp.p >= set.theta)) issues.push_back(at(i) + "p=" + format_double(cp.p) + " below theta");
    const double d = difficulty_score(extract_features(cp.grid));
    if (std::abs(d - cp.d) > 1e-12) issues.push_back(at(i) + "recorded difficulty differs from recomputed value");
    if (cp.bin != difficulty_bin(cp.d)) issues.push_back(at(i) + "bin does not match difficulty");
    if (!seen.insert(encode_segment(cp.grid)).second) issues.push_back(at(i) + "duplicate grid");
    if (model) {
      const double p = predict(*model, cp.features);
      if (!(p >= set.theta)) issues.push_back(at(i) + "model gives p=" + format_double(p) + " below theta");
    }
  }
  check_round_trip(text, cpset_to_text(set), issues);
}

void validate_level_text(const std::string& text, const QualityModel* model, std::vector<std::string>& issues) {
  const Level level = level_from_text(text);
  for (const auto& issue : validate_level(level, model))
    issues.push_back((issue.segment >= 0 ? "segment " + std::to_string(issue.segment) + ": " : "") + issue.what);
  check_round_trip(text, level_to_text(level), issues);
}

bool is_quantized_perf(double perf) {
  for (double v : {0.0, 1.0 / 3.0, 0.5, 1.0})
    if (perf == v) return true;
  return false;
}

void validate_trace(const std::string& text, std::vector<std::string>& issues) {
  const EpisodeTrace trace = trace_from_csv(text);
  if (trace.empty()) issues.push_back("trace is empty");
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& row = trace[i];
    const std::string where = "episode " + std::to_string(row.episode) + ": ";
    if (row.episode != static_cast<int>(i)) issues.push_back(where + "rows not strictly episode-ordered");
    if (row.bin < 0 || row.bin >= kDifficultyBins) issues.push_back(where + "bin outside [0,4]");
    else if (difficulty_bin(row.difficulty) != row.bin) issues.push_back(where + "served difficulty not in bin");
    if (!is_quantized_perf(row.perf)) issues.push_back(where + "perf not in {0, 1/3, 1/2, 1}");
    if (std::abs(reward(row.perf) - row.reward) > 1e-12) issues.push_back(where + "reward differs from reward(perf)");
    if (!(row.epsilon >= 0.0 && row.epsilon <= 1.0)) issues.push_back(where + "epsilon outside [0,1]");
    if (i > 0 && row.epsilon > trace[i - 1].epsilon) issues.push_back(where + "epsilon increased");
  }
  check_round_trip(text, trace_to_csv(trace), issues);
}

}  // namespace

ArtifactKind sniff_artifact(const std::string& text) {
  const std::string line = first_line(text);
  if (line == "#cpforge-level 1" || line.rfind("#cpforge-level", 0) == 0) return ArtifactKind::Level;
  if (line.rfind("format = ", 0) == 0) return ArtifactKind::Model;
  if (line.rfind("episode,", 0) == 0) return ArtifactKind::Trace;
  if (!line.empty() && line.front() == '{') {
    const json j = json::parse(line, nullptr, false);
    if (!j.is_discarded() && j.is_object()) {
      if (j.value("format", "") == "cpforge-cpset") return ArtifactKind::CpSet;
      if (j.contains("medoid_ids")) return ArtifactKind::ClusterReport;
      if (j.contains("grid") && j.contains("label")) return ArtifactKind::LabeledSet;
      if (j.contains("grid")) return ArtifactKind::Dataset;
    }
  }
  throw Error(ErrorCode::ParseError, "unrecognized artifact format");
}

ValidationReport validate_text(const std::string& text, const QualityModel* model) {
  ValidationReport report;
  report.kind = sniff_artifact(text);
  auto& issues = report.issues;
  switch (report.kind) {
    case ArtifactKind::Dataset: validate_dataset(text, issues); break;
    case ArtifactKind::LabeledSet: validate_labeled(text, issues); break;
    case ArtifactKind::ClusterReport: validate_clusters(text, issues); break;
    case ArtifactKind::Model: validate_model(text, issues); break;
    case ArtifactKind::CpSet: validate_cpset(text, model, issues); break;
    case ArtifactKind::Level: validate_level_text(text, model, issues); break;
    case ArtifactKind::Trace: validate_trace(text, issues); break;
  }
  return report;
}

ValidationReport validate_file(const std::string& path, const QualityModel* model) {
  return validate_text(read_file(path), model);
}

}  // namespace cpforge
