#pragma once

// Re-derives the invariants of any artifact the toolkit writes. The file kind
// is sniffed from its first line.

#include <string>
#include <vector>

#include "cpforge/quality_model.hpp"

namespace cpforge {

enum class ArtifactKind { Dataset, LabeledSet, ClusterReport, Model, CpSet, Level, Trace };

std::string_view artifact_kind_name(ArtifactKind kind);

// Throws Error{ParseError} when the text matches no known format.
ArtifactKind sniff_artifact(const std::string& text);

struct ValidationReport {
  ArtifactKind kind = ArtifactKind::Dataset;
  std::vector<std::string> issues;

  bool clean() const { return issues.empty(); }
};

// Parses `text` as its sniffed kind (parse failures propagate as Error) and
// lists every violated invariant. With a model, CP sets and levels are also
// checked against it: model id, and p >= theta recomputed from the model.
ValidationReport validate_text(const std::string& text, const QualityModel* model = nullptr);
ValidationReport validate_file(const std::string& path, const QualityModel* model = nullptr);

}  // namespace cpforge
