#pragma once

// Line-delimited JSON records shared by the dataset, labeled-set and CP-set
// files. Field names:
//   dataset record:  {"id", "grid": [14 strings], "features": {name: number}}
//   labeled record:  dataset record + {"label": "accept"|"reject",
//                                      "source": "human"|"oracle"}

#include <string>
#include <vector>

#include "cpforge/quality_model.hpp"
#include "cpforge/sampler.hpp"
#include "json.hpp"

namespace cpforge {

nlohmann::json features_to_json(const ContentFeatures& f);
ContentFeatures features_from_json(const nlohmann::json& j);

nlohmann::json grid_to_json(const SegmentGrid& g);
SegmentGrid grid_from_json(const nlohmann::json& j);

nlohmann::json record_to_json(const DatasetRecord& rec);
DatasetRecord record_from_json(const nlohmann::json& j);

// One compact JSON object per line.
std::string dataset_to_text(const Dataset& dataset);
Dataset dataset_from_text(const std::string& text);
void write_dataset(const Dataset& dataset, const std::string& path);
Dataset read_dataset(const std::string& path);

enum class LabelSource { Human, Oracle };

struct LabeledRecord {
  DatasetRecord record;
  Label label = Label::Reject;
  LabelSource source = LabelSource::Oracle;
};

std::string labeled_to_text(const std::vector<LabeledRecord>& records);
std::vector<LabeledRecord> labeled_from_text(const std::string& text);
void write_labeled(const std::vector<LabeledRecord>& records, const std::string& path);
std::vector<LabeledRecord> read_labeled(const std::string& path);

// Parses one JSON line; throws Error{ParseError} with the line number.
nlohmann::json parse_json_line(const std::string& line, int lineno, const std::string& what);

}  // namespace cpforge
