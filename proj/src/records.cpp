#include "cpforge/records.hpp"

#include <sstream>

#include "cpforge/error.hpp"
#include "cpforge/io_util.hpp"

namespace cpforge {

using json = nlohmann::json;

json features_to_json(const ContentFeatures& f) {
  json j = json::object();
  const auto v = f.to_vector();
  const auto& names = feature_names();
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (names[i] == "density")
      j[std::string(names[i])] = v[i];
    else
      j[std::string(names[i])] = static_cast<int>(v[i]);
  }
  return j;
}

ContentFeatures features_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "features must be an object");
  std::array<double, kFeatureCount> v{};
  const auto& names = feature_names();
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    const std::string key(names[i]);
    if (!j.contains(key)) throw Error(ErrorCode::MissingField, "features." + key);
    if (!j[key].is_number()) throw Error(ErrorCode::ParseError, "features." + key + " must be numeric");
    v[i] = j[key].get<double>();
  }
  return ContentFeatures::from_vector(v);
}

json grid_to_json(const SegmentGrid& g) { return segment_rows(g); }

SegmentGrid grid_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "grid must be an array of strings");
  std::vector<std::string> rows;
  for (const auto& r : j) {
    if (!r.is_string()) throw Error(ErrorCode::ParseError, "grid rows must be strings");
    rows.push_back(r.get<std::string>());
  }
  return decode_rows(rows);
}

json record_to_json(const DatasetRecord& rec) {
  json j;
  j["id"] = rec.id;
  j["grid"] = grid_to_json(rec.grid);
  j["features"] = features_to_json(rec.features);
  return j;
}

DatasetRecord record_from_json(const json& j) {
  for (const char* key : {"id", "grid", "features"})
    if (!j.contains(key)) throw Error(ErrorCode::MissingField, std::string("record.") + key);
  if (!j["id"].is_number_integer()) throw Error(ErrorCode::ParseError, "record.id must be an integer");
  return {j["id"].get<int>(), grid_from_json(j["grid"]), features_from_json(j["features"])};
}

json parse_json_line(const std::string& line, int lineno, const std::string& what) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError,
                what + " line " + std::to_string(lineno) + ": " + e.what());
  }
}

namespace {

template <typename Fn>
void for_each_line(const std::string& text, Fn&& fn) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    fn(line, lineno);
  }
}

}  // namespace

std::string dataset_to_text(const Dataset& dataset) {
  std::string out;
  for (const auto& rec : dataset) out += record_to_json(rec).dump() + "\n";
  return out;
}

Dataset dataset_from_text(const std::string& text) {
  Dataset out;
  for_each_line(text, [&](const std::string& line, int lineno) {
    out.push_back(record_from_json(parse_json_line(line, lineno, "dataset")));
  });
  return out;
}

void write_dataset(const Dataset& dataset, const std::string& path) {
  write_file(path, dataset_to_text(dataset));
}

Dataset read_dataset(const std::string& path) { return dataset_from_text(read_file(path)); }

std::string labeled_to_text(const std::vector<LabeledRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    json j = record_to_json(r.record);
    j["label"] = std::string(label_name(r.label));
    j["source"] = r.source == LabelSource::Human ? "human" : "oracle";
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<LabeledRecord> labeled_from_text(const std::string& text) {
  std::vector<LabeledRecord> out;
  for_each_line(text, [&](const std::string& line, int lineno) {
    const json j = parse_json_line(line, lineno, "labeled set");
    for (const char* key : {"label", "source"})
      if (!j.contains(key) || !j[key].is_string())
        throw Error(ErrorCode::MissingField, std::string("labeled record.") + key);
    LabeledRecord r;
    r.record = record_from_json(j);
    r.label = parse_label(j["label"].get<std::string>());
    const auto source = j["source"].get<std::string>();
    if (source == "human")
      r.source = LabelSource::Human;
    else if (source == "oracle")
      r.source = LabelSource::Oracle;
    else
      throw Error(ErrorCode::ParseError, "labeled record.source must be human or oracle");
    out.push_back(std::move(r));
  });
  return out;
}

void write_labeled(const std::vector<LabeledRecord>& records, const std::string& path) {
  write_file(path, labeled_to_text(records));
}

std::vector<LabeledRecord> read_labeled(const std::string& path) {
  return labeled_from_text(read_file(path));
}

}  // namespace cpforge
