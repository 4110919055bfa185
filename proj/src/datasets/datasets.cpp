#include "referee/datasets.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "referee/error.hpp"
#include "referee/extraction.hpp"

namespace referee {
namespace {

constexpr int kFormatVersion = 1;

struct Line {
  int number;
  Json value;
};

// Parses every non-blank line; the first one must be a header of `format`.
std::pair<std::optional<Line>, std::vector<Line>> read_records(const std::filesystem::path& path,
                                                               std::string_view format) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::optional<Line> header;
  std::vector<Line> records;
  std::string text;
  int number = 0;
  while (std::getline(in, text)) {
    ++number;
    if (trim(text).empty()) continue;
    Json value;
    try {
      value = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
    if (!value.is_object()) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(number) + ": not an object");
    }
    if (!header) {
      if (value.value("format", "") != format) {
        throw Error(ErrorCode::SchemaViolation,
                    path.string() + ": header must declare format \"" + std::string(format) + "\"");
      }
      if (value.value("version", 0) != kFormatVersion) {
        throw Error(ErrorCode::SchemaViolation, path.string() + ": unsupported format version");
      }
      header = Line{number, std::move(value)};
      continue;
    }
    records.push_back({number, std::move(value)});
  }
  return {std::move(header), std::move(records)};
}

std::string where(const std::filesystem::path& path, int line) {
  return path.string() + ":" + std::to_string(line);
}

void require_text(const std::string& value, const char* field, const std::filesystem::path& path, int line) {
  if (trim(value).empty()) {
    throw Error(ErrorCode::SchemaViolation, where(path, line) + ": field '" + field + "' is empty");
  }
}

// Converts nlohmann type/key errors into SchemaViolation with a location.
template <typename T>
T decode(const Line& line, const std::filesystem::path& path) {
  try {
    return line.value.get<T>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, where(path, line.number) + ": " + e.what());
  } catch (const Error& e) {
    throw Error(e.code(), where(path, line.number) + ": " + e.what());
  }
}

}  // namespace

std::string_view to_string(DatasetKind kind) {
  return kind == DatasetKind::Pairwise ? "pairwise" : "scoring";
}

DatasetKind parse_dataset_kind(std::string_view name) {
  if (name == "pairwise") return DatasetKind::Pairwise;
  if (name == "scoring") return DatasetKind::Scoring;
  throw Error(ErrorCode::InvalidConfig, "unknown dataset kind '" + std::string(name) + "'");
}

const std::vector<std::string>& scoring_dimensions() {
  static const std::vector<std::string> dims = {"naturalness", "coherence", "engagingness",
                                                "groundedness"};
  return dims;
}

void to_json(Json& j, const PairwiseItem& v) {
  j = Json{{"item_id", v.item_id},
           {"question", v.question},
           {"response_1", v.response_1},
           {"response_2", v.response_2},
           {"human_label", to_string(v.human_label)}};
  if (v.per_annotator_labels) {
    Json labels = Json::array();
    for (auto p : *v.per_annotator_labels) labels.push_back(to_string(p));
    j["per_annotator_labels"] = labels;
  }
}

void from_json(const Json& j, PairwiseItem& v) {
  j.at("item_id").get_to(v.item_id);
  j.at("question").get_to(v.question);
  j.at("response_1").get_to(v.response_1);
  j.at("response_2").get_to(v.response_2);
  v.human_label = parse_preference(j.at("human_label").get<std::string>());
  v.per_annotator_labels.reset();
  if (j.contains("per_annotator_labels") && !j.at("per_annotator_labels").is_null()) {
    std::vector<Preference> labels;
    for (const auto& l : j.at("per_annotator_labels")) labels.push_back(parse_preference(l.get<std::string>()));
    v.per_annotator_labels = std::move(labels);
  }
}

void to_json(Json& j, const ScoringItem& v) {
  j = Json{{"item_id", v.item_id},
           {"dialogue_context", v.dialogue_context},
           {"response", v.response},
           {"system_id", v.system_id},
           {"human_scores", v.human_scores}};
  if (v.fact_snippet) j["fact_snippet"] = *v.fact_snippet;
  if (!v.scale.empty()) j["scale"] = v.scale;
}

void from_json(const Json& j, ScoringItem& v) {
  j.at("item_id").get_to(v.item_id);
  j.at("dialogue_context").get_to(v.dialogue_context);
  j.at("response").get_to(v.response);
  j.at("system_id").get_to(v.system_id);
  j.at("human_scores").get_to(v.human_scores);
  v.fact_snippet.reset();
  if (j.contains("fact_snippet") && !j.at("fact_snippet").is_null()) {
    v.fact_snippet = j.at("fact_snippet").get<std::string>();
  }
  v.scale.clear();
  if (j.contains("scale")) j.at("scale").get_to(v.scale);
}

PairwiseLoad load_pairwise(const std::filesystem::path& path) {
  auto [header, records] = read_records(path, "pairwise");
  PairwiseLoad out;
  if (!header) {
    out.warnings.push_back(path.string() + ": empty dataset");
    return out;
  }
  std::set<std::string> seen;
  for (const auto& line : records) {
    auto item = decode<PairwiseItem>(line, path);
    require_text(item.item_id, "item_id", path, line.number);
    require_text(item.question, "question", path, line.number);
    require_text(item.response_1, "response_1", path, line.number);
    require_text(item.response_2, "response_2", path, line.number);
    if (item.per_annotator_labels && !item.per_annotator_labels->empty() &&
        majority_vote(*item.per_annotator_labels) != item.human_label) {
      throw Error(ErrorCode::SchemaViolation,
                  where(path, line.number) + ": human_label disagrees with annotator majority");
    }
    if (!seen.insert(item.item_id).second) {
      throw Error(ErrorCode::DuplicateId, where(path, line.number) + ": duplicate item_id " + item.item_id);
    }
    out.items.push_back(std::move(item));
  }
  if (out.items.empty()) out.warnings.push_back(path.string() + ": empty dataset");
  return out;
}

ScoringLoad load_scoring(const std::filesystem::path& path) {
  auto [header, records] = read_records(path, "scoring");
  ScoringLoad out;
  if (!header) {
    out.warnings.push_back(path.string() + ": empty dataset");
    return out;
  }
  const auto& dims = scoring_dimensions();
  auto known = [&](const std::string& d) { return std::find(dims.begin(), dims.end(), d) != dims.end(); };

  try {
    header->value.at("scales").get_to(out.scales);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, where(path, header->number) + ": bad scales: " + e.what());
  }
  for (const auto& [dim, scale] : out.scales) {
    if (!known(dim)) {
      throw Error(ErrorCode::SchemaViolation, where(path, header->number) + ": unknown dimension " + dim);
    }
    if (scale.min >= scale.max) {
      throw Error(ErrorCode::SchemaViolation, where(path, header->number) + ": empty scale for " + dim);
    }
  }

  std::set<std::string> seen;
  for (const auto& line : records) {
    auto item = decode<ScoringItem>(line, path);
    require_text(item.item_id, "item_id", path, line.number);
    require_text(item.dialogue_context, "dialogue_context", path, line.number);
    require_text(item.response, "response", path, line.number);
    require_text(item.system_id, "system_id", path, line.number);
    if (item.human_scores.empty()) {
      throw Error(ErrorCode::SchemaViolation, where(path, line.number) + ": no human_scores");
    }
    for (const auto& [dim, value] : item.human_scores) {
      if (!known(dim)) {
        throw Error(ErrorCode::SchemaViolation, where(path, line.number) + ": unknown dimension " + dim);
      }
      auto it = out.scales.find(dim);
      if (it == out.scales.end()) {
        throw Error(ErrorCode::SchemaViolation,
                    where(path, line.number) + ": header declares no scale for " + dim);
      }
      if (!it->second.contains(value)) {
        throw Error(ErrorCode::OutOfScale, where(path, line.number) + ": " + dim + " score " +
                                               format_number(value) + " outside its scale");
      }
    }
    for (const auto& [dim, scale] : item.scale) {
      auto it = out.scales.find(dim);
      if (it == out.scales.end() || !(it->second == scale)) {
        throw Error(ErrorCode::SchemaViolation,
                    where(path, line.number) + ": item scale for " + dim + " contradicts header");
      }
    }
    item.scale = out.scales;
    if (!seen.insert(item.item_id).second) {
      throw Error(ErrorCode::DuplicateId, where(path, line.number) + ": duplicate item_id " + item.item_id);
    }
    out.items.push_back(std::move(item));
  }
  if (out.items.empty()) out.warnings.push_back(path.string() + ": empty dataset");
  return out;
}

Dataset load_dataset(const std::filesystem::path& path, DatasetKind kind) {
  Dataset data;
  data.kind = kind;
  if (kind == DatasetKind::Pairwise) {
    auto loaded = load_pairwise(path);
    data.pairwise = std::move(loaded.items);
    data.warnings = std::move(loaded.warnings);
  } else {
    auto loaded = load_scoring(path);
    data.scoring = std::move(loaded.items);
    data.scales = std::move(loaded.scales);
    data.warnings = std::move(loaded.warnings);
  }
  return data;
}

DebateItem to_debate_item(const PairwiseItem& item) {
  return {item.item_id, item.question, item.response_1, item.response_2, ""};
}

DebateItem to_debate_item(const ScoringItem& item) {
  return {item.item_id, item.dialogue_context, item.response, "", item.fact_snippet.value_or("")};
}

}  // namespace referee
