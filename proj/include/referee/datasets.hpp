#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "referee/debate.hpp"
#include "referee/types.hpp"

namespace referee {

struct PairwiseItem {
  std::string item_id;
  std::string question;
  std::string response_1;
  std::string response_2;
  Preference human_label = Preference::Tie;
  std::optional<std::vector<Preference>> per_annotator_labels;

  bool operator==(const PairwiseItem&) const = default;
};

struct ScoringItem {
  std::string item_id;
  std::string dialogue_context;
  std::optional<std::string> fact_snippet;
  std::string response;
  std::string system_id;
  std::map<std::string, double> human_scores;
  std::map<std::string, ScoreScale> scale;

  bool operator==(const ScoringItem&) const = default;
};

enum class DatasetKind { Pairwise, Scoring };

std::string_view to_string(DatasetKind kind);
DatasetKind parse_dataset_kind(std::string_view name);

/// The four dialogue dimensions accepted for scoring, in report order.
const std::vector<std::string>& scoring_dimensions();

struct LoadResult {
  std::vector<std::string> warnings;
};

struct PairwiseLoad : LoadResult {
  std::vector<PairwiseItem> items;
};

struct ScoringLoad : LoadResult {
  std::vector<ScoringItem> items;
  std::map<std::string, ScoreScale> scales;  // from the header
};

/// JSON-lines file: a header {"format": "pairwise", "version": 1} followed by
/// one item per line. Throws ParseError, SchemaViolation or DuplicateId.
PairwiseLoad load_pairwise(const std::filesystem::path& path);

/// JSON-lines file: a header {"format": "scoring", "version": 1, "scales":
/// {dimension: [min, max]}} followed by one item per line. Throws as
/// load_pairwise, plus OutOfScale.
ScoringLoad load_scoring(const std::filesystem::path& path);

/// A loaded dataset of either kind.
struct Dataset {
  DatasetKind kind = DatasetKind::Pairwise;
  std::vector<PairwiseItem> pairwise;
  std::vector<ScoringItem> scoring;
  std::map<std::string, ScoreScale> scales;
  std::vector<std::string> warnings;

  std::size_t size() const { return kind == DatasetKind::Pairwise ? pairwise.size() : scoring.size(); }
};

Dataset load_dataset(const std::filesystem::path& path, DatasetKind kind);

DebateItem to_debate_item(const PairwiseItem& item);
DebateItem to_debate_item(const ScoringItem& item);

void to_json(Json& j, const PairwiseItem& v);
void from_json(const Json& j, PairwiseItem& v);
/// `scale` is optional on input; the loader fills it from the file header.
void to_json(Json& j, const ScoringItem& v);
void from_json(const Json& j, ScoringItem& v);

}  // namespace referee
