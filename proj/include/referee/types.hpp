#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace referee {

using Json = nlohmann::json;

enum class Strategy { OneByOne, SimultaneousTalk, SimultaneousTalkWithSummarizer };
enum class Aggregation { MajorityVote, AverageScore };
enum class PositionOrder { Original, Swapped };
enum class Preference { Assistant1Wins, Assistant2Wins, Tie };

std::string_view to_string(Strategy s);
std::string_view to_string(Aggregation a);
std::string_view to_string(PositionOrder p);
std::string_view to_string(Preference p);

// Parsers throw Error{InvalidConfig} (or SchemaViolation for labels) on unknown names.
Strategy parse_strategy(std::string_view name);
Aggregation parse_aggregation(std::string_view name);
PositionOrder parse_position_order(std::string_view name);
Preference parse_preference(std::string_view name);

/// Inclusive numeric range a score must fall in.
struct ScoreScale {
  double min = 1.0;
  double max = 10.0;

  bool contains(double v) const { return v >= min && v <= max; }
  bool operator==(const ScoreScale&) const = default;
};

inline constexpr ScoreScale kPairwiseScale{1.0, 10.0};

/// Pairwise comparison of two responses, or a single response scored on one
/// named dimension of a dataset-declared scale.
struct EvalMode {
  enum class Kind { Pairwise, DimensionScore };

  Kind kind = Kind::Pairwise;
  std::string dimension;  // empty for Pairwise
  ScoreScale scale = kPairwiseScale;

  static EvalMode pairwise() { return {}; }
  static EvalMode dimension_score(std::string dim, ScoreScale scale) {
    return {Kind::DimensionScore, std::move(dim), scale};
  }
  bool is_pairwise() const { return kind == Kind::Pairwise; }
  bool operator==(const EvalMode&) const = default;
};

struct AgentSpec {
  std::string agent_id;
  std::string display_name;
  std::string persona_id;
  std::string backend_id;

  bool operator==(const AgentSpec&) const = default;
};

struct DebateConfig {
  Strategy strategy = Strategy::OneByOne;
  std::vector<AgentSpec> agents;
  int turns = 2;
  EvalMode mode;
  Aggregation aggregation = Aggregation::MajorityVote;
  bool position_calibration = true;
  bool diverse_roles = true;
  std::optional<std::string> summarizer_backend_id;
  // Propagate one-by-one utterances only to agents at or after the speaker,
  // exactly as the published pseudocode loop reads.
  bool literal_one_by_one = false;
  // Upper bound on a rendered user prompt in characters; 0 disables truncation.
  std::size_t max_prompt_chars = 0;

  bool operator==(const DebateConfig&) const = default;
};

struct ChatMessage {
  std::string speaker;
  int turn = 1;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct ChatHistory {
  std::string owner;
  std::vector<ChatMessage> messages;

  bool operator==(const ChatHistory&) const = default;
};

struct PairScores {
  double score_1 = 0;
  double score_2 = 0;
  bool operator==(const PairScores&) const = default;
};

struct DimScore {
  double value = 0;
  bool operator==(const DimScore&) const = default;
};

using VerdictPayload = std::variant<PairScores, DimScore>;

struct Verdict {
  std::string agent_id;
  std::string raw_text;
  VerdictPayload payload;

  bool operator==(const Verdict&) const = default;
};

/// Pairwise label or dimension mean.
struct AggregateResult {
  std::variant<Preference, double> value;

  static AggregateResult label(Preference p) { return {p}; }
  static AggregateResult mean(double m) { return {m}; }
  bool is_label() const { return std::holds_alternative<Preference>(value); }
  Preference preference() const { return std::get<Preference>(value); }
  double score() const { return std::get<double>(value); }
  bool operator==(const AggregateResult&) const = default;
};

/// One prompt pair sent to a backend during a debate.
struct PromptRecord {
  std::string agent_id;
  int turn = 1;
  std::string system_prompt;
  std::string user_prompt;

  bool operator==(const PromptRecord&) const = default;
};

struct Transcript {
  std::string item_id;
  DebateConfig config;
  Json run_config;  // effective run configuration, provenance only
  std::vector<PromptRecord> prompts;
  std::vector<ChatMessage> messages;
  std::vector<Verdict> verdicts;
  AggregateResult final_result;
  PositionOrder position_order = PositionOrder::Original;

  bool operator==(const Transcript&) const = default;
};

/// Validates a debate configuration, throwing Error with a code specific to
/// the violated invariant. Persona and backend resolution are checked by the
/// callers that own those registries.
void validate(const DebateConfig& config);

/// Throws Error{EmptyContent} when the content is blank after trimming.
void validate(const ChatMessage& message);

/// Throws Error{HistoryOrder} when turns decrease, or EmptyContent.
void validate(const ChatHistory& history);

// JSON mapping. Field names are the ones used in the canonical records.
void to_json(Json& j, const ScoreScale& v);
void from_json(const Json& j, ScoreScale& v);
void to_json(Json& j, const EvalMode& v);
void from_json(const Json& j, EvalMode& v);
void to_json(Json& j, const AgentSpec& v);
void from_json(const Json& j, AgentSpec& v);
void to_json(Json& j, const DebateConfig& v);
void from_json(const Json& j, DebateConfig& v);
void to_json(Json& j, const ChatMessage& v);
void from_json(const Json& j, ChatMessage& v);
void to_json(Json& j, const ChatHistory& v);
void from_json(const Json& j, ChatHistory& v);
void to_json(Json& j, const Verdict& v);
void from_json(const Json& j, Verdict& v);
void to_json(Json& j, const AggregateResult& v);
void from_json(const Json& j, AggregateResult& v);
void to_json(Json& j, const PromptRecord& v);
void from_json(const Json& j, PromptRecord& v);
void to_json(Json& j, const Transcript& v);
void from_json(const Json& j, Transcript& v);

/// One compact JSON object, no trailing newline.
template <typename T>
std::string to_record(const T& value) {
  return Json(value).dump();
}

template <typename T>
T from_record(std::string_view line) {
  return Json::parse(line).get<T>();
}

std::string trim(std::string_view s);

}  // namespace referee
