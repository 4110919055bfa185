#include "referee/types.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "referee/error.hpp"

namespace referee {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::EmptyRoster: return "EmptyRoster";
    case ErrorCode::InvalidTurns: return "InvalidTurns";
    case ErrorCode::ModeAggregationMismatch: return "ModeAggregationMismatch";
    case ErrorCode::MissingSummarizer: return "MissingSummarizer";
    case ErrorCode::DuplicateAgentId: return "DuplicateAgentId";
    case ErrorCode::UnknownPersona: return "UnknownPersona";
    case ErrorCode::UnknownBackend: return "UnknownBackend";
    case ErrorCode::EmptyContent: return "EmptyContent";
    case ErrorCode::HistoryOrder: return "HistoryOrder";
    case ErrorCode::InvalidSweep: return "InvalidSweep";
    case ErrorCode::MalformedTemplate: return "MalformedTemplate";
    case ErrorCode::MissingSlot: return "MissingSlot";
    case ErrorCode::UnknownSlot: return "UnknownSlot";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::ResponseEmpty: return "ResponseEmpty";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::NoMatchingScript: return "NoMatchingScript";
    case ErrorCode::SummarizerFailure: return "SummarizerFailure";
    case ErrorCode::UnparseableVerdict: return "UnparseableVerdict";
    case ErrorCode::OutOfRangeScore: return "OutOfRangeScore";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::MissingResults: return "MissingResults";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::OutOfScale: return "OutOfScale";
    case ErrorCode::ReplayMismatch: return "ReplayMismatch";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::OneByOne: return "one_by_one";
    case Strategy::SimultaneousTalk: return "simultaneous_talk";
    case Strategy::SimultaneousTalkWithSummarizer: return "simultaneous_talk_with_summarizer";
  }
  return "";
}

std::string_view to_string(Aggregation a) {
  return a == Aggregation::MajorityVote ? "majority_vote" : "average_score";
}

std::string_view to_string(PositionOrder p) {
  return p == PositionOrder::Original ? "original" : "swapped";
}

std::string_view to_string(Preference p) {
  switch (p) {
    case Preference::Assistant1Wins: return "Assistant1Wins";
    case Preference::Assistant2Wins: return "Assistant2Wins";
    case Preference::Tie: return "Tie";
  }
  return "";
}

Strategy parse_strategy(std::string_view name) {
  for (auto s : {Strategy::OneByOne, Strategy::SimultaneousTalk,
                 Strategy::SimultaneousTalkWithSummarizer}) {
    if (to_string(s) == name) return s;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown strategy '" + std::string(name) + "'");
}

Aggregation parse_aggregation(std::string_view name) {
  if (name == "majority_vote") return Aggregation::MajorityVote;
  if (name == "average_score") return Aggregation::AverageScore;
  throw Error(ErrorCode::InvalidConfig, "unknown aggregation '" + std::string(name) + "'");
}

PositionOrder parse_position_order(std::string_view name) {
  if (name == "original") return PositionOrder::Original;
  if (name == "swapped") return PositionOrder::Swapped;
  throw Error(ErrorCode::InvalidConfig, "unknown position order '" + std::string(name) + "'");
}

Preference parse_preference(std::string_view name) {
  for (auto p : {Preference::Assistant1Wins, Preference::Assistant2Wins, Preference::Tie}) {
    if (to_string(p) == name) return p;
  }
  throw Error(ErrorCode::SchemaViolation, "unknown label '" + std::string(name) + "'");
}

std::string trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return std::string(s);
}

void validate(const DebateConfig& config) {
  if (config.agents.empty()) {
    throw Error(ErrorCode::EmptyRoster, "debate needs at least one agent");
  }
  if (config.turns < 1) {
    throw Error(ErrorCode::InvalidTurns,
                "turns must be >= 1, got " + std::to_string(config.turns));
  }
  const bool pairwise = config.mode.is_pairwise();
  if (pairwise != (config.aggregation == Aggregation::MajorityVote)) {
    throw Error(ErrorCode::ModeAggregationMismatch,
                pairwise ? "pairwise mode requires majority_vote"
                         : "dimension scoring requires average_score");
  }
  if (!pairwise && config.mode.dimension.empty()) {
    throw Error(ErrorCode::InvalidConfig, "dimension scoring needs a dimension name");
  }
  if (config.mode.scale.min > config.mode.scale.max) {
    throw Error(ErrorCode::InvalidConfig, "score scale min exceeds max");
  }
  if (config.strategy == Strategy::SimultaneousTalkWithSummarizer &&
      (!config.summarizer_backend_id || config.summarizer_backend_id->empty())) {
    throw Error(ErrorCode::MissingSummarizer,
                "simultaneous_talk_with_summarizer requires a summarizer backend");
  }
  std::set<std::string> ids;
  std::set<std::string> names;
  for (const auto& agent : config.agents) {
    if (agent.agent_id.empty()) throw Error(ErrorCode::InvalidConfig, "agent_id is empty");
    if (agent.display_name.empty()) {
      throw Error(ErrorCode::InvalidConfig, "agent " + agent.agent_id + " has no display_name");
    }
    if (!ids.insert(agent.agent_id).second) {
      throw Error(ErrorCode::DuplicateAgentId, "duplicate agent_id " + agent.agent_id);
    }
    if (!names.insert(agent.display_name).second) {
      throw Error(ErrorCode::InvalidConfig, "duplicate display_name " + agent.display_name);
    }
  }
}

void validate(const ChatMessage& message) {
  if (trim(message.content).empty()) {
    throw Error(ErrorCode::EmptyContent, "message from " + message.speaker + " is blank");
  }
  if (message.turn < 1) {
    throw Error(ErrorCode::InvalidTurns, "message turn must be >= 1");
  }
}

void validate(const ChatHistory& history) {
  int last_turn = 0;
  for (const auto& m : history.messages) {
    validate(m);
    if (m.turn < last_turn) {
      throw Error(ErrorCode::HistoryOrder, "history of " + history.owner + " goes back in turns");
    }
    last_turn = m.turn;
  }
}

// ---- JSON ----

void to_json(Json& j, const ScoreScale& v) { j = Json::array({v.min, v.max}); }

void from_json(const Json& j, ScoreScale& v) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::SchemaViolation, "scale must be [min, max]");
  v.min = j.at(0).get<double>();
  v.max = j.at(1).get<double>();
}

void to_json(Json& j, const EvalMode& v) {
  if (v.is_pairwise()) {
    j = Json{{"kind", "pairwise"}, {"scale", v.scale}};
  } else {
    j = Json{{"kind", "dimension_score"}, {"dimension", v.dimension}, {"scale", v.scale}};
  }
}

void from_json(const Json& j, EvalMode& v) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "pairwise") {
    v = EvalMode::pairwise();
  } else if (kind == "dimension_score") {
    v.kind = EvalMode::Kind::DimensionScore;
    v.dimension = j.at("dimension").get<std::string>();
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown mode '" + kind + "'");
  }
  if (j.contains("scale")) v.scale = j.at("scale").get<ScoreScale>();
}

void to_json(Json& j, const AgentSpec& v) {
  j = Json{{"agent_id", v.agent_id},
           {"display_name", v.display_name},
           {"persona_id", v.persona_id},
           {"backend_id", v.backend_id}};
}

void from_json(const Json& j, AgentSpec& v) {
  j.at("agent_id").get_to(v.agent_id);
  j.at("display_name").get_to(v.display_name);
  j.at("persona_id").get_to(v.persona_id);
  j.at("backend_id").get_to(v.backend_id);
}

void to_json(Json& j, const DebateConfig& v) {
  j = Json{{"strategy", to_string(v.strategy)},
           {"agents", v.agents},
           {"turns", v.turns},
           {"mode", v.mode},
           {"aggregation", to_string(v.aggregation)},
           {"position_calibration", v.position_calibration},
           {"diverse_roles", v.diverse_roles},
           {"summarizer_backend_id", v.summarizer_backend_id ? Json(*v.summarizer_backend_id) : Json()},
           {"literal_one_by_one", v.literal_one_by_one},
           {"max_prompt_chars", v.max_prompt_chars}};
}

void from_json(const Json& j, DebateConfig& v) {
  v.strategy = parse_strategy(j.at("strategy").get<std::string>());
  j.at("agents").get_to(v.agents);
  j.at("turns").get_to(v.turns);
  j.at("mode").get_to(v.mode);
  v.aggregation = parse_aggregation(j.at("aggregation").get<std::string>());
  j.at("position_calibration").get_to(v.position_calibration);
  j.at("diverse_roles").get_to(v.diverse_roles);
  const auto& summarizer = j.at("summarizer_backend_id");
  v.summarizer_backend_id =
      summarizer.is_null() ? std::nullopt : std::optional(summarizer.get<std::string>());
  v.literal_one_by_one = j.value("literal_one_by_one", false);
  v.max_prompt_chars = j.value("max_prompt_chars", std::size_t{0});
}

void to_json(Json& j, const ChatMessage& v) {
  j = Json{{"speaker", v.speaker}, {"turn", v.turn}, {"content", v.content}};
}

void from_json(const Json& j, ChatMessage& v) {
  j.at("speaker").get_to(v.speaker);
  j.at("turn").get_to(v.turn);
  j.at("content").get_to(v.content);
}

void to_json(Json& j, const ChatHistory& v) {
  j = Json{{"owner", v.owner}, {"messages", v.messages}};
}

void from_json(const Json& j, ChatHistory& v) {
  j.at("owner").get_to(v.owner);
  j.at("messages").get_to(v.messages);
}

void to_json(Json& j, const Verdict& v) {
  Json payload;
  if (const auto* pair = std::get_if<PairScores>(&v.payload)) {
    payload = Json{{"score_1", pair->score_1}, {"score_2", pair->score_2}};
  } else {
    payload = Json{{"value", std::get<DimScore>(v.payload).value}};
  }
  j = Json{{"agent_id", v.agent_id}, {"raw_text", v.raw_text}, {"payload", payload}};
}

void from_json(const Json& j, Verdict& v) {
  j.at("agent_id").get_to(v.agent_id);
  j.at("raw_text").get_to(v.raw_text);
  const auto& payload = j.at("payload");
  if (payload.contains("value")) {
    v.payload = DimScore{payload.at("value").get<double>()};
  } else {
    v.payload = PairScores{payload.at("score_1").get<double>(), payload.at("score_2").get<double>()};
  }
}

void to_json(Json& j, const AggregateResult& v) {
  if (v.is_label()) {
    j = Json{{"label", to_string(v.preference())}};
  } else {
    j = Json{{"mean", v.score()}};
  }
}

void from_json(const Json& j, AggregateResult& v) {
  if (j.contains("label")) {
    v = AggregateResult::label(parse_preference(j.at("label").get<std::string>()));
  } else {
    v = AggregateResult::mean(j.at("mean").get<double>());
  }
}

void to_json(Json& j, const PromptRecord& v) {
  j = Json{{"agent_id", v.agent_id},
           {"turn", v.turn},
           {"system_prompt", v.system_prompt},
           {"user_prompt", v.user_prompt}};
}

void from_json(const Json& j, PromptRecord& v) {
  j.at("agent_id").get_to(v.agent_id);
  j.at("turn").get_to(v.turn);
  j.at("system_prompt").get_to(v.system_prompt);
  j.at("user_prompt").get_to(v.user_prompt);
}

void to_json(Json& j, const Transcript& v) {
  j = Json{{"item_id", v.item_id},
           {"position_order", to_string(v.position_order)},
           {"config", v.config},
           {"run_config", v.run_config},
           {"prompts", v.prompts},
           {"messages", v.messages},
           {"verdicts", v.verdicts},
           {"final_result", v.final_result}};
}

void from_json(const Json& j, Transcript& v) {
  j.at("item_id").get_to(v.item_id);
  v.position_order = parse_position_order(j.at("position_order").get<std::string>());
  j.at("config").get_to(v.config);
  v.run_config = j.value("run_config", Json());
  j.at("prompts").get_to(v.prompts);
  j.at("messages").get_to(v.messages);
  j.at("verdicts").get_to(v.verdicts);
  j.at("final_result").get_to(v.final_result);
}

}  // namespace referee
