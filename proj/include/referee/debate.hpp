#pragma once

#include <map>
#include <string>
#include <vector>

#include "referee/backend.hpp"
#include "referee/prompting.hpp"
#include "referee/types.hpp"

namespace referee {

/// Texts of one evaluation item, always in original position order. For
/// dimension scoring the scored response sits in `compared_text_one`.
struct DebateItem {
  std::string item_id;
  std::string source_text;
  std::string compared_text_one;
  std::string compared_text_two;
  std::string fact_snippet;
};

inline constexpr const char* kSummarizerSpeaker = "Summarizer";
inline constexpr const char* kSummarizerAgentId = "summarizer";
inline constexpr const char* kTruncationMarker = "[earlier discussion truncated]";

/// Mutable state of one debate. Confined to the runner that owns it.
struct DebateState {
  std::map<std::string, ChatHistory> histories;  // by agent_id
  int turn = 0;
  std::vector<ChatMessage> buffer;
  std::vector<PromptRecord> prompts;    // every prompt sent, in call order
  std::vector<ChatMessage> messages;    // every utterance, in generation order
  std::map<std::string, std::string> final_utterances;  // agent_id -> last-turn text
};

/// Runs debates against a backend registry with a fixed set of prompts.
/// Stateless between calls; one runner may serve many threads.
class DebateRunner {
 public:
  DebateRunner(const BackendRegistry& registry, const PromptSet& prompts)
      : registry_(registry), prompts_(prompts) {}

  /// Validates the config against the registry and persona library, runs the
  /// configured strategy and parses each agent's final-turn utterance.
  Transcript run_debate(const DebateConfig& config, const DebateItem& item,
                        PositionOrder order = PositionOrder::Original) const;

  DebateState run_one_by_one(const DebateConfig& config, const DebateItem& item,
                             PositionOrder order = PositionOrder::Original) const;
  DebateState run_simultaneous(const DebateConfig& config, const DebateItem& item,
                               PositionOrder order = PositionOrder::Original) const;
  DebateState run_simultaneous_with_summarizer(const DebateConfig& config, const DebateItem& item,
                                               PositionOrder order = PositionOrder::Original) const;

  /// Full validation: DebateConfig invariants plus persona and backend resolution.
  void check(const DebateConfig& config) const;

 private:
  DebateState start(const DebateConfig& config) const;
  ChatMessage speak(const DebateConfig& config, const DebateItem& item, PositionOrder order,
                    const AgentSpec& agent, int turn, DebateState& state) const;
  void summarize(const DebateConfig& config, int turn, DebateState& state) const;
  std::string render_user_prompt(const DebateConfig& config, const DebateItem& item,
                                 PositionOrder order, const AgentSpec& agent,
                                 const ChatHistory& history) const;
  std::string role_text(const DebateConfig& config, const AgentSpec& agent) const;

  const BackendRegistry& registry_;
  const PromptSet& prompts_;
};

/// True when the configuration is the single-agent baseline, which leaves the
/// chat history and role description slots empty.
bool is_single_agent_baseline(const DebateConfig& config);

}  // namespace referee
