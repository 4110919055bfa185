#include "referee/debate.hpp"

#include "referee/error.hpp"
#include "referee/extraction.hpp"

namespace referee {
namespace {

std::string with_context(const AgentSpec& agent, int turn, const Error& e) {
  return "agent " + agent.agent_id + " turn " + std::to_string(turn) + ": " + e.what();
}

}  // namespace

bool is_single_agent_baseline(const DebateConfig& config) {
  return config.agents.size() == 1 && config.turns == 1;
}

void DebateRunner::check(const DebateConfig& config) const {
  validate(config);
  for (const auto& agent : config.agents) {
    if (!prompts_.personas.contains(agent.persona_id)) {
      throw Error(ErrorCode::UnknownPersona,
                  "agent " + agent.agent_id + " uses unknown persona '" + agent.persona_id + "'");
    }
    if (!registry_.contains(agent.backend_id)) {
      throw Error(ErrorCode::UnknownBackend,
                  "agent " + agent.agent_id + " uses unknown backend '" + agent.backend_id + "'");
    }
  }
  if (config.strategy == Strategy::SimultaneousTalkWithSummarizer &&
      !registry_.contains(*config.summarizer_backend_id)) {
    throw Error(ErrorCode::UnknownBackend,
                "unknown summarizer backend '" + *config.summarizer_backend_id + "'");
  }
}

std::string DebateRunner::role_text(const DebateConfig& config, const AgentSpec& agent) const {
  if (is_single_agent_baseline(config)) return {};
  const auto& id = config.diverse_roles ? agent.persona_id : std::string(PersonaLibrary::kAnnotator);
  return prompts_.personas.persona(id).description;
}

std::string DebateRunner::render_user_prompt(const DebateConfig& config, const DebateItem& item,
                                             PositionOrder order, const AgentSpec& agent,
                                             const ChatHistory& history) const {
  const bool pairwise = config.mode.is_pairwise();
  const auto& tmpl = pairwise ? prompts_.pairwise : prompts_.dimension;
  const bool swapped = order == PositionOrder::Swapped;

  SlotBindings bindings{{"source_text", item.source_text},
                        {"fact_snippet", item.fact_snippet},
                        {"role_description", role_text(config, agent)},
                        {"agent_name", agent.display_name},
                        {"chat_history", ""}};
  if (pairwise) {
    bindings["compared_text_one"] = swapped ? item.compared_text_two : item.compared_text_one;
    bindings["compared_text_two"] = swapped ? item.compared_text_one : item.compared_text_two;
  } else {
    bindings["response"] = item.compared_text_one;
    bindings["dimension"] = config.mode.dimension;
    bindings["scale_min"] = format_number(config.mode.scale.min);
    bindings["scale_max"] = format_number(config.mode.scale.max);
  }
  bindings = bindings_for(tmpl, bindings);

  if (is_single_agent_baseline(config) || !tmpl.uses("chat_history")) {
    return render_prompt(tmpl, bindings);
  }
  bindings["chat_history"] = render_chat_history(history);
  auto prompt = render_prompt(tmpl, bindings);
  if (config.max_prompt_chars == 0 || prompt.size() <= config.max_prompt_chars) return prompt;

  // Drop whole messages, oldest first, until the prompt fits.
  ChatHistory kept = history;
  while (!kept.messages.empty() && prompt.size() > config.max_prompt_chars) {
    kept.messages.erase(kept.messages.begin());
    auto rendered = std::string(kTruncationMarker);
    if (!kept.messages.empty()) rendered += "\n" + render_chat_history(kept);
    bindings["chat_history"] = std::move(rendered);
    prompt = render_prompt(tmpl, bindings);
  }
  return prompt;
}

DebateState DebateRunner::start(const DebateConfig& config) const {
  check(config);
  DebateState state;
  for (const auto& agent : config.agents) {
    state.histories.emplace(agent.agent_id, ChatHistory{agent.agent_id, {}});
  }
  return state;
}

ChatMessage DebateRunner::speak(const DebateConfig& config, const DebateItem& item,
                                PositionOrder order, const AgentSpec& agent, int turn,
                                DebateState& state) const {
  const auto& history = state.histories.at(agent.agent_id);
  PromptRecord record{agent.agent_id, turn, role_text(config, agent),
                      render_user_prompt(config, item, order, agent, history)};
  std::string reply;
  try {
    reply = registry_.chat(agent.backend_id, record.system_prompt, record.user_prompt);
  } catch (const Error& e) {
    throw Error(e.code(), with_context(agent, turn, e));
  }
  state.prompts.push_back(std::move(record));
  ChatMessage message{agent.display_name, turn, std::move(reply)};
  state.messages.push_back(message);
  if (turn == config.turns) state.final_utterances[agent.agent_id] = message.content;
  return message;
}

DebateState DebateRunner::run_one_by_one(const DebateConfig& config, const DebateItem& item,
                                         PositionOrder order) const {
  if (config.strategy != Strategy::OneByOne) {
    throw Error(ErrorCode::InvalidConfig, "run_one_by_one called for another strategy");
  }
  auto state = start(config);
  const auto n_agents = config.agents.size();
  for (int t = 1; t <= config.turns; ++t) {
    state.turn = t;
    for (std::size_t n = 0; n < n_agents; ++n) {
      auto message = speak(config, item, order, config.agents[n], t, state);
      if (config.literal_one_by_one) {
        // for m <- n..N: if m > 1: H_m += h_n   (1-based)
        for (std::size_t m = n; m < n_agents; ++m) {
          if (m > 0) state.histories.at(config.agents[m].agent_id).messages.push_back(message);
        }
      } else {
        for (const auto& listener : config.agents) {
          state.histories.at(listener.agent_id).messages.push_back(message);
        }
      }
    }
  }
  return state;
}

DebateState DebateRunner::run_simultaneous(const DebateConfig& config, const DebateItem& item,
                                           PositionOrder order) const {
  if (config.strategy != Strategy::SimultaneousTalk) {
    throw Error(ErrorCode::InvalidConfig, "run_simultaneous called for another strategy");
  }
  auto state = start(config);
  for (int t = 1; t <= config.turns; ++t) {
    state.turn = t;
    state.buffer.clear();
    for (const auto& agent : config.agents) {
      state.buffer.push_back(speak(config, item, order, agent, t, state));
    }
    for (auto& [id, history] : state.histories) {
      history.messages.insert(history.messages.end(), state.buffer.begin(), state.buffer.end());
    }
    state.buffer.clear();
  }
  return state;
}

void DebateRunner::summarize(const DebateConfig& config, int turn, DebateState& state) const {
  const auto& backend_id = *config.summarizer_backend_id;
  const auto discussion = render_chat_history(ChatHistory{kSummarizerAgentId, state.buffer});
  PromptRecord record{kSummarizerAgentId, turn, "",
                      render_prompt(prompts_.summarizer,
                                    bindings_for(prompts_.summarizer, {{"chat_history", discussion}}))};
  std::string summary;
  try {
    summary = registry_.chat(backend_id, record.system_prompt, record.user_prompt);
  } catch (const Error& e) {
    throw Error(ErrorCode::SummarizerFailure, "turn " + std::to_string(turn) + ": " + e.what());
  }
  state.prompts.push_back(std::move(record));
  ChatMessage message{kSummarizerSpeaker, turn, std::move(summary)};
  state.messages.push_back(message);
  for (auto& [id, history] : state.histories) history.messages.push_back(message);
}

DebateState DebateRunner::run_simultaneous_with_summarizer(const DebateConfig& config,
                                                           const DebateItem& item,
                                                           PositionOrder order) const {
  if (config.strategy != Strategy::SimultaneousTalkWithSummarizer) {
    throw Error(ErrorCode::InvalidConfig,
                "run_simultaneous_with_summarizer called for another strategy");
  }
  auto state = start(config);
  for (int t = 1; t <= config.turns; ++t) {
    state.turn = t;
    state.buffer.clear();
    for (const auto& agent : config.agents) {
      state.buffer.push_back(speak(config, item, order, agent, t, state));
    }
    summarize(config, t, state);
    state.buffer.clear();
  }
  return state;
}

Transcript DebateRunner::run_debate(const DebateConfig& config, const DebateItem& item,
                                    PositionOrder order) const {
  DebateState state;
  switch (config.strategy) {
    case Strategy::OneByOne:
      state = run_one_by_one(config, item, order);
      break;
    case Strategy::SimultaneousTalk:
      state = run_simultaneous(config, item, order);
      break;
    case Strategy::SimultaneousTalkWithSummarizer:
      state = run_simultaneous_with_summarizer(config, item, order);
      break;
  }

  Transcript transcript;
  transcript.item_id = item.item_id;
  transcript.config = config;
  transcript.position_order = order;
  transcript.prompts = std::move(state.prompts);
  transcript.messages = std::move(state.messages);
  transcript.verdicts = collect_verdicts(config, transcript.messages);
  transcript.final_result = aggregate(transcript.verdicts, config.mode, order);
  return transcript;
}

}  // namespace referee
