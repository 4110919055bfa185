#include "referee/prompting.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "referee/error.hpp"

namespace referee {
namespace {

constexpr std::string_view kPairwise = R"(
[Question]
{source_text}

[The Start of Assistant 1’s Answer]
{compared_text_one}
[The End of Assistant 1’s Answer]

[The Start of Assistant 2’s Answer]
{compared_text_two}
[The End of Assistant 2’s Answer]

[System]
We would like to request your feedback on the performance of two AI assistants in response to the user question displayed above.
Please consider the helpfulness, relevance, accuracy, and level of detail of their responses.
Each assistant receives an overall score on a scale of 1 to 10, where a higher score indicates better overall performance.
There are a few other referees assigned the same task, it's your responsibility to discuss with them and think critically before you make your final judgment.
Here is your discussion history:
{chat_history}
{role_description}
Now it's your time to talk, please make your talk short and clear, {agent_name} !
Finish with one final line of the form "Scores: <score of Assistant 1> <score of Assistant 2>".
)";

constexpr std::string_view kDimension = R"(
[Dialogue Context]
{source_text}

[Fact]
{fact_snippet}

[The Start of the Response]
{response}
[The End of the Response]

[System]
We would like to request your feedback on the {dimension} of the response to the dialogue context displayed above.
Please consider only the {dimension} of the response.
The response receives a {dimension} score on a scale of {scale_min} to {scale_max}, where a higher score indicates better {dimension}.
There are a few other referees assigned the same task, it's your responsibility to discuss with them and think critically before you make your final judgment.
Here is your discussion history:
{chat_history}
{role_description}
Now it's your time to talk, please make your talk short and clear, {agent_name} !
Finish with one final line of the form "Score: <score>".
)";

constexpr std::string_view kSummarizer = R"(
Summarize the discussion so far in at most 150 words, preserving each referee's current preference and main argument.

{chat_history}
)";

// Raw literals above open with a newline for readability.
constexpr std::string_view strip_lead(std::string_view s) { return s.substr(1); }

bool is_slot_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

}  // namespace

const std::set<std::string>& known_slots() {
  static const std::set<std::string> slots = {
      "source_text", "compared_text_one", "compared_text_two", "chat_history",
      "role_description", "agent_name", "response", "fact_snippet",
      "dimension", "scale_min", "scale_max"};
  return slots;
}

PromptTemplate::PromptTemplate(std::string body) : body_(std::move(body)) {
  std::string literal;
  const std::string& b = body_;
  for (std::size_t i = 0; i < b.size();) {
    const char c = b[i];
    if (c == '{' && i + 1 < b.size() && b[i + 1] == '{') {
      literal += '{';
      i += 2;
    } else if (c == '}' && i + 1 < b.size() && b[i + 1] == '}') {
      literal += '}';
      i += 2;
    } else if (c == '{') {
      std::size_t end = i + 1;
      while (end < b.size() && is_slot_char(b[end])) ++end;
      if (end == i + 1 || end >= b.size() || b[end] != '}') {
        throw Error(ErrorCode::MalformedTemplate,
                    "unterminated or invalid slot marker at offset " + std::to_string(i));
      }
      std::string name = b.substr(i + 1, end - i - 1);
      if (known_slots().count(name) == 0) {
        throw Error(ErrorCode::UnknownSlot, "template references unknown slot '" + name + "'");
      }
      if (!literal.empty()) pieces_.push_back({false, std::move(literal)});
      literal.clear();
      slots_.insert(name);
      pieces_.push_back({true, std::move(name)});
      i = end + 1;
    } else if (c == '}') {
      throw Error(ErrorCode::MalformedTemplate,
                  "stray '}' at offset " + std::to_string(i));
    } else {
      literal += c;
      ++i;
    }
  }
  if (!literal.empty()) pieces_.push_back({false, std::move(literal)});
}

PromptTemplate PromptTemplate::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read template " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return PromptTemplate(buf.str());
}

std::string render_prompt(const PromptTemplate& tmpl, const SlotBindings& bindings) {
  for (const auto& [name, value] : bindings) {
    if (!tmpl.uses(name)) {
      throw Error(ErrorCode::UnknownSlot, "binding '" + name + "' matches no slot");
    }
  }
  std::string out;
  out.reserve(tmpl.body().size());
  for (const auto& piece : tmpl.pieces_) {
    if (!piece.is_slot) {
      out += piece.text;
      continue;
    }
    auto it = bindings.find(piece.text);
    if (it == bindings.end()) {
      throw Error(ErrorCode::MissingSlot, "slot '" + piece.text + "' is unbound");
    }
    out += it->second;
  }
  return out;
}

SlotBindings bindings_for(const PromptTemplate& tmpl, const SlotBindings& bindings) {
  SlotBindings used;
  for (const auto& [name, value] : bindings) {
    if (tmpl.uses(name)) used.emplace(name, value);
  }
  return used;
}

std::string render_chat_line(const ChatMessage& message) {
  return message.speaker + ": " + message.content;
}

std::string render_chat_history(const ChatHistory& history) {
  std::string out;
  for (std::size_t i = 0; i < history.messages.size(); ++i) {
    if (i > 0) out += '\n';
    out += render_chat_line(history.messages[i]);
  }
  return out;
}

std::string_view builtin_pairwise_template() { return strip_lead(kPairwise); }
std::string_view builtin_dimension_template() { return strip_lead(kDimension); }
std::string_view builtin_summarizer_template() { return strip_lead(kSummarizer); }

PersonaLibrary::PersonaLibrary() {
  const std::pair<const char*, const char*> builtins[] = {
      {"general_public",
       "You are now General Public, one of the referees in this task. You are interested in the "
       "story and looking for updates on the investigation. Please think critically by yourself "
       "and note that it's your responsibility to choose one of which is the better first."},
      {"critic",
       "You are now Critic, one of the referees in this task. You will check fluent writing, "
       "clear sentences, and good wording in summary writing. Your job is to question others "
       "judgment to make sure their judgment is well-considered and offer an alternative "
       "solution if two responses are at the same level."},
      {"news_author",
       "You are News Author, one of the referees in this task. You will focus on the "
       "consistency with the original article. Please help other people to determine which "
       "response is the better one."},
      {"psychologist",
       "You are Psychologist, one of the referees in this task. You will study human behavior "
       "and mental processes in order to understand and explain human behavior. Please help "
       "other people to determine which response is the better one."},
      {"scientist",
       "You are Scientist, one of the referees in this task. You are a professional engaged in "
       "systematic study who possesses a strong background in the scientific method, critical "
       "thinking, and problem-solving abilities. Please help other people to determine which "
       "response is the better one."},
      {kAnnotator,
       "You are now an Annotator, one of the referees in the text evaluation task."},
  };
  for (const auto& [id, text] : builtins) by_id_.emplace(id, Persona{id, text});
}

const Persona& PersonaLibrary::persona(const std::string& persona_id) const {
  auto it = by_id_.find(persona_id);
  if (it == by_id_.end()) throw Error(ErrorCode::UnknownPersona, "no persona '" + persona_id + "'");
  return it->second;
}

void PersonaLibrary::add(Persona persona) {
  if (persona.persona_id.empty()) throw Error(ErrorCode::InvalidConfig, "persona_id is empty");
  if (trim(persona.description).empty()) {
    throw Error(ErrorCode::EmptyContent, "persona " + persona.persona_id + " has no description");
  }
  auto id = persona.persona_id;
  by_id_.insert_or_assign(std::move(id), std::move(persona));
}

void PersonaLibrary::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read persona registry " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
      add(Persona{j.at("persona_id").get<std::string>(), j.at("description").get<std::string>()});
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::ParseError,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

const std::vector<std::string>& PersonaLibrary::debater_order() {
  static const std::vector<std::string> order = {"general_public", "critic", "news_author",
                                                 "psychologist", "scientist"};
  return order;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace referee
