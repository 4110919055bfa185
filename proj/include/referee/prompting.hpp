#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "referee/types.hpp"

namespace referee {

/// Slot names a template body may reference as `{name}`.
const std::set<std::string>& known_slots();

/// A text body with `{slot}` markers. `{{` and `}}` render as literal braces.
/// Construction parses the body and rejects malformed markers and slot names
/// outside known_slots().
class PromptTemplate {
 public:
  explicit PromptTemplate(std::string body);

  static PromptTemplate from_file(const std::filesystem::path& path);

  const std::string& body() const { return body_; }
  /// Slots referenced by the body, sorted by name.
  const std::set<std::string>& slots() const { return slots_; }
  bool uses(const std::string& slot) const { return slots_.count(slot) != 0; }

 private:
  struct Piece {
    bool is_slot;
    std::string text;  // literal text, or slot name
  };

  friend std::string render_prompt(const PromptTemplate&, const std::map<std::string, std::string>&);

  std::string body_;
  std::vector<Piece> pieces_;
  std::set<std::string> slots_;
};

using SlotBindings = std::map<std::string, std::string>;

/// Substitutes every slot with its binding. Throws MissingSlot when a used slot
/// is unbound and UnknownSlot when a binding names a slot the body lacks.
std::string render_prompt(const PromptTemplate& tmpl, const SlotBindings& bindings);

/// Keeps only the bindings the template uses.
SlotBindings bindings_for(const PromptTemplate& tmpl, const SlotBindings& bindings);

/// "<speaker>: <content>" per message, newline separated, in stored order.
std::string render_chat_history(const ChatHistory& history);
std::string render_chat_line(const ChatMessage& message);

// Built-in prompt texts. The same bodies ship as files under templates/.
std::string_view builtin_pairwise_template();
std::string_view builtin_dimension_template();
std::string_view builtin_summarizer_template();

struct Persona {
  std::string persona_id;
  std::string description;

  bool operator==(const Persona&) const = default;
};

/// Role prompts keyed by id. Starts with the built-in referee roles; user
/// registrations add ids or replace existing ones.
class PersonaLibrary {
 public:
  PersonaLibrary();

  /// Throws Error{UnknownPersona}.
  const Persona& persona(const std::string& persona_id) const;
  bool contains(const std::string& persona_id) const { return by_id_.count(persona_id) != 0; }

  /// Throws Error{EmptyContent} for a blank description.
  void add(Persona persona);

  /// Reads a JSON-lines registry with `persona_id` and `description` per line.
  void load_file(const std::filesystem::path& path);

  /// Debater roles in roster order; excludes the uniform annotator prompt.
  static const std::vector<std::string>& debater_order();

  static constexpr const char* kAnnotator = "annotator";

 private:
  std::map<std::string, Persona> by_id_;
};

/// The full set of prompt material a debate draws from.
struct PromptSet {
  PromptTemplate pairwise{std::string(builtin_pairwise_template())};
  PromptTemplate dimension{std::string(builtin_dimension_template())};
  PromptTemplate summarizer{std::string(builtin_summarizer_template())};
  PersonaLibrary personas;
};

/// Formats a scale bound without trailing zeros ("1", "2.5").
std::string format_number(double v);

}  // namespace referee
