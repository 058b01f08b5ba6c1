#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "analogy/alphabet.hpp"
#include "analogy/letterstring.hpp"
#include "analogy/matrix.hpp"
#include "analogy/story.hpp"

namespace analogy {

enum class PromptName {
  LetterHodel,
  LetterHumanlike,
  LetterMinimal,
  MatrixMain,
  MatrixAlt1,
  MatrixAlt2,
  MatrixAlt3,
  StoryMain,
  CCCSuccessor,
  CCCPredecessor,
  CCCBlankPosition,
};

std::string_view to_string(PromptName name);
PromptName prompt_name_from_string(std::string_view name);

struct Message {
  std::string role;  // system, user, assistant
  std::string content;

  friend bool operator==(const Message&, const Message&) = default;
};

using Messages = std::vector<Message>;

/// Messages with named "{slot}" placeholders.
struct PromptTemplate {
  PromptName name = PromptName::LetterHodel;
  Messages messages;

  static const PromptTemplate& get(PromptName name);
};

/// Single-pass substitution: slot values are inserted verbatim and never
/// rescanned. Throws MissingSlot for a placeholder with no value.
Messages render_template(const PromptTemplate& t, const std::map<std::string, std::string>& slots);

/// Whether the prompt ends in an open bracket the model should close.
bool is_bracket_completion(PromptName name);

Messages letter_prompt(PromptName name, const LetterStringProblem& p);
Messages matrix_prompt(PromptName name, const MatrixProblem& p);
Messages story_prompt(const StoryTrial& t);
Messages ccc_prompt(Relation relation, const Alphabet& alphabet, std::string_view glyph);
Messages blank_position_prompt(const MatrixProblem& p);

/// Completion-endpoint form: message texts joined by newlines.
std::string completion_text(const Messages& messages);

/// SHA-256 over a canonical JSON encoding of the messages.
std::string prompt_hash(const Messages& messages);

nlohmann::json messages_to_json(const Messages& messages);

}  // namespace analogy
