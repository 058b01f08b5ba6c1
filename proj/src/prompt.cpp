#include "analogy/prompt.hpp"

#include <array>

#include "analogy/error.hpp"
#include "analogy/text.hpp"

namespace analogy {

namespace {

constexpr std::array<PromptName, 11> kAllPrompts = {
    PromptName::LetterHodel,  PromptName::LetterHumanlike, PromptName::LetterMinimal, PromptName::MatrixMain,
    PromptName::MatrixAlt1,   PromptName::MatrixAlt2,      PromptName::MatrixAlt3,    PromptName::StoryMain,
    PromptName::CCCSuccessor, PromptName::CCCPredecessor,  PromptName::CCCBlankPosition,
};

const char* const kLetterSystem = "You are able to solve letter-string analogies.";
const char* const kGenius = "You are a genius at solving analogy problems.";
const char* const kHelpful = "You are a helpful assistant.";

PromptTemplate make(PromptName name) {
  switch (name) {
    case PromptName::LetterHodel:
      return {name,
              {{"system", kLetterSystem},
               {"user",
                "Use this fictional alphabet: [{alphabet}]. \nLet's try to complete the pattern:\n"
                "[{source_lhs}] [{source_rhs}]\n[{target}] ["}}};
    case PromptName::LetterHumanlike:
      return {name,
              {{"system", kLetterSystem},
               {"user",
                "In this study, you will be presented with a series of patterns involving alphanumeric characters, "
                "together with an example alphabet.\n\nNote that the alphabet may be in an unfamiliar order. \n\n"
                "Each pattern will have one missing piece marked by [ ? ].\n\n"
                "For each pattern, you will be asked to guess the missing piece.\n\n"
                "Use the given alphabet when guessing the missing piece.\n\n"
                "You do not need to include the '[ ]' or spaces between letters in your response.\n\n"
                "a b c h e f g d i j k l m n o p q r s t u v w x y z \n\n[a a a] [b b b]\n\n[c c c] [ ? ]"},
               {"assistant", "h h h"},
               {"user",
                "In this case, the missing piece is 'h h h' \n\n"
                "Note that in the given alphabet, 'b' is the letter after 'a' and 'h' is the letter after 'c'"},
               {"user",
                "Use the following alphabet to guess the missing piece.\n\n[{alphabet}] \n\n"
                "Note that the alphabet may be in an unfamiliar order. Complete the pattern using this order. \n\n"
                "[{source_lhs}] [{source_rhs}]\n\n[{target}] [?]"}}};
    case PromptName::LetterMinimal:
      return {name,
              {{"system", kLetterSystem},
               {"user",
                "Use the following alphabet to complete the pattern.\n\n[{alphabet}] \n\n"
                "Note that the alphabet may be in an unfamiliar order. Complete the pattern using this order. \n\n"
                "[{source_lhs}] [{source_rhs}]\n\n[{target}] ["}}};
    case PromptName::MatrixMain:
      return {name,
              {{"system", kGenius},
               {"user", "Try to complete the pattern below. Give ONLY the answer as briefly as possible. \n{grid}"}}};
    case PromptName::MatrixAlt1:
      return {name, {{"system", kHelpful}, {"user", "{grid_open}"}}};
    case PromptName::MatrixAlt2:
      return {name, {{"system", kHelpful}, {"user", "Let's try to complete the pattern:\n\n{grid_open}"}}};
    case PromptName::MatrixAlt3:
      return {name,
              {{"system", kHelpful},
               {"user", "Try to guess the missing piece. Give ONLY the answer with no explanation\n\n{grid_open}"}}};
    case PromptName::StoryMain:
      return {name,
              {{"system", kHelpful},
               {"user",
                "Consider the following story:\n\nStory 1: {source}\n\nNow consider two more stories:\n\n"
                "Story A: {story_a}\n\nStory B: {story_b}\n\n"
                "Which of Story A and Story B is a better analogy to Story 1? Is the best answer Story A, Story B, "
                "or both are equally analogous?"}}};
    case PromptName::CCCSuccessor:
      return {name,
              {{"system", "You are able to solve simple letter-based problems."},
               {"user",
                "Use this fictional alphabet: [{alphabet}]. \nWhat is the next letter after {glyph}?\n"
                "The next letter after {glyph} is:"}}};
    case PromptName::CCCPredecessor:
      return {name,
              {{"system", "You are able to solve simple letter-based problems."},
               {"user",
                "Use this fictional alphabet: [{alphabet}]. \nWhat is the letter before {glyph}?\n"
                "The letter before {glyph} is:"}}};
    case PromptName::CCCBlankPosition:
      return {name,
              {{"system", kGenius},
               {"user", "The pattern below is incomplete.  What is the position of the missing element? \n{grid}"}}};
  }
  throw Error(ErrorCode::ConfigInvalid, "unknown prompt");
}

std::string substitute(const std::string& text, const std::map<std::string, std::string>& slots) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      const auto close = text.find('}', i + 1);
      if (close != std::string::npos) {
        const auto name = text.substr(i + 1, close - i - 1);
        const bool is_slot = !name.empty() && name.find_first_not_of("abcdefghijklmnopqrstuvwxyz_") == std::string::npos;
        if (is_slot) {
          auto it = slots.find(name);
          if (it == slots.end()) throw Error(ErrorCode::MissingSlot, "no value for {" + name + "}");
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += text[i++];
  }
  return out;
}

}  // namespace

std::string_view to_string(PromptName name) {
  switch (name) {
    case PromptName::LetterHodel: return "letter-hodel";
    case PromptName::LetterHumanlike: return "letter-humanlike";
    case PromptName::LetterMinimal: return "letter-minimal";
    case PromptName::MatrixMain: return "matrix-main";
    case PromptName::MatrixAlt1: return "matrix-alt1";
    case PromptName::MatrixAlt2: return "matrix-alt2";
    case PromptName::MatrixAlt3: return "matrix-alt3";
    case PromptName::StoryMain: return "story-main";
    case PromptName::CCCSuccessor: return "ccc-successor";
    case PromptName::CCCPredecessor: return "ccc-predecessor";
    case PromptName::CCCBlankPosition: return "ccc-blank-position";
  }
  return "?";
}

PromptName prompt_name_from_string(std::string_view name) {
  for (auto p : kAllPrompts) {
    if (to_string(p) == name) return p;
  }
  throw Error(ErrorCode::ConfigInvalid, "unknown prompt '" + std::string(name) + "'");
}

const PromptTemplate& PromptTemplate::get(PromptName name) {
  static const std::array<PromptTemplate, 11> templates = [] {
    std::array<PromptTemplate, 11> out;
    for (std::size_t i = 0; i < kAllPrompts.size(); ++i) out[i] = make(kAllPrompts[i]);
    return out;
  }();
  return templates[static_cast<std::size_t>(name)];
}

Messages render_template(const PromptTemplate& t, const std::map<std::string, std::string>& slots) {
  Messages out;
  for (const auto& m : t.messages) out.push_back({m.role, substitute(m.content, slots)});
  return out;
}

bool is_bracket_completion(PromptName name) {
  switch (name) {
    case PromptName::LetterHodel:
    case PromptName::LetterMinimal:
    case PromptName::MatrixAlt1:
    case PromptName::MatrixAlt2:
    case PromptName::MatrixAlt3:
      return true;
    default:
      return false;
  }
}

Messages letter_prompt(PromptName name, const LetterStringProblem& p) {
  if (name != PromptName::LetterHodel && name != PromptName::LetterHumanlike && name != PromptName::LetterMinimal) {
    throw Error(ErrorCode::ConfigInvalid, std::string(to_string(name)) + " is not a letter-string prompt");
  }
  return render_template(PromptTemplate::get(name), {{"alphabet", join(p.alphabet.glyphs())},
                                                     {"source_lhs", join(p.source_lhs)},
                                                     {"source_rhs", join(p.source_rhs)},
                                                     {"target", join(p.target)}});
}

Messages matrix_prompt(PromptName name, const MatrixProblem& p) {
  std::map<std::string, std::string> slots = {{"grid", render_grid(p)}};
  if (p.blank_row == 2 && p.blank_col == 2) slots["grid_open"] = render_grid(p, true);
  switch (name) {
    case PromptName::MatrixMain:
    case PromptName::MatrixAlt1:
    case PromptName::MatrixAlt2:
    case PromptName::MatrixAlt3:
      return render_template(PromptTemplate::get(name), slots);
    default:
      throw Error(ErrorCode::ConfigInvalid, std::string(to_string(name)) + " is not a matrix prompt");
  }
}

Messages story_prompt(const StoryTrial& t) {
  return render_template(PromptTemplate::get(PromptName::StoryMain),
                         {{"source", t.source}, {"story_a", t.story_a}, {"story_b", t.story_b}});
}

Messages ccc_prompt(Relation relation, const Alphabet& alphabet, std::string_view glyph) {
  const auto name = relation == Relation::Succ ? PromptName::CCCSuccessor : PromptName::CCCPredecessor;
  return render_template(PromptTemplate::get(name), {{"alphabet", join(alphabet.glyphs())}, {"glyph", std::string(glyph)}});
}

Messages blank_position_prompt(const MatrixProblem& p) {
  return render_template(PromptTemplate::get(PromptName::CCCBlankPosition), {{"grid", render_grid(p)}});
}

std::string completion_text(const Messages& messages) {
  std::string out;
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (i > 0) out += "\n";
    out += messages[i].content;
  }
  return out;
}

nlohmann::json messages_to_json(const Messages& messages) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& m : messages) out.push_back({{"role", m.role}, {"content", m.content}});
  return out;
}

std::string prompt_hash(const Messages& messages) { return sha256_hex(messages_to_json(messages).dump()); }

}  // namespace analogy
