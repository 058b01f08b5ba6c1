#include "analogy/story.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <set>

#include "analogy/error.hpp"
#include "analogy/text.hpp"

namespace analogy {

namespace {

const char* const kFields[] = {"source", "correct_target", "incorrect_target", "paraphrased_correct"};

// Phrases that mark a sentence as the respondent's verdict.
const char* const kVerdictCues[] = {
    "better analogy", "best answer", "answer is", "more analogous", "better analogous", "i would choose",
    "i choose", "i would say", "is the better", "is better", "best analogy", "stronger analogy", "answer:",
};

const char* const kBothCues[] = {"equally analogous", "both are equally", "both stories are equally", "both equally",
                                 "equally good", "equally strong"};

bool contains(std::string_view hay, std::string_view needle) { return hay.find(needle) != std::string_view::npos; }

std::vector<std::string> sentences(const std::string& text) {
  std::vector<std::string> out;
  std::string current;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    current += ch;
    const bool end = ch == '\n' || ch == '!' || ch == '?' ||
                     (ch == '.' && (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1]))));
    if (end) {
      if (!trim(current).empty()) out.emplace_back(trim(current));
      current.clear();
    }
  }
  if (!trim(current).empty()) out.emplace_back(trim(current));
  return out;
}

/// Position of the first "story a"/"story b" mention, or npos.
std::pair<std::size_t, std::size_t> label_positions(std::string_view s) {
  std::size_t a = std::string_view::npos, b = std::string_view::npos;
  for (std::size_t pos = s.find("story "); pos != std::string_view::npos; pos = s.find("story ", pos + 1)) {
    if (pos + 6 >= s.size()) break;
    const char label = s[pos + 6];
    const bool standalone = pos + 7 >= s.size() || !std::isalnum(static_cast<unsigned char>(s[pos + 7]));
    if (!standalone) continue;
    if (label == 'a' && a == std::string_view::npos) a = pos;
    if (label == 'b' && b == std::string_view::npos) b = pos;
  }
  return {a, b};
}

std::optional<StoryChoice> verdict_of(std::string_view s) {
  for (const char* cue : kBothCues) {
    if (contains(s, cue)) return StoryChoice::Both;
  }
  const auto [a, b] = label_positions(s);
  if (a == std::string_view::npos && b == std::string_view::npos) return std::nullopt;
  return a < b ? StoryChoice::First : StoryChoice::Second;
}

bool counts(StoryChoice c, BothPolicy policy) { return !(c == StoryChoice::Both && policy == BothPolicy::Exclude); }

}  // namespace

std::string_view to_string(StoryOrder o) { return o == StoryOrder::CorrectFirst ? "correct_first" : "correct_second"; }
std::string_view to_string(StoryVariant v) { return v == StoryVariant::Original ? "original" : "paraphrased"; }

std::string_view to_string(StoryChoice c) {
  switch (c) {
    case StoryChoice::First: return "A";
    case StoryChoice::Second: return "B";
    case StoryChoice::Both: return "both";
    case StoryChoice::Unknown: return "unknown";
  }
  return "?";
}

StoryOrder story_order_from_string(std::string_view s) {
  if (s == "correct_first") return StoryOrder::CorrectFirst;
  if (s == "correct_second") return StoryOrder::CorrectSecond;
  throw Error(ErrorCode::ParseError, "unknown story order '" + std::string(s) + "'");
}

StoryVariant story_variant_from_string(std::string_view s) {
  if (s == "original") return StoryVariant::Original;
  if (s == "paraphrased") return StoryVariant::Paraphrased;
  throw Error(ErrorCode::ParseError, "unknown story variant '" + std::string(s) + "'");
}

std::vector<StoryProblem> parse_story_bank(const nlohmann::json& j, std::size_t expected) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "story bank must be a JSON array");
  std::vector<StoryProblem> out;
  std::set<int> ids;
  for (const auto& entry : j) {
    if (!entry.contains("id") || !entry["id"].is_number_integer()) throw Error(ErrorCode::MissingField, "entry lacks id");
    StoryProblem p;
    p.id = entry["id"].get<int>();
    std::vector<std::string> texts;
    for (const char* field : kFields) {
      if (!entry.contains(field) || !entry[field].is_string() || entry[field].get<std::string>().empty()) {
        throw Error(ErrorCode::MissingField, "story " + std::to_string(p.id) + " lacks " + field);
      }
      texts.push_back(entry[field].get<std::string>());
    }
    if (std::set<std::string>(texts.begin(), texts.end()).size() != texts.size()) {
      throw Error(ErrorCode::ParseError, "story " + std::to_string(p.id) + " repeats a text");
    }
    if (!ids.insert(p.id).second) throw Error(ErrorCode::ParseError, "duplicate story id " + std::to_string(p.id));
    p.source = texts[0];
    p.correct_target = texts[1];
    p.incorrect_target = texts[2];
    p.paraphrased_correct = texts[3];
    out.push_back(std::move(p));
  }
  if (out.size() != expected) {
    throw Error(ErrorCode::WrongCount, "expected " + std::to_string(expected) + " stories, found " + std::to_string(out.size()));
  }
  for (std::size_t i = 1; i <= expected; ++i) {
    if (!ids.count(static_cast<int>(i))) throw Error(ErrorCode::WrongCount, "story ids must run 1.." + std::to_string(expected));
  }
  std::sort(out.begin(), out.end(), [](const StoryProblem& a, const StoryProblem& b) { return a.id < b.id; });
  return out;
}

std::vector<StoryProblem> load_story_bank(const std::filesystem::path& path, std::size_t expected) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return parse_story_bank(j, expected);
}

StoryTrial make_trial(const StoryProblem& p, StoryOrder order, StoryVariant variant) {
  StoryTrial t;
  t.problem_id = p.id;
  t.order = order;
  t.variant = variant;
  t.source = p.source;
  const std::string& correct = variant == StoryVariant::Paraphrased ? p.paraphrased_correct : p.correct_target;
  t.story_a = order == StoryOrder::CorrectFirst ? correct : p.incorrect_target;
  t.story_b = order == StoryOrder::CorrectFirst ? p.incorrect_target : correct;
  return t;
}

StoryTrial swap_order(const StoryTrial& t) {
  StoryTrial out = t;
  out.order = t.order == StoryOrder::CorrectFirst ? StoryOrder::CorrectSecond : StoryOrder::CorrectFirst;
  std::swap(out.story_a, out.story_b);
  return out;
}

std::vector<StoryTrial> full_sweep(const std::vector<StoryProblem>& bank, StoryVariant variant) {
  std::vector<StoryTrial> out;
  for (const auto& p : bank) {
    out.push_back(make_trial(p, StoryOrder::CorrectFirst, variant));
    out.push_back(make_trial(p, StoryOrder::CorrectSecond, variant));
  }
  return out;
}

std::string story_user_text(const StoryTrial& t) {
  return "Consider the following story:\n\nStory 1: " + t.source + "\n\nNow consider two more stories:\n\nStory A: " +
         t.story_a + "\n\nStory B: " + t.story_b +
         "\n\nWhich of Story A and Story B is a better analogy to Story 1? Is the best answer Story A, Story B, or both "
         "are equally analogous?";
}

StoryChoice classify_story_response(std::string_view text) {
  const auto parts = sentences(to_lower_ascii(text));
  // Last verdict sentence first, then the last sentence naming any label.
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    const bool cue = std::any_of(std::begin(kVerdictCues), std::end(kVerdictCues),
                                 [&](const char* c) { return contains(*it, c); });
    if (!cue) continue;
    if (auto v = verdict_of(*it)) return *v;
  }
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    if (auto v = verdict_of(*it)) return *v;
  }
  return StoryChoice::Unknown;
}

bool story_correct(StoryOrder order, StoryChoice choice) {
  return (order == StoryOrder::CorrectFirst && choice == StoryChoice::First) ||
         (order == StoryOrder::CorrectSecond && choice == StoryChoice::Second);
}

OrderBiasReport order_bias_report(const std::vector<StoryOutcome>& outcomes, BothPolicy policy) {
  OrderBiasReport r;
  for (const auto& o : outcomes) {
    if (!counts(o.choice, policy)) continue;
    const bool ok = story_correct(o.order, o.choice);
    (o.order == StoryOrder::CorrectFirst ? r.first : r.second).add(ok);
    r.total.add(ok);
  }
  if (r.total.n == 0) throw Error(ErrorCode::EmptyInput, "no story outcomes to report");
  return r;
}

ParaphraseReport paraphrase_report(const std::vector<StoryOutcome>& outcomes, BothPolicy policy) {
  ParaphraseReport r;
  for (const auto& o : outcomes) {
    if (!counts(o.choice, policy)) continue;
    (o.variant == StoryVariant::Original ? r.original : r.paraphrased).add(story_correct(o.order, o.choice));
  }
  if (r.original.n + r.paraphrased.n == 0) throw Error(ErrorCode::EmptyInput, "no story outcomes to report");
  return r;
}

}  // namespace analogy
