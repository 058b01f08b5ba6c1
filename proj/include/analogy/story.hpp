#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace analogy {

struct StoryProblem {
  int id = 0;
  std::string source;
  std::string correct_target;
  std::string incorrect_target;
  std::string paraphrased_correct;
};

enum class StoryOrder { CorrectFirst, CorrectSecond };
enum class StoryVariant { Original, Paraphrased };
enum class StoryChoice { First, Second, Both, Unknown };

std::string_view to_string(StoryOrder o);
std::string_view to_string(StoryVariant v);
std::string_view to_string(StoryChoice c);
StoryOrder story_order_from_string(std::string_view s);
StoryVariant story_variant_from_string(std::string_view s);

struct StoryTrial {
  int problem_id = 0;
  StoryOrder order = StoryOrder::CorrectFirst;
  StoryVariant variant = StoryVariant::Original;
  std::string source;
  std::string story_a;
  std::string story_b;

  friend bool operator==(const StoryTrial&, const StoryTrial&) = default;
};

/// Parses a bank (JSON array of {id, source, correct_target, incorrect_target,
/// paraphrased_correct}). Throws MissingField, WrongCount, ParseError.
std::vector<StoryProblem> parse_story_bank(const nlohmann::json& j, std::size_t expected = 18);
std::vector<StoryProblem> load_story_bank(const std::filesystem::path& path, std::size_t expected = 18);

StoryTrial make_trial(const StoryProblem& p, StoryOrder order, StoryVariant variant);

/// The same trial with A and B exchanged.
StoryTrial swap_order(const StoryTrial& t);

/// Every problem in both orders for one variant.
std::vector<StoryTrial> full_sweep(const std::vector<StoryProblem>& bank, StoryVariant variant);

/// The user message shown to models; the system message is "You are a helpful assistant."
std::string story_user_text(const StoryTrial& t);

/// Case-insensitive; on conflicting mentions the final stated answer wins.
StoryChoice classify_story_response(std::string_view text);

/// How "both are equally analogous" answers enter the accuracy figures.
enum class BothPolicy { Incorrect, Exclude };

bool story_correct(StoryOrder order, StoryChoice choice);

struct StoryOutcome {
  StoryOrder order = StoryOrder::CorrectFirst;
  StoryVariant variant = StoryVariant::Original;
  StoryChoice choice = StoryChoice::Unknown;
};

struct Tally {
  long k = 0;
  long n = 0;
  double rate() const { return n == 0 ? 0.0 : static_cast<double>(k) / static_cast<double>(n); }
  void add(bool correct) {
    ++n;
    if (correct) ++k;
  }
};

struct OrderBiasReport {
  Tally first;
  Tally second;
  Tally total;
};

struct ParaphraseReport {
  Tally original;
  Tally paraphrased;
};

/// Throws EmptyInput when no outcome counts.
OrderBiasReport order_bias_report(const std::vector<StoryOutcome>& outcomes, BothPolicy policy = BothPolicy::Incorrect);
ParaphraseReport paraphrase_report(const std::vector<StoryOutcome>& outcomes, BothPolicy policy = BothPolicy::Incorrect);

}  // namespace analogy
