#include <doctest.h>

#include <cmath>

#include "analogy/prompt.hpp"
#include "analogy/story.hpp"
#include "helpers.hpp"

using namespace analogy;
using testutil::code_of;

namespace {

const std::filesystem::path kMiniBank = std::filesystem::path(ANALOGY_DATA_DIR) / "story_bank_mini.json";

// k correct out of n for one order/variant cell.
void add_cell(std::vector<StoryOutcome>& out, StoryOrder order, StoryVariant variant, int k, int n) {
  const auto right = order == StoryOrder::CorrectFirst ? StoryChoice::First : StoryChoice::Second;
  const auto wrong = order == StoryOrder::CorrectFirst ? StoryChoice::Second : StoryChoice::First;
  for (int i = 0; i < n; ++i) out.push_back({order, variant, i < k ? right : wrong});
}

double r2(double x) { return std::round(x * 100.0) / 100.0; }

nlohmann::json bank_json(int count) {
  nlohmann::json j = nlohmann::json::array();
  for (int i = 1; i <= count; ++i) {
    const auto s = std::to_string(i);
    j.push_back({{"id", i},
                 {"source", "source " + s},
                 {"correct_target", "correct " + s},
                 {"incorrect_target", "incorrect " + s},
                 {"paraphrased_correct", "paraphrase " + s}});
  }
  return j;
}

}  // namespace

TEST_CASE("story bank loading") {
  const auto bank = load_story_bank(kMiniBank, 2);
  CHECK(bank.size() == 2);
  CHECK(parse_story_bank(bank_json(18)).size() == 18);
  CHECK(code_of([] { parse_story_bank(bank_json(17)); }) == ErrorCode::WrongCount);
  auto missing = bank_json(18);
  missing[4].erase("paraphrased_correct");
  CHECK(code_of([&] { parse_story_bank(missing); }) == ErrorCode::MissingField);
  auto dup = bank_json(18);
  dup[3]["incorrect_target"] = dup[3]["correct_target"];
  CHECK(code_of([&] { parse_story_bank(dup); }) == ErrorCode::ParseError);
  CHECK(code_of([] { load_story_bank("/nonexistent/bank.json", 2); }) == ErrorCode::IoError);
}

TEST_CASE("trials and order counterbalancing") {
  const auto bank = parse_story_bank(bank_json(18));
  const auto t = make_trial(bank[0], StoryOrder::CorrectFirst, StoryVariant::Original);
  CHECK(t.story_a == bank[0].correct_target);
  CHECK(t.story_b == bank[0].incorrect_target);
  const auto p = make_trial(bank[0], StoryOrder::CorrectSecond, StoryVariant::Paraphrased);
  CHECK(p.story_b == bank[0].paraphrased_correct);
  CHECK(p.story_a == bank[0].incorrect_target);
  CHECK(p.source == bank[0].source);
  CHECK(swap_order(swap_order(t)) == t);
  CHECK(swap_order(t).story_a == t.story_b);

  const auto sweep = full_sweep(bank, StoryVariant::Original);
  CHECK(sweep.size() == 36);
  std::map<int, int> per_problem;
  for (const auto& s : sweep) ++per_problem[s.problem_id];
  for (const auto& [id, n] : per_problem) CHECK(n == 2);
}

TEST_CASE("story prompt scaffold") {
  const auto bank = parse_story_bank(bank_json(18));
  const auto t = make_trial(bank[2], StoryOrder::CorrectFirst, StoryVariant::Original);
  const auto m = story_prompt(t);
  REQUIRE(m.size() == 2);
  CHECK(m[0].content == "You are a helpful assistant.");
  CHECK(m[1].content.rfind("Consider the following story:", 0) == 0);
  const std::string tail = "Is the best answer Story A, Story B, or both are equally analogous?";
  CHECK(m[1].content.substr(m[1].content.size() - tail.size()) == tail);

  // Swapping order only exchanges the payloads.
  auto swapped = story_prompt(swap_order(t))[1].content;
  auto original = m[1].content;
  const auto a = t.story_a, b = t.story_b;
  original.replace(original.find(a), a.size(), "<X>");
  original.replace(original.find(b), b.size(), "<Y>");
  swapped.replace(swapped.find(b), b.size(), "<X>");
  swapped.replace(swapped.find(a), a.size(), "<Y>");
  CHECK(original == swapped);
}

TEST_CASE("classifying story answers") {
  CHECK(classify_story_response("Story A is a better analogy because...") == StoryChoice::First);
  CHECK(classify_story_response("Both are equally analogous.") == StoryChoice::Both);
  CHECK(classify_story_response("They both involve karma.") == StoryChoice::Unknown);
  CHECK(classify_story_response("story b") == StoryChoice::Second);
  CHECK(classify_story_response("Story A shares the setting, but Story B shares the causal structure. "
                                "Therefore, the best answer is Story B.") == StoryChoice::Second);
  CHECK(classify_story_response("") == StoryChoice::Unknown);
}

TEST_CASE("order bias fixtures") {
  std::vector<StoryOutcome> whl;
  add_cell(whl, StoryOrder::CorrectFirst, StoryVariant::Original, 16, 18);
  add_cell(whl, StoryOrder::CorrectSecond, StoryVariant::Original, 11, 18);
  auto r = order_bias_report(whl);
  CHECK(r2(r.first.rate()) == 0.89);
  CHECK(r2(r.second.rate()) == 0.61);
  CHECK(r2(r.total.rate()) == 0.75);

  std::vector<StoryOutcome> ours;
  add_cell(ours, StoryOrder::CorrectFirst, StoryVariant::Original, 18, 18);
  add_cell(ours, StoryOrder::CorrectSecond, StoryVariant::Original, 13, 18);
  r = order_bias_report(ours);
  CHECK(r.first.rate() == 1.0);
  CHECK(r2(r.second.rate()) == 0.72);
  CHECK(r2(r.total.rate()) == 0.86);

  std::vector<StoryOutcome> humans;
  add_cell(humans, StoryOrder::CorrectFirst, StoryVariant::Original, 292, 373);
  add_cell(humans, StoryOrder::CorrectSecond, StoryVariant::Original, 272, 347);
  r = order_bias_report(humans);
  CHECK(r2(r.first.rate()) == 0.78);
  CHECK(r2(r.second.rate()) == 0.78);
  CHECK(r2(r.total.rate()) == 0.78);
  CHECK(r.total.k == 564);
  CHECK(r.total.n == 720);

  CHECK(code_of([] { order_bias_report({}); }) == ErrorCode::EmptyInput);
}

TEST_CASE("paraphrase fixtures") {
  std::vector<StoryOutcome> gpt;
  add_cell(gpt, StoryOrder::CorrectFirst, StoryVariant::Original, 18, 18);
  add_cell(gpt, StoryOrder::CorrectSecond, StoryVariant::Original, 13, 18);
  add_cell(gpt, StoryOrder::CorrectFirst, StoryVariant::Paraphrased, 15, 18);
  add_cell(gpt, StoryOrder::CorrectSecond, StoryVariant::Paraphrased, 11, 18);
  auto p = paraphrase_report(gpt);
  CHECK(r2(p.original.rate()) == 0.86);
  CHECK(r2(p.paraphrased.rate()) == 0.72);

  std::vector<StoryOutcome> humans;
  add_cell(humans, StoryOrder::CorrectFirst, StoryVariant::Original, 564, 720);
  add_cell(humans, StoryOrder::CorrectFirst, StoryVariant::Paraphrased, 503, 720);
  p = paraphrase_report(humans);
  CHECK(r2(p.original.rate()) == 0.78);
  CHECK(r2(p.paraphrased.rate()) == 0.70);
}

TEST_CASE("scoring both-equally answers") {
  CHECK(story_correct(StoryOrder::CorrectFirst, StoryChoice::First));
  CHECK(story_correct(StoryOrder::CorrectSecond, StoryChoice::Second));
  CHECK_FALSE(story_correct(StoryOrder::CorrectFirst, StoryChoice::Both));
  CHECK_FALSE(story_correct(StoryOrder::CorrectSecond, StoryChoice::Unknown));

  std::vector<StoryOutcome> o = {{StoryOrder::CorrectFirst, StoryVariant::Original, StoryChoice::First},
                                 {StoryOrder::CorrectFirst, StoryVariant::Original, StoryChoice::Both}};
  CHECK(order_bias_report(o).first.n == 2);
  CHECK(order_bias_report(o, BothPolicy::Exclude).first.n == 1);
  CHECK(order_bias_report(o, BothPolicy::Exclude).first.rate() == 1.0);
}

TEST_CASE("an order-agnostic responder has no order bias") {
  const auto bank = parse_story_bank(bank_json(18));
  std::vector<StoryOutcome> outcomes;
  for (const auto& t : full_sweep(bank, StoryVariant::Original)) {
    // Right on even ids whatever the order.
    const bool right = t.problem_id % 2 == 0;
    const auto choice = (t.order == StoryOrder::CorrectFirst) == right ? StoryChoice::First : StoryChoice::Second;
    outcomes.push_back({t.order, t.variant, choice});
  }
  const auto r = order_bias_report(outcomes);
  CHECK(r.first.rate() == r.second.rate());
}
