#include <doctest.h>

#include <fstream>
#include <sstream>

#include "analogy/harness.hpp"
#include "analogy/text.hpp"
#include "helpers.hpp"
#include "transcripts.hpp"

using namespace analogy;
using testutil::code_of;
using testutil::TempDir;

namespace {

// A few items from each task family.
std::vector<EvalItem> mixed_items() {
  std::vector<EvalItem> items;
  const auto a = make_permuted(5, 1, 3);
  int i = 0;
  for (auto t : {Transformation::Successor, Transformation::Sort, Transformation::RemoveRedundant}) {
    for (const auto& gens : std::vector<GeneralizationSet>{{}, {Generalization::Grouping}}) {
      const auto p = generate_problem(a, t, gens, Rng(static_cast<std::uint64_t>(i++)));
      items.push_back(make_letter_item(p, PromptName::LetterHodel, "letters"));
      items.push_back(make_letter_item(p, PromptName::LetterHumanlike, "letters-humanlike"));
    }
  }
  for (std::uint64_t s = 0; s < 6; ++s) {
    auto p = generate_matrix({RuleSpec::constant(), RuleSpec::distribution()}, BlankPolicy::BottomRight, Rng(s));
    p.id = "mx-" + std::to_string(s);
    items.push_back(make_matrix_item(p, PromptName::MatrixMain, "matrices"));
    items.push_back(make_matrix_item(p, PromptName::MatrixAlt2, "matrices-alt2"));
  }
  const auto bank = load_story_bank(std::filesystem::path(ANALOGY_DATA_DIR) / "story_bank_mini.json", 2);
  for (auto variant : {StoryVariant::Original, StoryVariant::Paraphrased}) {
    for (const auto& t : full_sweep(bank, variant)) items.push_back(make_story_item(t, "stories"));
  }
  return items;
}

std::string file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunRecord without_time(RunRecord r) {
  r.timestamp.clear();
  return r;
}

}  // namespace

TEST_CASE("record JSON round trip") {
  RunRecord r;
  r.item_id = "ls-1";
  r.suite_id = "s";
  r.tags = {{"task", "letter"}, {"n", "5"}};
  r.prompt_hash = std::string(64, 'a');
  r.raw_response = "i j k m]\nmore";
  r.normalized_answer = "i j k m";
  r.correct = true;
  r.respondent = "mock:oracle";
  r.timestamp = "2024-01-01T00:00:00Z";
  r.extra = {{"k", 1}};
  CHECK(record_from_json(record_to_json(r)) == r);
  r.failed = true;
  r.error = "timeout";
  CHECK(record_from_json(record_to_json(r)) == r);
}

TEST_CASE("bracket truncation") {
  CHECK(truncate_at_bracket("i j k m] and so on]") == "i j k m");
  CHECK(truncate_at_bracket("i j k m") == "i j k m");
  CHECK(truncate_at_bracket("]") == "");
  CHECK(truncate_at_bracket("") == "");
}

TEST_CASE("the oracle respondent is always right and the literal one is not") {
  const auto items = mixed_items();
  auto oracle = make_oracle_client(items);
  const auto records = run_suite(items, *oracle, nullptr, nullptr);
  REQUIRE(records.size() == items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    CHECK(records[i].item_id == items[i].item_id);
    CHECK(records[i].correct);
    CHECK_FALSE(records[i].failed);
  }
  CHECK(oracle->calls() == static_cast<long>(items.size()));

  auto literal = make_literal_client(items);
  long right = 0;
  for (const auto& r : run_suite(items, *literal, nullptr, nullptr)) right += r.correct;
  CHECK(right < static_cast<long>(items.size()));
}

TEST_CASE("a warm cache makes no calls and reproduces the records") {
  TempDir dir;
  const auto items = mixed_items();
  const ResponseCache cache(dir / "cache");

  auto cold = make_oracle_client(items);
  {
    RecordStore store(dir / "cold.jsonl");
    run_suite(items, *cold, &cache, &store);
  }
  CHECK(cold->calls() == static_cast<long>(items.size()));

  auto warm = make_oracle_client(items);
  {
    RecordStore store(dir / "warm.jsonl");
    run_suite(items, *warm, &cache, &store);
  }
  CHECK(warm->calls() == 0);
  CHECK(file_bytes(dir / "cold.jsonl") == file_bytes(dir / "warm.jsonl"));

  // A different model id misses the cache.
  auto other = make_oracle_client(items, "mock:other");
  run_suite(items, *other, &cache, nullptr);
  CHECK(other->calls() == static_cast<long>(items.size()));
}

TEST_CASE("an interrupted run resumes without repeating calls") {
  TempDir dir;
  const auto items = mixed_items();
  RecordStore store(dir / "records.jsonl");
  const std::vector<EvalItem> first_half(items.begin(), items.begin() + 10);
  auto client = make_oracle_client(items);
  run_suite(first_half, *client, nullptr, &store);
  CHECK(client->calls() == 10);

  // Simulate a torn write from the crash.
  {
    std::ofstream out(store.path(), std::ios::app);
    out << R"({"item_id":"half)";
  }
  auto resumed = make_oracle_client(items);
  const auto records = run_suite(items, *resumed, nullptr, &store);
  CHECK(resumed->calls() == static_cast<long>(items.size()) - 10);
  for (const auto& r : records) CHECK(r.correct);
}

TEST_CASE("transport failures are retried with backoff and then recorded") {
  const auto items = mixed_items();
  const std::vector<EvalItem> one(items.begin(), items.begin() + 1);
  std::vector<long> waits;
  RunOptions opts;
  opts.max_attempts = 3;
  opts.backoff = std::chrono::milliseconds(100);
  opts.sleep = [&](std::chrono::milliseconds d) { waits.push_back(d.count()); };

  int attempts = 0;
  FunctionClient flaky("mock:flaky", [&](const ModelRequest&) -> std::string {
    if (++attempts < 3) throw Error(ErrorCode::TransportError, "connection reset");
    return one[0].oracle_answer;
  });
  auto records = run_suite(one, flaky, nullptr, nullptr, opts);
  CHECK(records[0].correct);
  CHECK(waits == std::vector<long>{100, 200});

  TempDir dir;
  const ResponseCache cache(dir / "cache");
  RecordStore store(dir / "records.jsonl");
  FunctionClient down("mock:down", [](const ModelRequest&) -> std::string {
    throw Error(ErrorCode::TransportError, "503");
  });
  records = run_suite(one, down, &cache, &store, opts);
  CHECK(records[0].failed);
  CHECK_FALSE(records[0].correct);
  CHECK(records[0].error.find("503") != std::string::npos);
  CHECK(down.calls() == 3);
  CHECK_FALSE(cache.get("mock:down", records[0].prompt_hash).has_value());

  // Failed records are retried on the next run.
  FunctionClient back("mock:down", [&](const ModelRequest&) { return one[0].oracle_answer; });
  records = run_suite(one, back, &cache, &store, opts);
  CHECK(back.calls() == 1);
  CHECK(records[0].correct);

  FunctionClient broken("mock:broken", [](const ModelRequest&) -> std::string {
    throw Error(ErrorCode::ConfigInvalid, "bad request");
  });
  CHECK(code_of([&] { run_suite(one, broken, nullptr, nullptr, opts); }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("parallel and serial runs agree") {
  const auto items = mixed_items();
  auto a = make_oracle_client(items);
  auto b = make_oracle_client(items);
  const auto serial = run_suite(items, *a, nullptr, nullptr);
  RunOptions opts;
  opts.parallelism = 8;
  TempDir dir;
  RecordStore store(dir / "records.jsonl");
  const auto parallel = run_suite(items, *b, nullptr, &store, opts);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) CHECK(without_time(serial[i]) == without_time(parallel[i]));
  CHECK(store.load().size() == items.size());
}

TEST_CASE("cache corruption is reported") {
  TempDir dir;
  const ResponseCache cache(dir / "cache");
  const Messages m = {{"user", "hi"}};
  const auto h = prompt_hash(m);
  cache.put("mock", h, m, {"hello", "2024-01-01T00:00:00Z"});
  CHECK(cache.get("mock", h)->response == "hello");
  CHECK_FALSE(cache.get("mock", std::string(64, '0')).has_value());
  {
    std::ofstream out(cache.entry_path("mock", h), std::ios::trunc);
    out << "{not json";
  }
  CHECK(code_of([&] { cache.get("mock", h); }) == ErrorCode::CacheCorrupt);
}

TEST_CASE("bracket-completion items ignore text after the first bracket") {
  const auto p = generate_problem(Alphabet::standard(), Transformation::Successor, {}, Rng(1));
  const auto item = make_letter_item(p, PromptName::LetterHodel, "s");
  REQUIRE(item.bracket_completion);
  auto client = make_scripted_client("mock:chatty", {join(p.key) + "]\n\n[a b c d] [a b c e]"});
  const auto r = run_suite({item}, *client, nullptr, nullptr)[0];
  CHECK(r.correct);
  CHECK(r.normalized_answer == join(p.key));

  const auto humanlike = make_letter_item(p, PromptName::LetterHumanlike, "s");
  CHECK_FALSE(humanlike.bracket_completion);
}

TEST_CASE("regrading a stored record") {
  const auto p = generate_problem(Alphabet::standard(), Transformation::Successor, {}, Rng(2));
  const auto item = make_letter_item(p, PromptName::LetterMinimal, "s");
  auto client = make_scripted_client("mock:x", {join(p.target) + "]"});
  auto r = run_suite({item}, *client, nullptr, nullptr)[0];
  CHECK_FALSE(r.correct);
  r.raw_response = join(p.key) + "]";
  const auto again = regrade(item, r);
  CHECK(again.correct);
  CHECK(again.normalized_answer == join(p.key));
}

TEST_CASE("comprehension check answers") {
  const auto a = Alphabet::standard();
  CHECK(parse_ccc_response(" f", a) == "f");
  CHECK(parse_ccc_response("The next letter after e is: f.", a) == "f");
  CHECK(parse_ccc_response("The letter before c is 'b'", a) == "b");
  CHECK(parse_ccc_response("F", a) == "f");
  CHECK_FALSE(parse_ccc_response("I am not sure", a).has_value());
  CHECK_FALSE(parse_ccc_response("", a).has_value());
}

TEST_CASE("comprehension checks over permuted alphabets") {
  std::vector<Alphabet> alphabets = {Alphabet::standard(), make_permuted(10, 1, 8), make_symbol(10, 1, 8)};
  const auto items = make_ccc_items(alphabets, {Relation::Succ, Relation::Pred});
  CHECK(items.size() == 25 * 2 + 25 * 2 + 9 * 2);

  auto oracle = make_oracle_client(items);
  auto rep = run_ccc(alphabets, *oracle, nullptr, nullptr);
  for (auto rel : {Relation::Succ, Relation::Pred}) {
    const auto& c = rep.cells.at(rel);
    CHECK(c.standard.n == 25);
    CHECK(c.standard.rate() == 1.0);
    CHECK(c.permuted_original.n + c.permuted_moved.n == 25);
    CHECK(c.permuted_moved.n > 0);
    CHECK(c.permuted_original.rate() == 1.0);
    CHECK(c.permuted_moved.rate() == 1.0);
    CHECK(c.symbol.n == 9);
  }

  auto literal = make_literal_client(items);
  rep = run_ccc(alphabets, *literal, nullptr, nullptr);
  CHECK(rep.cells.at(Relation::Succ).standard.k == 0);
}

TEST_CASE("blank position answers") {
  using P = std::optional<std::pair<int, int>>;
  CHECK(parse_blank_position("row 3, column 2") == P{{2, 1}});
  CHECK(parse_blank_position("It is in the bottom row, middle column.") == P{{2, 1}});
  CHECK(parse_blank_position("The missing element is at (1, 3)") == P{{0, 2}});
  CHECK(parse_blank_position("top left corner") == P{{0, 0}});
  CHECK(parse_blank_position("in the center of the grid") == P{{1, 1}});
  CHECK(parse_blank_position("second row, third column") == P{{1, 2}});
  CHECK_FALSE(parse_blank_position("It's missing").has_value());
}

TEST_CASE("blank position transcripts") {
  const auto f = testutil::load_blank_fixture();
  const auto sweep = blank_sweep(f.grid);
  REQUIRE(sweep.size() == 9);
  CHECK(render_grid(sweep[7]) == "[6] [6] [6]\n[9] [9] [9]\n[8] [ ] [8]");
  for (const auto& t : f.respondents) {
    auto client = testutil::transcript_client(f, t);
    const auto rep = run_blank_position_check(sweep, *client, nullptr, nullptr);
    CHECK(rep.tally.n == 9);
    CHECK(rep.tally.k == t.expected_correct);
  }
  auto full = f.grid;
  full.grid[2][2] = full.key;
  CHECK(code_of([&] { make_blank_position_items({full}); }) == ErrorCode::MalformedGrid);
}
