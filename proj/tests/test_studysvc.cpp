#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <thread>

#include <httplib.h>

#include "analogy/report.hpp"
#include "analogy/studysvc.hpp"
#include "helpers.hpp"

using namespace analogy;
using testutil::code_of;
using testutil::TempDir;

namespace {

std::vector<MatrixProblem> matrix_pool(MatrixVariant variant, int per_type) {
  const std::vector<std::vector<RuleSpec>> types = {
      {RuleSpec::constant()},
      {RuleSpec::distribution()},
      {RuleSpec::constant(), RuleSpec::distribution()},
      {RuleSpec::logic(LogicOp::Or)},
  };
  std::vector<MatrixProblem> out;
  for (std::size_t t = 0; t < types.size(); ++t) {
    for (int i = 0; i < per_type; ++i) {
      auto p = generate_matrix(types[t], BlankPolicy::BottomRight, Rng(t * 1000 + static_cast<std::uint64_t>(i)));
      p.variant = variant;
      p.id = "mx-" + std::string(to_string(variant)) + "-" + std::to_string(t) + "-" + std::to_string(i);
      out.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<LetterStringProblem> letter_pool() {
  std::vector<LetterStringProblem> out;
  std::uint64_t s = 0;
  for (auto t : {Transformation::ExtendSequence, Transformation::Successor, Transformation::Predecessor,
                 Transformation::RemoveRedundant, Transformation::FixAlphabetic, Transformation::Sort}) {
    for (int i = 0; i < 5; ++i) out.push_back(generate_problem(make_permuted(5, 1, 2), t, {}, Rng(s++)));
  }
  return out;
}

std::vector<StoryProblem> story_pool(int count) {
  std::vector<StoryProblem> out;
  for (int i = 1; i <= count; ++i) {
    const auto s = std::to_string(i);
    out.push_back({i, "source " + s, "correct " + s, "incorrect " + s, "paraphrase " + s});
  }
  return out;
}

StudyConfig config_in(const TempDir& dir) {
  StudyConfig c;
  c.letters = letter_pool();
  c.matrices = matrix_pool(MatrixVariant::Original, 6);
  auto alt = matrix_pool(MatrixVariant::AltBlank, 6);
  c.matrices.insert(c.matrices.end(), alt.begin(), alt.end());
  c.stories = story_pool(18);
  c.store_dir = dir / "store";
  c.seed = 7;
  c.completion_code = "CODE-123";
  return c;
}

// Answers every item; `fail_check` gets attention checks wrong.
nlohmann::json run_session(StudyService& svc, const std::string& id, bool fail_check) {
  for (;;) {
    const auto s = svc.snapshot(id);
    if (s.cursor >= s.plan.items.size()) break;
    const auto& item = s.plan.items[s.cursor];
    const auto env = svc.next_item(id);
    REQUIRE(env["item_ref"] == item.item_ref);
    const auto answer = item.attention_check && fail_check ? "no idea" : item.eval.oracle_answer;
    svc.submit_answer(id, item.item_ref, answer);
  }
  return svc.finalize(id);
}

std::string study_problem_id(const SessionItem& item) { return item.eval.item_id; }

}  // namespace

TEST_CASE("attention check normalization") {
  const AttentionCheck c{"attn", "Type the letters a b c", "a b c"};
  CHECK(check_passed(c, "abc"));
  CHECK(check_passed(c, "[A, B, C]"));
  CHECK(check_passed(c, " a b c. "));
  CHECK_FALSE(check_passed(c, "a b d"));
  CHECK(normalize_check_answer("Story B!") == "storyb");

  const auto m = load_study_materials(default_materials_path());
  for (auto s : {Study::LetterString, Study::Matrix, Study::Story}) {
    CHECK(m.at(s).checks.size() >= 2);
    CHECK_FALSE(m.at(s).instructions.empty());
  }
  CHECK(code_of([] { load_study_materials("/nonexistent.json"); }) == ErrorCode::IoError);
}

TEST_CASE("a matrix session from start to finish") {
  TempDir dir;
  StudyService svc(config_in(dir));
  const auto id = svc.create_session(Study::Matrix);
  CHECK(id.size() == 32);

  const auto plan = svc.snapshot(id).plan;
  REQUIRE(plan.items.size() == 12);
  int checks = 0;
  std::set<std::string> variants;
  for (const auto& item : plan.items) {
    checks += item.attention_check;
    if (!item.attention_check) variants.insert(item.problem["variant"].get<std::string>());
    CHECK_FALSE(item.problem.contains("key"));
  }
  CHECK(checks == 2);
  CHECK(variants.size() == 1);

  const auto first = svc.next_item(id);
  CHECK(first["instructions"].is_string());
  CHECK(first["example"].is_object());
  CHECK(first["total"] == 12);
  // The item stays current until answered; instructions are only sent once.
  const auto again = svc.next_item(id);
  CHECK(again["item_ref"] == first["item_ref"]);
  CHECK(again["instructions"].is_null());

  const auto summary = run_session(svc, id, false);
  CHECK(summary["status"] == "completed");
  CHECK(summary["problems"] == 10);
  CHECK(summary["correct"] == 10);
  CHECK(summary["completion_code"] == "CODE-123");
  CHECK(svc.finalize(id) == summary);
  CHECK(load_records(svc.records_path()).size() == 12);

  CHECK(code_of([&] { svc.next_item(id); }) == ErrorCode::SessionComplete);
  CHECK(code_of([&] { svc.submit_answer(id, first["item_ref"], "1"); }) == ErrorCode::SessionComplete);
}

TEST_CASE("session errors") {
  TempDir dir;
  StudyService svc(config_in(dir));
  CHECK(code_of([&] { svc.next_item("ffff"); }) == ErrorCode::UnknownSession);
  CHECK(code_of([&] { svc.finalize("ffff"); }) == ErrorCode::UnknownSession);

  const auto id = svc.create_session(Study::LetterString);
  const auto plan = svc.snapshot(id).plan;
  CHECK(code_of([&] { svc.submit_answer(id, plan.items[1].item_ref, "a"); }) == ErrorCode::OutOfOrder);
  CHECK(code_of([&] { svc.submit_answer(id, plan.items[0].item_ref, "  "); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { svc.finalize(id); }) == ErrorCode::SessionIncomplete);
  CHECK(svc.snapshot(id).cursor == 0);
}

TEST_CASE("a failed attention check rejects the session and its records") {
  TempDir dir;
  StudyService svc(config_in(dir));
  std::set<std::string> completed;
  for (int i = 0; i < 6; ++i) {
    const auto id = svc.create_session(Study::LetterString);
    const auto summary = run_session(svc, id, i % 3 == 0);
    if (i % 3 == 0) {
      CHECK(summary["status"] == "rejected");
      CHECK(summary["completion_code"].is_null());
    } else {
      CHECK(summary["status"] == "completed");
      completed.insert(id);
    }
  }

  const auto rejected = rejected_sessions(svc.sessions_path());
  CHECK(rejected.size() == 2);
  const auto all = load_records(svc.records_path());
  CHECK(all.size() == 6 * 16);

  std::vector<RunRecord> only_completed;
  for (const auto& r : all) {
    if (completed.count(r.respondent)) only_completed.push_back(r);
  }
  AggregateOptions opts;
  opts.rejected = rejected;
  const std::vector<std::string> by = {"study", "transformation"};
  CHECK(emit_csv(aggregate(all, by, opts)) == emit_csv(aggregate(only_completed, by)));
  CHECK(aggregate(all, by).cells.size() == aggregate(only_completed, by).cells.size());
  long n_all = 0, n_kept = 0;
  for (const auto& c : aggregate(all, by).cells) n_all += c.n;
  for (const auto& c : aggregate(all, by, opts).cells) n_kept += c.n;
  CHECK(n_all == 6 * 14);
  CHECK(n_kept == 4 * 14);
}

TEST_CASE("session plans") {
  TempDir dir;
  const auto config = config_in(dir);
  StudyService svc(config);

  for (std::uint64_t ord = 0; ord < 20; ++ord) {
    const auto letters = svc.plan_session(Study::LetterString, ord);
    REQUIRE(letters.items.size() == 16);
    std::set<std::string> ids;
    std::map<std::string, int> per_type;
    for (const auto& item : letters.items) {
      if (item.attention_check) continue;
      ids.insert(study_problem_id(item));
      ++per_type[item.eval.tags.at("transformation")];
      CHECK(item.eval.tags.at("prompt") == "human");
    }
    CHECK(ids.size() == 14);
    // Six types over fourteen problems: two or three of each.
    for (const auto& [type, count] : per_type) CHECK((count == 2 || count == 3));

    const auto stories = svc.plan_session(Study::Story, ord);
    std::set<std::string> story_ids;
    int first = 0;
    for (const auto& item : stories.items) {
      if (item.attention_check) continue;
      story_ids.insert(item.eval.tags.at("problem"));
      first += item.eval.tags.at("order") == "correct_first";
    }
    CHECK(story_ids.size() == 6);
    CHECK(first == 3);
    CHECK(stories.condition == (ord % 2 == 0 ? "original" : "paraphrased"));

    const auto m = svc.plan_session(Study::Matrix, ord);
    CHECK(m.condition == (ord % 2 == 0 ? "digits" : "alt_blank"));
  }

  // Reproducible from (study, seed, ordinal) and independent of call order.
  StudyService other(config);
  const auto a = svc.plan_session(Study::Matrix, 5);
  const auto b = other.plan_session(Study::Matrix, 5);
  REQUIRE(a.items.size() == b.items.size());
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    CHECK(a.items[i].item_ref == b.items[i].item_ref);
    CHECK(a.items[i].eval.item_id == b.items[i].eval.item_id);
  }
  auto reseeded = config;
  reseeded.seed = 8;
  StudyService third(reseeded);
  const auto c = third.plan_session(Study::Matrix, 5);
  bool differs = false;
  for (std::size_t i = 0; i < a.items.size(); ++i) differs = differs || a.items[i].eval.item_id != c.items[i].eval.item_id;
  CHECK(differs);
}

TEST_CASE("exposure is even within each problem type across many sessions") {
  TempDir dir;
  auto config = config_in(dir);
  config.matrices = matrix_pool(MatrixVariant::Original, 8);
  StudyService svc(config);
  std::map<std::string, std::string> type_of;
  std::map<std::string, int> type_size;
  for (const auto& p : config.matrices) {
    type_of[p.id] = matrix_tags(p).at("rules");
    ++type_size[type_of[p.id]];
  }
  REQUIRE(type_size.size() == 3);  // "1" has 16 problems, "2" and "logic" 8 each

  std::map<std::string, int> exposure;
  long pairs = 0, overlap = 0;
  std::set<std::string> previous;
  const int sessions = 1000;
  for (std::uint64_t ord = 0; ord < sessions; ++ord) {
    std::set<std::string> ids;
    for (const auto& item : svc.plan_session(Study::Matrix, ord).items) {
      if (!item.attention_check) ids.insert(item.eval.item_id);
    }
    CHECK(ids.size() == 10);
    for (const auto& id : ids) ++exposure[id];
    if (!previous.empty()) {
      ++pairs;
      for (const auto& id : ids) overlap += previous.count(id);
    }
    previous = ids;
  }
  // Types are visited round-robin in a shuffled order, so each type gets
  // 4, 3 or 3 of the ten slots, 10/3 on average, spread over its members.
  CHECK(exposure.size() == 32);
  for (const auto& [id, n] : exposure) {
    CAPTURE(id);
    const double expected = sessions * (10.0 / 3.0) / type_size.at(type_of.at(id));
    CHECK(std::abs(n - expected) < 0.2 * expected);
  }
  // Independent sessions: E[overlap] = sum over types of E[c^2] / size, E[c^2] = (16 + 9 + 9) / 3.
  double expected_overlap = 0;
  for (const auto& [type, size] : type_size) expected_overlap += (34.0 / 3.0) / size;
  const double mean_overlap = static_cast<double>(overlap) / static_cast<double>(pairs);
  CHECK(mean_overlap == doctest::Approx(expected_overlap).epsilon(0.1));
}

TEST_CASE("too few problems") {
  TempDir dir;
  auto config = config_in(dir);
  config.stories = story_pool(5);
  config.matrices = matrix_pool(MatrixVariant::Original, 2);
  config.letters.clear();
  StudyService svc(config);
  CHECK(code_of([&] { svc.create_session(Study::Story); }) == ErrorCode::SuiteExhausted);
  CHECK(code_of([&] { svc.create_session(Study::Matrix); }) == ErrorCode::SuiteExhausted);
  CHECK(code_of([&] { svc.create_session(Study::LetterString); }) == ErrorCode::SuiteExhausted);
}

TEST_CASE("the HTTP API") {
  TempDir dir;
  StudyService svc(config_in(dir));
  httplib::Server server;
  mount_study_routes(server, svc);
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto res = client.Post("/sessions", R"({"study":"story"})", "application/json");
  REQUIRE(res);
  CHECK(res->status == 201);
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");
  const auto id = nlohmann::json::parse(res->body)["session_id"].get<std::string>();

  int served = 0;
  for (;;) {
    res = client.Get("/sessions/" + id + "/next");
    REQUIRE(res);
    if (res->status == 409) break;
    REQUIRE(res->status == 200);
    const auto env = nlohmann::json::parse(res->body);
    CHECK(env["presentation"]["answer_format"] == "choice");
    CHECK(env["presentation"]["choices"].size() == 3);
    const auto item = svc.snapshot(id).plan.items[env["position"].get<std::size_t>()];
    const nlohmann::json body = {{"item_ref", env["item_ref"]}, {"answer", item.eval.oracle_answer}};
    res = client.Post("/sessions/" + id + "/answers", body.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    ++served;
  }
  CHECK(served == 8);
  CHECK(nlohmann::json::parse(res->body)["error"] == "SessionComplete");

  res = client.Post("/sessions/" + id + "/finalize", "", "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(nlohmann::json::parse(res->body)["status"] == "completed");

  res = client.Get("/sessions/0123abcd/next");
  REQUIRE(res);
  CHECK(res->status == 404);
  CHECK(nlohmann::json::parse(res->body)["error"] == "UnknownSession");

  res = client.Post("/sessions", R"({"study":"chess"})", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  res = client.Post("/sessions", "{not json", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);

  const auto lid = svc.create_session(Study::LetterString);
  res = client.Post("/sessions/" + lid + "/answers", R"({"item_ref":"0000000000000000","answer":"a"})",
                    "application/json");
  REQUIRE(res);
  CHECK(res->status == 409);
  CHECK(nlohmann::json::parse(res->body)["error"] == "OutOfOrder");
  res = client.Get("/sessions/" + lid + "/next");
  REQUIRE(res);
  CHECK(nlohmann::json::parse(res->body)["presentation"]["alphabet_strip"].size() == 26);

  res = client.Options("/sessions");
  REQUIRE(res);
  CHECK(res->status == 204);

  server.stop();
  t.join();
}
