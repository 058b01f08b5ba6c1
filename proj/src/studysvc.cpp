#include "analogy/studysvc.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include <httplib.h>

#include "analogy/error.hpp"
#include "analogy/text.hpp"

namespace analogy {

namespace {

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

std::string new_token() {
  static std::random_device rd;
  static std::mutex mu;
  std::lock_guard lock(mu);
  auto draw = [] { return (static_cast<std::uint64_t>(rd()) << 32) ^ rd(); };
  return hex64(draw()) + hex64(draw());
}

const std::vector<std::string> kStoryChoices = {"Story A", "Story B", "Both are equally analogous"};

nlohmann::json letter_payload(const LetterStringProblem& p) {
  return {{"id", p.id},
          {"alphabet", {{"glyphs", p.alphabet.glyphs()}}},
          {"source_lhs", p.source_lhs},
          {"source_rhs", p.source_rhs},
          {"target", p.target}};
}

nlohmann::json matrix_payload(const MatrixProblem& p) {
  auto j = matrix_to_json(p);
  return {{"id", j["id"]}, {"grid", j["grid"]}, {"blank", j["blank"]}, {"variant", j["variant"]}};
}

nlohmann::json story_payload(const StoryTrial& t) {
  return {{"id", t.problem_id}, {"source", t.source}, {"story_a", t.story_a}, {"story_b", t.story_b}};
}

EvalItem check_item(const AttentionCheck& c, Study study) {
  EvalItem item;
  item.item_id = c.id;
  item.suite_id = "study-" + std::string(to_string(study));
  item.tags = {{"task", "attention_check"}, {"check", c.id}};
  item.messages = {{"user", c.stimulus}};
  item.grade = [c](std::string_view answer) {
    return Graded{normalize_check_answer(answer), check_passed(c, answer), nlohmann::json::object()};
  };
  item.oracle_answer = c.expected;
  item.literal_answer = "";
  return item;
}

// Round-robin over problem types, drawing without replacement within a
// session. A drained type falls back to any unused problem.
template <class Key>
std::vector<std::size_t> round_robin_pick(const std::vector<Key>& type_of, std::size_t count,
                                          const std::vector<std::string>& ids, Rng rng) {
  std::vector<Key> types(type_of.begin(), type_of.end());
  std::sort(types.begin(), types.end());
  types.erase(std::unique(types.begin(), types.end()), types.end());
  auto order_rng = rng.split("types");
  order_rng.shuffle(std::span<Key>(types));
  auto pick_rng = rng.split("pick");

  std::set<std::string> used_ids;
  std::vector<std::size_t> picked;
  for (std::size_t i = 0; i < count; ++i) {
    const Key want = types.empty() ? Key{} : types[i % types.size()];
    std::vector<std::size_t> candidates, fallback;
    for (std::size_t k = 0; k < type_of.size(); ++k) {
      if (used_ids.count(ids[k])) continue;
      (type_of[k] == want ? candidates : fallback).push_back(k);
    }
    const auto& from = candidates.empty() ? fallback : candidates;
    if (from.empty()) {
      throw Error(ErrorCode::SuiteExhausted, "need " + std::to_string(count) + " distinct problems, only " +
                                                 std::to_string(picked.size()) + " available");
    }
    const auto k = pick_rng.pick(std::span<const std::size_t>(from));
    used_ids.insert(ids[k]);
    picked.push_back(k);
  }
  return picked;
}

std::filesystem::path records_file(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  return dir / "records.jsonl";
}

}  // namespace

std::string_view to_string(Study s) {
  switch (s) {
    case Study::LetterString: return "letterstring";
    case Study::Matrix: return "matrix";
    case Study::Story: return "story";
  }
  return "?";
}

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::Active: return "active";
    case SessionStatus::Completed: return "completed";
    case SessionStatus::Rejected: return "rejected";
  }
  return "?";
}

Study study_from_string(std::string_view name) {
  const auto n = to_lower_ascii(name);
  if (n == "letterstring" || n == "letter-string" || n == "letter") return Study::LetterString;
  if (n == "matrix") return Study::Matrix;
  if (n == "story") return Study::Story;
  throw Error(ErrorCode::ConfigInvalid, "unknown study '" + std::string(name) + "'");
}

std::string normalize_check_answer(std::string_view answer) {
  std::string out;
  for (unsigned char c : answer) {
    if (std::isspace(c) || std::ispunct(c)) continue;
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

bool check_passed(const AttentionCheck& c, std::string_view answer) {
  return normalize_check_answer(answer) == normalize_check_answer(c.expected);
}

std::map<Study, StudyMaterials> load_study_materials(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::map<Study, StudyMaterials> out;
  try {
    const auto j = nlohmann::json::parse(in);
    for (const auto& [name, body] : j.items()) {
      StudyMaterials m;
      m.instructions = body.at("instructions").get<std::string>();
      m.example = body.at("example");
      for (const auto& c : body.at("attention_checks")) {
        m.checks.push_back({c.at("id").get<std::string>(), c.at("stimulus").get<std::string>(),
                            c.at("expected").get<std::string>()});
      }
      if (m.checks.empty()) throw Error(ErrorCode::MissingField, name + ": no attention checks");
      out[study_from_string(name)] = std::move(m);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return out;
}

std::filesystem::path default_materials_path() {
  return std::filesystem::path(ANALOGY_DATA_DIR) / "study_materials.json";
}

StudyService::StudyService(StudyConfig config)
    : config_(std::move(config)), records_(records_file(config_.store_dir)) {
  if (config_.materials.empty()) config_.materials = load_study_materials(default_materials_path());
}

std::filesystem::path StudyService::records_path() const { return config_.store_dir / "records.jsonl"; }
std::filesystem::path StudyService::sessions_path() const { return config_.store_dir / "sessions.jsonl"; }

std::vector<std::string> StudyService::conditions(Study study) const {
  switch (study) {
    case Study::LetterString: return {"mixed"};
    case Study::Matrix: {
      std::vector<std::string> out;
      for (auto v : {MatrixVariant::Original, MatrixVariant::AltBlank, MatrixVariant::Symbols}) {
        const bool present = std::any_of(config_.matrices.begin(), config_.matrices.end(),
                                         [v](const MatrixProblem& p) { return p.variant == v; });
        if (present) out.emplace_back(to_string(v));
      }
      return out;
    }
    case Study::Story: return {std::string(to_string(StoryVariant::Original)), std::string(to_string(StoryVariant::Paraphrased))};
  }
  return {};
}

SessionPlan StudyService::plan_session(Study study, std::uint64_t ordinal) const {
  auto mat = config_.materials.find(study);
  if (mat == config_.materials.end()) {
    throw Error(ErrorCode::ConfigInvalid, "no study materials for " + std::string(to_string(study)));
  }
  const auto conds = conditions(study);
  if (conds.empty()) throw Error(ErrorCode::SuiteExhausted, "no problems loaded for " + std::string(to_string(study)));

  const Rng rng = Rng(config_.seed).split("studysvc").split(to_string(study)).split(ordinal);
  SessionPlan plan;
  plan.study = study;
  plan.condition = conds[ordinal % conds.size()];
  const std::string suite_id = "study-" + std::string(to_string(study));

  std::vector<SessionItem> problems;
  auto add = [&](EvalItem eval, nlohmann::json payload) {
    eval.suite_id = suite_id;
    eval.tags["prompt"] = "human";
    SessionItem item;
    item.eval = std::move(eval);
    item.problem = std::move(payload);
    problems.push_back(std::move(item));
  };

  if (study == Study::LetterString) {
    std::vector<Transformation> type_of;
    std::vector<std::string> ids;
    for (const auto& p : config_.letters) {
      type_of.push_back(p.transformation);
      ids.push_back(p.id);
    }
    for (auto k : round_robin_pick(type_of, kLetterSessionItems, ids, rng.split("problems"))) {
      const auto& p = config_.letters[k];
      add(make_letter_item(p, PromptName::LetterHumanlike, suite_id), letter_payload(p));
    }
  } else if (study == Study::Matrix) {
    std::vector<std::size_t> pool;
    for (std::size_t k = 0; k < config_.matrices.size(); ++k) {
      if (to_string(config_.matrices[k].variant) == plan.condition) pool.push_back(k);
    }
    std::vector<std::string> type_of, ids;
    for (auto k : pool) {
      type_of.push_back(matrix_tags(config_.matrices[k]).at("rules"));
      ids.push_back(config_.matrices[k].id);
    }
    for (auto k : round_robin_pick(type_of, kMatrixSessionItems, ids, rng.split("problems"))) {
      const auto& p = config_.matrices[pool[k]];
      add(make_matrix_item(p, PromptName::MatrixMain, suite_id), matrix_payload(p));
    }
  } else {
    std::vector<std::size_t> order(config_.stories.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (order.size() < static_cast<std::size_t>(kStorySessionItems)) {
      throw Error(ErrorCode::SuiteExhausted, "need " + std::to_string(kStorySessionItems) + " stories");
    }
    auto pick_rng = rng.split("problems");
    pick_rng.shuffle(std::span<std::size_t>(order));
    // Half the items put the correct story first.
    std::vector<StoryOrder> orders;
    for (int i = 0; i < kStorySessionItems; ++i) {
      orders.push_back(i < kStorySessionItems / 2 ? StoryOrder::CorrectFirst : StoryOrder::CorrectSecond);
    }
    auto order_rng = rng.split("orders");
    order_rng.shuffle(std::span<StoryOrder>(orders));
    const auto variant = story_variant_from_string(plan.condition);
    for (int i = 0; i < kStorySessionItems; ++i) {
      const auto trial = make_trial(config_.stories[order[i]], orders[i], variant);
      add(make_story_item(trial, suite_id), story_payload(trial));
    }
  }

  const std::size_t total = problems.size() + kAttentionChecksPerSession;
  std::vector<std::size_t> positions(total);
  for (std::size_t i = 0; i < total; ++i) positions[i] = i;
  auto check_rng = rng.split("checks");
  check_rng.shuffle(std::span<std::size_t>(positions));
  std::set<std::size_t> check_at(positions.begin(), positions.begin() + kAttentionChecksPerSession);

  const auto& checks = mat->second.checks;
  auto ref_rng = rng.split("refs");
  std::size_t next_problem = 0, next_check = 0;
  for (std::size_t pos = 0; pos < total; ++pos) {
    SessionItem item;
    if (check_at.count(pos)) {
      const auto& c = checks[next_check++ % checks.size()];
      item.attention_check = true;
      item.eval = check_item(c, study);
      item.problem = {{"id", c.id}, {"stimulus", c.stimulus}};
    } else {
      item = std::move(problems[next_problem++]);
    }
    item.item_ref = hex64(ref_rng.split(pos).next());
    item.eval.tags["study"] = std::string(to_string(study));
    item.eval.tags["condition"] = plan.condition;
    plan.items.push_back(std::move(item));
  }
  return plan;
}

std::string StudyService::create_session(Study study) {
  std::unique_lock lock(sessions_mu_);
  const auto ordinal = next_ordinal_[study];
  auto slot = std::make_shared<Slot>();
  slot->session.plan = plan_session(study, ordinal);
  slot->session.ordinal = ordinal;
  std::string id;
  do {
    id = new_token();
  } while (sessions_.count(id));
  slot->session.session_id = id;
  sessions_[id] = slot;
  ++next_ordinal_[study];
  return id;
}

std::shared_ptr<StudyService::Slot> StudyService::find(const std::string& session_id) const {
  std::shared_lock lock(sessions_mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "no session " + session_id);
  return it->second;
}

Session StudyService::snapshot(const std::string& session_id) const {
  auto slot = find(session_id);
  std::lock_guard lock(slot->mu);
  return slot->session;
}

nlohmann::json StudyService::next_item(const std::string& session_id) {
  auto slot = find(session_id);
  std::lock_guard lock(slot->mu);
  auto& s = slot->session;
  if (s.status != SessionStatus::Active || s.cursor >= s.plan.items.size()) {
    throw Error(ErrorCode::SessionComplete, "no items left in session " + session_id);
  }
  const auto& item = s.plan.items[s.cursor];
  const auto study = s.plan.study;
  nlohmann::json presentation = {
      {"answer_format", study == Study::Story ? "choice" : "text"},
      {"choices", study == Study::Story ? nlohmann::json(kStoryChoices) : nlohmann::json(nullptr)},
      {"alphabet_strip", nullptr}};
  if (study == Study::LetterString) {
    presentation["alphabet_strip"] =
        item.problem.contains("alphabet") ? item.problem["alphabet"]["glyphs"] : nlohmann::json(standard_letters());
  }
  nlohmann::json out = {{"session_id", s.session_id},
                        {"study", to_string(study)},
                        {"condition", s.plan.condition},
                        {"item_ref", item.item_ref},
                        {"position", s.cursor},
                        {"total", s.plan.items.size()},
                        {"item", item.problem},
                        {"presentation", presentation},
                        {"instructions", nullptr},
                        {"example", nullptr}};
  if (!s.example_shown) {
    const auto& m = config_.materials.at(study);
    out["instructions"] = m.instructions;
    out["example"] = m.example;
    s.example_shown = true;
  }
  return out;
}

nlohmann::json StudyService::submit_answer(const std::string& session_id, const std::string& item_ref,
                                           const std::string& answer) {
  auto slot = find(session_id);
  std::lock_guard lock(slot->mu);
  auto& s = slot->session;
  if (s.status != SessionStatus::Active || s.cursor >= s.plan.items.size()) {
    throw Error(ErrorCode::SessionComplete, "session " + session_id + " takes no more answers");
  }
  auto& item = s.plan.items[s.cursor];
  if (item_ref != item.item_ref) {
    throw Error(ErrorCode::OutOfOrder, "expected the item at position " + std::to_string(s.cursor));
  }
  if (trim(answer).empty()) throw Error(ErrorCode::ParseError, "empty answer");

  const auto graded = item.eval.grade(answer);
  RunRecord r;
  r.item_id = item.eval.item_id;
  r.suite_id = item.eval.suite_id;
  r.tags = item.eval.tags;
  r.prompt_hash = prompt_hash(item.eval.messages);
  r.raw_response = answer;
  r.normalized_answer = graded.normalized;
  r.correct = graded.correct;
  r.respondent = s.session_id;
  r.timestamp = utc_timestamp();
  r.extra = graded.extra;
  r.extra["item_ref"] = item.item_ref;
  r.extra["position"] = s.cursor;
  records_.append(r);

  item.correct = graded.correct;
  ++s.cursor;
  return {{"ok", true}, {"position", s.cursor - 1}, {"remaining", s.plan.items.size() - s.cursor}};
}

nlohmann::json StudyService::finalize(const std::string& session_id) {
  auto slot = find(session_id);
  std::lock_guard lock(slot->mu);
  auto& s = slot->session;
  if (s.summary) return *s.summary;
  if (s.cursor < s.plan.items.size()) {
    throw Error(ErrorCode::SessionIncomplete, std::to_string(s.plan.items.size() - s.cursor) + " items unanswered");
  }
  bool failed_check = false;
  long correct = 0, problems = 0;
  nlohmann::json items = nlohmann::json::array();
  for (std::size_t i = 0; i < s.plan.items.size(); ++i) {
    const auto& item = s.plan.items[i];
    const bool ok = item.correct.value_or(false);
    if (item.attention_check) {
      failed_check = failed_check || !ok;
    } else {
      ++problems;
      correct += ok;
    }
    items.push_back({{"item_ref", item.item_ref}, {"position", i}, {"attention_check", item.attention_check}, {"correct", ok}});
  }
  s.status = failed_check ? SessionStatus::Rejected : SessionStatus::Completed;
  nlohmann::json summary = {{"session_id", s.session_id},
                            {"study", to_string(s.plan.study)},
                            {"condition", s.plan.condition},
                            {"status", to_string(s.status)},
                            {"problems", problems},
                            {"correct", correct},
                            {"items", items},
                            {"completion_code", s.status == SessionStatus::Completed ? nlohmann::json(config_.completion_code)
                                                                                    : nlohmann::json(nullptr)}};
  auto line = summary;
  line["ordinal"] = s.ordinal;
  std::vector<std::string> ids;
  for (const auto& item : s.plan.items) ids.push_back(item.eval.item_id);
  line["item_ids"] = ids;
  {
    std::lock_guard file_lock(sessions_file_mu_);
    std::ofstream out(sessions_path(), std::ios::app | std::ios::binary);
    out << line.dump() + "\n" << std::flush;
    if (!out) throw Error(ErrorCode::IoError, "cannot append to " + sessions_path().string());
  }
  s.summary = summary;
  return summary;
}

namespace {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownSession: return 404;
    case ErrorCode::OutOfOrder:
    case ErrorCode::SessionComplete:
    case ErrorCode::SessionIncomplete: return 409;
    case ErrorCode::SuiteExhausted: return 503;
    case ErrorCode::ParseError:
    case ErrorCode::MissingField:
    case ErrorCode::ConfigInvalid: return 400;
    default: return 500;
  }
}

void reply(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <class Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    reply(res, http_status(e.code()), {{"error", to_string(e.code())}, {"message", e.what()}});
  } catch (const nlohmann::json::exception& e) {
    reply(res, 400, {{"error", "ParseError"}, {"message", e.what()}});
  }
}

}  // namespace

void mount_study_routes(httplib::Server& server, StudyService& service) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  server.Options(R"(/sessions.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Post("/sessions", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = nlohmann::json::parse(req.body);
      const auto id = service.create_session(study_from_string(body.at("study").get<std::string>()));
      reply(res, 201, {{"session_id", id}});
    });
  });
  server.Get(R"(/sessions/([0-9a-f]+)/next)", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { reply(res, 200, service.next_item(req.matches[1])); });
  });
  server.Post(R"(/sessions/([0-9a-f]+)/answers)", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = nlohmann::json::parse(req.body);
      reply(res, 200,
            service.submit_answer(req.matches[1], body.at("item_ref").get<std::string>(),
                                  body.at("answer").get<std::string>()));
    });
  });
  server.Post(R"(/sessions/([0-9a-f]+)/finalize)", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { reply(res, 200, service.finalize(req.matches[1])); });
  });
}

}  // namespace analogy
