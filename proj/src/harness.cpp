#include "analogy/harness.hpp"

#include <ctime>
#include <exception>
#include <fstream>
#include <regex>
#include <thread>

#include "analogy/error.hpp"
#include "analogy/text.hpp"

namespace analogy {

namespace {

constexpr int kStoryMaxTokens = 512;
constexpr int kShortMaxTokens = 64;

std::string key_of(const std::string& suite_id, const std::string& item_id) { return suite_id + "\n" + item_id; }

std::string flat_cell(const Cell& cell) {
  Tokens flat;
  for (const auto& slot : cell) flat.insert(flat.end(), slot.begin(), slot.end());
  return join(flat);
}

RunRecord process(const EvalItem& item, ModelClient& client, const ResponseCache* cache, const RunOptions& options) {
  RunRecord r;
  r.item_id = item.item_id;
  r.suite_id = item.suite_id;
  r.tags = item.tags;
  r.prompt_hash = prompt_hash(item.messages);
  r.respondent = client.model_id();

  std::optional<CacheEntry> entry;
  if (cache) entry = cache->get(r.respondent, r.prompt_hash);
  std::string last_error;
  for (int attempt = 0; !entry && attempt < options.max_attempts; ++attempt) {
    try {
      CacheEntry fresh{client.complete({item.messages, item.max_tokens}), utc_timestamp()};
      if (cache) cache->put(r.respondent, r.prompt_hash, item.messages, fresh);
      entry = std::move(fresh);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TransportError) throw;
      last_error = e.what();
      if (attempt + 1 < options.max_attempts) {
        const auto wait = options.backoff * (1 << attempt);
        if (options.sleep) {
          options.sleep(wait);
        } else {
          std::this_thread::sleep_for(wait);
        }
      }
    }
  }
  if (!entry) {
    r.failed = true;
    r.error = last_error;
    r.timestamp = utc_timestamp();
    return r;
  }

  r.raw_response = entry->response;
  r.timestamp = entry->timestamp;
  const auto g = item.grade(item.bracket_completion ? truncate_at_bracket(r.raw_response) : r.raw_response);
  r.normalized_answer = g.normalized;
  r.correct = g.correct;
  r.extra = g.extra;
  return r;
}

std::string strip_edges(std::string token, const Alphabet& alphabet) {
  static const std::string_view kPunct = "'\"`.,:;!?()[]*";
  while (!token.empty() && !alphabet.contains(token)) {
    if (kPunct.find(token.back()) != std::string_view::npos) {
      token.pop_back();
    } else if (kPunct.find(token.front()) != std::string_view::npos) {
      token.erase(token.begin());
    } else {
      break;
    }
  }
  return token;
}

std::string bucket_of(const Alphabet& a, const std::string& glyph, Relation relation) {
  switch (a.kind()) {
    case AlphabetKind::Standard: return "standard";
    case AlphabetKind::Symbol: return "symbol";
    case AlphabetKind::Permuted: return std::string(to_string(pair_displacement(a, glyph, relation)));
  }
  return "?";
}

std::optional<int> ordinal_word(const std::string& w, bool row) {
  static const std::map<std::string, int> common = {
      {"1", 0}, {"2", 1}, {"3", 2}, {"one", 0}, {"two", 1}, {"three", 2}, {"first", 0}, {"second", 1},
      {"third", 2}, {"1st", 0}, {"2nd", 1}, {"3rd", 2}, {"last", 2}, {"middle", 1}, {"center", 1}, {"centre", 1},
  };
  if (auto it = common.find(w); it != common.end()) return it->second;
  if (row) {
    if (w == "top") return 0;
    if (w == "bottom") return 2;
  } else {
    if (w == "left" || w == "leftmost") return 0;
    if (w == "right" || w == "rightmost") return 2;
  }
  return std::nullopt;
}

}  // namespace

std::string truncate_at_bracket(std::string_view response) {
  return std::string(response.substr(0, response.find(']')));
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json record_to_json(const RunRecord& r) {
  nlohmann::json j = {{"item_id", r.item_id},
                      {"suite_id", r.suite_id},
                      {"tags", r.tags},
                      {"prompt_hash", r.prompt_hash},
                      {"raw_response", r.raw_response},
                      {"normalized_answer", r.normalized_answer},
                      {"correct", r.correct},
                      {"respondent", r.respondent},
                      {"timestamp", r.timestamp},
                      {"failed", r.failed},
                      {"extra", r.extra}};
  if (r.failed) j["error"] = r.error;
  return j;
}

RunRecord record_from_json(const nlohmann::json& j) {
  try {
    RunRecord r;
    r.item_id = j.at("item_id").get<std::string>();
    r.suite_id = j.value("suite_id", "");
    r.tags = j.value("tags", Tags{});
    r.prompt_hash = j.value("prompt_hash", "");
    r.raw_response = j.value("raw_response", "");
    r.normalized_answer = j.value("normalized_answer", "");
    r.correct = j.at("correct").get<bool>();
    r.respondent = j.value("respondent", "");
    r.timestamp = j.value("timestamp", "");
    r.failed = j.value("failed", false);
    r.error = j.value("error", "");
    r.extra = j.value("extra", nlohmann::json::object());
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("run record: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create cache directory " + dir_.string() + ": " + ec.message());
}

std::filesystem::path ResponseCache::entry_path(const std::string& model_id, const std::string& prompt_hash) const {
  return dir_ / (sha256_hex(model_id + "\n" + prompt_hash) + ".json");
}

std::optional<CacheEntry> ResponseCache::get(const std::string& model_id, const std::string& prompt_hash) const {
  const auto path = entry_path(model_id, prompt_hash);
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    nlohmann::json j;
    in >> j;
    if (j.at("model_id").get<std::string>() != model_id || j.at("prompt_hash").get<std::string>() != prompt_hash) {
      throw Error(ErrorCode::CacheCorrupt, path.string() + " belongs to another prompt");
    }
    return CacheEntry{j.at("response").get<std::string>(), j.at("timestamp").get<std::string>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CacheCorrupt, path.string() + ": " + e.what());
  }
}

void ResponseCache::put(const std::string& model_id, const std::string& prompt_hash, const Messages& messages,
                        const CacheEntry& entry) const {
  const auto path = entry_path(model_id, prompt_hash);
  const nlohmann::json j = {{"model_id", model_id},
                            {"prompt_hash", prompt_hash},
                            {"messages", messages_to_json(messages)},
                            {"response", entry.response},
                            {"timestamp", entry.timestamp}};
  // Write-then-rename so readers never see a half-written entry.
  auto tmp = path;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << j.dump(2) << "\n";
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot move cache entry into place: " + ec.message());
}

RecordStore::RecordStore(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
}

void RecordStore::append(const RunRecord& r) {
  const auto line = record_to_json(r).dump() + "\n";
  std::lock_guard lock(mu_);
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot append to " + path_.string());
  out << line;
  out.flush();
}

std::vector<RunRecord> RecordStore::load() const {
  std::lock_guard lock(mu_);
  return load_records(path_);
}

std::vector<RunRecord> load_records(const std::filesystem::path& path) {
  std::vector<RunRecord> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t start = 0;
  while (start < content.size()) {
    const auto end = content.find('\n', start);
    if (end == std::string::npos) break;  // torn final write
    const auto line = std::string_view(content).substr(start, end - start);
    start = end + 1;
    if (trim(line).empty()) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
  }
  return out;
}

void write_records(const std::filesystem::path& path, const std::vector<RunRecord>& records) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  for (const auto& r : records) out << record_to_json(r).dump() << "\n";
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

std::vector<RunRecord> run_suite(const std::vector<EvalItem>& items, ModelClient& client, const ResponseCache* cache,
                                 RecordStore* store, const RunOptions& options) {
  std::map<std::string, RunRecord> done;
  if (store) {
    for (auto& r : store->load()) {
      if (!r.failed && r.respondent == client.model_id()) done[key_of(r.suite_id, r.item_id)] = std::move(r);
    }
  }

  std::vector<RunRecord> out(items.size());
  std::vector<std::exception_ptr> errors(items.size());
  const int threads = std::max(1, options.parallelism);
  const long n = static_cast<long>(items.size());

#pragma omp parallel for schedule(dynamic) num_threads(threads) if (threads > 1)
  for (long i = 0; i < n; ++i) {
    try {
      const auto& item = items[i];
      if (auto it = done.find(key_of(item.suite_id, item.item_id)); it != done.end()) {
        out[i] = it->second;
        continue;
      }
      out[i] = process(item, client, cache, options);
      if (store) store->append(out[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

RunRecord regrade(const EvalItem& item, const RunRecord& record) {
  RunRecord r = record;
  if (r.failed) return r;
  const auto g = item.grade(item.bracket_completion ? truncate_at_bracket(r.raw_response) : r.raw_response);
  r.normalized_answer = g.normalized;
  r.correct = g.correct;
  r.extra = g.extra;
  return r;
}

EvalItem make_letter_item(const LetterStringProblem& p, PromptName prompt, const std::string& suite_id) {
  EvalItem item;
  item.item_id = p.id;
  item.suite_id = suite_id;
  item.tags = problem_tags(p);
  item.tags["prompt"] = std::string(to_string(prompt));
  item.messages = letter_prompt(prompt, p);
  item.bracket_completion = is_bracket_completion(prompt);
  item.max_tokens = kShortMaxTokens;
  auto problem = std::make_shared<const LetterStringProblem>(p);
  item.grade = [problem](std::string_view response) {
    const auto g = grade(*problem, response);
    return Graded{join(g.normalized), g.correct, nlohmann::json::object()};
  };
  const std::string close = item.bracket_completion ? "]" : "";
  item.oracle_answer = join(p.key) + close;
  item.literal_answer = join(p.target) + close;
  return item;
}

EvalItem make_matrix_item(const MatrixProblem& p, PromptName prompt, const std::string& suite_id) {
  EvalItem item;
  item.item_id = p.id;
  item.suite_id = suite_id;
  item.tags = matrix_tags(p);
  item.tags["prompt"] = std::string(to_string(prompt));
  item.messages = matrix_prompt(prompt, p);
  item.bracket_completion = is_bracket_completion(prompt);
  item.max_tokens = kShortMaxTokens;
  auto problem = std::make_shared<const MatrixProblem>(p);
  item.grade = [problem](std::string_view response) {
    const auto tokens = normalize_matrix_response(*problem, response);
    return Graded{join(tokens), grade_matrix(*problem, response), nlohmann::json::object()};
  };
  // The literal respondent repeats a neighbouring cell.
  const int neighbour = p.blank_col == 0 ? 1 : p.blank_col - 1;
  const auto& copy = p.grid[p.blank_row][neighbour];
  if (item.bracket_completion) {
    item.oracle_answer = flat_cell(p.key) + "]";
    item.literal_answer = flat_cell(copy) + "]";
  } else {
    item.oracle_answer = render_cell(p.key);
    item.literal_answer = render_cell(copy);
  }
  return item;
}

EvalItem make_story_item(const StoryTrial& t, const std::string& suite_id) {
  EvalItem item;
  item.item_id = "story-" + std::to_string(t.problem_id) + "-" + std::string(to_string(t.order)) + "-" +
                 std::string(to_string(t.variant));
  item.suite_id = suite_id;
  item.tags = {{"task", "story"},
               {"problem", std::to_string(t.problem_id)},
               {"order", std::string(to_string(t.order))},
               {"variant", std::string(to_string(t.variant))},
               {"prompt", std::string(to_string(PromptName::StoryMain))}};
  item.messages = story_prompt(t);
  item.max_tokens = kStoryMaxTokens;
  const auto order = t.order;
  const auto variant = t.variant;
  item.grade = [order, variant](std::string_view response) {
    const auto choice = classify_story_response(response);
    return Graded{std::string(to_string(choice)), story_correct(order, choice),
                  {{"order", to_string(order)}, {"variant", to_string(variant)}, {"classification", to_string(choice)}}};
  };
  item.oracle_answer = order == StoryOrder::CorrectFirst ? "Story A is the better analogy to Story 1."
                                                         : "Story B is the better analogy to Story 1.";
  item.literal_answer = "Story A is the better analogy to Story 1.";
  return item;
}

std::unique_ptr<FunctionClient> make_oracle_client(const std::vector<EvalItem>& items, std::string id) {
  std::map<std::string, std::string> table;
  for (const auto& item : items) table[prompt_hash(item.messages)] = item.oracle_answer;
  return make_lookup_client(std::move(id), std::move(table));
}

std::unique_ptr<FunctionClient> make_literal_client(const std::vector<EvalItem>& items, std::string id) {
  std::map<std::string, std::string> table;
  for (const auto& item : items) table[prompt_hash(item.messages)] = item.literal_answer;
  return make_lookup_client(std::move(id), std::move(table));
}

StoryOutcome story_outcome(const RunRecord& r) {
  StoryOutcome o;
  o.order = story_order_from_string(r.tags.at("order"));
  o.variant = story_variant_from_string(r.tags.at("variant"));
  const auto& c = r.normalized_answer;
  o.choice = c == "A" ? StoryChoice::First : c == "B" ? StoryChoice::Second : c == "both" ? StoryChoice::Both
                                                                                            : StoryChoice::Unknown;
  return o;
}

// ---------------------------------------------------------------------------
// Comprehension checks
// ---------------------------------------------------------------------------

std::optional<std::string> parse_ccc_response(std::string_view response, const Alphabet& alphabet) {
  std::string text(response);
  const auto lower = to_lower_ascii(text);
  std::size_t cut = std::string::npos;
  for (std::string_view marker : {" is:", " is "}) {
    const auto pos = lower.rfind(marker);
    if (pos != std::string::npos && (cut == std::string::npos || pos + marker.size() > cut)) cut = pos + marker.size();
  }
  if (cut != std::string::npos) text = text.substr(cut);
  const auto tokens = split_ws(text);
  for (const auto& raw : tokens) {
    auto token = strip_edges(raw, alphabet);
    // Case folding only for a lone token, so "I think..." is not read as "i".
    if (!alphabet.contains(token) && tokens.size() == 1) token = strip_edges(to_lower_ascii(raw), alphabet);
    if (alphabet.contains(token)) return token;
    return std::nullopt;
  }
  return std::nullopt;
}

std::vector<EvalItem> make_ccc_items(const std::vector<Alphabet>& alphabets, const std::vector<Relation>& relations) {
  std::vector<EvalItem> out;
  for (const auto& a : alphabets) {
    for (auto relation : relations) {
      for (std::size_t i = 0; i < a.size(); ++i) {
        if ((relation == Relation::Succ && i + 1 == a.size()) || (relation == Relation::Pred && i == 0)) continue;
        const auto& glyph = a.at(i);
        const auto expected = relation == Relation::Succ ? a.at(i + 1) : a.at(i - 1);
        EvalItem item;
        item.item_id = "ccc-" + a.label() + "-" + std::string(to_string(relation)) + "-" + std::to_string(i);
        item.suite_id = "ccc";
        item.tags = {{"task", "ccc"},
                     {"relation", std::string(to_string(relation))},
                     {"alphabet", a.family()},
                     {"alphabet_kind", std::string(to_string(a.kind()))},
                     {"bucket", bucket_of(a, glyph, relation)}};
        item.messages = ccc_prompt(relation, a, glyph);
        item.max_tokens = 16;
        item.grade = [a, expected](std::string_view response) {
          const auto got = parse_ccc_response(response, a);
          return Graded{got.value_or(""), got && *got == expected, nlohmann::json::object()};
        };
        item.oracle_answer = " " + expected;
        item.literal_answer = " " + glyph;
        out.push_back(std::move(item));
      }
    }
  }
  return out;
}

CccReport summarize_ccc(const std::vector<RunRecord>& records) {
  CccReport report;
  for (const auto& r : records) {
    if (r.tags.count("task") == 0 || r.tags.at("task") != "ccc") continue;
    const auto relation = r.tags.at("relation") == "successor" ? Relation::Succ : Relation::Pred;
    auto& cell = report.cells[relation];
    const auto& bucket = r.tags.at("bucket");
    Tally* t = bucket == "standard"             ? &cell.standard
               : bucket == "original_positions" ? &cell.permuted_original
               : bucket == "moved"              ? &cell.permuted_moved
                                                : &cell.symbol;
    t->add(r.correct);
  }
  report.records = records;
  return report;
}

CccReport run_ccc(const std::vector<Alphabet>& alphabets, ModelClient& client, const ResponseCache* cache,
                  RecordStore* store, const RunOptions& options, const std::vector<Relation>& relations) {
  return summarize_ccc(run_suite(make_ccc_items(alphabets, relations), client, cache, store, options));
}

std::optional<std::pair<int, int>> parse_blank_position(std::string_view response) {
  const std::string text = to_lower_ascii(response);
  static const std::regex coords(R"(\(\s*([1-3])\s*,\s*([1-3])\s*\))");
  static const std::regex row_first(R"(\brow\s*(?:#|number\s*)?([1-3]|one|two|three)\b)");
  static const std::regex row_after(R"(\b(first|second|third|1st|2nd|3rd|last|top|middle|center|centre|bottom)\s+row\b)");
  static const std::regex col_first(R"(\bcolumn\s*(?:#|number\s*)?([1-3]|one|two|three)\b)");
  static const std::regex col_after(
      R"(\b(first|second|third|1st|2nd|3rd|last|left|leftmost|middle|center|centre|right|rightmost)(?:-most)?\s+column\b)");
  static const std::regex corner(
      R"(\b(top|middle|center|centre|bottom)[\s-]+(left|middle|center|centre|right)\b)");
  static const std::regex centre_only(R"(\b(?:the\s+)?(?:very\s+)?(center|centre|middle)\s+(?:cell|position|element|of the grid|square)\b)");

  std::smatch m;
  if (std::regex_search(text, m, coords)) return std::pair{std::stoi(m[1]) - 1, std::stoi(m[2]) - 1};

  std::optional<int> row, col;
  if (std::regex_search(text, m, row_first)) {
    row = ordinal_word(m[1], true);
  } else if (std::regex_search(text, m, row_after)) {
    row = ordinal_word(m[1], true);
  }
  if (std::regex_search(text, m, col_first)) {
    col = ordinal_word(m[1], false);
  } else if (std::regex_search(text, m, col_after)) {
    col = ordinal_word(m[1], false);
  }
  if (row && col) return std::pair{*row, *col};

  if (std::regex_search(text, m, corner)) {
    const auto r = ordinal_word(m[1], true);
    const auto c = ordinal_word(m[2], false);
    if (r && c) return std::pair{*r, *c};
  }
  if (std::regex_search(text, m, centre_only)) return std::pair{1, 1};
  return std::nullopt;
}

std::vector<MatrixProblem> blank_sweep(const MatrixProblem& p) {
  std::vector<MatrixProblem> out;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out.push_back(reblank(p, r, c));
  }
  return out;
}

std::vector<EvalItem> make_blank_position_items(const std::vector<MatrixProblem>& grids) {
  std::vector<EvalItem> out;
  for (const auto& p : grids) {
    if (!p.grid[p.blank_row][p.blank_col].empty()) throw Error(ErrorCode::MalformedGrid, "grid has no blank cell");
    const auto where = std::to_string(p.blank_row + 1) + "," + std::to_string(p.blank_col + 1);
    EvalItem item;
    item.item_id = "blank-" + where + "-" + p.id;
    item.suite_id = "blank-position";
    item.tags = {{"task", "blank_position"}, {"blank", where}};
    item.messages = blank_position_prompt(p);
    item.max_tokens = kShortMaxTokens;
    const std::pair<int, int> expected{p.blank_row, p.blank_col};
    item.grade = [expected](std::string_view response) {
      const auto got = parse_blank_position(response);
      const std::string norm = got ? std::to_string(got->first + 1) + "," + std::to_string(got->second + 1) : "";
      return Graded{norm, got == expected, nlohmann::json::object()};
    };
    item.oracle_answer = "The missing element is in row " + std::to_string(p.blank_row + 1) + ", column " +
                         std::to_string(p.blank_col + 1) + ".";
    item.literal_answer = "The missing element is in the bottom right corner.";
    out.push_back(std::move(item));
  }
  return out;
}

BlankCheckReport run_blank_position_check(const std::vector<MatrixProblem>& grids, ModelClient& client,
                                          const ResponseCache* cache, RecordStore* store, const RunOptions& options) {
  BlankCheckReport report;
  report.records = run_suite(make_blank_position_items(grids), client, cache, store, options);
  for (const auto& r : report.records) report.tally.add(r.correct);
  return report;
}

}  // namespace analogy
