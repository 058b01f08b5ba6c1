#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "analogy/alphabet.hpp"
#include "analogy/client.hpp"
#include "analogy/letterstring.hpp"
#include "analogy/matrix.hpp"
#include "analogy/prompt.hpp"
#include "analogy/story.hpp"

namespace analogy {

using Tags = std::map<std::string, std::string>;

struct Graded {
  std::string normalized;
  bool correct = false;
  nlohmann::json extra = nlohmann::json::object();
};

/// A rendered question plus the grader that owns it.
struct EvalItem {
  std::string item_id;
  std::string suite_id;
  Tags tags;
  Messages messages;
  bool bracket_completion = false;
  int max_tokens = 64;
  std::function<Graded(std::string_view response)> grade;
  std::string oracle_answer;   // what a perfect respondent says
  std::string literal_answer;  // copies the target unchanged
};

struct RunRecord {
  std::string item_id;
  std::string suite_id;
  Tags tags;
  std::string prompt_hash;
  std::string raw_response;
  std::string normalized_answer;
  bool correct = false;
  std::string respondent;
  std::string timestamp;
  bool failed = false;
  std::string error;
  nlohmann::json extra = nlohmann::json::object();

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

nlohmann::json record_to_json(const RunRecord& r);
RunRecord record_from_json(const nlohmann::json& j);

/// Everything up to the first ']' (the whole text when there is none).
std::string truncate_at_bracket(std::string_view response);

/// Current UTC time, ISO 8601 to the second.
std::string utc_timestamp();

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

struct CacheEntry {
  std::string response;
  std::string timestamp;
};

/// Content-addressed response cache: one JSON file per (model_id, prompt_hash).
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  /// Throws CacheCorrupt when the entry exists but cannot be read back.
  std::optional<CacheEntry> get(const std::string& model_id, const std::string& prompt_hash) const;
  void put(const std::string& model_id, const std::string& prompt_hash, const Messages& messages,
           const CacheEntry& entry) const;
  std::filesystem::path entry_path(const std::string& model_id, const std::string& prompt_hash) const;

 private:
  std::filesystem::path dir_;
};

/// Append-only JSONL record log, safe for concurrent appends.
class RecordStore {
 public:
  explicit RecordStore(std::filesystem::path path);

  void append(const RunRecord& r);
  /// A torn final line (no trailing newline) is ignored.
  std::vector<RunRecord> load() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
};

std::vector<RunRecord> load_records(const std::filesystem::path& path);
void write_records(const std::filesystem::path& path, const std::vector<RunRecord>& records);

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

struct RunOptions {
  int parallelism = 1;
  int max_attempts = 3;
  std::chrono::milliseconds backoff{500};
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to sleeping the thread
};

/// Sends every item once (cache hits skip the call), grades, and appends to
/// `store`. Items already completed in `store` by this respondent are reused,
/// so an interrupted run resumes without repeating calls. Records come back
/// in item order.
std::vector<RunRecord> run_suite(const std::vector<EvalItem>& items, ModelClient& client, const ResponseCache* cache,
                                 RecordStore* store, const RunOptions& options = {});

/// Re-grades a stored record against its item.
RunRecord regrade(const EvalItem& item, const RunRecord& record);

EvalItem make_letter_item(const LetterStringProblem& p, PromptName prompt, const std::string& suite_id);
EvalItem make_matrix_item(const MatrixProblem& p, PromptName prompt, const std::string& suite_id);
EvalItem make_story_item(const StoryTrial& t, const std::string& suite_id);

std::unique_ptr<FunctionClient> make_oracle_client(const std::vector<EvalItem>& items, std::string id = "mock:oracle");
std::unique_ptr<FunctionClient> make_literal_client(const std::vector<EvalItem>& items, std::string id = "mock:literal");

StoryOutcome story_outcome(const RunRecord& r);

// ---------------------------------------------------------------------------
// Comprehension checks
// ---------------------------------------------------------------------------

/// Glyph named by a successor/predecessor answer: the first token after the
/// last "is" (or the whole answer), stripped of quotes and punctuation.
std::optional<std::string> parse_ccc_response(std::string_view response, const Alphabet& alphabet);

/// Every non-boundary glyph of every alphabet, for both relations.
std::vector<EvalItem> make_ccc_items(const std::vector<Alphabet>& alphabets, const std::vector<Relation>& relations);

struct CccCell {
  Tally standard;
  Tally permuted_original;
  Tally permuted_moved;
  Tally symbol;
};

struct CccReport {
  std::map<Relation, CccCell> cells;
  std::vector<RunRecord> records;
};

CccReport summarize_ccc(const std::vector<RunRecord>& records);
CccReport run_ccc(const std::vector<Alphabet>& alphabets, ModelClient& client, const ResponseCache* cache,
                  RecordStore* store, const RunOptions& options = {},
                  const std::vector<Relation>& relations = {Relation::Succ, Relation::Pred});

/// 1-based row and column words or coordinates naming a cell, as 0-based (row, col).
std::optional<std::pair<int, int>> parse_blank_position(std::string_view response);

/// The completed grid of `p` with the blank at each of the nine cells.
std::vector<MatrixProblem> blank_sweep(const MatrixProblem& p);

/// Throws MalformedGrid for a grid whose blank cell is filled in.
std::vector<EvalItem> make_blank_position_items(const std::vector<MatrixProblem>& grids);

struct BlankCheckReport {
  Tally tally;
  std::vector<RunRecord> records;
};

BlankCheckReport run_blank_position_check(const std::vector<MatrixProblem>& grids, ModelClient& client,
                                          const ResponseCache* cache, RecordStore* store,
                                          const RunOptions& options = {});

}  // namespace analogy
