#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "analogy/harness.hpp"

namespace httplib {
class Server;
}

namespace analogy {

enum class Study { LetterString, Matrix, Story };
enum class SessionStatus { Active, Completed, Rejected };

std::string_view to_string(Study s);
std::string_view to_string(SessionStatus s);
Study study_from_string(std::string_view name);

struct AttentionCheck {
  std::string id;
  std::string stimulus;
  std::string expected;
};

/// Lowercase, brackets and punctuation dropped, no whitespace.
std::string normalize_check_answer(std::string_view answer);
bool check_passed(const AttentionCheck& c, std::string_view answer);

struct StudyMaterials {
  std::string instructions;
  nlohmann::json example;
  std::vector<AttentionCheck> checks;
};

/// Reads the per-study instructions, worked example and attention checks.
std::map<Study, StudyMaterials> load_study_materials(const std::filesystem::path& path);
std::filesystem::path default_materials_path();

struct StudyConfig {
  std::vector<LetterStringProblem> letters;
  std::vector<MatrixProblem> matrices;
  std::vector<StoryProblem> stories;
  std::map<Study, StudyMaterials> materials;
  std::filesystem::path store_dir;
  std::uint64_t seed = 0;
  /// Returned on a Completed finalize; platform pass-through.
  std::string completion_code;
};

constexpr int kLetterSessionItems = 14;
constexpr int kMatrixSessionItems = 10;
constexpr int kStorySessionItems = 6;
constexpr int kAttentionChecksPerSession = 2;

struct SessionItem {
  std::string item_ref;
  bool attention_check = false;
  EvalItem eval;
  nlohmann::json problem;  // what the participant sees; never the key
  std::optional<bool> correct;
};

/// The deterministic part of a session: which items, in which order.
struct SessionPlan {
  Study study = Study::LetterString;
  std::string condition;
  std::vector<SessionItem> items;
};

struct Session {
  std::string session_id;
  std::uint64_t ordinal = 0;
  SessionPlan plan;
  std::size_t cursor = 0;
  SessionStatus status = SessionStatus::Active;
  bool example_shown = false;
  std::optional<nlohmann::json> summary;
};

class StudyService {
 public:
  explicit StudyService(StudyConfig config);

  /// Sequence for the `ordinal`-th session of `study`; a pure function of
  /// (study, seed, ordinal). Throws SuiteExhausted when the pool is too small.
  SessionPlan plan_session(Study study, std::uint64_t ordinal) const;

  std::string create_session(Study study);
  nlohmann::json next_item(const std::string& session_id);
  nlohmann::json submit_answer(const std::string& session_id, const std::string& item_ref, const std::string& answer);
  nlohmann::json finalize(const std::string& session_id);

  Session snapshot(const std::string& session_id) const;
  std::filesystem::path records_path() const;
  std::filesystem::path sessions_path() const;

 private:
  struct Slot {
    std::mutex mu;
    Session session;
  };
  std::shared_ptr<Slot> find(const std::string& session_id) const;
  std::vector<std::string> conditions(Study study) const;

  StudyConfig config_;
  RecordStore records_;
  mutable std::shared_mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::map<Study, std::uint64_t> next_ordinal_;
  std::mutex sessions_file_mu_;
};

/// Registers the JSON routes on `server`. Errors come back as
/// {"error": code, "message": text} with a matching HTTP status.
void mount_study_routes(httplib::Server& server, StudyService& service);

}  // namespace analogy
