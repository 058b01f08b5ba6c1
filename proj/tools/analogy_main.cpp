// Command-line front end: suite generation, model evaluation, grading,
// reporting and the human-study server.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "analogy/error.hpp"
#include "analogy/harness.hpp"
#include "analogy/kernels.hpp"
#include "analogy/report.hpp"
#include "analogy/studysvc.hpp"
#include "analogy/text.hpp"

using namespace analogy;
using nlohmann::json;

namespace {

struct Suite {
  std::vector<LetterStringProblem> letters;
  std::vector<MatrixProblem> matrices;
  std::vector<StoryProblem> stories;
};

std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::vector<json> out;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (trim(line).empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, path + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

// A story bank is a JSON array; letter and matrix suites are JSONL.
void load_suite(const std::string& path, Suite& suite, int story_count) {
  std::ifstream probe(path);
  if (!probe) throw Error(ErrorCode::IoError, "cannot open " + path);
  char first = 0;
  probe >> first;
  if (first == '[') {
    auto bank = load_story_bank(path, static_cast<std::size_t>(story_count));
    suite.stories.insert(suite.stories.end(), bank.begin(), bank.end());
    return;
  }
  for (const auto& j : read_jsonl(path)) {
    if (j.contains("source_lhs")) {
      suite.letters.push_back(problem_from_json(j));
    } else if (j.contains("grid")) {
      suite.matrices.push_back(matrix_from_json(j));
    } else {
      throw Error(ErrorCode::ParseError, path + ": line is neither a letter-string nor a matrix problem");
    }
  }
}

std::vector<EvalItem> eval_items(const Suite& suite, const std::string& prompt, const std::string& suite_id) {
  std::vector<EvalItem> items;
  if (!suite.letters.empty()) {
    const auto name = prompt_name_from_string(prompt.empty() ? "letter-hodel" : prompt);
    for (const auto& p : suite.letters) items.push_back(make_letter_item(p, name, suite_id));
  }
  if (!suite.matrices.empty()) {
    const auto name = prompt_name_from_string(prompt.empty() ? "matrix-main" : prompt);
    for (const auto& p : suite.matrices) items.push_back(make_matrix_item(p, name, suite_id));
  }
  for (auto variant : {StoryVariant::Original, StoryVariant::Paraphrased}) {
    for (const auto& t : full_sweep(suite.stories, variant)) items.push_back(make_story_item(t, suite_id));
  }
  return items;
}

struct ModelOptions {
  std::string model;
  std::string base_url = "https://api.openai.com";
  bool completion = false;
  int timeout_s = 60;
};

void add_model_options(CLI::App* cmd, ModelOptions& o) {
  cmd->add_option("--model", o.model, "Model name, or mock:oracle / mock:literal for offline runs")->required();
  cmd->add_option("--base-url", o.base_url, "Endpoint base URL");
  cmd->add_flag("--completion", o.completion, "Use the text-completion endpoint");
  cmd->add_option("--timeout", o.timeout_s, "Request timeout in seconds");
}

std::unique_ptr<ModelClient> make_client(const ModelOptions& o, const std::vector<EvalItem>& items) {
  if (o.model == "mock:oracle") return make_oracle_client(items);
  if (o.model == "mock:literal") return make_literal_client(items);
  HttpClientConfig cfg;
  cfg.base_url = o.base_url;
  cfg.model = o.model;
  cfg.mode = o.completion ? EndpointMode::Completion : EndpointMode::Chat;
  cfg.timeout = std::chrono::seconds(o.timeout_s);
  return std::make_unique<HttpModelClient>(cfg);
}

void print_accuracy(const std::vector<RunRecord>& records) {
  long k = 0, n = 0, failed = 0;
  for (const auto& r : records) {
    if (r.failed) {
      ++failed;
      continue;
    }
    ++n;
    k += r.correct;
  }
  std::cerr << k << "/" << n << " correct";
  if (n > 0) {
    char buf[32];
    std::snprintf(buf, sizeof buf, " (%.3f)", static_cast<double>(k) / static_cast<double>(n));
    std::cerr << buf;
  }
  if (failed) std::cerr << ", " << failed << " failed calls";
  std::cerr << "\n";
}

std::vector<std::string> split_csv_arg(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::atomic<httplib::Server*> g_server{nullptr};

void stop_server(int) {
  if (auto* s = g_server.load()) s->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analogy benchmark toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a problem suite as JSONL");
  std::string gen_kind, gen_preset = "replication", gen_out;
  std::uint64_t gen_seed = 1;
  int gen_threads = 0;
  gen->add_option("kind", gen_kind, "letterstring, matrix or alphabets")
      ->required()
      ->check(CLI::IsMember({"letterstring", "matrix", "alphabets"}));
  gen->add_option("--preset", gen_preset, "replication; matrix also accepts alt-blank, symbols");
  gen->add_option("--seed", gen_seed, "Root seed");
  gen->add_option("-o,--out", gen_out, "Output file")->required();
  gen->add_option("--threads", gen_threads, "Worker threads (0 = OpenMP default)");

  // eval
  auto* eval = app.add_subcommand("eval", "Send a suite to a model and grade the answers");
  std::vector<std::string> eval_suites;
  std::string eval_prompt, eval_cache, eval_records = "records.jsonl";
  int eval_parallel = 1, story_count = 18;
  ModelOptions eval_model;
  eval->add_option("--suite", eval_suites, "Suite JSONL, or a story bank JSON array")->required();
  eval->add_option("--prompt", eval_prompt, "Prompt template name");
  eval->add_option("--cache", eval_cache, "Response cache directory");
  eval->add_option("--records", eval_records, "Record log (appended; resumes interrupted runs)");
  eval->add_option("--parallel", eval_parallel, "Concurrent requests");
  eval->add_option("--stories", story_count, "Expected story bank size");
  add_model_options(eval, eval_model);

  // ccc
  auto* ccc = app.add_subcommand("ccc", "Successor/predecessor comprehension check");
  std::string ccc_alphabets, ccc_cache, ccc_records = "ccc_records.jsonl";
  std::uint64_t ccc_seed = 1;
  int ccc_parallel = 1;
  ModelOptions ccc_model;
  ccc->add_option("--alphabets", ccc_alphabets, "Alphabet JSONL (default: generated from --seed)");
  ccc->add_option("--seed", ccc_seed, "Seed for generated alphabets");
  ccc->add_option("--cache", ccc_cache, "Response cache directory");
  ccc->add_option("--records", ccc_records, "Record log");
  ccc->add_option("--parallel", ccc_parallel, "Concurrent requests");
  add_model_options(ccc, ccc_model);

  // grade
  auto* grade_cmd = app.add_subcommand("grade", "Grade stored responses against a suite");
  std::vector<std::string> grade_suites;
  std::string grade_responses, grade_prompt, grade_out;
  int grade_story_count = 18;
  grade_cmd->add_option("--suite", grade_suites, "Suite JSONL or story bank")->required();
  grade_cmd->add_option("--responses", grade_responses, "JSONL with item_id and response (or RunRecords)")->required();
  grade_cmd->add_option("--prompt", grade_prompt, "Prompt template the responses answered");
  grade_cmd->add_option("--stories", grade_story_count, "Expected story bank size");
  grade_cmd->add_option("-o,--out", grade_out, "Graded RunRecord JSONL (default stdout)");

  // report
  auto* report = app.add_subcommand("report", "Aggregate records into an accuracy table");
  std::vector<std::string> report_records;
  std::string report_group_by, report_format = "csv", report_out, report_sessions, report_pivot;
  bool report_wilson = false, report_keep_rejected = false;
  double report_level = 0.95;
  report->add_option("--records", report_records, "RunRecord JSONL files")->required();
  report->add_option("--group-by", report_group_by, "Comma-separated tag names")->required();
  report->add_option("--format", report_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  report->add_option("-o,--out", report_out, "Output file (default stdout)");
  report->add_option("--sessions", report_sessions, "studysvc sessions.jsonl; rejected sessions are left out");
  report->add_flag("--include-rejected", report_keep_rejected, "Keep records from rejected sessions");
  report->add_flag("--wilson", report_wilson, "Wilson instead of Wald intervals");
  report->add_option("--level", report_level, "Confidence level");
  report->add_option("--pivot", report_pivot, "row,col group names: also print a two-way table");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the human-study HTTP service");
  std::vector<std::string> serve_suites;
  std::string serve_store = "study_store", serve_host = "0.0.0.0", serve_materials, serve_code;
  int serve_port = 8080, serve_story_count = 6;
  std::uint64_t serve_seed = 1;
  serve->add_option("--suite", serve_suites, "Suite JSONL files and/or a story bank")->required();
  serve->add_option("--port", serve_port, "Port");
  serve->add_option("--host", serve_host, "Bind address");
  serve->add_option("--store", serve_store, "Directory for records.jsonl and sessions.jsonl");
  serve->add_option("--seed", serve_seed, "Seed for session sequences");
  serve->add_option("--materials", serve_materials, "Instructions, examples and attention checks JSON");
  serve->add_option("--stories", serve_story_count, "Expected story bank size");
  serve->add_option("--completion-code", serve_code, "Code shown to participants on completion");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      std::ofstream out(gen_out, std::ios::trunc);
      if (!out) throw Error(ErrorCode::IoError, "cannot write " + gen_out);
      std::size_t count = 0;
      if (gen_kind == "letterstring") {
        if (gen_preset != "replication") throw Error(ErrorCode::ConfigInvalid, "letterstring preset must be replication");
        for (const auto& p : build_suite_parallel(LetterSuiteConfig::replication(), gen_seed, gen_threads)) {
          out << problem_to_json(p).dump() << "\n";
          ++count;
        }
      } else if (gen_kind == "matrix") {
        for (const auto& p : build_matrix_suite_parallel(MatrixSuiteConfig::preset(gen_preset), gen_seed, gen_threads)) {
          out << matrix_to_json(p).dump() << "\n";
          ++count;
        }
      } else {
        auto config = LetterSuiteConfig::replication();
        config.symbol15_alphabets = 0;
        for (const auto& a : suite_alphabets(config, gen_seed)) {
          out << alphabet_to_json(a).dump() << "\n";
          ++count;
        }
      }
      std::cerr << "wrote " << count << " lines to " << gen_out << "\n";
    } else if (eval->parsed()) {
      Suite suite;
      for (const auto& f : eval_suites) load_suite(f, suite, story_count);
      const auto items = eval_items(suite, eval_prompt, eval_suites.front());
      auto client = make_client(eval_model, items);
      std::optional<ResponseCache> cache;
      if (!eval_cache.empty()) cache.emplace(eval_cache);
      RecordStore store(eval_records);
      RunOptions opts;
      opts.parallelism = eval_parallel;
      const auto records = run_suite(items, *client, cache ? &*cache : nullptr, &store, opts);
      std::cerr << client->calls() << " model calls; ";
      print_accuracy(records);
    } else if (ccc->parsed()) {
      std::vector<Alphabet> alphabets;
      if (!ccc_alphabets.empty()) {
        for (const auto& j : read_jsonl(ccc_alphabets)) alphabets.push_back(alphabet_from_json(j));
      } else {
        auto config = LetterSuiteConfig::replication();
        config.symbol15_alphabets = 0;
        alphabets = suite_alphabets(config, ccc_seed);
      }
      const auto items = make_ccc_items(alphabets, {Relation::Succ, Relation::Pred});
      auto client = make_client(ccc_model, items);
      std::optional<ResponseCache> cache;
      if (!ccc_cache.empty()) cache.emplace(ccc_cache);
      RecordStore store(ccc_records);
      RunOptions opts;
      opts.parallelism = ccc_parallel;
      const auto rep = run_ccc(alphabets, *client, cache ? &*cache : nullptr, &store, opts);
      auto fmt = [](const Tally& t) {
        if (t.n == 0) return std::string("-");
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", t.rate());
        return std::string(buf);
      };
      std::cout << "relation\tstandard\tpermuted_original\tpermuted_moved\tsymbol\n";
      for (const auto& [rel, cell] : rep.cells) {
        std::cout << to_string(rel) << "\t" << fmt(cell.standard) << "\t" << fmt(cell.permuted_original) << "\t"
                  << fmt(cell.permuted_moved) << "\t" << fmt(cell.symbol) << "\n";
      }
    } else if (grade_cmd->parsed()) {
      Suite suite;
      for (const auto& f : grade_suites) load_suite(f, suite, grade_story_count);
      std::map<std::string, EvalItem> by_id;
      for (auto& item : eval_items(suite, grade_prompt, grade_suites.front())) by_id.emplace(item.item_id, std::move(item));
      std::vector<RunRecord> graded;
      for (const auto& j : read_jsonl(grade_responses)) {
        RunRecord r;
        if (j.contains("raw_response")) {
          r = record_from_json(j);
        } else {
          r.item_id = j.at("item_id").get<std::string>();
          r.raw_response = j.at("response").get<std::string>();
          r.respondent = j.value("respondent", "unknown");
          r.timestamp = utc_timestamp();
        }
        auto it = by_id.find(r.item_id);
        if (it == by_id.end()) throw Error(ErrorCode::MissingField, "response for unknown item " + r.item_id);
        r.suite_id = it->second.suite_id;
        r.tags = it->second.tags;
        r.prompt_hash = prompt_hash(it->second.messages);
        graded.push_back(regrade(it->second, r));
      }
      if (grade_out.empty()) {
        for (const auto& r : graded) std::cout << record_to_json(r).dump() << "\n";
      } else {
        write_records(grade_out, graded);
      }
      print_accuracy(graded);
    } else if (report->parsed()) {
      std::vector<RunRecord> records;
      for (const auto& f : report_records) {
        auto part = load_records(f);
        records.insert(records.end(), part.begin(), part.end());
      }
      AggregateOptions opts;
      opts.level = report_level;
      opts.method = report_wilson ? CiMethod::Wilson : CiMethod::Wald;
      if (!report_sessions.empty() && !report_keep_rejected) opts.rejected = rejected_sessions(report_sessions);
      const auto groups = split_csv_arg(report_group_by);
      const auto table = aggregate(records, groups, opts);
      const auto format = table_format_from_string(report_format);
      if (report_out.empty()) {
        std::cout << (format == TableFormat::Csv ? emit_csv(table) : emit_json(table).dump(2) + "\n");
      } else {
        write_table(report_out, table, format);
      }
      if (!report_pivot.empty()) {
        const auto axes = split_csv_arg(report_pivot);
        auto index_of = [&](const std::string& g) {
          auto it = std::find(groups.begin(), groups.end(), g);
          if (it == groups.end()) throw Error(ErrorCode::UnknownTag, "pivot tag " + g + " is not in --group-by");
          return static_cast<std::size_t>(it - groups.begin());
        };
        if (axes.size() != 2) throw Error(ErrorCode::ConfigInvalid, "--pivot takes row,col");
        std::cerr << render_pivot(pivot(table, index_of(axes[0]), index_of(axes[1])));
      }
    } else if (serve->parsed()) {
      Suite suite;
      for (const auto& f : serve_suites) load_suite(f, suite, serve_story_count);
      StudyConfig config;
      config.letters = std::move(suite.letters);
      config.matrices = std::move(suite.matrices);
      config.stories = std::move(suite.stories);
      config.store_dir = serve_store;
      config.seed = serve_seed;
      config.completion_code = serve_code;
      config.materials = load_study_materials(serve_materials.empty() ? default_materials_path() : std::filesystem::path(serve_materials));
      StudyService service(std::move(config));
      httplib::Server server;
      mount_study_routes(server, service);
      g_server = &server;
      std::signal(SIGINT, stop_server);
      std::signal(SIGTERM, stop_server);
      std::cerr << "listening on " << serve_host << ":" << serve_port << ", store " << serve_store << "\n";
      if (!server.listen(serve_host, serve_port)) throw Error(ErrorCode::IoError, "cannot listen on port " + std::to_string(serve_port));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
