#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "analogy/harness.hpp"

namespace testutil {

struct BlankTranscript {
  std::string name;
  int expected_correct = 0;
  std::map<std::string, std::string> responses;  // "row,col" (1-based) -> answer
};

struct BlankFixture {
  analogy::MatrixProblem grid;  // blank at the bottom right
  std::vector<BlankTranscript> respondents;
};

inline BlankFixture load_blank_fixture() {
  std::ifstream in(std::string(ANALOGY_FIXTURE_DIR) + "/blank_position_transcripts.json");
  const auto j = nlohmann::json::parse(in);
  BlankFixture f;
  f.grid.id = "blank-fixture";
  f.grid.rules = {analogy::RuleSpec::constant()};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) f.grid.grid[r][c] = {{j["grid"][r][c].get<std::string>()}};
  }
  f.grid.key = f.grid.grid[2][2];
  f.grid.grid[2][2] = {};
  for (const auto& r : j["respondents"]) {
    f.respondents.push_back({r["name"], r["expected_correct"], r["responses"]});
  }
  return f;
}

/// Client answering each blank-position prompt from a transcript.
inline std::unique_ptr<analogy::FunctionClient> transcript_client(const BlankFixture& f, const BlankTranscript& t) {
  std::map<std::string, std::string> by_hash;
  for (const auto& p : analogy::blank_sweep(f.grid)) {
    const auto where = std::to_string(p.blank_row + 1) + "," + std::to_string(p.blank_col + 1);
    by_hash[analogy::prompt_hash(analogy::blank_position_prompt(p))] = t.responses.at(where);
  }
  return analogy::make_lookup_client("transcript:" + t.name, std::move(by_hash));
}

}  // namespace testutil
