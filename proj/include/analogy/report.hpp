#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "analogy/harness.hpp"

namespace analogy {

enum class CiMethod { Wald, Wilson };

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Two-sided normal quantile for a confidence level. 0.95 maps to the pinned
/// 1.959963985 so printed tables reproduce exactly.
double z_for_level(double level);

/// Wald by default, clamped to [0, 1]. Throws InvalidCounts unless 0 <= k <= n, n >= 1.
Interval binomial_ci(long k, long n, double level = 0.95, CiMethod method = CiMethod::Wald);

/// Wald interval from an already-rounded rate, as printed tables report it.
Interval wald_from_rate(double acc, long n, double level = 0.95);

double round3(double x);

struct AccuracyCell {
  std::vector<std::string> key;
  long k = 0;
  long n = 0;
  double acc = 0.0;
  Interval ci;
};

struct AccuracyTable {
  std::vector<std::string> groups;
  std::vector<AccuracyCell> cells;
};

struct AggregateOptions {
  double level = 0.95;
  CiMethod method = CiMethod::Wald;
  bool exclude_attention_checks = true;
  /// Respondents (session ids) whose records are left out.
  std::set<std::string> rejected;
};

/// One cell per distinct key tuple, sorted by key. Failed records are skipped.
/// Throws UnknownTag when a counted record lacks a group tag.
AccuracyTable aggregate(const std::vector<RunRecord>& records, const std::vector<std::string>& group_by,
                        const AggregateOptions& options = {});

/// Columns: groups..., k, n, acc, ci_low, ci_high, then the 3-decimal
/// acc_3dp, ci_low_3dp, ci_high_3dp. Full-precision values round-trip exactly.
std::string emit_csv(const AccuracyTable& t);
AccuracyTable parse_csv(std::string_view text);

/// {groups, cells: [{key, k, n, acc, ci: [lo, hi], rounded: {...}}]}
nlohmann::json emit_json(const AccuracyTable& t);
AccuracyTable parse_json(const nlohmann::json& j);

enum class TableFormat { Csv, Json };
TableFormat table_format_from_string(std::string_view name);
void write_table(const std::filesystem::path& path, const AccuracyTable& t, TableFormat format);
AccuracyTable read_table(const std::filesystem::path& path, TableFormat format);

/// Two-way layout: rows by one tag, columns by another, "acc [lo, hi]" text.
struct Pivot {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::vector<std::optional<AccuracyCell>>> cells;
};

Pivot pivot(const AccuracyTable& t, std::size_t row_group, std::size_t col_group);
std::string format_cell(const AccuracyCell& c);
std::string render_pivot(const Pivot& p);

/// Session ids marked Rejected in a studysvc sessions.jsonl file.
std::set<std::string> rejected_sessions(const std::filesystem::path& sessions_jsonl);

}  // namespace analogy
