#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "analogy/rng.hpp"

namespace analogy {

enum class RuleKind { Constant, DistributionOfThree, Progression, Logic };
enum class LogicOp { And, Or, Xor };
enum class Axis { Row, Column };

struct RuleSpec {
  RuleKind kind = RuleKind::Constant;
  Axis axis = Axis::Row;
  int step = 1;               // Progression only
  LogicOp op = LogicOp::Or;   // Logic only

  static RuleSpec constant(Axis axis = Axis::Row) { return {RuleKind::Constant, axis, 1, LogicOp::Or}; }
  static RuleSpec distribution(Axis axis = Axis::Row) { return {RuleKind::DistributionOfThree, axis, 1, LogicOp::Or}; }
  static RuleSpec progression(int step, Axis axis = Axis::Row) { return {RuleKind::Progression, axis, step, LogicOp::Or}; }
  static RuleSpec logic(LogicOp op, Axis axis = Axis::Column) { return {RuleKind::Logic, axis, 1, op}; }

  friend bool operator==(const RuleSpec&, const RuleSpec&) = default;
};

std::string_view to_string(RuleKind k);
std::string_view to_string(LogicOp op);
std::string_view to_string(Axis a);
std::string describe(const RuleSpec& r);

/// A slot holds one glyph, or a set of glyphs for Logic rules. A cell has one
/// slot per rule.
using Slot = std::vector<std::string>;
using Cell = std::vector<Slot>;
using Grid = std::array<std::array<Cell, 3>, 3>;

enum class BlankPolicy { BottomRight, Random };
enum class GlyphDomain { Digits, Symbols };
enum class MatrixVariant { Original, AltBlank, Symbols };

std::string_view to_string(MatrixVariant v);

struct MatrixProblem {
  std::string id;
  Grid grid;  // the blank cell is stored empty
  int blank_row = 2;
  int blank_col = 2;
  std::vector<RuleSpec> rules;
  Cell key;
  GlyphDomain domain = GlyphDomain::Digits;
  std::map<std::string, std::string> mapping;  // digit -> symbol, Symbols only
  MatrixVariant variant = MatrixVariant::Original;

  std::size_t slots() const { return rules.size(); }
  bool is_logic() const { return rules.size() == 1 && rules[0].kind == RuleKind::Logic; }
  /// Candidate glyphs in canonical order: "0".."9", or their symbol images.
  std::vector<std::string> glyph_order() const;
  /// The grid with the key placed at the blank.
  Grid completed() const;
};

/// Throws RuleConflict for combinations that cannot be drawn from ten digits
/// with disjoint per-slot digit sets, or that mix Logic with other rules.
void validate_rules(const std::vector<RuleSpec>& rules);

/// Builds a complete grid satisfying every rule, then blanks one cell. The
/// result is always uniquely solvable by brute_solve.
MatrixProblem generate_matrix(const std::vector<RuleSpec>& rules, BlankPolicy policy, Rng rng);

/// Recomputes the blank from the rules. Throws Inconsistent when the visible
/// grid breaks its rules or does not determine the blank.
Cell solve_matrix(const MatrixProblem& p);

/// Rule-agnostic oracle: every completion of the blank under which the grid
/// matches some Constant / Distribution / Progression / Logic pattern,
/// evaluated slot by slot. Empty when nothing fits.
std::vector<Cell> brute_solve(const MatrixProblem& p);

/// Relabels digits through a bijection over "0".."9".
MatrixProblem apply_symbol_map(const MatrixProblem& p, const std::map<std::string, std::string>& mapping);

/// Random bijection from the ten digits onto glyphs of `pool`.
std::map<std::string, std::string> random_symbol_map(Rng& rng, const std::vector<std::string>& pool);

/// Same completed grid, blank moved to (row, col).
MatrixProblem reblank(const MatrixProblem& p, int row, int col);

/// Set algebra on slots: OR = union, AND = intersection, XOR = symmetric
/// difference. Inputs and output in canonical order.
Slot logic_apply(LogicOp op, const Slot& a, const Slot& b, const std::vector<std::string>& order);

/// Parses the answer: first bracketed group when present, else the leading
/// run of glyph tokens.
std::vector<std::string> normalize_matrix_response(const MatrixProblem& p, std::string_view response);

bool grade_matrix(const MatrixProblem& p, std::string_view response, bool strict = false);

std::string render_cell(const Cell& cell);
/// Rows joined with '\n', the blank shown as "[ ]". With `open_blank`, the
/// grid stops right after the blank's opening bracket (bottom-right only).
std::string render_grid(const MatrixProblem& p, bool open_blank = false);
std::string render_grid(const Grid& grid, int blank_row, int blank_col);

std::map<std::string, std::string> matrix_tags(const MatrixProblem& p);

nlohmann::json matrix_to_json(const MatrixProblem& p);
MatrixProblem matrix_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Suite construction
// ---------------------------------------------------------------------------

struct MatrixSuiteConfig {
  int one_rule = 416;
  int two_rule = 600;
  int three_rule = 1000;
  int logic = 900;
  MatrixVariant variant = MatrixVariant::Original;

  static MatrixSuiteConfig replication() { return {}; }
  static MatrixSuiteConfig alt_blank() { return {216, 300, 500, 450, MatrixVariant::AltBlank}; }
  static MatrixSuiteConfig symbols() { return {400, 300, 400, 900, MatrixVariant::Symbols}; }
  static MatrixSuiteConfig preset(std::string_view name);
  void validate() const;
};

struct MatrixItemSpec {
  std::vector<RuleSpec> rules;
  MatrixVariant variant = MatrixVariant::Original;
  std::string section;
  std::uint64_t ordinal = 0;
  std::uint64_t seed = 0;
};

std::vector<MatrixItemSpec> plan_matrix_suite(const MatrixSuiteConfig& config, std::uint64_t seed);
MatrixProblem generate_matrix_item(const MatrixItemSpec& spec);
/// Serial reference build.
std::vector<MatrixProblem> build_matrix_suite(const MatrixSuiteConfig& config, std::uint64_t seed);

}  // namespace analogy
