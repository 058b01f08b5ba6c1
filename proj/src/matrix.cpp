#include "analogy/matrix.hpp"

#include <algorithm>
#include <set>

#include "analogy/alphabet.hpp"
#include "analogy/error.hpp"
#include "analogy/text.hpp"

namespace analogy {

namespace {

constexpr int kMaxAttempts = 512;
constexpr std::array<int, 4> kSteps = {1, 2, -1, -2};
constexpr std::array<LogicOp, 3> kOps = {LogicOp::And, LogicOp::Or, LogicOp::Xor};

using SlotGrid = std::array<std::array<Slot, 3>, 3>;

const std::vector<std::string>& digit_glyphs() {
  static const std::vector<std::string> digits = {"0", "1", "2", "3", "4", "5", "6", "7", "8", "9"};
  return digits;
}

int rank_of(const std::vector<std::string>& order, const std::string& g) {
  auto it = std::find(order.begin(), order.end(), g);
  return it == order.end() ? static_cast<int>(order.size()) : static_cast<int>(it - order.begin());
}

Slot canonical(Slot s, const std::vector<std::string>& order) {
  std::sort(s.begin(), s.end(), [&](const std::string& a, const std::string& b) {
    const int ra = rank_of(order, a), rb = rank_of(order, b);
    return ra != rb ? ra < rb : a < b;
  });
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

SlotGrid slot_view(const Grid& g, std::size_t slot) {
  SlotGrid out;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (slot < g[r][c].size()) out[r][c] = g[r][c][slot];
    }
  }
  return out;
}

bool all_singletons(const SlotGrid& v) {
  for (const auto& row : v) {
    for (const auto& s : row) {
      if (s.size() != 1) return false;
    }
  }
  return true;
}

std::optional<int> digit_value(const Slot& s) {
  if (s.size() != 1 || s[0].size() != 1 || s[0][0] < '0' || s[0][0] > '9') return std::nullopt;
  return s[0][0] - '0';
}

Slot digit_slot(int d) { return {std::string(1, static_cast<char>('0' + d))}; }

Slot at(const SlotGrid& v, int r, int c, Axis axis) { return axis == Axis::Row ? v[r][c] : v[c][r]; }

// Pattern checks on a fully populated slot grid. Sets are in canonical order.

bool constant_pattern(const SlotGrid& v, Axis axis) {
  if (!all_singletons(v)) return false;
  for (int i = 0; i < 3; ++i) {
    if (at(v, i, 1, axis) != at(v, i, 0, axis) || at(v, i, 2, axis) != at(v, i, 0, axis)) return false;
  }
  return true;
}

bool distribution_pattern(const SlotGrid& v) {
  if (!all_singletons(v)) return false;
  const std::set<std::string> s = {v[0][0][0], v[0][1][0], v[0][2][0]};
  if (s.size() != 3) return false;
  for (int i = 0; i < 3; ++i) {
    std::set<std::string> row, col;
    for (int j = 0; j < 3; ++j) {
      row.insert(v[i][j][0]);
      col.insert(v[j][i][0]);
    }
    if (row != s || col != s) return false;
  }
  return true;
}

bool progression_pattern(const SlotGrid& v, Axis axis, int step) {
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 2; ++j) {
      const auto a = digit_value(at(v, i, j, axis));
      const auto b = digit_value(at(v, i, j + 1, axis));
      if (!a || !b || *b - *a != step) return false;
    }
  }
  return true;
}

bool logic_pattern(const SlotGrid& v, LogicOp op, const std::vector<std::string>& order) {
  for (const auto& row : v) {
    for (const auto& s : row) {
      if (s.empty()) return false;
    }
  }
  for (int i = 0; i < 2; ++i) {
    if (v[i][2] != logic_apply(op, v[i][0], v[i][1], order)) return false;
  }
  for (int c = 0; c < 3; ++c) {
    if (v[2][c] != logic_apply(op, v[0][c], v[1][c], order)) return false;
  }
  return true;
}

/// Whether a completed slot grid is the one `rule` generates.
bool satisfies(const SlotGrid& v, const RuleSpec& rule, const std::vector<std::string>& order) {
  switch (rule.kind) {
    case RuleKind::Constant: return constant_pattern(v, rule.axis);
    case RuleKind::DistributionOfThree: return distribution_pattern(v);
    case RuleKind::Progression: {
      const auto base = digit_value(v[0][0]);
      if (!base) return false;
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
          const auto d = digit_value(v[r][c]);
          if (!d || *d != *base + rule.step * (r + c)) return false;
        }
      }
      return true;
    }
    case RuleKind::Logic: return logic_pattern(v, rule.op, order);
  }
  return false;
}

bool any_pattern(const SlotGrid& v, bool numeric, const std::vector<std::string>& order) {
  if (constant_pattern(v, Axis::Row) || constant_pattern(v, Axis::Column) || distribution_pattern(v)) return true;
  if (numeric) {
    for (int s : kSteps) {
      if (progression_pattern(v, Axis::Row, s) || progression_pattern(v, Axis::Column, s)) return true;
    }
  }
  for (auto op : kOps) {
    if (logic_pattern(v, op, order)) return true;
  }
  return false;
}

/// Non-empty subsets of `universe`, canonical order.
std::vector<Slot> subsets(const std::vector<std::string>& universe, std::size_t min_size) {
  std::vector<Slot> out;
  const std::size_t n = universe.size();
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) < min_size) continue;
    Slot s;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) s.push_back(universe[i]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::string> visible_glyphs(const SlotGrid& v, int br, int bc, const std::vector<std::string>& order) {
  Slot all;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (r == br && c == bc) continue;
      all.insert(all.end(), v[r][c].begin(), v[r][c].end());
    }
  }
  return canonical(std::move(all), order);
}

// ---------------------------------------------------------------------------
// Generation of one slot
// ---------------------------------------------------------------------------

std::vector<int> take_digits(std::vector<int>& pool, int count, Rng& rng) {
  if (static_cast<int>(pool.size()) < count) throw Error(ErrorCode::RuleConflict, "not enough free digits");
  rng.shuffle(std::span<int>(pool));
  std::vector<int> out(pool.begin(), pool.begin() + count);
  pool.erase(pool.begin(), pool.begin() + count);
  return out;
}

SlotGrid fill_slot(const RuleSpec& rule, std::vector<int>& pool, Rng& rng) {
  SlotGrid v;
  switch (rule.kind) {
    case RuleKind::Constant: {
      const auto d = take_digits(pool, 3, rng);
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) v[r][c] = digit_slot(d[rule.axis == Axis::Row ? r : c]);
      }
      break;
    }
    case RuleKind::DistributionOfThree: {
      const auto d = take_digits(pool, 3, rng);
      const int shift = rng.coin() ? 1 : 2;
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) v[r][c] = digit_slot(d[(c + shift * r) % 3]);
      }
      break;
    }
    case RuleKind::Progression: {
      std::vector<int> bases;
      for (int base = 0; base <= 9; ++base) {
        bool ok = true;
        for (int t = 0; t <= 4 && ok; ++t) {
          const int d = base + rule.step * t;
          ok = d >= 0 && d <= 9 && std::find(pool.begin(), pool.end(), d) != pool.end();
        }
        if (ok) bases.push_back(base);
      }
      if (bases.empty()) throw Error(ErrorCode::RuleConflict, "no room for a progression");
      const int base = bases[rng.below(bases.size())];
      for (int t = 0; t <= 4; ++t) pool.erase(std::find(pool.begin(), pool.end(), base + rule.step * t));
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) v[r][c] = digit_slot(base + rule.step * (r + c));
      }
      break;
    }
    case RuleKind::Logic: {
      const auto d = take_digits(pool, 4, rng);
      Slot universe;
      for (int x : d) universe.push_back(digit_slot(x)[0]);
      universe = canonical(universe, digit_glyphs());
      auto choices = subsets(universe, 1);
      std::erase_if(choices, [](const Slot& s) { return s.size() > 2; });
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) v[r][c] = choices[rng.below(choices.size())];
      }
      for (int r = 0; r < 2; ++r) v[r][2] = logic_apply(rule.op, v[r][0], v[r][1], digit_glyphs());
      for (int c = 0; c < 3; ++c) v[2][c] = logic_apply(rule.op, v[0][c], v[1][c], digit_glyphs());
      for (const auto& row : v) {
        for (const auto& s : row) {
          if (s.empty()) throw Error(ErrorCode::Infeasible, "empty logic cell");
        }
      }
      break;
    }
  }
  return v;
}

int digits_needed(const RuleSpec& r) {
  switch (r.kind) {
    case RuleKind::Constant:
    case RuleKind::DistributionOfThree: return 3;
    case RuleKind::Progression: return 5;
    case RuleKind::Logic: return 4;
  }
  return 0;
}

std::string problem_id(const MatrixProblem& p) {
  auto j = matrix_to_json(p);
  j.erase("id");
  return "mx-" + sha256_hex(j.dump()).substr(0, 16);
}

// ---------------------------------------------------------------------------
// Solving one slot from its rule
// ---------------------------------------------------------------------------

[[noreturn]] void inconsistent(const std::string& why) { throw Error(ErrorCode::Inconsistent, why); }

Slot solve_slot(const SlotGrid& v, const RuleSpec& rule, int br, int bc, const MatrixProblem& p) {
  const auto order = p.glyph_order();
  switch (rule.kind) {
    case RuleKind::Constant: {
      const int other = (rule.axis == Axis::Row ? bc : br) == 0 ? 1 : 0;
      return rule.axis == Axis::Row ? v[br][other] : v[other][bc];
    }
    case RuleKind::DistributionOfThree: {
      std::set<std::string> all, row;
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
          if (r == br && c == bc) continue;
          if (v[r][c].size() != 1) inconsistent("distribution cells hold one glyph");
          all.insert(v[r][c][0]);
          if (r == br) row.insert(v[r][c][0]);
        }
      }
      if (all.size() != 3) inconsistent("distribution uses " + std::to_string(all.size()) + " glyphs");
      for (const auto& g : all) {
        if (!row.count(g)) return {g};
      }
      inconsistent("row already holds every glyph");
    }
    case RuleKind::Progression: {
      if (p.domain == GlyphDomain::Symbols) throw Error(ErrorCode::ProgressionUnsupported, "symbols have no order");
      // The rule grid is base + step*(r+c); any visible cell pins the base.
      const int c0 = br == 0 && bc == 0 ? 1 : 0;
      const auto known = digit_value(v[0][c0]);
      if (!known) inconsistent("progression cell is not a digit");
      const int value = *known + rule.step * (br + bc - c0);
      if (value < 0 || value > 9) inconsistent("progression leaves the digits");
      return digit_slot(value);
    }
    case RuleKind::Logic: {
      if (br == 2 && bc == 2) {
        return rule.axis == Axis::Row ? logic_apply(rule.op, v[2][0], v[2][1], order)
                                      : logic_apply(rule.op, v[0][2], v[1][2], order);
      }
      if (bc == 2) return logic_apply(rule.op, v[br][0], v[br][1], order);
      if (br == 2) return logic_apply(rule.op, v[0][bc], v[1][bc], order);
      std::vector<Slot> fits;
      for (auto& s : subsets(visible_glyphs(v, br, bc, order), 1)) {
        if (logic_apply(rule.op, s, v[br][1 - bc], order) == v[br][2] &&
            logic_apply(rule.op, s, v[1 - br][bc], order) == v[2][bc]) {
          fits.push_back(std::move(s));
        }
      }
      if (fits.size() != 1) inconsistent(std::to_string(fits.size()) + " base cells fit the logic rule");
      return fits.front();
    }
  }
  inconsistent("unknown rule");
}

}  // namespace

std::string_view to_string(RuleKind k) {
  switch (k) {
    case RuleKind::Constant: return "constant";
    case RuleKind::DistributionOfThree: return "distribution_of_three";
    case RuleKind::Progression: return "progression";
    case RuleKind::Logic: return "logic";
  }
  return "?";
}

std::string_view to_string(LogicOp op) {
  switch (op) {
    case LogicOp::And: return "and";
    case LogicOp::Or: return "or";
    case LogicOp::Xor: return "xor";
  }
  return "?";
}

std::string_view to_string(Axis a) { return a == Axis::Row ? "row" : "column"; }

std::string_view to_string(MatrixVariant v) {
  switch (v) {
    case MatrixVariant::Original: return "digits";
    case MatrixVariant::AltBlank: return "alt_blank";
    case MatrixVariant::Symbols: return "symbols";
  }
  return "?";
}

std::string describe(const RuleSpec& r) {
  std::string out(to_string(r.kind));
  if (r.kind == RuleKind::Progression) out += (r.step > 0 ? "+" : "") + std::to_string(r.step);
  if (r.kind == RuleKind::Logic) out += "-" + std::string(to_string(r.op));
  return out + "/" + std::string(to_string(r.axis));
}

std::vector<std::string> MatrixProblem::glyph_order() const {
  if (domain == GlyphDomain::Digits) return digit_glyphs();
  std::vector<std::string> out;
  for (const auto& d : digit_glyphs()) {
    auto it = mapping.find(d);
    if (it != mapping.end()) out.push_back(it->second);
  }
  return out;
}

Grid MatrixProblem::completed() const {
  Grid g = grid;
  g[blank_row][blank_col] = key;
  return g;
}

Slot logic_apply(LogicOp op, const Slot& a, const Slot& b, const std::vector<std::string>& order) {
  const std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  Slot out;
  for (const auto& g : sa) {
    const bool in_b = sb.count(g) > 0;
    if (op == LogicOp::Or || (op == LogicOp::And && in_b) || (op == LogicOp::Xor && !in_b)) out.push_back(g);
  }
  if (op != LogicOp::And) {
    for (const auto& g : sb) {
      if (!sa.count(g)) out.push_back(g);
    }
  }
  return canonical(std::move(out), order);
}

void validate_rules(const std::vector<RuleSpec>& rules) {
  if (rules.empty() || rules.size() > 3) throw Error(ErrorCode::ConfigInvalid, "matrices take 1 to 3 rules");
  int digits = 0;
  std::optional<int> progression_size;
  for (const auto& r : rules) {
    if (r.kind == RuleKind::Logic && rules.size() > 1) {
      throw Error(ErrorCode::RuleConflict, "logic rules stand alone");
    }
    if (r.kind == RuleKind::Progression) {
      if (std::find(kSteps.begin(), kSteps.end(), r.step) == kSteps.end()) {
        throw Error(ErrorCode::ConfigInvalid, "progression step must be +-1 or +-2");
      }
      // Two five-digit runs only fit side by side with matching step sizes.
      if (progression_size && *progression_size != std::abs(r.step)) {
        throw Error(ErrorCode::RuleConflict, "progressions with different step sizes overlap");
      }
      progression_size = std::abs(r.step);
    }
    digits += digits_needed(r);
  }
  if (digits > 10) throw Error(ErrorCode::RuleConflict, "rules need " + std::to_string(digits) + " distinct digits");
}

MatrixProblem generate_matrix(const std::vector<RuleSpec>& rules, BlankPolicy policy, Rng rng) {
  validate_rules(rules);
  Rng blank_rng = rng.split("blank");
  int br = 2, bc = 2;
  if (policy == BlankPolicy::Random) {
    const int pos = static_cast<int>(blank_rng.below(9));
    br = pos / 3;
    bc = pos % 3;
  }

  // Progressions go first: they need contiguous room in the digit range.
  std::vector<std::size_t> fill_order(rules.size());
  for (std::size_t i = 0; i < rules.size(); ++i) fill_order[i] = i;
  std::stable_sort(fill_order.begin(), fill_order.end(), [&](std::size_t a, std::size_t b) {
    return rules[a].kind == RuleKind::Progression && rules[b].kind != RuleKind::Progression;
  });

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng draw = rng.split("grid").split(static_cast<std::uint64_t>(attempt));
    std::vector<int> pool = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<SlotGrid> slots(rules.size());
    try {
      for (auto i : fill_order) slots[i] = fill_slot(rules[i], pool, draw);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::RuleConflict || e.code() == ErrorCode::Infeasible) continue;
      throw;
    }

    MatrixProblem p;
    p.rules = rules;
    p.blank_row = br;
    p.blank_col = bc;
    p.variant = policy == BlankPolicy::Random ? MatrixVariant::AltBlank : MatrixVariant::Original;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        Cell cell;
        for (const auto& s : slots) cell.push_back(s[r][c]);
        if (r == br && c == bc) {
          p.key = std::move(cell);
        } else {
          p.grid[r][c] = std::move(cell);
        }
      }
    }
    const auto candidates = brute_solve(p);
    if (candidates.size() != 1 || candidates.front() != p.key) continue;
    p.id = problem_id(p);
    return p;
  }
  throw Error(ErrorCode::RuleConflict, "no uniquely solvable grid found");
}

Cell solve_matrix(const MatrixProblem& p) {
  const int br = p.blank_row, bc = p.blank_col;
  const auto order = p.glyph_order();
  Cell out;
  for (std::size_t i = 0; i < p.rules.size(); ++i) {
    auto v = slot_view(p.grid, i);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        if ((r != br || c != bc) && v[r][c].empty()) throw Error(ErrorCode::MalformedGrid, "visible cell lacks a slot");
      }
    }
    v[br][bc] = solve_slot(v, p.rules[i], br, bc, p);
    if (p.rules[i].kind != RuleKind::Logic && v[br][bc].size() != 1) inconsistent("non-logic slot must hold one glyph");
    if (!satisfies(v, p.rules[i], order)) inconsistent("grid breaks rule " + describe(p.rules[i]));
    out.push_back(v[br][bc]);
  }
  return out;
}

std::vector<Cell> brute_solve(const MatrixProblem& p) {
  const int br = p.blank_row, bc = p.blank_col;
  const auto order = p.glyph_order();
  const bool numeric = p.domain == GlyphDomain::Digits;
  std::size_t slot_count = 0;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (r != br || c != bc) slot_count = std::max(slot_count, p.grid[r][c].size());
    }
  }
  if (slot_count == 0) return {};

  std::vector<Cell> results = {Cell{}};
  for (std::size_t i = 0; i < slot_count; ++i) {
    auto v = slot_view(p.grid, i);
    std::vector<Slot> candidates;
    for (const auto& g : order) candidates.push_back({g});
    for (auto& s : subsets(visible_glyphs(v, br, bc, order), 2)) candidates.push_back(std::move(s));

    std::vector<Slot> fits;
    for (auto& cand : candidates) {
      v[br][bc] = cand;
      if (any_pattern(v, numeric, order)) fits.push_back(std::move(cand));
    }
    std::vector<Cell> next;
    for (const auto& partial : results) {
      for (const auto& f : fits) {
        auto cell = partial;
        cell.push_back(f);
        next.push_back(std::move(cell));
      }
    }
    results = std::move(next);
    if (results.empty()) break;
  }
  return results;
}

MatrixProblem apply_symbol_map(const MatrixProblem& p, const std::map<std::string, std::string>& mapping) {
  for (const auto& r : p.rules) {
    if (r.kind == RuleKind::Progression) throw Error(ErrorCode::ProgressionUnsupported, "symbols have no inherent order");
  }
  if (p.domain != GlyphDomain::Digits) throw Error(ErrorCode::ConfigInvalid, "problem already uses symbols");
  std::set<std::string> images;
  for (const auto& d : digit_glyphs()) {
    auto it = mapping.find(d);
    if (it == mapping.end()) throw Error(ErrorCode::ConfigInvalid, "mapping lacks digit " + d);
    if (it->second.empty() || it->second.find_first_of(" \t\n[],") != std::string::npos) {
      throw Error(ErrorCode::ConfigInvalid, "unusable symbol '" + it->second + "'");
    }
    images.insert(it->second);
  }
  if (images.size() != 10 || mapping.size() != 10) throw Error(ErrorCode::ConfigInvalid, "mapping must be a bijection");

  MatrixProblem out = p;
  out.domain = GlyphDomain::Symbols;
  out.mapping = mapping;
  out.variant = MatrixVariant::Symbols;
  const auto order = out.glyph_order();
  auto map_cell = [&](Cell& cell) {
    for (auto& slot : cell) {
      for (auto& g : slot) g = mapping.at(g);
      slot = canonical(std::move(slot), order);
    }
  };
  for (auto& row : out.grid) {
    for (auto& cell : row) map_cell(cell);
  }
  map_cell(out.key);
  out.id = problem_id(out);
  return out;
}

std::map<std::string, std::string> random_symbol_map(Rng& rng, const std::vector<std::string>& pool) {
  std::vector<std::string> glyphs;
  for (const auto& g : pool) {
    if (std::find(glyphs.begin(), glyphs.end(), g) == glyphs.end()) glyphs.push_back(g);
  }
  if (glyphs.size() < 10) throw Error(ErrorCode::PoolTooSmall, "symbol maps need 10 glyphs");
  rng.shuffle(std::span<std::string>(glyphs));
  std::map<std::string, std::string> out;
  for (int d = 0; d < 10; ++d) out[digit_glyphs()[d]] = glyphs[d];
  return out;
}

MatrixProblem reblank(const MatrixProblem& p, int row, int col) {
  if (row < 0 || row > 2 || col < 0 || col > 2) throw Error(ErrorCode::MalformedGrid, "blank outside the grid");
  MatrixProblem out = p;
  out.grid = p.completed();
  out.key = out.grid[row][col];
  out.grid[row][col] = Cell{};
  out.blank_row = row;
  out.blank_col = col;
  out.id = problem_id(out);
  return out;
}

std::vector<std::string> normalize_matrix_response(const MatrixProblem& p, std::string_view response) {
  const auto order = p.glyph_order();
  auto is_glyph = [&](const std::string& t) { return std::find(order.begin(), order.end(), t) != order.end(); };
  auto tokenize = [](std::string_view text) {
    std::string s(text);
    std::replace(s.begin(), s.end(), ',', ' ');
    return split_ws(s);
  };

  if (auto open = response.find('['); open != std::string_view::npos) {
    auto inner = response.substr(open + 1);
    inner = inner.substr(0, inner.find(']'));
    return tokenize(inner);
  }
  std::vector<std::string> out;
  for (auto tok : tokenize(response)) {
    if (!is_glyph(tok)) {
      while (!tok.empty() && !is_glyph(tok) && std::string_view(".;:!?\"'").find(tok.back()) != std::string_view::npos) {
        tok.pop_back();
      }
    }
    if (!is_glyph(tok)) break;
    out.push_back(tok);
  }
  return out;
}

bool grade_matrix(const MatrixProblem& p, std::string_view response, bool strict) {
  const auto tokens = normalize_matrix_response(p, response);
  if (tokens.empty() || p.key.empty()) return false;
  if (p.is_logic()) {
    if (strict) return tokens == p.key[0];
    return std::set<std::string>(tokens.begin(), tokens.end()) ==
           std::set<std::string>(p.key[0].begin(), p.key[0].end());
  }
  if (tokens.size() < p.key.size()) return false;
  for (std::size_t i = 0; i < p.key.size(); ++i) {
    if (p.key[i].size() != 1 || tokens[i] != p.key[i][0]) return false;
  }
  return true;
}

std::string render_cell(const Cell& cell) {
  Tokens flat;
  for (const auto& slot : cell) flat.insert(flat.end(), slot.begin(), slot.end());
  return flat.empty() ? "[ ]" : "[" + join(flat) + "]";
}

std::string render_grid(const Grid& grid, int blank_row, int blank_col) {
  std::string out;
  for (int r = 0; r < 3; ++r) {
    if (r > 0) out += "\n";
    for (int c = 0; c < 3; ++c) {
      if (c > 0) out += " ";
      out += (r == blank_row && c == blank_col) ? "[ ]" : render_cell(grid[r][c]);
    }
  }
  return out;
}

std::string render_grid(const MatrixProblem& p, bool open_blank) {
  if (!open_blank) return render_grid(p.grid, p.blank_row, p.blank_col);
  if (p.blank_row != 2 || p.blank_col != 2) {
    throw Error(ErrorCode::MissingSlot, "an open-ended grid needs the blank in the bottom-right cell");
  }
  auto text = render_grid(p.grid, p.blank_row, p.blank_col);
  return text.substr(0, text.size() - 2);  // drop " ]" of the trailing "[ ]"
}

std::map<std::string, std::string> matrix_tags(const MatrixProblem& p) {
  std::string kinds;
  for (const auto& r : p.rules) {
    if (!kinds.empty()) kinds += "+";
    kinds += describe(r);
  }
  return {
      {"task", "matrix"},
      {"variant", std::string(to_string(p.variant))},
      {"rules", p.is_logic() ? "logic" : std::to_string(p.rules.size())},
      {"rule_kinds", kinds},
      {"blank", std::to_string(p.blank_row) + "," + std::to_string(p.blank_col)},
  };
}

nlohmann::json matrix_to_json(const MatrixProblem& p) {
  nlohmann::json grid = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < 3; ++c) {
      row.push_back(r == p.blank_row && c == p.blank_col ? nlohmann::json(nullptr) : nlohmann::json(p.grid[r][c]));
    }
    grid.push_back(row);
  }
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& r : p.rules) {
    nlohmann::json j = {{"kind", to_string(r.kind)}, {"axis", to_string(r.axis)}};
    if (r.kind == RuleKind::Progression) j["step"] = r.step;
    if (r.kind == RuleKind::Logic) j["op"] = to_string(r.op);
    rules.push_back(j);
  }
  nlohmann::json domain = {{"kind", p.domain == GlyphDomain::Digits ? "digits" : "symbols"}};
  if (p.domain == GlyphDomain::Symbols) domain["mapping"] = p.mapping;
  return {{"id", p.id},
          {"grid", grid},
          {"blank", {p.blank_row, p.blank_col}},
          {"rules", rules},
          {"key", p.key},
          {"glyph_domain", domain},
          {"variant", to_string(p.variant)}};
}

MatrixProblem matrix_from_json(const nlohmann::json& j) {
  try {
    MatrixProblem p;
    p.id = j.at("id").get<std::string>();
    p.blank_row = j.at("blank").at(0).get<int>();
    p.blank_col = j.at("blank").at(1).get<int>();
    if (p.blank_row < 0 || p.blank_row > 2 || p.blank_col < 0 || p.blank_col > 2) {
      throw Error(ErrorCode::MalformedGrid, "blank outside the grid");
    }
    const auto& grid = j.at("grid");
    if (grid.size() != 3) throw Error(ErrorCode::MalformedGrid, "grid must have 3 rows");
    for (int r = 0; r < 3; ++r) {
      if (grid.at(r).size() != 3) throw Error(ErrorCode::MalformedGrid, "rows must have 3 cells");
      for (int c = 0; c < 3; ++c) {
        if (!grid[r][c].is_null()) p.grid[r][c] = grid[r][c].get<Cell>();
      }
    }
    for (const auto& rj : j.at("rules")) {
      RuleSpec r;
      const auto kind = rj.at("kind").get<std::string>();
      if (kind == "constant") {
        r.kind = RuleKind::Constant;
      } else if (kind == "distribution_of_three") {
        r.kind = RuleKind::DistributionOfThree;
      } else if (kind == "progression") {
        r.kind = RuleKind::Progression;
        r.step = rj.at("step").get<int>();
      } else if (kind == "logic") {
        r.kind = RuleKind::Logic;
        const auto op = rj.at("op").get<std::string>();
        r.op = op == "and" ? LogicOp::And : op == "or" ? LogicOp::Or : LogicOp::Xor;
      } else {
        throw Error(ErrorCode::ParseError, "unknown rule kind '" + kind + "'");
      }
      r.axis = rj.value("axis", "row") == "column" ? Axis::Column : Axis::Row;
      p.rules.push_back(r);
    }
    p.key = j.at("key").get<Cell>();
    const auto& domain = j.at("glyph_domain");
    if (domain.at("kind").get<std::string>() == "symbols") {
      p.domain = GlyphDomain::Symbols;
      p.mapping = domain.at("mapping").get<std::map<std::string, std::string>>();
    }
    const auto variant = j.value("variant", "digits");
    p.variant = variant == "symbols" ? MatrixVariant::Symbols
              : variant == "alt_blank" ? MatrixVariant::AltBlank
                                       : MatrixVariant::Original;
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("matrix problem: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Suite construction
// ---------------------------------------------------------------------------

MatrixSuiteConfig MatrixSuiteConfig::preset(std::string_view name) {
  if (name == "replication" || name == "digits") return replication();
  if (name == "alt-blank" || name == "alt_blank") return alt_blank();
  if (name == "symbols") return symbols();
  throw Error(ErrorCode::ConfigInvalid, "unknown matrix preset '" + std::string(name) + "'");
}

void MatrixSuiteConfig::validate() const {
  if (one_rule < 0 || two_rule < 0 || three_rule < 0 || logic < 0) {
    throw Error(ErrorCode::ConfigInvalid, "problem counts must be non-negative");
  }
}

std::vector<MatrixItemSpec> plan_matrix_suite(const MatrixSuiteConfig& config, std::uint64_t seed) {
  config.validate();
  const Rng root = Rng(seed).split("matrix").split(to_string(config.variant));
  std::vector<RuleKind> kinds = {RuleKind::Constant, RuleKind::DistributionOfThree};
  if (config.variant != MatrixVariant::Symbols) kinds.push_back(RuleKind::Progression);

  std::vector<MatrixItemSpec> plan;
  auto add = [&](std::vector<RuleSpec> rules, const std::string& section) {
    MatrixItemSpec spec;
    spec.rules = std::move(rules);
    spec.variant = config.variant;
    spec.section = section;
    spec.ordinal = plan.size();
    spec.seed = root.split(section).split(static_cast<std::uint64_t>(plan.size())).state();
    plan.push_back(std::move(spec));
  };
  auto random_rule = [&](RuleKind kind, Rng& r) {
    const Axis axis = r.coin() ? Axis::Row : Axis::Column;
    if (kind == RuleKind::Progression) return RuleSpec::progression(kSteps[r.below(kSteps.size())], axis);
    return RuleSpec{kind, axis, 1, LogicOp::Or};
  };

  Rng choice = root.split("choice");
  for (int i = 0; i < config.one_rule; ++i) add({random_rule(kinds[i % kinds.size()], choice)}, "rules1");
  for (int count : {2, 3}) {
    const int total = count == 2 ? config.two_rule : config.three_rule;
    for (int i = 0; i < total; ++i) {
      for (;;) {
        std::vector<RuleSpec> rules;
        for (int k = 0; k < count; ++k) rules.push_back(random_rule(kinds[choice.below(kinds.size())], choice));
        try {
          validate_rules(rules);
        } catch (const Error&) {
          continue;
        }
        add(std::move(rules), "rules" + std::to_string(count));
        break;
      }
    }
  }
  for (int i = 0; i < config.logic; ++i) {
    add({RuleSpec::logic(kOps[i % kOps.size()], choice.coin() ? Axis::Row : Axis::Column)}, "logic");
  }
  return plan;
}

MatrixProblem generate_matrix_item(const MatrixItemSpec& spec) {
  const Rng rng(spec.seed);
  const auto policy = spec.variant == MatrixVariant::AltBlank ? BlankPolicy::Random : BlankPolicy::BottomRight;
  auto p = generate_matrix(spec.rules, policy, rng.split("generate"));
  if (spec.variant == MatrixVariant::Symbols) {
    Rng map_rng = rng.split("symbols");
    p = apply_symbol_map(p, random_symbol_map(map_rng, default_symbol_pool()));
  }
  return p;
}

std::vector<MatrixProblem> build_matrix_suite(const MatrixSuiteConfig& config, std::uint64_t seed) {
  std::vector<MatrixProblem> out;
  for (const auto& spec : plan_matrix_suite(config, seed)) out.push_back(generate_matrix_item(spec));
  return out;
}

}  // namespace analogy
