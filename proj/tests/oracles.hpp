// Independent reference implementations used only by the tests. None of
// these call into the code they check beyond reading problem fields.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "analogy/letterstring.hpp"
#include "analogy/matrix.hpp"

namespace oracle {

using analogy::Generalization;
using analogy::LetterStringProblem;
using analogy::MatrixProblem;
using analogy::Tokens;
using analogy::Transformation;

/// Letter key computed on the surface target: strip decorations, edit the
/// run of positions, decorate again. Decoration constants: interval 2,
/// grouping 2, numerals counted from the written values.
inline Tokens letter_key(const LetterStringProblem& p) {
  const auto& g = p.generalizations;
  const bool numeral = g.has(Generalization::LetterToNumber);
  const int grouping = g.has(Generalization::Grouping) ? 2 : 1;
  const bool distractor = g.has(Generalization::InterleavedDistractor);
  const int step = (g.has(Generalization::ReversedOrder) ? -1 : 1) * (g.has(Generalization::LargerInterval) ? 2 : 1);
  const std::size_t unit = static_cast<std::size_t>(grouping) + (distractor ? 1 : 0);
  if (p.target.size() % unit != 0) throw std::logic_error("target does not fit its decoration");

  std::vector<long> v;
  for (std::size_t i = 0; i < p.target.size(); i += unit) {
    const auto& t = p.target[i];
    if (numeral) {
      v.push_back(std::stol(t));
    } else {
      const auto& glyphs = p.alphabet.glyphs();
      auto it = std::find(glyphs.begin(), glyphs.end(), t);
      if (it == glyphs.end()) throw std::logic_error("glyph outside alphabet: " + t);
      v.push_back(it - glyphs.begin());
    }
  }
  const std::string pad = distractor ? p.target[static_cast<std::size_t>(grouping)] : "";

  switch (p.transformation) {
    case Transformation::ExtendSequence: v.push_back(v.back() + step); break;
    case Transformation::Successor: v.back() += step; break;
    case Transformation::Predecessor: v.front() -= step; break;
    case Transformation::RemoveRedundant: {
      for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] == v[i - 1]) {
          v.erase(v.begin() + static_cast<long>(i));
          break;
        }
      }
      break;
    }
    case Transformation::FixAlphabetic: {
      std::optional<std::size_t> fix;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const std::size_t ref = i == 0 ? 1 : 0;
        bool ok = true;
        for (std::size_t j = 0; j < v.size() && ok; ++j) {
          if (j != i) ok = v[j] == v[ref] + step * (static_cast<long>(j) - static_cast<long>(ref));
        }
        if (ok) {
          if (fix) throw std::logic_error("two deviant candidates");
          fix = i;
        }
      }
      if (!fix) throw std::logic_error("no deviant element");
      const std::size_t ref = *fix == 0 ? 1 : 0;
      v[*fix] = v[ref] + step * (static_cast<long>(*fix) - static_cast<long>(ref));
      break;
    }
    case Transformation::Sort:
      std::sort(v.begin(), v.end(), [step](long a, long b) { return a * step < b * step; });
      break;
  }

  Tokens out;
  for (long x : v) {
    const std::string glyph = numeral ? std::to_string(x) : p.alphabet.at(static_cast<std::size_t>(x));
    for (int k = 0; k < grouping; ++k) out.push_back(glyph);
    if (distractor) out.push_back(pad);
  }
  return out;
}

/// Single-slot matrix completions: every candidate for the blank under
/// which all three rows, or all three columns, follow the declared rule kind.
/// Digits and Symbols both enumerate the problem's glyph order.
inline std::set<std::vector<std::string>> matrix_candidates(const MatrixProblem& p) {
  if (p.slots() != 1) throw std::logic_error("single-slot grids only");
  const auto order = p.glyph_order();
  auto rank = [&](const std::string& s) { return std::find(order.begin(), order.end(), s) - order.begin(); };
  const bool digits = p.domain == analogy::GlyphDomain::Digits;
  const auto kind = p.rules.at(0).kind;
  using analogy::RuleKind;

  std::vector<std::vector<std::string>> cands;
  std::set<std::string> seen;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      for (const auto& s : p.grid[r][c]) {
        for (const auto& x : s) seen.insert(x);
      }
    }
  }
  for (const auto& g : order) cands.push_back({g});
  // Sets for logic cells: every subset of the visible glyphs, two or more.
  std::vector<std::string> vis(seen.begin(), seen.end());
  std::sort(vis.begin(), vis.end(), [&](auto& a, auto& b) { return rank(a) < rank(b); });
  for (unsigned mask = 1; mask < (1u << vis.size()); ++mask) {
    if (__builtin_popcount(mask) < 2) continue;
    std::vector<std::string> s;
    for (std::size_t i = 0; i < vis.size(); ++i) {
      if (mask & (1u << i)) s.push_back(vis[i]);
    }
    cands.push_back(s);
  }

  using Set = std::vector<std::string>;
  auto canon = [&](std::set<std::string> s) {
    Set out(s.begin(), s.end());
    std::sort(out.begin(), out.end(), [&](auto& a, auto& b) { return rank(a) < rank(b); });
    return out;
  };
  auto line_fits = [&](const std::array<std::array<Set, 3>, 3>& g, bool rows) {
    auto at = [&](int i, int j) -> const Set& { return rows ? g[i][j] : g[j][i]; };
    bool singles = true;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) singles = singles && at(i, j).size() == 1;
    }
    if (singles) {
      bool constant = true, dist = true;
      std::set<std::string> first_line;
      for (int j = 0; j < 3; ++j) first_line.insert(at(0, j)[0]);
      for (int i = 0; i < 3; ++i) {
        constant = constant && at(i, 0) == at(i, 1) && at(i, 1) == at(i, 2);
        std::set<std::string> line;
        for (int j = 0; j < 3; ++j) line.insert(at(i, j)[0]);
        dist = dist && line.size() == 3 && line == first_line;
      }
      if (kind == RuleKind::Constant && constant) return true;
      if (kind == RuleKind::DistributionOfThree && dist) return true;
      if (digits && kind == RuleKind::Progression) {
        for (int step : {1, 2, -1, -2}) {
          bool prog = true;
          for (int i = 0; i < 3 && prog; ++i) {
            for (int j = 1; j < 3 && prog; ++j) prog = std::stoi(at(i, j)[0]) - std::stoi(at(i, j - 1)[0]) == step;
          }
          if (prog) return true;
        }
      }
    }
    if (kind != RuleKind::Logic) return false;
    // Logic: third cell of each line from the first two.
    for (int op = 0; op < 3; ++op) {
      bool ok = true;
      for (int i = 0; i < 3 && ok; ++i) {
        std::set<std::string> a(at(i, 0).begin(), at(i, 0).end()), b(at(i, 1).begin(), at(i, 1).end()), out;
        for (const auto& x : a) {
          if (op == 1 || (op == 0 && b.count(x)) || (op == 2 && !b.count(x))) out.insert(x);
        }
        for (const auto& x : b) {
          if (op == 1 || (op == 2 && !a.count(x))) out.insert(x);
        }
        ok = !out.empty() && canon(out) == at(i, 2);
      }
      if (ok) return true;
    }
    return false;
  };

  std::set<Set> out;
  for (const auto& cand : cands) {
    std::array<std::array<Set, 3>, 3> g;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) g[r][c] = (r == p.blank_row && c == p.blank_col) ? cand : p.grid[r][c][0];
    }
    if (line_fits(g, true) || line_fits(g, false)) out.insert(cand);
  }
  return out;
}

/// Wald interval written out directly.
inline std::pair<double, double> wald(double p, double n) {
  const double h = 1.959963985 * std::sqrt(p * (1 - p) / n);
  return {std::max(0.0, p - h), std::min(1.0, p + h)};
}

}  // namespace oracle
