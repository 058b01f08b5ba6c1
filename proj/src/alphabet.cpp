#include "analogy/alphabet.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "analogy/error.hpp"
#include "analogy/rng.hpp"

namespace analogy {

namespace {

bool is_latin_or_digit(std::string_view glyph) {
  return std::any_of(glyph.begin(), glyph.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
  });
}

int displaced_count(const std::vector<std::string>& glyphs) {
  const auto& std_letters = standard_letters();
  int moved = 0;
  for (std::size_t i = 0; i < glyphs.size(); ++i) {
    if (i >= std_letters.size() || glyphs[i] != std_letters[i]) ++moved;
  }
  return moved;
}

bool valid_permuted_n(int n) { return n == 2 || n == 5 || n == 10 || n == 20; }

}  // namespace

const std::vector<std::string>& standard_letters() {
  static const std::vector<std::string> letters = [] {
    std::vector<std::string> out;
    for (char c = 'a'; c <= 'z'; ++c) out.emplace_back(1, c);
    return out;
  }();
  return letters;
}

const std::vector<std::string>& default_symbol_pool() {
  static const std::vector<std::string> pool = {
      "!", "@", "#", "$", "%", "^", "&", "*", "+", "=", "~", "§",
      "†", "‡", "◊", "¤", "¶", "±", "÷", "©", "®", "°", "¢", "£",
  };
  return pool;
}

Alphabet Alphabet::from_glyphs(AlphabetKind kind, int n, int variant_id, std::uint64_t seed,
                               std::vector<std::string> glyphs) {
  std::set<std::string> seen;
  for (const auto& g : glyphs) {
    if (g.empty()) throw Error(ErrorCode::InvalidAlphabet, "empty glyph");
    if (g.find_first_of(" \t\r\n[],") != std::string::npos) {
      throw Error(ErrorCode::InvalidAlphabet, "glyph contains a reserved character: '" + g + "'");
    }
    if (!seen.insert(g).second) throw Error(ErrorCode::InvalidAlphabet, "duplicate glyph '" + g + "'");
  }

  switch (kind) {
    case AlphabetKind::Standard:
      if (glyphs != standard_letters()) throw Error(ErrorCode::InvalidAlphabet, "standard alphabet must be a-z");
      n = 0;
      break;
    case AlphabetKind::Permuted: {
      if (!valid_permuted_n(n)) throw Error(ErrorCode::InvalidN, "n=" + std::to_string(n));
      auto sorted = glyphs;
      std::sort(sorted.begin(), sorted.end());
      if (sorted != standard_letters()) {
        throw Error(ErrorCode::InvalidAlphabet, "permuted alphabet must be a rearrangement of a-z");
      }
      if (displaced_count(glyphs) != n) {
        throw Error(ErrorCode::InvalidAlphabet,
                    "expected " + std::to_string(n) + " displaced letters, found " +
                        std::to_string(displaced_count(glyphs)));
      }
      break;
    }
    case AlphabetKind::Symbol:
      if (glyphs.size() != 10 && glyphs.size() != 15) {
        throw Error(ErrorCode::InvalidAlphabet, "symbol alphabets have 10 or 15 glyphs");
      }
      for (const auto& g : glyphs) {
        if (is_latin_or_digit(g)) throw Error(ErrorCode::InvalidAlphabet, "symbol glyph '" + g + "' is alphanumeric");
      }
      n = static_cast<int>(glyphs.size());
      break;
  }
  return Alphabet(std::make_shared<const Impl>(Impl{kind, n, variant_id, seed, std::move(glyphs)}));
}

Alphabet Alphabet::standard() {
  static const Alphabet kStandard = from_glyphs(AlphabetKind::Standard, 0, 0, 0, standard_letters());
  return kStandard;
}

std::optional<std::size_t> Alphabet::index_of(std::string_view glyph) const {
  const auto& gs = impl_->glyphs;
  for (std::size_t i = 0; i < gs.size(); ++i) {
    if (gs[i] == glyph) return i;
  }
  return std::nullopt;
}

std::size_t Alphabet::require_index(std::string_view glyph) const {
  auto idx = index_of(glyph);
  if (!idx) throw Error(ErrorCode::UnknownGlyph, "'" + std::string(glyph) + "' not in alphabet " + label());
  return *idx;
}

std::string Alphabet::family() const {
  switch (kind()) {
    case AlphabetKind::Standard: return "n0";
    case AlphabetKind::Permuted: return "n" + std::to_string(n());
    case AlphabetKind::Symbol: return "symb" + std::to_string(n());
  }
  return "?";
}

std::string Alphabet::label() const { return family() + "." + std::to_string(variant_id()); }

std::string successor(const Alphabet& a, std::string_view glyph) {
  const auto i = a.require_index(glyph);
  if (i + 1 >= a.size()) throw Error(ErrorCode::LastGlyph, "'" + std::string(glyph) + "' is the last glyph");
  return a.at(i + 1);
}

std::string predecessor(const Alphabet& a, std::string_view glyph) {
  const auto i = a.require_index(glyph);
  if (i == 0) throw Error(ErrorCode::FirstGlyph, "'" + std::string(glyph) + "' is the first glyph");
  return a.at(i - 1);
}

Displacement pair_displacement(const Alphabet& a, std::string_view glyph, Relation relation) {
  const auto i = a.require_index(glyph);
  const std::string partner = relation == Relation::Succ ? successor(a, glyph) : predecessor(a, glyph);
  const auto j = relation == Relation::Succ ? i + 1 : i - 1;
  const auto& letters = standard_letters();
  const bool glyph_home = i < letters.size() && letters[i] == glyph;
  const bool partner_home = j < letters.size() && letters[j] == partner;
  return glyph_home && partner_home ? Displacement::OriginalPositions : Displacement::Moved;
}

Alphabet make_permuted(int n, int variant_id, std::uint64_t seed) {
  if (!valid_permuted_n(n)) throw Error(ErrorCode::InvalidN, "n must be one of 2, 5, 10, 20; got " + std::to_string(n));
  Rng rng = Rng(seed).split("permuted").split(static_cast<std::uint64_t>(n)).split(static_cast<std::uint64_t>(variant_id));

  std::vector<std::size_t> positions(26);
  std::iota(positions.begin(), positions.end(), 0);
  for (int i = 0; i < n; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(26 - i));
    std::swap(positions[i], positions[j]);
  }
  positions.resize(n);
  std::sort(positions.begin(), positions.end());

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto has_fixed_point = [&] {
    for (int i = 0; i < n; ++i) {
      if (order[i] == static_cast<std::size_t>(i)) return true;
    }
    return false;
  };
  do {
    rng.shuffle(std::span<std::size_t>(order));
  } while (has_fixed_point());

  auto glyphs = standard_letters();
  for (int i = 0; i < n; ++i) glyphs[positions[i]] = standard_letters()[positions[order[i]]];
  return Alphabet::from_glyphs(AlphabetKind::Permuted, n, variant_id, seed, std::move(glyphs));
}

Alphabet make_symbol(int length, int variant_id, std::uint64_t seed, std::span<const std::string> pool) {
  if (length != 10 && length != 15) {
    throw Error(ErrorCode::InvalidAlphabet, "symbol alphabets have 10 or 15 glyphs");
  }
  std::vector<std::string> candidates;
  for (const auto& g : pool) {
    if (!g.empty() && !is_latin_or_digit(g) &&
        std::find(candidates.begin(), candidates.end(), g) == candidates.end()) {
      candidates.push_back(g);
    }
  }
  if (candidates.size() < static_cast<std::size_t>(length)) {
    throw Error(ErrorCode::PoolTooSmall, "pool has " + std::to_string(candidates.size()) +
                                             " usable glyphs, need " + std::to_string(length));
  }
  Rng rng = Rng(seed).split("symbol").split(static_cast<std::uint64_t>(length)).split(static_cast<std::uint64_t>(variant_id));
  rng.shuffle(std::span<std::string>(candidates));
  candidates.resize(length);
  return Alphabet::from_glyphs(AlphabetKind::Symbol, length, variant_id, seed, std::move(candidates));
}

Alphabet make_symbol(int length, int variant_id, std::uint64_t seed) {
  return make_symbol(length, variant_id, seed, default_symbol_pool());
}

std::string_view to_string(AlphabetKind kind) {
  switch (kind) {
    case AlphabetKind::Standard: return "standard";
    case AlphabetKind::Permuted: return "permuted";
    case AlphabetKind::Symbol: return "symbol";
  }
  return "?";
}

std::string_view to_string(Relation relation) { return relation == Relation::Succ ? "successor" : "predecessor"; }

std::string_view to_string(Displacement d) {
  return d == Displacement::OriginalPositions ? "original_positions" : "moved";
}

nlohmann::json alphabet_to_json(const Alphabet& a) {
  return {{"kind", to_string(a.kind())},
          {"n", a.n()},
          {"variant_id", a.variant_id()},
          {"seed", a.seed()},
          {"glyphs", a.glyphs()}};
}

Alphabet alphabet_from_json(const nlohmann::json& j) {
  try {
    const auto kind_name = j.at("kind").get<std::string>();
    AlphabetKind kind;
    if (kind_name == "standard") {
      kind = AlphabetKind::Standard;
    } else if (kind_name == "permuted") {
      kind = AlphabetKind::Permuted;
    } else if (kind_name == "symbol") {
      kind = AlphabetKind::Symbol;
    } else {
      throw Error(ErrorCode::InvalidAlphabet, "unknown kind '" + kind_name + "'");
    }
    return Alphabet::from_glyphs(kind, j.value("n", 0), j.value("variant_id", 0), j.value("seed", std::uint64_t{0}),
                                 j.at("glyphs").get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidAlphabet, e.what());
  }
}

}  // namespace analogy
