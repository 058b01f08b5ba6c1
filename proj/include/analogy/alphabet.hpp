#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace analogy {

enum class AlphabetKind { Standard, Permuted, Symbol };

enum class Relation { Succ, Pred };

/// Whether a glyph and its successor/predecessor both sit where the standard
/// a-z ordering would put them.
enum class Displacement { OriginalPositions, Moved };

/// An ordered sequence of distinct glyphs. Immutable; copies share storage.
class Alphabet {
 public:
  /// Validates the kind-specific invariants and throws InvalidAlphabet.
  static Alphabet from_glyphs(AlphabetKind kind, int n, int variant_id, std::uint64_t seed,
                              std::vector<std::string> glyphs);

  static Alphabet standard();

  AlphabetKind kind() const { return impl_->kind; }
  /// Displaced-letter count for permuted alphabets, length for symbol ones, 0 otherwise.
  int n() const { return impl_->n; }
  int variant_id() const { return impl_->variant_id; }
  std::uint64_t seed() const { return impl_->seed; }

  const std::vector<std::string>& glyphs() const { return impl_->glyphs; }
  std::size_t size() const { return impl_->glyphs.size(); }
  const std::string& at(std::size_t i) const { return impl_->glyphs.at(i); }

  std::optional<std::size_t> index_of(std::string_view glyph) const;
  std::size_t require_index(std::string_view glyph) const;
  bool contains(std::string_view glyph) const { return index_of(glyph).has_value(); }

  /// Short condition label, e.g. "n0", "n10", "symb15".
  std::string family() const;
  /// Family plus variant, e.g. "n10.3".
  std::string label() const;

  friend bool operator==(const Alphabet& a, const Alphabet& b) {
    return a.impl_ == b.impl_ ||
           (a.kind() == b.kind() && a.n() == b.n() && a.variant_id() == b.variant_id() &&
            a.glyphs() == b.glyphs());
  }

 private:
  struct Impl {
    AlphabetKind kind;
    int n;
    int variant_id;
    std::uint64_t seed;
    std::vector<std::string> glyphs;
  };
  explicit Alphabet(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  std::shared_ptr<const Impl> impl_;
};

std::string successor(const Alphabet& a, std::string_view glyph);
std::string predecessor(const Alphabet& a, std::string_view glyph);

Displacement pair_displacement(const Alphabet& a, std::string_view glyph, Relation relation);

/// Standard alphabet with exactly n letters moved (n in {2, 5, 10, 20}).
/// The chosen letters are deranged, so none lands back in its own slot.
Alphabet make_permuted(int n, int variant_id, std::uint64_t seed);

/// Symbol alphabet of `length` (10 or 15) glyphs drawn without replacement.
Alphabet make_symbol(int length, int variant_id, std::uint64_t seed,
                     std::span<const std::string> pool);
Alphabet make_symbol(int length, int variant_id, std::uint64_t seed);

/// 24 punctuation and shape glyphs; no letters, digits, brackets or commas.
const std::vector<std::string>& default_symbol_pool();

const std::vector<std::string>& standard_letters();

std::string_view to_string(AlphabetKind kind);
std::string_view to_string(Relation relation);
std::string_view to_string(Displacement d);

nlohmann::json alphabet_to_json(const Alphabet& a);
Alphabet alphabet_from_json(const nlohmann::json& j);

}  // namespace analogy
