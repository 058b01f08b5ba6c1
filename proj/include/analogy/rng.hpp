#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace analogy {

/// SplitMix64-based generator. Output is identical on every platform, which
/// the standard distributions do not guarantee.
///
/// Streams are derived by path: `Rng(seed).split("letterstring").split(n)`
/// yields the same child regardless of how many draws were made elsewhere,
/// so independently generated items can be produced in any order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();

  /// Uniform in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Uniform in [lo, hi], inclusive.
  int uniform_int(int lo, int hi);

  bool coin() { return (next() >> 63) != 0; }

  /// Child stream keyed by a label; does not advance this generator.
  Rng split(std::string_view label) const;
  Rng split(std::uint64_t index) const;

  std::uint64_t state() const { return state_; }

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

  template <class T>
  const T& pick(std::span<const T> items) {
    return items[static_cast<std::size_t>(below(items.size()))];
  }

 private:
  std::uint64_t state_;
};

std::uint64_t mix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace analogy
