#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "analogy/alphabet.hpp"
#include "analogy/rng.hpp"
#include "analogy/text.hpp"

namespace analogy {

enum class Transformation { ExtendSequence, Successor, Predecessor, RemoveRedundant, FixAlphabetic, Sort };

enum class Generalization {
  LetterToNumber,
  Grouping,
  LongerTarget,
  ReversedOrder,
  InterleavedDistractor,
  LargerInterval,
};

inline constexpr std::array<Transformation, 6> kAllTransformations = {
    Transformation::ExtendSequence, Transformation::Successor,     Transformation::Predecessor,
    Transformation::RemoveRedundant, Transformation::FixAlphabetic, Transformation::Sort,
};

inline constexpr std::array<Generalization, 6> kAllGeneralizations = {
    Generalization::LetterToNumber, Generalization::Grouping,              Generalization::LongerTarget,
    Generalization::ReversedOrder,  Generalization::InterleavedDistractor, Generalization::LargerInterval,
};

std::string_view to_string(Transformation t);
std::string_view to_string(Generalization g);
Transformation transformation_from_string(std::string_view name);
Generalization generalization_from_string(std::string_view name);

/// Small ordered set of generalization types, at most six members.
class GeneralizationSet {
 public:
  GeneralizationSet() = default;
  GeneralizationSet(std::initializer_list<Generalization> gens) {
    for (auto g : gens) insert(g);
  }

  void insert(Generalization g) { bits_ |= bit(g); }
  bool has(Generalization g) const { return (bits_ & bit(g)) != 0; }
  int size() const { return __builtin_popcount(bits_); }
  bool empty() const { return bits_ == 0; }
  std::vector<Generalization> members() const;

  friend bool operator==(GeneralizationSet a, GeneralizationSet b) { return a.bits_ == b.bits_; }

 private:
  static unsigned bit(Generalization g) { return 1u << static_cast<unsigned>(g); }
  unsigned bits_ = 0;
};

enum class SequenceDomain { Glyph, Numeral };

/// Index-space form of a letter string. Element k renders at alphabet
/// position index(anchor) + direction * interval * indices[k] (or the numeral
/// numeral_anchor + direction * interval * indices[k]), repeated `grouping`
/// times and followed by the distractor when one is set.
struct AbstractSequence {
  std::string anchor;     // Glyph domain
  int numeral_anchor = 1; // Numeral domain
  std::vector<int> indices;
  int direction = 1;
  int interval = 1;
  int grouping = 1;
  std::optional<std::string> distractor;
  SequenceDomain domain = SequenceDomain::Glyph;

  std::size_t rendered_length() const {
    // One distractor per group: "l l x k k x" is two groups of three.
    return indices.size() * (static_cast<std::size_t>(grouping) + (distractor ? 1 : 0));
  }

  friend bool operator==(const AbstractSequence&, const AbstractSequence&) = default;
};

/// Index-space edit for each transformation; throws PreconditionViolated when
/// `seq` lacks the structure the transformation needs.
AbstractSequence apply_transformation(Transformation t, const AbstractSequence& seq);

/// Throws AlphabetOverflow when a position falls outside the alphabet (or a
/// numeral goes negative).
Tokens render(const AbstractSequence& seq, const Alphabet& alphabet);

/// Inverse of render given the rendering parameters carried by `shape`
/// (anchor, direction, interval, grouping, distractor, domain). Throws
/// ParseError when the tokens do not follow that decoration pattern.
AbstractSequence parse_sequence(const Tokens& tokens, const AbstractSequence& shape, const Alphabet& alphabet);

struct LetterStringProblem {
  std::string id;
  Alphabet alphabet = Alphabet::standard();
  Tokens source_lhs;
  Tokens source_rhs;
  Tokens target;
  Tokens key;
  Transformation transformation = Transformation::Successor;
  GeneralizationSet generalizations;
  AbstractSequence abstract_source;
  AbstractSequence abstract_target;
};

/// Assembles a problem from explicit source and target sequences. The
/// target's rendering parameters must agree with `gens`.
LetterStringProblem build_problem(const Alphabet& alphabet, Transformation t, GeneralizationSet gens,
                                  const AbstractSequence& source, const AbstractSequence& target);

/// Samples a problem; the same rng state and alphabet size always give the
/// same index structure. Throws Infeasible when no placement fits.
LetterStringProblem generate_problem(const Alphabet& alphabet, Transformation t, GeneralizationSet gens, Rng rng);

/// The oracle key: render(apply_transformation(t, abstract_target)).
Tokens solve(const LetterStringProblem& p);

struct GradeOptions {
  /// Split "ijkm" into single-glyph tokens when every glyph is one code point.
  bool split_runs = true;
};

struct GradeResult {
  bool correct = false;
  Tokens normalized;
};

/// Truncate at the first ']', drop brackets and commas, split on whitespace,
/// optionally split glyph runs, lowercase ASCII. Exact token match only.
GradeResult grade(const LetterStringProblem& p, std::string_view response, const GradeOptions& options = {});

Tokens normalize_letter_response(std::string_view response, bool split_runs);

/// Tags used for aggregation: alphabet, alphabet_kind, gens, transformation, ...
std::map<std::string, std::string> problem_tags(const LetterStringProblem& p);

nlohmann::json sequence_to_json(const AbstractSequence& s);
AbstractSequence sequence_from_json(const nlohmann::json& j);
nlohmann::json problem_to_json(const LetterStringProblem& p);
LetterStringProblem problem_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Suite construction
// ---------------------------------------------------------------------------

struct LetterSuiteConfig {
  /// 0 selects the standard alphabet.
  std::vector<int> permuted_ns = {0, 2, 5, 10, 20};
  std::vector<int> gen_counts = {0, 1, 2, 3};
  bool include_symbol = true;
  int alphabets_per_family = 7;
  int problems_per_cell = 10;
  int multi_gen_per_alphabet = 70;
  int symbol10_alphabets = 2;
  int symbol15_alphabets = 7;

  static LetterSuiteConfig replication() { return {}; }
  void validate() const;
};

/// One planned item: everything needed to generate it independently.
struct LetterItemSpec {
  Alphabet alphabet = Alphabet::standard();
  Transformation transformation = Transformation::Successor;
  GeneralizationSet generalizations;
  std::string section;
  std::uint64_t ordinal = 0;
  std::uint64_t seed = 0;
};

/// The 7 permuted alphabets per n, plus the symbol alphabets, for a seed.
std::vector<Alphabet> suite_alphabets(const LetterSuiteConfig& config, std::uint64_t seed);

std::vector<LetterItemSpec> plan_suite(const LetterSuiteConfig& config, std::uint64_t seed);

/// Generates one planned item; `attempt` reseeds on duplicate rejection.
LetterStringProblem generate_item(const LetterItemSpec& spec, int attempt);

/// Serial reference: plan, generate, then replace duplicates in order.
std::vector<LetterStringProblem> build_suite(const LetterSuiteConfig& config, std::uint64_t seed);

/// Regenerates later duplicates (by id) until every id is unique.
void deduplicate(std::vector<LetterStringProblem>& problems, const std::vector<LetterItemSpec>& plan);

}  // namespace analogy
