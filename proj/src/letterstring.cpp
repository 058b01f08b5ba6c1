#include "analogy/letterstring.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_map>

#include "analogy/error.hpp"

namespace analogy {

namespace {

constexpr int kMaxAttempts = 256;

bool is_clean_run(const std::vector<int>& idx) {
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] != static_cast<int>(i)) return false;
  }
  return true;
}

std::vector<int> clean_run(int length) {
  std::vector<int> out(length);
  std::iota(out.begin(), out.end(), 0);
  return out;
}

[[noreturn]] void precondition(Transformation t, const std::string& why) {
  throw Error(ErrorCode::PreconditionViolated, std::string(to_string(t)) + ": " + why);
}

/// Index structure a transformation expects, with its flaw (if any) sampled.
std::vector<int> flawed_indices(Transformation t, int length, Rng& rng) {
  auto idx = clean_run(length);
  switch (t) {
    case Transformation::ExtendSequence:
    case Transformation::Successor:
    case Transformation::Predecessor:
      break;
    case Transformation::RemoveRedundant: {
      const int dup = rng.uniform_int(0, length - 1);
      idx.insert(idx.begin() + dup + 1, dup);
      break;
    }
    case Transformation::FixAlphabetic: {
      // The odd element sits at least three steps from where it belongs and
      // outside the run, so exactly one element is out of sequence.
      const int pos = rng.uniform_int(0, length - 1);
      const int delta = rng.uniform_int(3, 6);
      int deviant = rng.coin() ? pos + delta : pos - delta;
      if (deviant >= 0 && deviant < length) deviant = 2 * pos - deviant;
      idx[pos] = deviant;
      break;
    }
    case Transformation::Sort:
      do {
        rng.shuffle(std::span<int>(idx));
      } while (is_clean_run(idx));
      break;
  }
  return idx;
}

/// Alphabet positions that keep every offset in `offsets` inside the alphabet.
std::vector<int> feasible_anchors(const std::set<int>& offsets, int step, int size) {
  std::vector<int> out;
  for (int anchor = 0; anchor < size; ++anchor) {
    bool ok = true;
    for (int o : offsets) {
      const int pos = anchor + step * o;
      if (pos < 0 || pos >= size) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(anchor);
  }
  return out;
}

std::set<int> offsets_of(const std::vector<int>& a, const std::vector<int>& b) {
  std::set<int> out(a.begin(), a.end());
  out.insert(b.begin(), b.end());
  out.insert(0);
  return out;
}

void check_shape(const AbstractSequence& s, GeneralizationSet gens) {
  auto mismatch = [](const char* what) {
    throw Error(ErrorCode::ConfigInvalid, std::string("target rendering disagrees with generalizations: ") + what);
  };
  if ((s.direction == -1) != gens.has(Generalization::ReversedOrder)) mismatch("direction");
  if ((s.interval > 1) != gens.has(Generalization::LargerInterval)) mismatch("interval");
  if ((s.grouping > 1) != gens.has(Generalization::Grouping)) mismatch("grouping");
  if (s.distractor.has_value() != gens.has(Generalization::InterleavedDistractor)) mismatch("distractor");
  if ((s.domain == SequenceDomain::Numeral) != gens.has(Generalization::LetterToNumber)) mismatch("domain");
}

std::string content_id(const nlohmann::json& content) { return "ls-" + sha256_hex(content.dump()).substr(0, 16); }

}  // namespace

std::string_view to_string(Transformation t) {
  switch (t) {
    case Transformation::ExtendSequence: return "extend_sequence";
    case Transformation::Successor: return "successor";
    case Transformation::Predecessor: return "predecessor";
    case Transformation::RemoveRedundant: return "remove_redundant";
    case Transformation::FixAlphabetic: return "fix_alphabetic";
    case Transformation::Sort: return "sort";
  }
  return "?";
}

std::string_view to_string(Generalization g) {
  switch (g) {
    case Generalization::LetterToNumber: return "letter_to_number";
    case Generalization::Grouping: return "grouping";
    case Generalization::LongerTarget: return "longer_target";
    case Generalization::ReversedOrder: return "reversed_order";
    case Generalization::InterleavedDistractor: return "interleaved_distractor";
    case Generalization::LargerInterval: return "larger_interval";
  }
  return "?";
}

Transformation transformation_from_string(std::string_view name) {
  for (auto t : kAllTransformations) {
    if (to_string(t) == name) return t;
  }
  throw Error(ErrorCode::ParseError, "unknown transformation '" + std::string(name) + "'");
}

Generalization generalization_from_string(std::string_view name) {
  for (auto g : kAllGeneralizations) {
    if (to_string(g) == name) return g;
  }
  throw Error(ErrorCode::ParseError, "unknown generalization '" + std::string(name) + "'");
}

std::vector<Generalization> GeneralizationSet::members() const {
  std::vector<Generalization> out;
  for (auto g : kAllGeneralizations) {
    if (has(g)) out.push_back(g);
  }
  return out;
}

AbstractSequence apply_transformation(Transformation t, const AbstractSequence& seq) {
  AbstractSequence out = seq;
  auto& idx = out.indices;
  switch (t) {
    case Transformation::ExtendSequence:
      if (idx.empty() || !is_clean_run(idx)) precondition(t, "expects a clean run");
      idx.push_back(static_cast<int>(idx.size()));
      break;
    case Transformation::Successor:
      if (idx.empty() || !is_clean_run(idx)) precondition(t, "expects a clean run");
      idx.back() += 1;
      break;
    case Transformation::Predecessor:
      if (idx.empty() || !is_clean_run(idx)) precondition(t, "expects a clean run");
      idx.front() -= 1;
      break;
    case Transformation::RemoveRedundant: {
      std::optional<std::size_t> dup;
      for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
        if (idx[i] == idx[i + 1]) {
          if (dup) precondition(t, "more than one repeated element");
          dup = i;
        }
      }
      if (!dup) precondition(t, "no repeated element");
      idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(*dup));
      if (!is_clean_run(idx)) precondition(t, "remaining elements are not a run");
      break;
    }
    case Transformation::FixAlphabetic: {
      std::optional<std::size_t> odd;
      for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] != static_cast<int>(i)) {
          if (odd) precondition(t, "more than one element out of sequence");
          odd = i;
        }
      }
      if (!odd) precondition(t, "no element out of sequence");
      idx[*odd] = static_cast<int>(*odd);
      break;
    }
    case Transformation::Sort: {
      auto sorted = idx;
      std::sort(sorted.begin(), sorted.end());
      if (!is_clean_run(sorted)) precondition(t, "not a permutation of a run");
      if (sorted == idx) precondition(t, "already sorted");
      idx = std::move(sorted);
      break;
    }
  }
  return out;
}

Tokens render(const AbstractSequence& seq, const Alphabet& alphabet) {
  Tokens out;
  out.reserve(seq.rendered_length());
  const int step = seq.direction * seq.interval;
  std::optional<int> anchor_pos;
  if (seq.domain == SequenceDomain::Glyph) {
    anchor_pos = static_cast<int>(alphabet.require_index(seq.anchor));
  }
  for (int k : seq.indices) {
    std::string element;
    if (anchor_pos) {
      const int pos = *anchor_pos + step * k;
      if (pos < 0 || pos >= static_cast<int>(alphabet.size())) {
        throw Error(ErrorCode::AlphabetOverflow, "position " + std::to_string(pos) + " outside alphabet " + alphabet.label());
      }
      element = alphabet.at(static_cast<std::size_t>(pos));
    } else {
      const int value = seq.numeral_anchor + step * k;
      if (value < 0) throw Error(ErrorCode::AlphabetOverflow, "numeral " + std::to_string(value) + " is negative");
      element = std::to_string(value);
    }
    for (int g = 0; g < seq.grouping; ++g) out.push_back(element);
    if (seq.distractor) out.push_back(*seq.distractor);
  }
  return out;
}

AbstractSequence parse_sequence(const Tokens& tokens, const AbstractSequence& shape, const Alphabet& alphabet) {
  auto fail = [](const std::string& why) -> void { throw Error(ErrorCode::ParseError, why); };
  const std::size_t stride = static_cast<std::size_t>(shape.grouping) + (shape.distractor ? 1 : 0);
  if (shape.grouping < 1 || tokens.size() % stride != 0) fail("length does not match the decoration pattern");

  AbstractSequence out = shape;
  out.indices.clear();
  const int step = shape.direction * shape.interval;
  int anchor_value = shape.numeral_anchor;
  if (shape.domain == SequenceDomain::Glyph) anchor_value = static_cast<int>(alphabet.require_index(shape.anchor));

  for (std::size_t i = 0; i < tokens.size(); i += stride) {
    for (int g = 1; g < shape.grouping; ++g) {
      if (tokens[i + g] != tokens[i]) fail("group is not uniform at token " + std::to_string(i));
    }
    if (shape.distractor && tokens[i + shape.grouping] != *shape.distractor) {
      fail("missing distractor after token " + std::to_string(i));
    }
    int value = 0;
    if (shape.domain == SequenceDomain::Glyph) {
      auto pos = alphabet.index_of(tokens[i]);
      if (!pos) fail("'" + tokens[i] + "' is not in the alphabet");
      value = static_cast<int>(*pos);
    } else {
      try {
        std::size_t used = 0;
        value = std::stoi(tokens[i], &used);
        if (used != tokens[i].size()) fail("bad numeral '" + tokens[i] + "'");
      } catch (const std::logic_error&) {
        fail("bad numeral '" + tokens[i] + "'");
      }
    }
    const int delta = value - anchor_value;
    if (delta % step != 0) fail("'" + tokens[i] + "' is off the interval lattice");
    out.indices.push_back(delta / step);
  }
  return out;
}

LetterStringProblem build_problem(const Alphabet& alphabet, Transformation t, GeneralizationSet gens,
                                  const AbstractSequence& source, const AbstractSequence& target) {
  if (gens.size() > 3) throw Error(ErrorCode::ConfigInvalid, "at most three generalizations");
  if (source.direction != 1 || source.interval != 1 || source.grouping != 1 || source.distractor ||
      source.domain != SequenceDomain::Glyph) {
    throw Error(ErrorCode::ConfigInvalid, "source strings carry no generalizations");
  }
  check_shape(target, gens);

  LetterStringProblem p;
  p.alphabet = alphabet;
  p.transformation = t;
  p.generalizations = gens;
  p.abstract_source = source;
  p.abstract_target = target;
  p.source_lhs = render(source, alphabet);
  p.source_rhs = render(apply_transformation(t, source), alphabet);
  p.target = render(target, alphabet);
  p.key = solve(p);
  auto content = problem_to_json(p);
  content.erase("id");
  p.id = content_id(content);
  return p;
}

LetterStringProblem generate_problem(const Alphabet& alphabet, Transformation t, GeneralizationSet gens, Rng rng) {
  if (gens.size() > 3) throw Error(ErrorCode::ConfigInvalid, "at most three generalizations");
  Rng structure = rng.split("structure");
  Rng placement = rng.split("placement");
  const int size = static_cast<int>(alphabet.size());

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const int source_len = structure.uniform_int(3, 5);
    const int target_len = source_len + (gens.has(Generalization::LongerTarget) ? structure.uniform_int(2, 4) : 0);

    AbstractSequence source;
    source.indices = flawed_indices(t, source_len, structure);
    AbstractSequence target;
    target.indices = flawed_indices(t, target_len, structure);
    target.direction = gens.has(Generalization::ReversedOrder) ? -1 : 1;
    target.interval = gens.has(Generalization::LargerInterval) ? 2 : 1;
    target.grouping = gens.has(Generalization::Grouping) ? 2 : 1;
    target.domain = gens.has(Generalization::LetterToNumber) ? SequenceDomain::Numeral : SequenceDomain::Glyph;

    const auto source_out = apply_transformation(t, source);
    const auto source_anchors = feasible_anchors(offsets_of(source.indices, source_out.indices), 1, size);
    if (source_anchors.empty()) continue;
    source.anchor = alphabet.at(static_cast<std::size_t>(placement.pick(std::span<const int>(source_anchors))));

    const auto key_indices = apply_transformation(t, target).indices;
    const auto target_offsets = offsets_of(target.indices, key_indices);
    const int step = target.direction * target.interval;
    if (target.domain == SequenceDomain::Glyph) {
      const auto anchors = feasible_anchors(target_offsets, step, size);
      if (anchors.empty()) continue;
      target.anchor = alphabet.at(static_cast<std::size_t>(placement.pick(std::span<const int>(anchors))));
    } else {
      // Smallest anchor keeping every numeral >= 1, so plain runs read 1 2 3 ...
      int lowest = 0;
      for (int o : target_offsets) lowest = std::min(lowest, step * o);
      target.numeral_anchor = 1 - lowest;
    }

    if (gens.has(Generalization::InterleavedDistractor)) {
      std::set<std::string> used;
      if (target.domain == SequenceDomain::Glyph) {
        for (const auto& tok : render(target, alphabet)) used.insert(tok);
        auto keyed = target;
        keyed.indices = key_indices;
        for (const auto& tok : render(keyed, alphabet)) used.insert(tok);
      }
      std::vector<std::string> candidates;
      for (const auto& g : alphabet.glyphs()) {
        if (!used.count(g)) candidates.push_back(g);
      }
      if (candidates.empty()) continue;
      if (std::find(candidates.begin(), candidates.end(), "x") != candidates.end()) {
        target.distractor = "x";
      } else {
        target.distractor = placement.pick(std::span<const std::string>(candidates));
      }
    }
    return build_problem(alphabet, t, gens, source, target);
  }
  throw Error(ErrorCode::Infeasible, std::string(to_string(t)) + " does not fit alphabet " + alphabet.label());
}

Tokens solve(const LetterStringProblem& p) {
  return render(apply_transformation(p.transformation, p.abstract_target), p.alphabet);
}

Tokens normalize_letter_response(std::string_view response, bool split_runs) {
  if (auto close = response.find(']'); close != std::string_view::npos) response = response.substr(0, close);
  std::string cleaned(response);
  for (auto& c : cleaned) {
    if (c == '[' || c == ']' || c == ',') c = ' ';
  }
  cleaned = to_lower_ascii(cleaned);
  Tokens tokens = split_ws(cleaned);
  if (!split_runs) return tokens;
  Tokens out;
  for (const auto& tok : tokens) {
    for (auto& cp : utf8_codepoints(tok)) out.push_back(std::move(cp));
  }
  return out;
}

GradeResult grade(const LetterStringProblem& p, std::string_view response, const GradeOptions& options) {
  bool single = std::all_of(p.alphabet.glyphs().begin(), p.alphabet.glyphs().end(),
                            [](const std::string& g) { return is_single_codepoint(g); });
  for (const auto& tok : p.key) single = single && is_single_codepoint(tok);
  for (const auto& tok : p.target) single = single && is_single_codepoint(tok);

  GradeResult r;
  r.normalized = normalize_letter_response(response, options.split_runs && single);
  r.correct = !r.normalized.empty() && r.normalized == p.key;
  return r;
}

std::map<std::string, std::string> problem_tags(const LetterStringProblem& p) {
  std::string gens;
  for (auto g : p.generalizations.members()) {
    if (!gens.empty()) gens += "+";
    gens += to_string(g);
  }
  return {
      {"task", "letterstring"},
      {"alphabet", p.alphabet.family()},
      {"alphabet_kind", std::string(to_string(p.alphabet.kind()))},
      {"alphabet_variant", std::to_string(p.alphabet.variant_id())},
      {"gens", std::to_string(p.generalizations.size())},
      {"generalizations", gens.empty() ? "none" : gens},
      {"transformation", std::string(to_string(p.transformation))},
  };
}

nlohmann::json sequence_to_json(const AbstractSequence& s) {
  nlohmann::json j;
  if (s.domain == SequenceDomain::Glyph) {
    j["start"] = s.anchor;
  } else {
    j["start"] = s.numeral_anchor;
  }
  j["indices"] = s.indices;
  j["direction"] = s.direction;
  j["interval"] = s.interval;
  j["grouping"] = s.grouping;
  j["distractor"] = s.distractor ? nlohmann::json(*s.distractor) : nlohmann::json(nullptr);
  j["domain"] = s.domain == SequenceDomain::Glyph ? "glyph" : "numeral";
  return j;
}

AbstractSequence sequence_from_json(const nlohmann::json& j) {
  AbstractSequence s;
  s.domain = j.at("domain").get<std::string>() == "numeral" ? SequenceDomain::Numeral : SequenceDomain::Glyph;
  if (s.domain == SequenceDomain::Glyph) {
    s.anchor = j.at("start").get<std::string>();
  } else {
    s.numeral_anchor = j.at("start").get<int>();
  }
  s.indices = j.at("indices").get<std::vector<int>>();
  s.direction = j.at("direction").get<int>();
  s.interval = j.at("interval").get<int>();
  s.grouping = j.at("grouping").get<int>();
  if (!j.at("distractor").is_null()) s.distractor = j.at("distractor").get<std::string>();
  return s;
}

nlohmann::json problem_to_json(const LetterStringProblem& p) {
  std::vector<std::string> gens;
  for (auto g : p.generalizations.members()) gens.emplace_back(to_string(g));
  return {
      {"id", p.id},
      {"alphabet", alphabet_to_json(p.alphabet)},
      {"source_lhs", p.source_lhs},
      {"source_rhs", p.source_rhs},
      {"target", p.target},
      {"key", p.key},
      {"transformation", to_string(p.transformation)},
      {"generalizations", gens},
      {"abstract_source", sequence_to_json(p.abstract_source)},
      {"abstract_target", sequence_to_json(p.abstract_target)},
  };
}

LetterStringProblem problem_from_json(const nlohmann::json& j) {
  try {
    LetterStringProblem p;
    p.id = j.at("id").get<std::string>();
    p.alphabet = alphabet_from_json(j.at("alphabet"));
    p.source_lhs = j.at("source_lhs").get<Tokens>();
    p.source_rhs = j.at("source_rhs").get<Tokens>();
    p.target = j.at("target").get<Tokens>();
    p.key = j.at("key").get<Tokens>();
    p.transformation = transformation_from_string(j.at("transformation").get<std::string>());
    for (const auto& g : j.at("generalizations")) p.generalizations.insert(generalization_from_string(g.get<std::string>()));
    if (j.contains("abstract_source")) p.abstract_source = sequence_from_json(j.at("abstract_source"));
    p.abstract_target = sequence_from_json(j.at("abstract_target"));
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("letter-string problem: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Suite construction
// ---------------------------------------------------------------------------

void LetterSuiteConfig::validate() const {
  auto bad = [](const std::string& why) { throw Error(ErrorCode::ConfigInvalid, why); };
  for (int n : permuted_ns) {
    if (n != 0 && n != 2 && n != 5 && n != 10 && n != 20) bad("permuted n must be 0, 2, 5, 10 or 20");
  }
  for (int g : gen_counts) {
    if (g < 0 || g > 3) bad("generalization counts must be 0..3");
  }
  if (alphabets_per_family < 1 || problems_per_cell < 1 || multi_gen_per_alphabet < 1 || symbol10_alphabets < 0 ||
      symbol15_alphabets < 0) {
    bad("counts must be positive");
  }
}

std::vector<Alphabet> suite_alphabets(const LetterSuiteConfig& config, std::uint64_t seed) {
  config.validate();
  std::vector<Alphabet> out{Alphabet::standard()};
  for (int n : config.permuted_ns) {
    if (n == 0) continue;
    for (int i = 1; i <= config.alphabets_per_family; ++i) out.push_back(make_permuted(n, i, seed));
  }
  if (config.include_symbol) {
    for (int i = 1; i <= config.symbol10_alphabets; ++i) out.push_back(make_symbol(10, i, seed));
    for (int i = 1; i <= config.symbol15_alphabets; ++i) out.push_back(make_symbol(15, i, seed));
  }
  return out;
}

std::vector<LetterItemSpec> plan_suite(const LetterSuiteConfig& config, std::uint64_t seed) {
  config.validate();
  std::vector<LetterItemSpec> plan;
  const Rng root = Rng(seed).split("letterstring");

  auto add = [&](const Alphabet& a, Transformation t, GeneralizationSet gens, const std::string& section) {
    LetterItemSpec spec;
    spec.alphabet = a;
    spec.transformation = t;
    spec.generalizations = gens;
    spec.section = section;
    spec.ordinal = plan.size();
    spec.seed = root.split(section).split(static_cast<std::uint64_t>(plan.size())).state();
    plan.push_back(std::move(spec));
  };
  auto random_transformation = [](Rng& r) { return kAllTransformations[r.below(kAllTransformations.size())]; };

  for (int n : config.permuted_ns) {
    std::vector<Alphabet> family;
    for (int i = 1; i <= config.alphabets_per_family; ++i) {
      family.push_back(n == 0 ? Alphabet::standard() : make_permuted(n, i, seed));
    }
    for (int gens_count : config.gen_counts) {
      const std::string section = "n" + std::to_string(n) + ".g" + std::to_string(gens_count);
      Rng choice = root.split("choice").split(section);
      if (gens_count == 0) {
        for (const auto& a : family) {
          for (auto t : kAllTransformations) {
            for (int k = 0; k < config.problems_per_cell; ++k) add(a, t, {}, section);
          }
        }
      } else if (gens_count == 1 && n == 0) {
        // Unpermuted one-generalization items are balanced over transformations.
        const int total = config.alphabets_per_family * 6 * config.problems_per_cell;
        for (int j = 0; j < total; ++j) {
          const auto t = kAllTransformations[j % 6];
          const auto g = kAllGeneralizations[(j / 6) % 6];
          add(family[j % family.size()], t, {g}, section);
        }
      } else if (gens_count == 1) {
        for (const auto& a : family) {
          for (auto g : kAllGeneralizations) {
            for (int k = 0; k < config.problems_per_cell; ++k) add(a, random_transformation(choice), {g}, section);
          }
        }
      } else {
        for (const auto& a : family) {
          for (int k = 0; k < config.multi_gen_per_alphabet; ++k) {
            auto pool = std::vector<Generalization>(kAllGeneralizations.begin(), kAllGeneralizations.end());
            choice.shuffle(std::span<Generalization>(pool));
            GeneralizationSet gens;
            for (int m = 0; m < gens_count; ++m) gens.insert(pool[m]);
            add(a, random_transformation(choice), gens, section);
          }
        }
      }
    }
  }

  if (config.include_symbol) {
    const bool zero = std::find(config.gen_counts.begin(), config.gen_counts.end(), 0) != config.gen_counts.end();
    const bool one = std::find(config.gen_counts.begin(), config.gen_counts.end(), 1) != config.gen_counts.end();
    if (zero) {
      for (int i = 1; i <= config.symbol10_alphabets; ++i) {
        const auto a = make_symbol(10, i, seed);
        for (auto t : {Transformation::Successor, Transformation::Predecessor}) {
          for (int k = 0; k < config.problems_per_cell; ++k) add(a, t, {}, "symb.g0");
        }
      }
    }
    if (one) {
      Rng choice = root.split("choice").split("symb.g1");
      for (int i = 1; i <= config.symbol15_alphabets; ++i) {
        const auto a = make_symbol(15, i, seed);
        for (auto g : kAllGeneralizations) {
          for (int k = 0; k < config.problems_per_cell; ++k) add(a, random_transformation(choice), {g}, "symb.g1");
        }
      }
    }
  }
  return plan;
}

LetterStringProblem generate_item(const LetterItemSpec& spec, int attempt) {
  return generate_problem(spec.alphabet, spec.transformation, spec.generalizations,
                          Rng(spec.seed).split(static_cast<std::uint64_t>(attempt)));
}

void deduplicate(std::vector<LetterStringProblem>& problems, const std::vector<LetterItemSpec>& plan) {
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    int attempt = 0;
    while (seen.count(problems[i].id)) {
      if (++attempt > kMaxAttempts) throw Error(ErrorCode::Infeasible, "cannot find a distinct problem for " + plan[i].section);
      problems[i] = generate_item(plan[i], attempt);
    }
    seen.emplace(problems[i].id, i);
  }
}

std::vector<LetterStringProblem> build_suite(const LetterSuiteConfig& config, std::uint64_t seed) {
  const auto plan = plan_suite(config, seed);
  std::vector<LetterStringProblem> out;
  out.reserve(plan.size());
  for (const auto& spec : plan) out.push_back(generate_item(spec, 0));
  deduplicate(out, plan);
  return out;
}

}  // namespace analogy
