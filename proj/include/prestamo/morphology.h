#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "prestamo/lexicon.h"

namespace prestamo {

enum class Tense { Present, Preterite, Imperfect };
enum class Number { Singular, Plural };
enum class ConjugationClass { Ar, Er, Ir };

const char* tense_name(Tense t);
Tense tense_from_name(std::string_view name);
const char* number_name(Number n);
Number number_from_name(std::string_view name);

struct InflectedForm {
  std::string lemma;
  Tense tense;
  int person;  // 1..3
  Number number;
  std::string surface;
};

// (tense, person, number) -> replacement surface
using OverrideMap = std::map<std::tuple<Tense, int, Number>, std::string>;

struct VerbParadigm {
  ConjugationClass conjugation_class;
  std::string stem;
  OverrideMap overrides;
  bool orthographic_rules_applied = false;
};

VerbParadigm analyze_lemma(const std::string& lemma,
                           OverrideMap overrides = {});

// All 18 cells (present, preterite, imperfect x 1sg..3pl), in that order.
// Cells sharing a surface (e.g. -ar present and preterite 1pl) both appear;
// deduplication happens when surface sets are built.
std::vector<InflectedForm> inflect(const std::string& lemma,
                                   const OverrideMap& overrides = {});

// Sparse or full per-lemma cell tables loaded from TSV rows
// lemma <TAB> tense <TAB> person <TAB> number <TAB> surface.
class ConjugationTable {
 public:
  static ConjugationTable parse(std::istream& in);
  static ConjugationTable load(const std::string& path);

  bool contains(const std::string& lemma) const;
  std::vector<std::string> lemmas() const;
  const OverrideMap& cells(const std::string& lemma) const;
  OverrideMap overrides_for(const std::string& lemma) const;

  // Requires all 18 cells for the lemma.
  std::vector<InflectedForm> paradigm(const std::string& lemma) const;

 private:
  std::map<std::string, OverrideMap> cells_;
};

// Bundled tables compiled in from the TSV resources under data/.
const ConjugationTable& light_verb_table();
const ConjugationTable& content_verb_overrides();

std::vector<InflectedForm> conjugate_light_verb(const std::string& light_lemma);

struct LightPhrasePattern {
  std::string light_lemma;
  bool reflexive;
  std::vector<std::string> verb_forms;  // deduplicated conjugated surfaces
  std::vector<std::string> middles;
  bool determiner_optional;
  std::vector<std::string> determiner_forms;
  std::vector<std::string> noun_tokens;
};

struct SurfaceFormSet {
  std::set<std::string> integrated;
  std::vector<LightPhrasePattern> light;
};

struct ExpandedEntry {
  LexiconEntry entry;
  SurfaceFormSet surfaces;
};

struct ExpandedLexicon {
  WordClass word_class;
  std::vector<ExpandedEntry> entries;
};

// Marks each generated integrated surface listed in `exclusions` as excluded
// on its entry, so expansion drops it.
void attach_exclusions(Lexicon& lexicon, const std::set<std::string>& exclusions);

ExpandedLexicon expand_lexicon(const Lexicon& lexicon);

// Every phrase string the pattern accepts with no free tokens, e.g.
// "di un like" / "di una like" / "di like" for an optional determiner.
// Does not include the reflexive clitic prefix.
std::vector<std::string> enumerate_light_phrases(
    const LightPhrasePattern& pattern);

}  // namespace prestamo
