#include "prestamo/morphology.h"

#include <array>
#include <fstream>
#include <sstream>

#include "prestamo/error.h"
#include "prestamo/utf8.h"

namespace prestamo {

namespace detail {
const char* embedded_light_verb_tsv();
const char* embedded_override_tsv();
}  // namespace detail

namespace {

// Suffix tables indexed [tense][person-1 + 3*(number==pl)].
using SuffixTable = std::array<std::array<const char*, 6>, 3>;

const SuffixTable kArSuffixes = {{
    {"o", "as", "a", "amos", "áis", "an"},
    {"é", "aste", "ó", "amos", "asteis", "aron"},
    {"aba", "abas", "aba", "ábamos", "abais", "aban"},
}};
const SuffixTable kErSuffixes = {{
    {"o", "es", "e", "emos", "éis", "en"},
    {"í", "iste", "ió", "imos", "isteis", "ieron"},
    {"ía", "ías", "ía", "íamos", "íais", "ían"},
}};
const SuffixTable kIrSuffixes = {{
    {"o", "es", "e", "imos", "ís", "en"},
    {"í", "iste", "ió", "imos", "isteis", "ieron"},
    {"ía", "ías", "ía", "íamos", "íais", "ían"},
}};

const SuffixTable& suffixes_for(ConjugationClass c) {
  switch (c) {
    case ConjugationClass::Ar: return kArSuffixes;
    case ConjugationClass::Er: return kErSuffixes;
    default: return kIrSuffixes;
  }
}

bool suffix_starts_with_e_acute(const char* suffix) {
  std::string_view s(suffix);
  std::size_t i = 0;
  return utf8::decode(s, i) == 0x00E9;
}

std::string apply_orthography(const std::string& stem, bool* applied) {
  if (stem.empty()) return stem;
  char last = stem.back();
  std::string head = stem.substr(0, stem.size() - 1);
  if (last == 'c') {
    *applied = true;
    return head + "qu";
  }
  if (last == 'g') {
    *applied = true;
    return head + "gu";
  }
  if (last == 'z') {
    *applied = true;
    return head + "c";
  }
  return stem;
}

std::vector<std::string> split_tab(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  while (start <= line.size()) {
    std::size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cols;
}

}  // namespace

const char* tense_name(Tense t) {
  switch (t) {
    case Tense::Present: return "present";
    case Tense::Preterite: return "preterite";
    default: return "imperfect";
  }
}

Tense tense_from_name(std::string_view name) {
  if (name == "present") return Tense::Present;
  if (name == "preterite") return Tense::Preterite;
  if (name == "imperfect") return Tense::Imperfect;
  throw Error(ErrorCode::MalformedRow, "unknown tense \"" + std::string(name) + "\"");
}

const char* number_name(Number n) {
  return n == Number::Singular ? "sg" : "pl";
}

Number number_from_name(std::string_view name) {
  if (name == "sg") return Number::Singular;
  if (name == "pl") return Number::Plural;
  throw Error(ErrorCode::MalformedRow, "unknown number \"" + std::string(name) + "\"");
}

VerbParadigm analyze_lemma(const std::string& lemma, OverrideMap overrides) {
  std::string norm = utf8::to_lower(utf8::compose_spanish(lemma));
  if (norm.size() < 3) {
    throw Error(ErrorCode::NotAVerb, "\"" + lemma + "\" is too short to be an infinitive");
  }
  std::string tail = norm.substr(norm.size() - 2);
  VerbParadigm p;
  if (tail == "ar") {
    p.conjugation_class = ConjugationClass::Ar;
  } else if (tail == "er") {
    p.conjugation_class = ConjugationClass::Er;
  } else if (tail == "ir") {
    p.conjugation_class = ConjugationClass::Ir;
  } else {
    throw Error(ErrorCode::NotAVerb, "\"" + lemma + "\" lacks an ar/er/ir suffix");
  }
  p.stem = norm.substr(0, norm.size() - 2);
  p.overrides = std::move(overrides);
  return p;
}

std::vector<InflectedForm> inflect(const std::string& lemma,
                                   const OverrideMap& overrides) {
  VerbParadigm paradigm = analyze_lemma(lemma, overrides);
  const SuffixTable& table = suffixes_for(paradigm.conjugation_class);
  std::string norm = paradigm.stem;
  std::vector<InflectedForm> forms;
  forms.reserve(18);

  for (int t = 0; t < 3; ++t) {
    Tense tense = static_cast<Tense>(t);
    for (int cell = 0; cell < 6; ++cell) {
      int person = cell % 3 + 1;
      Number number = cell < 3 ? Number::Singular : Number::Plural;
      const char* suffix = table[t][cell];

      std::string surface;
      auto it = paradigm.overrides.find({tense, person, number});
      if (it != paradigm.overrides.end()) {
        surface = it->second;
      } else {
        std::string stem = paradigm.stem;
        if (suffix_starts_with_e_acute(suffix)) {
          stem = apply_orthography(stem, &paradigm.orthographic_rules_applied);
        }
        surface = stem + suffix;
      }
      forms.push_back({lemma, tense, person, number, std::move(surface)});
    }
  }
  return forms;
}

ConjugationTable ConjugationTable::parse(std::istream& in) {
  ConjugationTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;

    std::vector<std::string> cols = split_tab(line);
    if (cols.size() != 5) {
      throw Error(ErrorCode::MalformedRow,
                  "conjugation row " + std::to_string(line_no) + ": expected 5 columns");
    }
    Tense tense = tense_from_name(cols[1]);
    if (cols[2] != "1" && cols[2] != "2" && cols[2] != "3") {
      throw Error(ErrorCode::MalformedRow,
                  "conjugation row " + std::to_string(line_no) + ": bad person");
    }
    int person = cols[2][0] - '0';
    Number number = number_from_name(cols[3]);
    if (cols[4].empty()) {
      throw Error(ErrorCode::MalformedRow,
                  "conjugation row " + std::to_string(line_no) + ": empty surface");
    }
    auto [_, inserted] =
        table.cells_[cols[0]].emplace(std::make_tuple(tense, person, number), cols[4]);
    if (!inserted) {
      throw Error(ErrorCode::MalformedRow,
                  "conjugation row " + std::to_string(line_no) + ": duplicate cell");
    }
  }
  return table;
}

ConjugationTable ConjugationTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::Unreadable, "cannot open conjugation table " + path);
  }
  return parse(in);
}

bool ConjugationTable::contains(const std::string& lemma) const {
  return cells_.count(lemma) > 0;
}

std::vector<std::string> ConjugationTable::lemmas() const {
  std::vector<std::string> out;
  out.reserve(cells_.size());
  for (const auto& [lemma, _] : cells_) out.push_back(lemma);
  return out;
}

const OverrideMap& ConjugationTable::cells(const std::string& lemma) const {
  auto it = cells_.find(lemma);
  if (it == cells_.end()) {
    throw Error(ErrorCode::UnknownLightVerb, "no conjugation table entry for \"" + lemma + "\"");
  }
  return it->second;
}

OverrideMap ConjugationTable::overrides_for(const std::string& lemma) const {
  auto it = cells_.find(lemma);
  return it == cells_.end() ? OverrideMap{} : it->second;
}

std::vector<InflectedForm> ConjugationTable::paradigm(const std::string& lemma) const {
  const OverrideMap& map = cells(lemma);
  if (map.size() != 18) {
    throw Error(ErrorCode::MalformedRow,
                "incomplete paradigm for \"" + lemma + "\": " +
                    std::to_string(map.size()) + " of 18 cells");
  }
  std::vector<InflectedForm> forms;
  forms.reserve(18);
  for (int t = 0; t < 3; ++t) {
    Tense tense = static_cast<Tense>(t);
    for (int cell = 0; cell < 6; ++cell) {
      int person = cell % 3 + 1;
      Number number = cell < 3 ? Number::Singular : Number::Plural;
      forms.push_back({lemma, tense, person, number,
                       map.at(std::make_tuple(tense, person, number))});
    }
  }
  return forms;
}

const ConjugationTable& light_verb_table() {
  static const ConjugationTable table = [] {
    std::istringstream in(detail::embedded_light_verb_tsv());
    return ConjugationTable::parse(in);
  }();
  return table;
}

const ConjugationTable& content_verb_overrides() {
  static const ConjugationTable table = [] {
    std::istringstream in(detail::embedded_override_tsv());
    return ConjugationTable::parse(in);
  }();
  return table;
}

std::vector<InflectedForm> conjugate_light_verb(const std::string& light_lemma) {
  if (!light_verb_table().contains(light_lemma)) {
    throw Error(ErrorCode::UnknownLightVerb,
                "\"" + light_lemma + "\" is not in the light verb class");
  }
  return light_verb_table().paradigm(light_lemma);
}

void attach_exclusions(Lexicon& lexicon, const std::set<std::string>& exclusions) {
  if (exclusions.empty()) return;
  for (LexiconEntry& entry : lexicon.entries) {
    OverrideMap overrides = content_verb_overrides().overrides_for(entry.integrated_lemma);
    for (const InflectedForm& f : inflect(entry.integrated_lemma, overrides)) {
      if (exclusions.count(f.surface)) entry.excluded_surfaces.insert(f.surface);
    }
  }
}

ExpandedLexicon expand_lexicon(const Lexicon& lexicon) {
  ExpandedLexicon expanded;
  expanded.word_class = lexicon.word_class;
  expanded.entries.reserve(lexicon.entries.size());

  for (const LexiconEntry& entry : lexicon.entries) {
    ExpandedEntry out;
    out.entry = entry;

    OverrideMap overrides = content_verb_overrides().overrides_for(entry.integrated_lemma);
    for (const InflectedForm& f : inflect(entry.integrated_lemma, overrides)) {
      if (!entry.excluded_surfaces.count(f.surface)) {
        out.surfaces.integrated.insert(f.surface);
      }
    }
    if (out.surfaces.integrated.empty()) {
      throw Error(ErrorCode::EmptySurfaceSet,
                  "every integrated form of \"" + entry.integrated_lemma +
                      "\" is excluded");
    }

    for (const LightVerbTemplate& tpl : entry.light_templates) {
      LightPhrasePattern pattern;
      pattern.light_lemma = tpl.light_lemma;
      pattern.reflexive = tpl.reflexive;
      std::set<std::string> forms;
      for (const InflectedForm& f : conjugate_light_verb(tpl.light_lemma)) {
        forms.insert(f.surface);
      }
      pattern.verb_forms.assign(forms.begin(), forms.end());
      pattern.middles = tpl.middles;
      pattern.determiner_optional = tpl.determiner_optional;
      pattern.determiner_forms = tpl.determiner_forms;
      std::istringstream noun(tpl.noun);
      std::string tok;
      while (noun >> tok) pattern.noun_tokens.push_back(tok);
      out.surfaces.light.push_back(std::move(pattern));
    }
    expanded.entries.push_back(std::move(out));
  }
  return expanded;
}

std::vector<std::string> enumerate_light_phrases(
    const LightPhrasePattern& pattern) {
  std::string tail;
  for (const std::string& m : pattern.middles) tail += " " + m;
  std::string nouns;
  for (const std::string& n : pattern.noun_tokens) nouns += " " + n;

  std::vector<std::string> suffixes;
  if (pattern.determiner_forms.empty() || pattern.determiner_optional) {
    suffixes.push_back(tail + nouns);
  }
  for (const std::string& det : pattern.determiner_forms) {
    suffixes.push_back(tail + " " + det + nouns);
  }

  std::vector<std::string> phrases;
  for (const std::string& verb : pattern.verb_forms) {
    for (const std::string& suffix : suffixes) {
      phrases.push_back(verb + suffix);
    }
  }
  return phrases;
}

}  // namespace prestamo
