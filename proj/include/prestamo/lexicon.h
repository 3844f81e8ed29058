#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace prestamo {

enum class WordClass { Loanword, Native };

const char* word_class_name(WordClass wc);
WordClass word_class_from_name(std::string_view name);  // throws MalformedRow

// One light-verb realization, e.g. "dar (un) like" or "actuar como un stalker".
// Slash-separated verbs and noun variants in the data file expand to one
// template each, so `noun` is a fixed (possibly multi-word) string here.
struct LightVerbTemplate {
  std::string light_lemma;  // base infinitive; "darse" is stored as "dar"
  bool reflexive = false;
  std::vector<std::string> middles;  // literal tokens, e.g. {"como"}, {"en"}
  bool determiner_optional = false;
  std::vector<std::string> determiner_forms;  // empty = no determiner slot
  std::string noun;
};

struct LexiconEntry {
  std::string base;
  WordClass word_class = WordClass::Loanword;
  std::string integrated_lemma;  // reflexive "se" stripped ("ducharse" -> "duchar")
  bool reflexive = false;
  std::vector<LightVerbTemplate> light_templates;
  std::set<std::string> excluded_surfaces;
  std::string raw_light_spec;  // verbatim light_spec column, for serialization
};

struct Lexicon {
  WordClass word_class = WordClass::Loanword;
  std::vector<LexiconEntry> entries;
};

// Lexicon TSV: base <TAB> word_class <TAB> integrated_lemma <TAB> light_spec.
// Lines starting with '#' are comments. Throws MalformedRow / DuplicateLemma.
Lexicon load_lexicon(const std::string& path, WordClass word_class);
Lexicon parse_lexicon(std::istream& in, WordClass word_class);

std::string serialize_lexicon(const Lexicon& lexicon);

// One excluded surface form per line (e.g. "acceso").
std::set<std::string> load_exclusions(const std::string& path);

// One lowercase word per line.
std::unordered_set<std::string> load_wordlist(const std::string& path);

enum class RejectReason { None, InSpanishDict, StemTooShort };

const char* reject_reason_name(RejectReason reason);

struct CandidateReport {
  std::string surface;
  std::string english_stem;
  std::uint64_t frequency = 0;
  RejectReason rejected_reason = RejectReason::None;
};

// Accumulates token frequencies and mines loanword-verb candidates: tokens of
// shape ENGLISH_WORD + -(e)ar whose stem is a known English word of at least
// `min_stem_length` characters and which are not themselves Spanish words.
class CandidateScanner {
 public:
  void add_token(std::string_view lowercase_word);

  std::vector<CandidateReport> finish(
      const std::unordered_set<std::string>& english_wordlist,
      const std::unordered_set<std::string>& spanish_wordlist,
      std::size_t min_stem_length = 4) const;

  // Parallel partial scanners merge by frequency summation.
  void merge(const CandidateScanner& other);

 private:
  std::unordered_map<std::string, std::uint64_t> frequencies_;
};

std::vector<CandidateReport> discover_candidates(
    const std::vector<std::string>& tokens,
    const std::unordered_set<std::string>& english_wordlist,
    const std::unordered_set<std::string>& spanish_wordlist,
    std::size_t min_stem_length = 4);

}  // namespace prestamo
