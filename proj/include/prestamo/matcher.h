#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "prestamo/ingest.h"
#include "prestamo/morphology.h"
#include "prestamo/tokenizer.h"

namespace prestamo {

enum class Variant { Integrated, Light };

const char* variant_name(Variant v);
Variant variant_from_name(std::string_view name);

struct MatchRecord {
  std::string post_id;
  std::string author_id;
  std::string base;
  WordClass word_class = WordClass::Loanword;
  Variant variant = Variant::Integrated;
  std::size_t span_begin = 0;  // codepoint offsets into the post text
  std::size_t span_end = 0;
  std::string matched_surface;  // matched tokens joined with single spaces
};

struct MatchOptions {
  bool fold_diacritics = false;
  int window = 0;  // free word tokens allowed inside a light phrase
};

// Detects integrated and light-verb occurrences over tokenized posts.
// Overlapping candidates are resolved longest span first, then leftmost,
// then integrated before light, then by base; losers are dropped.
class Matcher {
 public:
  explicit Matcher(std::vector<ExpandedLexicon> lexicons,
                   MatchOptions options = {});

  std::vector<MatchRecord> match_post(const Post& post) const;
  std::vector<MatchRecord> match_text(const std::string& post_id,
                                      const std::string& author_id,
                                      const std::string& text) const;
  std::vector<MatchRecord> match_tokens(const std::string& post_id,
                                        const std::string& author_id,
                                        const std::vector<Token>& tokens) const;

  const std::vector<ExpandedLexicon>& lexicons() const { return lexicons_; }
  const MatchOptions& options() const { return options_; }

 private:
  struct EntryRef {
    std::size_t lexicon;
    std::size_t entry;
  };
  struct PatternRef {
    EntryRef entry;
    std::size_t pattern;
  };
  struct Candidate {
    std::size_t tok_begin;
    std::size_t tok_end;
    EntryRef entry;
    Variant variant;
  };

  std::string normalize(const std::string& surface) const;
  const LexiconEntry& entry_at(EntryRef ref) const;
  void light_candidates(const std::vector<Token>& tokens,
                        const std::vector<std::string>& normalized,
                        std::size_t verb_index, const PatternRef& ref,
                        std::vector<Candidate>* out) const;
  std::vector<MatchRecord> resolve(const std::string& post_id,
                                   const std::string& author_id,
                                   const std::vector<Token>& tokens,
                                   std::vector<Candidate> candidates) const;

  std::vector<ExpandedLexicon> lexicons_;
  MatchOptions options_;
  std::unordered_map<std::string, std::vector<EntryRef>> integrated_index_;
  std::unordered_map<std::string, std::vector<PatternRef>> verb_form_index_;
};

bool is_reflexive_clitic(std::string_view surface);

struct SummaryCounts {
  std::uint64_t integrated = 0;
  std::uint64_t light = 0;

  bool operator==(const SummaryCounts&) const = default;
};

// Keyed by (word class, base).
using CorpusSummary = std::map<std::pair<WordClass, std::string>, SummaryCounts>;

void add_to_summary(CorpusSummary& summary, const MatchRecord& record);
void merge_summaries(CorpusSummary& into, const CorpusSummary& from);

std::string serialize_summary(const CorpusSummary& summary);
CorpusSummary parse_summary(std::istream& in);
CorpusSummary load_summary(const std::string& path);

}  // namespace prestamo
