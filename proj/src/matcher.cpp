#include "prestamo/matcher.h"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include "prestamo/error.h"
#include "prestamo/utf8.h"

namespace prestamo {

namespace {

struct Slot {
  bool is_determiner = false;
  std::string literal;  // literal middles and noun tokens
};

std::vector<Slot> pattern_slots(const LightPhrasePattern& pattern) {
  std::vector<Slot> slots;
  for (const std::string& m : pattern.middles) slots.push_back({false, m});
  if (!pattern.determiner_forms.empty()) slots.push_back({true, {}});
  for (const std::string& n : pattern.noun_tokens) slots.push_back({false, n});
  return slots;
}

}  // namespace

const char* variant_name(Variant v) {
  return v == Variant::Integrated ? "integrated" : "light";
}

Variant variant_from_name(std::string_view name) {
  if (name == "integrated") return Variant::Integrated;
  if (name == "light") return Variant::Light;
  throw Error(ErrorCode::MalformedRow, "unknown variant \"" + std::string(name) + "\"");
}

bool is_reflexive_clitic(std::string_view surface) {
  return surface == "me" || surface == "te" || surface == "se" ||
         surface == "nos" || surface == "os";
}

Matcher::Matcher(std::vector<ExpandedLexicon> lexicons, MatchOptions options)
    : lexicons_(std::move(lexicons)), options_(options) {
  for (std::size_t li = 0; li < lexicons_.size(); ++li) {
    const ExpandedLexicon& lex = lexicons_[li];
    for (std::size_t ei = 0; ei < lex.entries.size(); ++ei) {
      const ExpandedEntry& entry = lex.entries[ei];
      for (const std::string& surface : entry.surfaces.integrated) {
        std::vector<EntryRef>& refs = integrated_index_[normalize(surface)];
        if (refs.empty() || refs.back().lexicon != li || refs.back().entry != ei) {
          refs.push_back({li, ei});
        }
      }
      for (std::size_t pi = 0; pi < entry.surfaces.light.size(); ++pi) {
        for (const std::string& form : entry.surfaces.light[pi].verb_forms) {
          std::vector<PatternRef>& refs = verb_form_index_[normalize(form)];
          if (refs.empty() || refs.back().entry.lexicon != li ||
              refs.back().entry.entry != ei || refs.back().pattern != pi) {
            refs.push_back({{li, ei}, pi});
          }
        }
      }
    }
  }
}

std::string Matcher::normalize(const std::string& surface) const {
  return options_.fold_diacritics ? utf8::fold_diacritics(surface) : surface;
}

const LexiconEntry& Matcher::entry_at(EntryRef ref) const {
  return lexicons_[ref.lexicon].entries[ref.entry].entry;
}

void Matcher::light_candidates(const std::vector<Token>& tokens,
                               const std::vector<std::string>& normalized,
                               std::size_t verb_index, const PatternRef& ref,
                               std::vector<Candidate>* out) const {
  const LightPhrasePattern& pattern =
      lexicons_[ref.entry.lexicon].entries[ref.entry.entry].surfaces.light[ref.pattern];
  std::vector<Slot> slots = pattern_slots(pattern);

  std::size_t begin = verb_index;
  if (pattern.reflexive && verb_index > 0 &&
      tokens[verb_index - 1].kind == TokenKind::Word &&
      is_reflexive_clitic(normalized[verb_index - 1])) {
    begin = verb_index - 1;
  }

  auto slot_matches = [&](const Slot& slot, const std::string& norm) {
    if (slot.is_determiner) {
      for (const std::string& form : pattern.determiner_forms) {
        if (normalize(form) == norm) return true;
      }
      return false;
    }
    return normalize(slot.literal) == norm;
  };

  // Depth-first walk over slot/token alignments; `budget` counts the free
  // word tokens the --window option lets through.
  std::function<void(std::size_t, std::size_t, int)> walk =
      [&](std::size_t s, std::size_t j, int budget) {
        if (s == slots.size()) {
          out->push_back({begin, j, ref.entry, Variant::Light});
          return;
        }
        if (slots[s].is_determiner && pattern.determiner_optional) {
          walk(s + 1, j, budget);
        }
        if (j >= tokens.size() || tokens[j].kind != TokenKind::Word) return;
        if (slot_matches(slots[s], normalized[j])) walk(s + 1, j + 1, budget);
        if (budget > 0) walk(s, j + 1, budget - 1);
      };
  walk(0, verb_index + 1, options_.window);
}

std::vector<MatchRecord> Matcher::resolve(const std::string& post_id,
                                          const std::string& author_id,
                                          const std::vector<Token>& tokens,
                                          std::vector<Candidate> candidates) const {
  auto span_length = [&](const Candidate& c) {
    return tokens[c.tok_end - 1].end - tokens[c.tok_begin].begin;
  };
  std::sort(candidates.begin(), candidates.end(),
            [&](const Candidate& a, const Candidate& b) {
              std::size_t la = span_length(a), lb = span_length(b);
              if (la != lb) return la > lb;
              if (a.tok_begin != b.tok_begin) return a.tok_begin < b.tok_begin;
              if (a.tok_end != b.tok_end) return a.tok_end < b.tok_end;
              if (a.variant != b.variant) return a.variant == Variant::Integrated;
              if (a.entry.lexicon != b.entry.lexicon) {
                return a.entry.lexicon < b.entry.lexicon;
              }
              return a.entry.entry < b.entry.entry;
            });
  candidates.erase(std::unique(candidates.begin(), candidates.end(),
                               [](const Candidate& a, const Candidate& b) {
                                 return a.tok_begin == b.tok_begin &&
                                        a.tok_end == b.tok_end &&
                                        a.variant == b.variant &&
                                        a.entry.lexicon == b.entry.lexicon &&
                                        a.entry.entry == b.entry.entry;
                               }),
                   candidates.end());

  std::vector<std::pair<std::size_t, std::size_t>> taken;
  std::vector<const Candidate*> chosen;
  for (const Candidate& c : candidates) {
    bool overlaps = false;
    for (const auto& [b, e] : taken) {
      if (b < c.tok_end && c.tok_begin < e) {
        overlaps = true;
        break;
      }
    }
    if (overlaps) continue;
    taken.emplace_back(c.tok_begin, c.tok_end);
    chosen.push_back(&c);
  }
  std::sort(chosen.begin(), chosen.end(),
            [](const Candidate* a, const Candidate* b) {
              return a->tok_begin < b->tok_begin;
            });

  std::vector<MatchRecord> records;
  records.reserve(chosen.size());
  for (const Candidate* c : chosen) {
    const LexiconEntry& entry = entry_at(c->entry);
    MatchRecord r;
    r.post_id = post_id;
    r.author_id = author_id;
    r.base = entry.base;
    r.word_class = entry.word_class;
    r.variant = c->variant;
    r.span_begin = tokens[c->tok_begin].begin;
    r.span_end = tokens[c->tok_end - 1].end;
    std::string surface;
    for (std::size_t i = c->tok_begin; i < c->tok_end; ++i) {
      if (!surface.empty()) surface.push_back(' ');
      surface += tokens[i].surface;
    }
    r.matched_surface = std::move(surface);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<MatchRecord> Matcher::match_tokens(
    const std::string& post_id, const std::string& author_id,
    const std::vector<Token>& tokens) const {
  std::vector<std::string> normalized(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].kind == TokenKind::Word) normalized[i] = normalize(tokens[i].surface);
  }

  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].kind != TokenKind::Word) continue;

    auto integrated = integrated_index_.find(normalized[i]);
    if (integrated != integrated_index_.end()) {
      for (const EntryRef& ref : integrated->second) {
        std::size_t begin = i;
        if (entry_at(ref).reflexive && i > 0 &&
            tokens[i - 1].kind == TokenKind::Word &&
            is_reflexive_clitic(normalized[i - 1])) {
          begin = i - 1;
        }
        candidates.push_back({begin, i + 1, ref, Variant::Integrated});
      }
    }

    auto verbs = verb_form_index_.find(normalized[i]);
    if (verbs != verb_form_index_.end()) {
      for (const PatternRef& ref : verbs->second) {
        light_candidates(tokens, normalized, i, ref, &candidates);
      }
    }
  }
  return resolve(post_id, author_id, tokens, std::move(candidates));
}

std::vector<MatchRecord> Matcher::match_text(const std::string& post_id,
                                             const std::string& author_id,
                                             const std::string& text) const {
  return match_tokens(post_id, author_id, tokenize(text));
}

std::vector<MatchRecord> Matcher::match_post(const Post& post) const {
  if (post.is_retweet) {
    throw Error(ErrorCode::RetweetRejected,
                "post " + post.id + " is a retweet and cannot be matched");
  }
  return match_text(post.id, post.author_id, post.text);
}

void add_to_summary(CorpusSummary& summary, const MatchRecord& record) {
  SummaryCounts& counts = summary[{record.word_class, record.base}];
  if (record.variant == Variant::Integrated) {
    ++counts.integrated;
  } else {
    ++counts.light;
  }
}

void merge_summaries(CorpusSummary& into, const CorpusSummary& from) {
  for (const auto& [key, counts] : from) {
    SummaryCounts& dst = into[key];
    dst.integrated += counts.integrated;
    dst.light += counts.light;
  }
}

std::string serialize_summary(const CorpusSummary& summary) {
  std::ostringstream out;
  out << "# base\tclass\tintegrated_count\tlight_count\n";
  for (const auto& [key, counts] : summary) {
    out << key.second << '\t' << word_class_name(key.first) << '\t'
        << counts.integrated << '\t' << counts.light << '\n';
  }
  return out.str();
}

CorpusSummary parse_summary(std::istream& in) {
  CorpusSummary summary;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string base, wc, integrated, light;
    if (!std::getline(row, base, '\t') || !std::getline(row, wc, '\t') ||
        !std::getline(row, integrated, '\t') || !std::getline(row, light)) {
      throw Error(ErrorCode::MalformedRow,
                  "summary line " + std::to_string(line_no) + " needs 4 columns");
    }
    SummaryCounts counts{std::stoull(integrated), std::stoull(light)};
    auto [_, inserted] =
        summary.emplace(std::make_pair(word_class_from_name(wc), base), counts);
    if (!inserted) {
      throw Error(ErrorCode::MalformedRow,
                  "summary line " + std::to_string(line_no) + " repeats a base");
    }
  }
  return summary;
}

CorpusSummary load_summary(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::Unreadable, "cannot open summary " + path);
  }
  return parse_summary(in);
}

}  // namespace prestamo
