#include "prestamo/lexicon.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "prestamo/error.h"
#include "prestamo/utf8.h"

namespace prestamo {

namespace {

const std::set<std::string> kDeterminers = {"un", "una", "el",
                                            "la", "los", "las"};

// A parenthesized determiner licenses the listed form plus its gender variant.
std::vector<std::string> with_gender_variant(const std::string& det) {
  if (det == "un") return {"un", "una"};
  if (det == "una") return {"un", "una"};
  if (det == "el") return {"el", "la"};
  if (det == "la") return {"el", "la"};
  if (det == "los") return {"los", "las"};
  if (det == "las") return {"los", "las"};
  return {det};
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(text.substr(start));
      break;
    }
    out.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> split_spaces(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

bool has_infinitive_suffix(const std::string& lemma) {
  if (lemma.size() < 3) return false;
  std::string tail = lemma.substr(lemma.size() - 2);
  return tail == "ar" || tail == "er" || tail == "ir";
}

// "darse" -> ("dar", reflexive). Leaves ordinary infinitives untouched.
std::pair<std::string, bool> strip_reflexive(const std::string& lemma) {
  if (lemma.size() > 4 && lemma.compare(lemma.size() - 2, 2, "se") == 0) {
    std::string bare = lemma.substr(0, lemma.size() - 2);
    if (has_infinitive_suffix(bare)) return {bare, true};
  }
  return {lemma, false};
}

// Noun variants: "cast/casting" -> {cast, casting}; "pump(s)" -> {pump, pumps}.
std::vector<std::string> expand_noun_group(const std::string& group,
                                           const std::string& context) {
  std::vector<std::string> nouns;
  for (const std::string& alt : split(group, '/')) {
    std::size_t open = alt.find('(');
    if (open == std::string::npos) {
      if (alt.find(')') != std::string::npos) {
        throw Error(ErrorCode::MalformedRow,
                    "unbalanced parentheses in light spec: " + context);
      }
      nouns.push_back(alt);
      continue;
    }
    std::size_t close = alt.find(')', open);
    if (close == std::string::npos || close != alt.size() - 1) {
      throw Error(ErrorCode::MalformedRow,
                  "unbalanced parentheses in light spec: " + context);
    }
    std::string without = alt.substr(0, open);
    std::string with = without + alt.substr(open + 1, close - open - 1);
    nouns.push_back(without);
    nouns.push_back(with);
  }
  return nouns;
}

std::vector<LightVerbTemplate> parse_light_spec(const std::string& spec) {
  std::vector<std::string> groups = split_spaces(spec);
  if (groups.size() < 2) {
    throw Error(ErrorCode::MalformedRow,
                "light spec needs a verb and a noun: \"" + spec + "\"");
  }

  std::vector<std::pair<std::string, bool>> verbs;  // (lemma, reflexive)
  for (const std::string& v : split(groups.front(), '/')) {
    auto [lemma, reflexive] = strip_reflexive(v);
    if (!has_infinitive_suffix(lemma)) {
      throw Error(ErrorCode::MalformedRow,
                  "light verb \"" + v + "\" is not an infinitive in \"" + spec + "\"");
    }
    verbs.emplace_back(lemma, reflexive);
  }

  // An optional trailing "(x)" that is not a determiner extends the noun,
  // as in "hacer hang (out)".
  std::size_t last = groups.size() - 1;
  std::string tail;
  if (groups[last].size() > 2 && groups[last].front() == '(' &&
      groups[last].back() == ')') {
    std::string inner = groups[last].substr(1, groups[last].size() - 2);
    if (!kDeterminers.count(inner)) {
      tail = inner;
      if (last < 2) {
        throw Error(ErrorCode::MalformedRow,
                    "light spec has no noun before tail: \"" + spec + "\"");
      }
      --last;
    }
  }

  std::vector<std::string> nouns = expand_noun_group(groups[last], spec);
  if (!tail.empty()) {
    std::vector<std::string> extended;
    for (const std::string& n : nouns) {
      extended.push_back(n);
      extended.push_back(n + " " + tail);
    }
    nouns = std::move(extended);
  }

  bool det_optional = false;
  std::vector<std::string> det_forms;
  std::vector<std::string> middles;
  for (std::size_t i = 1; i < last; ++i) {
    const std::string& g = groups[i];
    if (g.size() > 2 && g.front() == '(' && g.back() == ')') {
      std::string inner = g.substr(1, g.size() - 2);
      if (!kDeterminers.count(inner) || i != last - 1) {
        throw Error(ErrorCode::MalformedRow,
                    "unexpected parenthesized group \"" + g + "\" in \"" + spec + "\"");
      }
      det_optional = true;
      det_forms = with_gender_variant(inner);
    } else if (kDeterminers.count(g) && i == last - 1) {
      det_forms = {g};
    } else if (g.find('(') != std::string::npos ||
               g.find(')') != std::string::npos) {
      throw Error(ErrorCode::MalformedRow,
                  "unbalanced parentheses in light spec: \"" + spec + "\"");
    } else {
      middles.push_back(g);
    }
  }

  std::vector<LightVerbTemplate> templates;
  for (const auto& [lemma, reflexive] : verbs) {
    for (const std::string& noun : nouns) {
      LightVerbTemplate tpl;
      tpl.light_lemma = lemma;
      tpl.reflexive = reflexive;
      tpl.middles = middles;
      tpl.determiner_optional = det_optional;
      tpl.determiner_forms = det_forms;
      tpl.noun = noun;
      templates.push_back(std::move(tpl));
    }
  }
  return templates;
}

}  // namespace

const char* word_class_name(WordClass wc) {
  return wc == WordClass::Loanword ? "loanword" : "native";
}

WordClass word_class_from_name(std::string_view name) {
  if (name == "loanword") return WordClass::Loanword;
  if (name == "native") return WordClass::Native;
  throw Error(ErrorCode::MalformedRow,
              "unknown word class \"" + std::string(name) + "\"");
}

const char* reject_reason_name(RejectReason reason) {
  switch (reason) {
    case RejectReason::None: return "ok";
    case RejectReason::InSpanishDict: return "in_spanish_dict";
    case RejectReason::StemTooShort: return "stem_too_short";
  }
  return "ok";
}

Lexicon parse_lexicon(std::istream& in, WordClass word_class) {
  Lexicon lexicon;
  lexicon.word_class = word_class;
  std::set<std::string> seen_lemmas;
  std::set<std::string> seen_bases;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;

    std::vector<std::string> cols = split(line, '\t');
    if (cols.size() != 4) {
      throw Error(ErrorCode::MalformedRow,
                  "line " + std::to_string(line_no) + ": expected 4 columns, got " +
                      std::to_string(cols.size()));
    }

    LexiconEntry entry;
    entry.base = cols[0];
    entry.word_class = word_class_from_name(cols[1]);
    if (entry.word_class != word_class) {
      throw Error(ErrorCode::MalformedRow,
                  "line " + std::to_string(line_no) + ": word class \"" + cols[1] +
                      "\" does not match requested class");
    }
    std::string raw_lemma = utf8::to_lower(utf8::compose_spanish(cols[2]));
    auto [lemma, reflexive] = strip_reflexive(raw_lemma);
    if (!has_infinitive_suffix(lemma)) {
      throw Error(ErrorCode::MalformedRow,
                  "line " + std::to_string(line_no) + ": \"" + cols[2] +
                      "\" lacks an ar/er/ir infinitive suffix");
    }
    entry.integrated_lemma = lemma;
    entry.reflexive = reflexive;
    entry.raw_light_spec = cols[3];
    entry.light_templates = parse_light_spec(cols[3]);

    if (!seen_lemmas.insert(raw_lemma + "\t" + cols[1]).second) {
      throw Error(ErrorCode::DuplicateLemma,
                  "line " + std::to_string(line_no) + ": duplicate integrated lemma \"" +
                      cols[2] + "\"");
    }
    if (!seen_bases.insert(entry.base).second) {
      throw Error(ErrorCode::DuplicateLemma,
                  "line " + std::to_string(line_no) + ": duplicate base \"" +
                      entry.base + "\"");
    }
    lexicon.entries.push_back(std::move(entry));
  }
  return lexicon;
}

Lexicon load_lexicon(const std::string& path, WordClass word_class) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::Unreadable, "cannot open lexicon file " + path);
  }
  return parse_lexicon(in, word_class);
}

std::string serialize_lexicon(const Lexicon& lexicon) {
  std::ostringstream out;
  for (const LexiconEntry& e : lexicon.entries) {
    std::string lemma = e.integrated_lemma + (e.reflexive ? "se" : "");
    out << e.base << '\t' << word_class_name(e.word_class) << '\t' << lemma << '\t'
        << e.raw_light_spec << '\n';
  }
  return out.str();
}

std::set<std::string> load_exclusions(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::Unreadable, "cannot open exclusions file " + path);
  }
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    out.insert(utf8::to_lower(utf8::compose_spanish(line)));
  }
  return out;
}

std::unordered_set<std::string> load_wordlist(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::Unreadable, "cannot open wordlist " + path);
  }
  std::unordered_set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    out.insert(utf8::to_lower(line));
  }
  return out;
}

void CandidateScanner::add_token(std::string_view lowercase_word) {
  ++frequencies_[std::string(lowercase_word)];
}

void CandidateScanner::merge(const CandidateScanner& other) {
  for (const auto& [token, count] : other.frequencies_) {
    frequencies_[token] += count;
  }
}

std::vector<CandidateReport> CandidateScanner::finish(
    const std::unordered_set<std::string>& english_wordlist,
    const std::unordered_set<std::string>& spanish_wordlist,
    std::size_t min_stem_length) const {
  std::vector<CandidateReport> reports;
  for (const auto& [token, count] : frequencies_) {
    if (token.size() < 3 || token.compare(token.size() - 2, 2, "ar") != 0) continue;

    // First attempt strips -ar; the second strips -ear when applicable.
    std::vector<std::string> stems;
    stems.push_back(token.substr(0, token.size() - 2));
    if (token.size() >= 4 && token.compare(token.size() - 3, 3, "ear") == 0) {
      stems.push_back(token.substr(0, token.size() - 3));
    }

    std::string long_stem;
    std::string short_stem;
    for (const std::string& stem : stems) {
      if (stem.empty() || !english_wordlist.count(stem)) continue;
      if (utf8::codepoint_count(stem) >= min_stem_length) {
        if (long_stem.empty()) long_stem = stem;
      } else if (short_stem.empty()) {
        short_stem = stem;
      }
    }

    CandidateReport report;
    report.surface = token;
    report.frequency = count;
    if (!long_stem.empty()) {
      report.english_stem = long_stem;
      report.rejected_reason = spanish_wordlist.count(token)
                                   ? RejectReason::InSpanishDict
                                   : RejectReason::None;
    } else if (!short_stem.empty()) {
      report.english_stem = short_stem;
      report.rejected_reason = RejectReason::StemTooShort;
    } else {
      continue;
    }
    reports.push_back(std::move(report));
  }

  std::sort(reports.begin(), reports.end(),
            [](const CandidateReport& a, const CandidateReport& b) {
              if (a.frequency != b.frequency) return a.frequency > b.frequency;
              return a.surface < b.surface;
            });
  return reports;
}

std::vector<CandidateReport> discover_candidates(
    const std::vector<std::string>& tokens,
    const std::unordered_set<std::string>& english_wordlist,
    const std::unordered_set<std::string>& spanish_wordlist,
    std::size_t min_stem_length) {
  CandidateScanner scanner;
  for (const std::string& t : tokens) scanner.add_token(t);
  return scanner.finish(english_wordlist, spanish_wordlist, min_stem_length);
}

}  // namespace prestamo
