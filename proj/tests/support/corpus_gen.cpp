#include "support/corpus_gen.h"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "prestamo/error.h"
#include "prestamo/lexicon.h"

namespace testsupport {

using namespace prestamo;

std::vector<ExpandedLexicon> load_shipped_lexicons(const std::string& data_dir) {
  Lexicon loan = load_lexicon(data_dir + "/loanword_pairs.tsv", WordClass::Loanword);
  Lexicon native = load_lexicon(data_dir + "/native_pairs.tsv", WordClass::Native);
  std::set<std::string> exclusions = load_exclusions(data_dir + "/exclusions.txt");
  attach_exclusions(loan, exclusions);
  attach_exclusions(native, exclusions);
  std::vector<ExpandedLexicon> out;
  out.push_back(expand_lexicon(loan));
  out.push_back(expand_lexicon(native));
  return out;
}

namespace {

using Rng = std::mt19937_64;

std::size_t pick(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

bool chance(Rng& rng, double p) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

// Deliberately collision-prone: clitics, determiners, bare light verb forms,
// bare phrase nouns, plus ordinary filler.
const std::vector<std::string>& filler_pool() {
  static const std::vector<std::string> pool = {
      "hoy",   "luego", "pronto", "bueno", "claro",  "jajaja", "q",
      "más",   "días",  "año",    "gente", "cosa",   "un",     "una",
      "el",    "la",    "se",     "me",    "te",     "dio",    "hace",
      "hizo",  "tiene", "puso",   "echó",  "like",   "tweet",  "chat",
      "video", "no",    "si",     "ya",    "pero",   "con",    "sin",
      "mucho", "poco",  "ayer",   "mañana"};
  return pool;
}

std::string decompose_accents(const std::string& text) {
  static const std::vector<std::pair<std::string, std::string>> table = {
      {"á", "á"}, {"é", "é"}, {"í", "í"},
      {"ó", "ó"}, {"ú", "ú"}, {"ñ", "ñ"},
      {"ü", "ü"}};
  std::string out = text;
  for (const auto& [composed, decomposed] : table) {
    std::size_t at = 0;
    while ((at = out.find(composed, at)) != std::string::npos) {
      out.replace(at, composed.size(), decomposed);
      at += decomposed.size();
    }
  }
  return out;
}

std::string random_case(Rng& rng, const std::string& text) {
  if (chance(rng, 0.7)) return text;
  std::string out = text;
  if (chance(rng, 0.5)) {
    for (char& c : out) {
      if (static_cast<unsigned char>(c) < 0x80) {
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      }
    }
  } else if (static_cast<unsigned char>(out[0]) < 0x80) {
    out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  }
  return out;
}

struct PlantSource {
  std::vector<std::string> integrated;
  std::vector<const LightPhrasePattern*> patterns;
};

PlantSource collect_plants(const std::vector<ExpandedLexicon>& lexicons) {
  PlantSource out;
  for (const ExpandedLexicon& lexicon : lexicons) {
    for (const ExpandedEntry& entry : lexicon.entries) {
      for (const std::string& surface : entry.surfaces.integrated) {
        out.integrated.push_back(surface);
      }
      for (const LightPhrasePattern& pattern : entry.surfaces.light) {
        out.patterns.push_back(&pattern);
      }
    }
  }
  return out;
}

std::string render_phrase(Rng& rng, const LightPhrasePattern& pattern,
                          bool break_it) {
  std::vector<std::string> tokens;
  if (pattern.reflexive && chance(rng, 0.5)) {
    static const std::vector<std::string> clitics = {"me", "te", "se", "nos", "os"};
    tokens.push_back(clitics[pick(rng, clitics.size())]);
  }
  tokens.push_back(pattern.verb_forms[pick(rng, pattern.verb_forms.size())]);
  for (const std::string& middle : pattern.middles) tokens.push_back(middle);
  bool want_det = !pattern.determiner_forms.empty() &&
                  (!pattern.determiner_optional || chance(rng, 0.5));
  if (want_det) {
    tokens.push_back(
        pattern.determiner_forms[pick(rng, pattern.determiner_forms.size())]);
  }
  for (const std::string& noun : pattern.noun_tokens) tokens.push_back(noun);

  if (break_it) {
    if (chance(rng, 0.5) && tokens.size() > 1) {
      tokens.pop_back();
    } else {
      const std::vector<std::string>& pool = filler_pool();
      tokens.insert(tokens.begin() + 1, pool[pick(rng, pool.size())]);
    }
  }

  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += random_case(rng, tokens[i]);
  }
  return out;
}

std::string random_text(Rng& rng, const PlantSource& plants) {
  std::vector<std::string> segments;
  std::size_t n = 2 + pick(rng, 9);
  for (std::size_t i = 0; i < n; ++i) {
    double roll = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    if (roll < 0.18) {
      std::string surface = plants.integrated[pick(rng, plants.integrated.size())];
      if (chance(rng, 0.15)) surface = decompose_accents(surface);
      segments.push_back(random_case(rng, surface));
    } else if (roll < 0.30) {
      const LightPhrasePattern& pattern =
          *plants.patterns[pick(rng, plants.patterns.size())];
      segments.push_back(render_phrase(rng, pattern, chance(rng, 0.25)));
    } else if (roll < 0.36) {
      static const std::vector<std::string> noise = {
          "#veranito", "#LunesDeCitas", "@marta_22", "@el_tizon",
          "https://t.co/a1b2c3", "http://ej.mp/xyz", "!!", "...", "¿?", "♥"};
      segments.push_back(noise[pick(rng, noise.size())]);
    } else {
      const std::vector<std::string>& pool = filler_pool();
      segments.push_back(pool[pick(rng, pool.size())]);
    }
  }
  std::string text;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (i > 0) text.push_back(chance(rng, 0.06) ? ',' : ' ');
    text += segments[i];
  }
  if (chance(rng, 0.2)) text.push_back('!');
  return text;
}

}  // namespace

std::vector<Post> random_posts(const std::vector<ExpandedLexicon>& lexicons,
                               std::uint64_t seed, std::size_t count) {
  Rng rng(seed);
  PlantSource plants = collect_plants(lexicons);
  if (plants.integrated.empty() || plants.patterns.empty()) {
    throw std::logic_error("lexicons expanded to nothing");
  }
  std::vector<Post> posts;
  posts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Post post;
    post.id = "p" + std::to_string(i);
    post.author_id = "u" + std::to_string(i % 53);
    post.timestamp = 1650000000 + static_cast<std::int64_t>(i) * 37;
    post.text = random_text(rng, plants);
    posts.push_back(std::move(post));
  }
  return posts;
}

namespace {

Post planted_post(const std::string& id_prefix, std::size_t index,
                  const std::string& payload) {
  Post post;
  post.id = id_prefix + std::to_string(index);
  post.author_id = "gen_" + std::to_string(index % 17);
  post.timestamp = 1650000000 + static_cast<std::int64_t>(index) * 61;
  post.text = "hoy " + payload + " entonces";
  return post;
}

}  // namespace

TwoCorpusFixture build_two_corpus_fixture(
    const std::vector<ExpandedLexicon>& lexicons) {
  struct Usable {
    std::string base;
    std::string integrated;
    std::string phrase;
  };
  std::vector<Usable> usable;
  for (const ExpandedLexicon& lexicon : lexicons) {
    if (lexicon.word_class != WordClass::Loanword) continue;
    for (const ExpandedEntry& entry : lexicon.entries) {
      if (entry.surfaces.integrated.empty() || entry.surfaces.light.empty()) {
        continue;
      }
      std::vector<std::string> phrases =
          enumerate_light_phrases(entry.surfaces.light.front());
      if (phrases.empty()) continue;
      usable.push_back({entry.entry.base, *entry.surfaces.integrated.begin(),
                        phrases.front()});
      if (usable.size() == 20) break;
    }
  }
  if (usable.size() != 20) {
    throw std::logic_error("need 20 loanword entries with both forms");
  }

  TwoCorpusFixture fixture;
  std::size_t index_a = 0, index_b = 0;
  for (std::size_t w = 0; w < usable.size(); ++w) {
    PlantedWord word;
    word.base = usable[w].base;
    if (w < 10) {
      word.integrated_a = 9;
      word.light_a = 1;
      word.integrated_b = 8;
      word.light_b = 2;
    } else {
      word.integrated_a = 23;
      word.light_a = 2;
      word.integrated_b = 21;
      word.light_b = 4;
    }
    for (std::uint64_t i = 0; i < word.integrated_a; ++i) {
      fixture.corpus_a.push_back(planted_post("a", index_a++, usable[w].integrated));
    }
    for (std::uint64_t i = 0; i < word.light_a; ++i) {
      fixture.corpus_a.push_back(planted_post("a", index_a++, usable[w].phrase));
    }
    for (std::uint64_t i = 0; i < word.integrated_b; ++i) {
      fixture.corpus_b.push_back(planted_post("b", index_b++, usable[w].integrated));
    }
    for (std::uint64_t i = 0; i < word.light_b; ++i) {
      fixture.corpus_b.push_back(planted_post("b", index_b++, usable[w].phrase));
    }
    fixture.mean_rate_a += static_cast<double>(word.integrated_a) /
                           static_cast<double>(word.integrated_a + word.light_a);
    fixture.mean_rate_b += static_cast<double>(word.integrated_b) /
                           static_cast<double>(word.integrated_b + word.light_b);
    fixture.words.push_back(word);
  }
  fixture.mean_rate_a /= static_cast<double>(fixture.words.size());
  fixture.mean_rate_b /= static_cast<double>(fixture.words.size());
  return fixture;
}

PlantedRegression build_planted_regression(std::uint64_t seed,
                                           std::size_t n_authors,
                                           std::size_t records_per_author,
                                           std::size_t n_words) {
  Rng rng(seed);
  PlantedRegression out;
  out.planted = {{"mention", -0.8},          {"hashtag", 0.6},
                 {"region:LatinAmerica", 0.9}, {"region:Europe", -0.9},
                 {"region:US", -0.4},          {"language:medium", 0.5},
                 {"language:high", 1.0}};
  const double intercept = 0.2;

  static const Region regions[] = {Region::UNK, Region::LatinAmerica,
                                   Region::Europe, Region::US};
  static const LanguageBin bins[] = {LanguageBin::Low, LanguageBin::Medium,
                                     LanguageBin::High};
  static const double bin_rates[] = {0.25, 0.75, 1.0};

  std::size_t record_index = 0;
  for (std::size_t a = 0; a < n_authors; ++a) {
    AuthorProfile profile;
    profile.author_id = "a" + std::to_string(a);
    profile.activity = 3.0;
    profile.rt_share = 0.1;
    profile.url_share = 0.2;
    profile.region = regions[pick(rng, 4)];
    std::size_t bin = pick(rng, 3);
    profile.language_bin = bins[bin];
    profile.spanish_rate = bin_rates[bin];
    profile.native_integration_rate = 0.5;

    double base_logit = intercept;
    if (profile.region == Region::LatinAmerica) base_logit += 0.9;
    if (profile.region == Region::Europe) base_logit -= 0.9;
    if (profile.region == Region::US) base_logit -= 0.4;
    if (*profile.language_bin == LanguageBin::Medium) base_logit += 0.5;
    if (*profile.language_bin == LanguageBin::High) base_logit += 1.0;

    for (std::size_t r = 0; r < records_per_author; ++r) {
      Observation obs;
      obs.features.has_mention = chance(rng, 0.5);
      obs.features.has_hashtag = chance(rng, 0.5);
      obs.features.post_length = 20;
      double logit = base_logit + (obs.features.has_mention ? -0.8 : 0.0) +
                     (obs.features.has_hashtag ? 0.6 : 0.0);
      double p = 1.0 / (1.0 + std::exp(-logit));
      obs.record.post_id = "p" + std::to_string(record_index);
      obs.record.author_id = profile.author_id;
      obs.record.base = "w" + std::to_string(record_index % n_words);
      obs.record.word_class = WordClass::Native;
      obs.record.variant = chance(rng, p) ? Variant::Integrated : Variant::Light;
      obs.record.span_begin = 0;
      obs.record.span_end = 5;
      obs.record.matched_surface = "x";
      out.observations.push_back(std::move(obs));
      ++record_index;
    }
    out.profiles.emplace(profile.author_id, std::move(profile));
  }
  return out;
}

std::uint64_t write_throughput_corpus(const std::string& path,
                                      std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out.is_open()) {
    throw Error(ErrorCode::Unreadable, "cannot write " + path);
  }
  static const std::vector<std::string> planted = {
      "tuitea",  "likeo",    "chateamos", "googleé", "posteó", "hackearon",
      "dio like", "hago chat", "puso un tweet", "echó una mirada"};
  const std::vector<std::string>& pool = filler_pool();

  std::uint64_t bytes = 0;
  std::string line;
  line.reserve(256);
  for (std::size_t i = 0; i < count; ++i) {
    line.clear();
    line += "{\"id\":\"t";
    line += std::to_string(i);
    line += "\",\"author_id\":\"u";
    line += std::to_string(i % 997);
    line += "\",\"timestamp\":";
    line += std::to_string(1600000000 + i);
    line += ",\"is_retweet\":";
    line += chance(rng, 0.05) ? "true" : "false";
    line += ",\"text\":\"";
    std::size_t words = 4 + pick(rng, 8);
    for (std::size_t k = 0; k < words; ++k) {
      if (k > 0) line.push_back(' ');
      if (k == 1 && chance(rng, 0.3)) {
        line += planted[pick(rng, planted.size())];
      } else {
        line += pool[pick(rng, pool.size())];
      }
    }
    line += "\"}\n";
    bytes += line.size();
    out << line;
  }
  out.flush();
  if (!out) throw Error(ErrorCode::Unreadable, "short write to " + path);
  return bytes;
}

std::size_t peak_rss_kb() {
  std::ifstream status("/proc/self/status");
  std::string line;
  while (std::getline(status, line)) {
    if (line.rfind("VmHWM:", 0) == 0) {
      std::istringstream in(line.substr(6));
      std::size_t kb = 0;
      in >> kb;
      return kb;
    }
  }
  return 0;
}

}  // namespace testsupport
