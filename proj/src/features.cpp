#include "prestamo/features.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "prestamo/error.h"
#include "prestamo/tokenizer.h"
#include "prestamo/utf8.h"

namespace prestamo {

const char* region_name(Region r) {
  switch (r) {
    case Region::UNK: return "UNK";
    case Region::LatinAmerica: return "LatinAmerica";
    case Region::Europe: return "Europe";
    case Region::US: return "US";
    default: return "Other";
  }
}

Region region_from_name(std::string_view name) {
  if (name == "UNK") return Region::UNK;
  if (name == "LatinAmerica") return Region::LatinAmerica;
  if (name == "Europe") return Region::Europe;
  if (name == "US") return Region::US;
  if (name == "Other") return Region::Other;
  throw Error(ErrorCode::MalformedRow, "unknown region \"" + std::string(name) + "\"");
}

const char* language_bin_name(LanguageBin b) {
  switch (b) {
    case LanguageBin::Low: return "low";
    case LanguageBin::Medium: return "medium";
    default: return "high";
  }
}

LanguageBin language_bin_from_name(std::string_view name) {
  if (name == "low") return LanguageBin::Low;
  if (name == "medium") return LanguageBin::Medium;
  if (name == "high") return LanguageBin::High;
  throw Error(ErrorCode::MalformedRow,
              "unknown language bin \"" + std::string(name) + "\"");
}

PostFeatures extract_post_features(const Post& post, const MatchRecord& match) {
  if (match.post_id != post.id) {
    throw Error(ErrorCode::SpanMismatch,
                "match belongs to post " + match.post_id + ", not " + post.id);
  }
  std::size_t text_length = utf8::codepoint_count(post.text);
  if (match.span_begin > match.span_end || match.span_end > text_length) {
    throw Error(ErrorCode::SpanMismatch,
                "match span exceeds post " + post.id);
  }

  PostFeatures features;
  for (const Token& token : tokenize(post.text)) {
    if (token.kind == TokenKind::Hashtag) features.has_hashtag = true;
    if (token.kind == TokenKind::Mention) features.has_mention = true;
  }
  features.post_length =
      static_cast<long>(text_length - (match.span_end - match.span_begin));
  return features;
}

LanguageBin bin_language(double spanish_rate) {
  double rounded = std::round(spanish_rate * 1e6) / 1e6;
  if (rounded >= 1.0) return LanguageBin::High;
  if (rounded > 0.5) return LanguageBin::Medium;
  return LanguageBin::Low;
}

Gazetteer Gazetteer::parse(std::istream& in) {
  Gazetteer gaz;
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, Region> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCode::MalformedRow,
                  "gazetteer line " + std::to_string(line_no) + " needs 2 columns");
    }
    std::string keyword =
        utf8::fold_diacritics(utf8::to_lower(utf8::compose_spanish(line.substr(0, tab))));
    Region region = region_from_name(line.substr(tab + 1));

    Key key;
    key.region = region;
    key.codepoints = utf8::codepoint_count(keyword);
    for (const Token& t : tokenize(keyword)) {
      if (t.kind == TokenKind::Word) key.tokens.push_back(t.surface);
    }
    if (key.tokens.empty()) {
      throw Error(ErrorCode::MalformedRow,
                  "gazetteer line " + std::to_string(line_no) + " has no keyword");
    }

    std::string canonical;
    for (const std::string& t : key.tokens) {
      if (!canonical.empty()) canonical.push_back(' ');
      canonical += t;
    }
    auto [it, inserted] = seen.emplace(canonical, region);
    if (!inserted) {
      if (it->second != region) {
        throw Error(ErrorCode::AmbiguousGazetteer,
                    "keyword \"" + canonical + "\" maps to two regions");
      }
      continue;  // exact duplicate
    }
    gaz.keys_.push_back(std::move(key));
  }

  std::sort(gaz.keys_.begin(), gaz.keys_.end(), [](const Key& a, const Key& b) {
    if (a.tokens.size() != b.tokens.size()) return a.tokens.size() > b.tokens.size();
    if (a.codepoints != b.codepoints) return a.codepoints > b.codepoints;
    return a.tokens < b.tokens;
  });
  return gaz;
}

Gazetteer Gazetteer::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::Unreadable, "cannot open gazetteer " + path);
  }
  return parse(in);
}

Region Gazetteer::infer(const std::optional<std::string>& profile_location) const {
  if (!profile_location) return Region::UNK;

  std::vector<std::string> words;
  for (const Token& t : tokenize(*profile_location)) {
    if (t.kind == TokenKind::Word) {
      words.push_back(utf8::fold_diacritics(t.surface));
    }
  }
  if (words.empty()) return Region::UNK;

  for (const Key& key : keys_) {
    if (key.tokens.size() > words.size()) continue;
    for (std::size_t i = 0; i + key.tokens.size() <= words.size(); ++i) {
      if (std::equal(key.tokens.begin(), key.tokens.end(), words.begin() + i)) {
        return key.region;
      }
    }
  }
  return Region::UNK;
}

AuthorProfile extract_author_profile(const AuthorTimeline& timeline,
                                     const LanguageModel& model,
                                     const Matcher& native_matcher,
                                     const Gazetteer& gazetteer) {
  AuthorProfile profile;
  profile.author_id = timeline.author_id;
  if (timeline.posts.empty()) return profile;

  double n = static_cast<double>(timeline.posts.size());
  profile.activity = n / std::max(timeline.span_days(), 1.0);

  std::size_t retweets = 0;
  std::size_t with_url = 0;
  std::uint64_t native_integrated = 0;
  std::uint64_t native_total = 0;
  std::optional<std::string> location;
  for (const Post& post : timeline.posts) {
    if (post.is_retweet) ++retweets;
    std::vector<Token> tokens = tokenize(post.text);
    if (std::any_of(tokens.begin(), tokens.end(), [](const Token& t) {
          return t.kind == TokenKind::Url;
        })) {
      ++with_url;
    }
    if (!post.is_retweet) {
      for (const MatchRecord& r :
           native_matcher.match_tokens(post.id, post.author_id, tokens)) {
        if (r.word_class != WordClass::Native) continue;
        ++native_total;
        if (r.variant == Variant::Integrated) ++native_integrated;
      }
    }
    if (post.profile_location && !post.profile_location->empty()) {
      location = post.profile_location;  // latest wins; posts are chronological
    }
  }

  profile.rt_share = retweets / n;
  profile.url_share = with_url / n;
  profile.region = gazetteer.infer(location);
  profile.spanish_rate = spanish_rate(model, timeline);
  if (profile.spanish_rate) {
    profile.language_bin = bin_language(*profile.spanish_rate);
  }
  if (native_total > 0) {
    profile.native_integration_rate =
        static_cast<double>(native_integrated) / static_cast<double>(native_total);
  }
  return profile;
}

std::pair<double, double> mean_sd(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  // Summation noise must not turn a constant sample into a nonzero sd.
  if (std::all_of(values.begin(), values.end(),
                  [&](double v) { return v == values.front(); })) {
    return {values.front(), 0.0};
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  return {mean, std::sqrt(var)};
}

std::vector<ScaledVariable> log_z_scale(const std::string& name,
                                        const std::vector<double>& raws) {
  std::vector<double> logs;
  logs.reserve(raws.size());
  for (double r : raws) logs.push_back(std::log1p(r));
  auto [mean, sd] = mean_sd(logs);

  std::vector<ScaledVariable> out;
  out.reserve(raws.size());
  for (std::size_t i = 0; i < raws.size(); ++i) {
    ScaledVariable v;
    v.name = name;
    v.raw = raws[i];
    v.log_value = logs[i];
    v.z_value = sd > 0.0 ? (logs[i] - mean) / sd : 0.0;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace prestamo
