#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "prestamo/ingest.h"
#include "prestamo/langid.h"
#include "prestamo/matcher.h"

namespace prestamo {

struct PostFeatures {
  bool has_hashtag = false;
  bool has_mention = false;
  long post_length = 0;  // codepoints, matched span excluded
};

enum class Region { UNK, LatinAmerica, Europe, US, Other };
enum class LanguageBin { Low, Medium, High };

const char* region_name(Region r);
Region region_from_name(std::string_view name);
const char* language_bin_name(LanguageBin b);
LanguageBin language_bin_from_name(std::string_view name);

struct AuthorProfile {
  std::string author_id;
  double activity = 0.0;  // mean posts per day
  double rt_share = 0.0;
  double url_share = 0.0;
  Region region = Region::UNK;
  std::optional<double> spanish_rate;
  std::optional<LanguageBin> language_bin;  // present iff spanish_rate is
  std::optional<double> native_integration_rate;
};

struct ScaledVariable {
  std::string name;
  double raw = 0.0;
  double log_value = 0.0;  // ln(raw + 1)
  double z_value = 0.0;    // against the sample mean/sd of log values
};

PostFeatures extract_post_features(const Post& post, const MatchRecord& match);

LanguageBin bin_language(double spanish_rate);

class Gazetteer {
 public:
  static Gazetteer parse(std::istream& in);
  static Gazetteer load(const std::string& path);

  Region infer(const std::optional<std::string>& profile_location) const;
  std::size_t size() const { return keys_.size(); }

 private:
  struct Key {
    std::vector<std::string> tokens;  // lowercased, diacritics folded
    std::size_t codepoints;
    Region region;
  };
  std::vector<Key> keys_;  // longest keyword first
};

AuthorProfile extract_author_profile(const AuthorTimeline& timeline,
                                     const LanguageModel& model,
                                     const Matcher& native_matcher,
                                     const Gazetteer& gazetteer);

// Population mean/sd; sd of a constant sample is 0 and maps every z to 0.
std::pair<double, double> mean_sd(const std::vector<double>& values);
std::vector<ScaledVariable> log_z_scale(const std::string& name,
                                        const std::vector<double>& raws);

}  // namespace prestamo
