#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "prestamo/ingest.h"

namespace prestamo {

struct LanguageModel {
  int ngram_order = 3;  // 1..4
  double alpha = 0.5;
  std::vector<std::string> classes;  // sorted language codes
  std::vector<double> log_priors;
  std::vector<double> unk_log_likelihood;
  // gram -> per-class log likelihood, indexed like `classes`
  std::unordered_map<std::string, std::vector<double>> gram_log_likelihood;
};

// labeled_texts holds (text, label) pairs.
LanguageModel train_language_model(
    const std::vector<std::pair<std::string, std::string>>& labeled_texts,
    int ngram_order = 3, double alpha = 0.5);

struct Classification {
  std::string language;
  double confidence;  // posterior of the argmax class
};

Classification classify(const LanguageModel& model, std::string_view text);

// Fraction of confidently Spanish posts over confidently classified posts.
// Absent when the author has fewer than `min_posts` posts, or when no post
// clears the confidence threshold.
std::optional<double> spanish_rate(const LanguageModel& model,
                                   const AuthorTimeline& timeline,
                                   double min_confidence = 0.9,
                                   std::size_t min_posts = 5);

void save_language_model(const LanguageModel& model, const std::string& path);
LanguageModel load_language_model(const std::string& path);

}  // namespace prestamo
