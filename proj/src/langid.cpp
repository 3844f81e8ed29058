#include "prestamo/langid.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "prestamo/error.h"

namespace prestamo {

namespace {

bool is_blank(std::string_view text) {
  return std::all_of(text.begin(), text.end(), [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  });
}

void for_each_gram(std::string_view text, int order,
                   const std::function<void(std::string_view)>& fn) {
  if (static_cast<int>(text.size()) < order) return;
  for (std::size_t i = 0; i + order <= text.size(); ++i) {
    fn(text.substr(i, order));
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex_encode(std::string_view bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char c : bytes) {
    out.push_back(digits[c >> 4]);
    out.push_back(digits[c & 0xF]);
  }
  return out;
}

std::string hex_decode(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) {
    throw Error(ErrorCode::MalformedRow, "odd-length hex gram");
  }
  std::string out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = nibble(hex[i]), lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) {
      throw Error(ErrorCode::MalformedRow, "invalid hex gram");
    }
    out.push_back(static_cast<char>(hi << 4 | lo));
  }
  return out;
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

LanguageModel train_language_model(
    const std::vector<std::pair<std::string, std::string>>& labeled_texts,
    int ngram_order, double alpha) {
  if (ngram_order < 1 || ngram_order > 4) {
    throw Error(ErrorCode::Config, "ngram order must be between 1 and 4");
  }
  if (!(alpha > 0.0)) {
    throw Error(ErrorCode::InvalidAlpha, "smoothing alpha must be positive");
  }

  std::set<std::string> class_set;
  for (const auto& [_, label] : labeled_texts) class_set.insert(label);
  if (class_set.size() < 2) {
    throw Error(ErrorCode::InsufficientClasses,
                "training needs at least two language classes, got " +
                    std::to_string(class_set.size()));
  }

  LanguageModel model;
  model.ngram_order = ngram_order;
  model.alpha = alpha;
  model.classes.assign(class_set.begin(), class_set.end());

  std::size_t n_classes = model.classes.size();
  std::unordered_map<std::string, std::size_t> class_index;
  for (std::size_t c = 0; c < n_classes; ++c) class_index[model.classes[c]] = c;

  std::vector<std::size_t> doc_counts(n_classes, 0);
  std::vector<double> gram_totals(n_classes, 0.0);
  std::map<std::string, std::vector<double>> counts;  // ordered for determinism
  for (const auto& [text, label] : labeled_texts) {
    std::size_t c = class_index[label];
    ++doc_counts[c];
    for_each_gram(text, ngram_order, [&](std::string_view gram) {
      auto [it, _] =
          counts.try_emplace(std::string(gram), std::vector<double>(n_classes, 0.0));
      it->second[c] += 1.0;
      gram_totals[c] += 1.0;
    });
  }

  double vocab = static_cast<double>(counts.size());
  model.log_priors.resize(n_classes);
  model.unk_log_likelihood.resize(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    model.log_priors[c] = std::log(static_cast<double>(doc_counts[c]) /
                                   static_cast<double>(labeled_texts.size()));
    double denom = gram_totals[c] + alpha * (vocab + 1.0);
    model.unk_log_likelihood[c] = std::log(alpha / denom);
  }
  for (const auto& [gram, per_class] : counts) {
    std::vector<double> logp(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) {
      double denom = gram_totals[c] + alpha * (vocab + 1.0);
      logp[c] = std::log((per_class[c] + alpha) / denom);
    }
    model.gram_log_likelihood.emplace(gram, std::move(logp));
  }
  return model;
}

Classification classify(const LanguageModel& model, std::string_view text) {
  if (is_blank(text)) {
    throw Error(ErrorCode::EmptyText, "cannot classify an empty text");
  }
  std::size_t n_classes = model.classes.size();
  std::vector<double> scores = model.log_priors;
  for_each_gram(text, model.ngram_order, [&](std::string_view gram) {
    auto it = model.gram_log_likelihood.find(std::string(gram));
    if (it == model.gram_log_likelihood.end()) {
      for (std::size_t c = 0; c < n_classes; ++c) {
        scores[c] += model.unk_log_likelihood[c];
      }
    } else {
      for (std::size_t c = 0; c < n_classes; ++c) scores[c] += it->second[c];
    }
  });

  std::size_t best = 0;
  for (std::size_t c = 1; c < n_classes; ++c) {
    if (scores[c] > scores[best]) best = c;
  }
  double max_score = scores[best];
  double z = 0.0;
  for (double s : scores) z += std::exp(s - max_score);
  return {model.classes[best], 1.0 / z};
}

std::optional<double> spanish_rate(const LanguageModel& model,
                                   const AuthorTimeline& timeline,
                                   double min_confidence,
                                   std::size_t min_posts) {
  if (timeline.posts.size() < min_posts) return std::nullopt;
  std::size_t confident = 0;
  std::size_t spanish = 0;
  for (const Post& post : timeline.posts) {
    if (is_blank(post.text)) continue;
    Classification c = classify(model, post.text);
    if (c.confidence > min_confidence) {
      ++confident;
      if (c.language == "es") ++spanish;
    }
  }
  if (confident == 0) return std::nullopt;
  return static_cast<double>(spanish) / static_cast<double>(confident);
}

void save_language_model(const LanguageModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::Unreadable, "cannot write language model to " + path);
  }
  out << "#prestamo-langid\t1\n";
  out << "order\t" << model.ngram_order << "\n";
  out << "alpha\t" << format_double(model.alpha) << "\n";
  for (std::size_t c = 0; c < model.classes.size(); ++c) {
    out << "class\t" << model.classes[c] << "\t"
        << format_double(model.log_priors[c]) << "\t"
        << format_double(model.unk_log_likelihood[c]) << "\n";
  }
  std::map<std::string, const std::vector<double>*> ordered;
  for (const auto& [gram, logp] : model.gram_log_likelihood) {
    ordered.emplace(gram, &logp);
  }
  for (const auto& [gram, logp] : ordered) {
    out << "gram\t" << hex_encode(gram);
    for (double v : *logp) out << "\t" << format_double(v);
    out << "\n";
  }
}

LanguageModel load_language_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::Unreadable, "cannot open language model " + path);
  }
  std::string line;
  if (!std::getline(in, line) || split_tab(line) !=
      std::vector<std::string>{"#prestamo-langid", "1"}) {
    throw Error(ErrorCode::SchemaError, "unrecognized language model header");
  }

  LanguageModel model;
  model.classes.clear();
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols = split_tab(line);
    if (cols[0] == "order" && cols.size() == 2) {
      model.ngram_order = std::stoi(cols[1]);
    } else if (cols[0] == "alpha" && cols.size() == 2) {
      model.alpha = std::strtod(cols[1].c_str(), nullptr);
    } else if (cols[0] == "class" && cols.size() == 4) {
      model.classes.push_back(cols[1]);
      model.log_priors.push_back(std::strtod(cols[2].c_str(), nullptr));
      model.unk_log_likelihood.push_back(std::strtod(cols[3].c_str(), nullptr));
    } else if (cols[0] == "gram" && cols.size() == 2 + model.classes.size()) {
      std::vector<double> logp(model.classes.size());
      for (std::size_t c = 0; c < logp.size(); ++c) {
        logp[c] = std::strtod(cols[2 + c].c_str(), nullptr);
      }
      model.gram_log_likelihood.emplace(hex_decode(cols[1]), std::move(logp));
    } else {
      throw Error(ErrorCode::SchemaError, "bad language model row: " + line);
    }
  }
  if (model.classes.size() < 2) {
    throw Error(ErrorCode::InsufficientClasses,
                "language model lists fewer than two classes");
  }
  return model;
}

}  // namespace prestamo
