#include "prestamo/pipeline.h"

#include <algorithm>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "prestamo/error.h"
#include "prestamo/ingest.h"
#include "prestamo/morphology.h"
#include "prestamo/utf8.h"

namespace prestamo {

namespace {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json parse_line_or_throw(const std::string& line, const char* what) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::MalformedRow,
                std::string("malformed ") + what + " line");
  }
  return j;
}

template <typename T>
T require_field(const json& j, const char* key, const char* what) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw Error(ErrorCode::MalformedRow,
                std::string(what) + " line is missing \"" + key + "\"");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::MalformedRow,
                std::string(what) + " field \"" + key + "\" has a bad type");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// JSONL formats.

std::string serialize_match_record(const MatchRecord& record) {
  json j;
  j["post_id"] = record.post_id;
  j["author_id"] = record.author_id;
  j["base"] = record.base;
  j["word_class"] = word_class_name(record.word_class);
  j["variant"] = variant_name(record.variant);
  j["span_begin"] = record.span_begin;
  j["span_end"] = record.span_end;
  j["surface"] = record.matched_surface;
  return j.dump();
}

MatchRecord parse_match_record(const std::string& line) {
  json j = parse_line_or_throw(line, "match record");
  MatchRecord r;
  r.post_id = require_field<std::string>(j, "post_id", "match record");
  r.author_id = require_field<std::string>(j, "author_id", "match record");
  r.base = require_field<std::string>(j, "base", "match record");
  r.word_class = word_class_from_name(
      require_field<std::string>(j, "word_class", "match record"));
  r.variant = variant_from_name(
      require_field<std::string>(j, "variant", "match record"));
  r.span_begin = require_field<std::size_t>(j, "span_begin", "match record");
  r.span_end = require_field<std::size_t>(j, "span_end", "match record");
  r.matched_surface = require_field<std::string>(j, "surface", "match record");
  if (r.span_end < r.span_begin) {
    throw Error(ErrorCode::MalformedRow, "match record span ends before it starts");
  }
  return r;
}

std::vector<MatchRecord> load_match_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Unreadable, "cannot open " + path);
  std::vector<MatchRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    records.push_back(parse_match_record(line));
  }
  return records;
}

std::string serialize_author_profile(const AuthorProfile& profile) {
  json j;
  j["author_id"] = profile.author_id;
  j["activity"] = profile.activity;
  j["rt_share"] = profile.rt_share;
  j["url_share"] = profile.url_share;
  j["region"] = region_name(profile.region);
  if (profile.spanish_rate) j["spanish_rate"] = *profile.spanish_rate;
  if (profile.language_bin) j["language_bin"] = language_bin_name(*profile.language_bin);
  if (profile.native_integration_rate) {
    j["native_integration_rate"] = *profile.native_integration_rate;
  }
  return j.dump();
}

AuthorProfile parse_author_profile(const std::string& line) {
  json j = parse_line_or_throw(line, "profile");
  AuthorProfile p;
  p.author_id = require_field<std::string>(j, "author_id", "profile");
  p.activity = require_field<double>(j, "activity", "profile");
  p.rt_share = require_field<double>(j, "rt_share", "profile");
  p.url_share = require_field<double>(j, "url_share", "profile");
  p.region = region_from_name(require_field<std::string>(j, "region", "profile"));
  if (j.contains("spanish_rate")) {
    p.spanish_rate = require_field<double>(j, "spanish_rate", "profile");
  }
  if (j.contains("language_bin")) {
    p.language_bin = language_bin_from_name(
        require_field<std::string>(j, "language_bin", "profile"));
  }
  if (j.contains("native_integration_rate")) {
    p.native_integration_rate =
        require_field<double>(j, "native_integration_rate", "profile");
  }
  return p;
}

std::unordered_map<std::string, AuthorProfile> load_author_profiles(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Unreadable, "cannot open " + path);
  std::unordered_map<std::string, AuthorProfile> profiles;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    AuthorProfile p = parse_author_profile(line);
    profiles[p.author_id] = std::move(p);
  }
  return profiles;
}

std::string serialize_observation(const Observation& observation) {
  json j = json::parse(serialize_match_record(observation.record));
  j["has_hashtag"] = observation.features.has_hashtag;
  j["has_mention"] = observation.features.has_mention;
  j["post_length"] = observation.features.post_length;
  return j.dump();
}

Observation parse_observation(const std::string& line) {
  Observation o;
  o.record = parse_match_record(line);
  json j = parse_line_or_throw(line, "observation");
  o.features.has_hashtag = require_field<bool>(j, "has_hashtag", "observation");
  o.features.has_mention = require_field<bool>(j, "has_mention", "observation");
  o.features.post_length = require_field<long>(j, "post_length", "observation");
  return o;
}

std::vector<Observation> load_observations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Unreadable, "cannot open " + path);
  std::vector<Observation> observations;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    observations.push_back(parse_observation(line));
  }
  return observations;
}

// ---------------------------------------------------------------------------
// Streaming corpus scan.

namespace {

constexpr std::size_t kSchemaSample = 1000;

struct BatchOutput {
  std::vector<MatchRecord> records;
  std::vector<char> line_malformed;
  std::size_t posts = 0;
  std::size_t retweets = 0;
};

BatchOutput process_batch(const std::vector<std::string>& lines,
                          const Matcher& matcher) {
  BatchOutput out;
  out.line_malformed.reserve(lines.size());
  for (const std::string& raw : lines) {
    std::string line = raw;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::optional<Post> post = parse_post_line(line);
    if (!post) {
      out.line_malformed.push_back(1);
      continue;
    }
    out.line_malformed.push_back(0);
    ++out.posts;
    if (post->is_retweet) {
      ++out.retweets;
      continue;
    }
    std::vector<MatchRecord> records = matcher.match_post(*post);
    out.records.insert(out.records.end(),
                       std::make_move_iterator(records.begin()),
                       std::make_move_iterator(records.end()));
  }
  return out;
}

class ScanEmitter {
 public:
  ScanEmitter(ScanStats& stats, const RecordSink& sink)
      : stats_(stats), sink_(sink) {}

  void emit(const BatchOutput& out) {
    for (char malformed : out.line_malformed) {
      ++stats_.lines;
      if (malformed) {
        ++stats_.malformed;
        if (stats_.lines <= kSchemaSample) ++sampled_malformed_;
      }
      if (stats_.lines == kSchemaSample) check(false);
    }
    stats_.posts += out.posts;
    stats_.retweets += out.retweets;
    for (const MatchRecord& record : out.records) {
      ++stats_.records;
      add_to_summary(stats_.summary, record);
      if (sink_) sink_(record);
    }
  }

  void finish() { check(true); }

 private:
  void check(bool at_eof) {
    if (stats_.lines < kSchemaSample && !at_eof) return;
    std::size_t sample = std::min(stats_.lines, kSchemaSample);
    if (stats_.lines > 0 && sampled_malformed_ * 2 > sample) {
      throw Error(ErrorCode::SchemaError,
                  std::to_string(sampled_malformed_) + " of the first " +
                      std::to_string(sample) + " lines are not valid posts");
    }
  }

  ScanStats& stats_;
  const RecordSink& sink_;
  std::size_t sampled_malformed_ = 0;
};

ScanStats scan_sequential(std::istream& in, const Matcher& matcher,
                          const ScanOptions& options, const RecordSink& sink) {
  ScanStats stats;
  ScanEmitter emitter(stats, sink);
  std::vector<std::string> batch;
  batch.reserve(options.batch_size);
  std::string line;
  while (std::getline(in, line)) {
    batch.push_back(std::move(line));
    if (batch.size() >= options.batch_size) {
      emitter.emit(process_batch(batch, matcher));
      batch.clear();
    }
  }
  if (!batch.empty()) emitter.emit(process_batch(batch, matcher));
  emitter.finish();
  return stats;
}

ScanStats scan_parallel(std::istream& in, const Matcher& matcher,
                        const ScanOptions& options, const RecordSink& sink) {
  ScanStats stats;
  ScanEmitter emitter(stats, sink);

  std::mutex mu;
  std::condition_variable cv_work;   // workers wait for input
  std::condition_variable cv_main;   // main waits for space or output
  std::deque<std::pair<std::size_t, std::vector<std::string>>> in_queue;
  std::map<std::size_t, BatchOutput> out_queue;
  std::size_t next_emit = 0;
  std::size_t inflight = 0;
  bool done_reading = false;
  const std::size_t max_inflight =
      std::max<std::size_t>(4, static_cast<std::size_t>(options.threads) * 4);

  auto worker = [&] {
    for (;;) {
      std::pair<std::size_t, std::vector<std::string>> batch;
      {
        std::unique_lock<std::mutex> lock(mu);
        cv_work.wait(lock, [&] { return !in_queue.empty() || done_reading; });
        if (in_queue.empty()) return;
        batch = std::move(in_queue.front());
        in_queue.pop_front();
      }
      BatchOutput out = process_batch(batch.second, matcher);
      {
        std::lock_guard<std::mutex> lock(mu);
        out_queue.emplace(batch.first, std::move(out));
      }
      cv_main.notify_one();
    }
  };

  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(options.threads));
  for (int i = 0; i < options.threads; ++i) workers.emplace_back(worker);

  // Emits every output batch that is next in sequence; returns the count.
  auto drain_ready = [&](std::unique_lock<std::mutex>& lock) {
    std::size_t emitted = 0;
    while (true) {
      auto it = out_queue.find(next_emit);
      if (it == out_queue.end()) break;
      BatchOutput out = std::move(it->second);
      out_queue.erase(it);
      ++next_emit;
      --inflight;
      ++emitted;
      lock.unlock();
      emitter.emit(out);  // may throw SchemaError
      lock.lock();
    }
    return emitted;
  };

  std::size_t next_seq = 0;
  try {
    std::vector<std::string> batch;
    batch.reserve(options.batch_size);
    std::string line;
    bool eof = false;
    while (!eof) {
      batch.clear();
      while (batch.size() < options.batch_size && std::getline(in, line)) {
        batch.push_back(std::move(line));
      }
      if (batch.empty()) break;
      eof = batch.size() < options.batch_size;
      {
        std::unique_lock<std::mutex> lock(mu);
        while (inflight >= max_inflight) {
          if (drain_ready(lock) == 0) cv_main.wait(lock);
        }
        in_queue.emplace_back(next_seq++, std::move(batch));
        ++inflight;
        batch = {};
      }
      cv_work.notify_one();
    }
    {
      std::unique_lock<std::mutex> lock(mu);
      done_reading = true;
      cv_work.notify_all();
      while (inflight > 0) {
        if (drain_ready(lock) == 0) cv_main.wait(lock);
      }
    }
  } catch (...) {
    {
      std::lock_guard<std::mutex> lock(mu);
      done_reading = true;
      in_queue.clear();
    }
    cv_work.notify_all();
    for (std::thread& t : workers) t.join();
    throw;
  }
  for (std::thread& t : workers) t.join();
  emitter.finish();
  return stats;
}

}  // namespace

ScanStats scan_corpus(std::istream& in, const Matcher& matcher,
                      const ScanOptions& options, const RecordSink& sink) {
  if (options.batch_size == 0) {
    throw Error(ErrorCode::Config, "batch size must be positive");
  }
  if (options.threads <= 1) return scan_sequential(in, matcher, options, sink);
  return scan_parallel(in, matcher, options, sink);
}

ScanStats scan_corpus_file(const std::string& path, const Matcher& matcher,
                           const ScanOptions& options, const RecordSink& sink) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Unreadable, "cannot open " + path);
  return scan_corpus(in, matcher, options, sink);
}

// ---------------------------------------------------------------------------
// Feature stage.

FeatureStage build_features(const std::vector<Post>& posts,
                            const std::vector<MatchRecord>& records,
                            const LanguageModel& model,
                            const Matcher& native_matcher,
                            const Gazetteer& gazetteer) {
  std::unordered_map<std::string, const Post*> by_id;
  by_id.reserve(posts.size());
  for (const Post& post : posts) by_id.emplace(post.id, &post);

  FeatureStage stage;
  stage.observations.reserve(records.size());
  for (const MatchRecord& record : records) {
    auto it = by_id.find(record.post_id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::SpanMismatch,
                  "match record references unknown post " + record.post_id);
    }
    Observation obs;
    obs.record = record;
    obs.features = extract_post_features(*it->second, record);
    stage.observations.push_back(std::move(obs));
  }

  std::map<std::string, AuthorTimeline> timelines = group_timelines(posts);
  stage.profiles.reserve(timelines.size());
  for (const auto& [author_id, timeline] : timelines) {
    stage.profiles.push_back(
        extract_author_profile(timeline, model, native_matcher, gazetteer));
  }
  return stage;
}

// ---------------------------------------------------------------------------
// Writers.

void write_candidate_tsv(std::ostream& out,
                         const std::vector<CandidateReport>& reports) {
  out << "# surface\tfrequency\tenglish_stem\tstatus\n";
  for (const CandidateReport& r : reports) {
    out << r.surface << '\t' << r.frequency << '\t' << r.english_stem << '\t'
        << reject_reason_name(r.rejected_reason) << '\n';
  }
}

void write_expanded_tsv(std::ostream& out,
                        const std::vector<ExpandedLexicon>& lexicons) {
  out << "# base\tclass\tvariant\ttext\n";
  for (const ExpandedLexicon& lexicon : lexicons) {
    for (const ExpandedEntry& entry : lexicon.entries) {
      const char* cls = word_class_name(entry.entry.word_class);
      for (const std::string& surface : entry.surfaces.integrated) {
        out << entry.entry.base << '\t' << cls << "\tintegrated\t" << surface
            << '\n';
      }
      for (const LightPhrasePattern& pattern : entry.surfaces.light) {
        for (const std::string& phrase : enumerate_light_phrases(pattern)) {
          out << entry.entry.base << '\t' << cls << "\tlight\t" << phrase
              << '\n';
        }
      }
    }
  }
}

void write_rate_table(std::ostream& out, const RateTable& table) {
  out << "# base\tclass\tintegrated\tlight\trate\n";
  for (const RateRow& row : table) {
    out << row.base << '\t' << word_class_name(row.word_class) << '\t'
        << row.integrated << '\t' << row.light << '\t'
        << (row.rate ? format_double(*row.rate) : "NA") << '\n';
  }
}

void write_comparison_tsv(std::ostream& out, const ComparisonReport& report) {
  out << "# base\ttotal\trate_a\trate_b\tdelta\n";
  for (const ComparisonRow& row : report.rows) {
    out << row.base << '\t' << row.total << '\t' << format_double(row.rate_a)
        << '\t' << format_double(row.rate_b) << '\t'
        << format_double(row.rate_a - row.rate_b) << '\n';
  }
}

void write_comparison_json(std::ostream& out, const ComparisonReport& report) {
  json j;
  j["rows"] = json::array();
  for (const ComparisonRow& row : report.rows) {
    j["rows"].push_back({{"base", row.base},
                         {"total", row.total},
                         {"rate_a", row.rate_a},
                         {"rate_b", row.rate_b},
                         {"delta", row.rate_a - row.rate_b}});
  }
  j["mean_rate_a"] = report.mean_rate_a;
  j["mean_rate_b"] = report.mean_rate_b;
  if (report.test) {
    j["wilcoxon"] = {{"w_plus", report.test->w_plus},
                     {"p_value", report.test->p_value},
                     {"n_nonzero", report.test->n_nonzero},
                     {"exact", report.test->exact},
                     {"p_adjusted", report.p_adjusted}};
  } else {
    j["wilcoxon"] = nullptr;  // every paired difference was zero
  }
  j["bonferroni_m"] = report.bonferroni_m;
  out << j.dump(2) << '\n';
}

void write_comparison_svg(std::ostream& out, const ComparisonReport& report,
                          const std::string& label_a,
                          const std::string& label_b) {
  const double size = 540.0, margin = 60.0;
  const double plot = size - 2 * margin;
  auto x_of = [&](double rate) { return margin + rate * plot; };
  auto y_of = [&](double rate) { return size - margin - rate * plot; };
  char buf[256];

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"540\" "
         "height=\"540\" viewBox=\"0 0 540 540\">\n";
  out << "  <rect width=\"540\" height=\"540\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof(buf),
                "  <line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                "stroke=\"#999\" stroke-dasharray=\"4 4\"/>\n",
                x_of(0.0), y_of(0.0), x_of(1.0), y_of(1.0));
  out << buf;
  for (double tick = 0.0; tick <= 1.0001; tick += 0.25) {
    std::snprintf(buf, sizeof(buf),
                  "  <text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" "
                  "text-anchor=\"middle\">%.2f</text>\n",
                  x_of(tick), size - margin + 18.0, tick);
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "  <text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" "
                  "text-anchor=\"end\">%.2f</text>\n",
                  margin - 8.0, y_of(tick) + 4.0, tick);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf),
                "  <rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" "
                "fill=\"none\" stroke=\"black\"/>\n",
                margin, margin, plot, plot);
  out << buf;
  for (const ComparisonRow& row : report.rows) {
    std::snprintf(buf, sizeof(buf),
                  "  <circle cx=\"%.2f\" cy=\"%.2f\" r=\"4\" "
                  "fill=\"#4477aa\" fill-opacity=\"0.7\"><title>%s</title>"
                  "</circle>\n",
                  x_of(row.rate_a), y_of(row.rate_b), row.base.c_str());
    out << buf;
  }
  std::snprintf(buf, sizeof(buf),
                "  <text x=\"%.1f\" y=\"%.1f\" font-size=\"13\" "
                "text-anchor=\"middle\">%s</text>\n",
                size / 2, size - 14.0, label_a.c_str());
  out << buf;
  std::snprintf(buf, sizeof(buf),
                "  <text x=\"%.1f\" y=\"%.1f\" font-size=\"13\" "
                "text-anchor=\"middle\" transform=\"rotate(-90 14 %.1f)\">%s"
                "</text>\n",
                14.0, size / 2, size / 2, label_b.c_str());
  out << buf;
  out << "</svg>\n";
}

void write_regression_tsv(std::ostream& out, const RegressionResult& result) {
  out << "# variable\tbeta\tse\tsignificant\n";
  for (const Coefficient& c : result.coefficients) {
    if (c.fixed_effect) continue;
    out << c.name << '\t' << format_double(c.beta) << '\t'
        << format_double(c.standard_error) << '\t'
        << (c.p_adjusted < 0.01 ? "*" : "") << '\n';
  }
}

void write_regression_json(std::ostream& out, const RegressionResult& result,
                           const DesignMatrix& design) {
  json j;
  j["coefficients"] = json::array();
  for (const Coefficient& c : result.coefficients) {
    j["coefficients"].push_back({{"name", c.name},
                                 {"beta", c.beta},
                                 {"se", c.standard_error},
                                 {"p_value", c.p_value},
                                 {"p_adjusted", c.p_adjusted},
                                 {"fixed_effect", c.fixed_effect}});
  }
  j["chosen_lambda"] = result.chosen_lambda;
  j["train_log_likelihood"] = result.train_log_likelihood;
  j["holdout_log_likelihood"] = result.holdout_log_likelihood;
  j["full_log_likelihood"] = result.full_log_likelihood;
  j["null_log_likelihood"] = result.null_log_likelihood;
  j["lr_statistic"] = result.lr_statistic;
  j["n_observations"] = result.n_observations;
  j["bonferroni_m"] = result.bonferroni_m;
  j["n_dropped_no_language"] = design.n_dropped_no_language;
  j["n_dropped_no_native_rate"] = design.n_dropped_no_native_rate;
  out << j.dump(2) << '\n';
}

}  // namespace prestamo
