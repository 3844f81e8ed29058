#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "prestamo/features.h"
#include "prestamo/langid.h"
#include "prestamo/lexicon.h"
#include "prestamo/matcher.h"
#include "prestamo/regression.h"
#include "prestamo/stats.h"

namespace prestamo {

// ---------------------------------------------------------------------------
// JSONL record formats shared by the CLI stages.

std::string serialize_match_record(const MatchRecord& record);
MatchRecord parse_match_record(const std::string& line);
std::vector<MatchRecord> load_match_records(const std::string& path);

std::string serialize_author_profile(const AuthorProfile& profile);
AuthorProfile parse_author_profile(const std::string& line);
std::unordered_map<std::string, AuthorProfile> load_author_profiles(
    const std::string& path);

std::string serialize_observation(const Observation& observation);
Observation parse_observation(const std::string& line);
std::vector<Observation> load_observations(const std::string& path);

// ---------------------------------------------------------------------------
// Streaming corpus scan.

struct ScanOptions {
  int threads = 1;
  std::size_t batch_size = 256;
};

struct ScanStats {
  std::size_t lines = 0;
  std::size_t malformed = 0;
  std::size_t posts = 0;
  std::size_t retweets = 0;
  std::size_t records = 0;
  CorpusSummary summary;
};

using RecordSink = std::function<void(const MatchRecord&)>;

// Streams JSONL posts through the matcher. Matching runs on worker threads
// in line batches; records reach the sink in input order, so output bytes do
// not depend on the thread count. Memory stays bounded by a fixed number of
// in-flight batches. Malformed-line handling follows PostReader: over half
// malformed within the first 1000 lines rejects the stream.
ScanStats scan_corpus(std::istream& in, const Matcher& matcher,
                      const ScanOptions& options, const RecordSink& sink);
ScanStats scan_corpus_file(const std::string& path, const Matcher& matcher,
                           const ScanOptions& options, const RecordSink& sink);

// ---------------------------------------------------------------------------
// Feature stage: per-record post features plus per-author profiles.

struct FeatureStage {
  std::vector<Observation> observations;   // in match-record order
  std::vector<AuthorProfile> profiles;     // sorted by author_id
};

FeatureStage build_features(const std::vector<Post>& posts,
                            const std::vector<MatchRecord>& records,
                            const LanguageModel& model,
                            const Matcher& native_matcher,
                            const Gazetteer& gazetteer);

// ---------------------------------------------------------------------------
// Table and plot writers.

void write_candidate_tsv(std::ostream& out,
                         const std::vector<CandidateReport>& reports);
void write_expanded_tsv(std::ostream& out,
                        const std::vector<ExpandedLexicon>& lexicons);
void write_rate_table(std::ostream& out, const RateTable& table);
void write_comparison_tsv(std::ostream& out, const ComparisonReport& report);
void write_comparison_json(std::ostream& out, const ComparisonReport& report);
void write_comparison_svg(std::ostream& out, const ComparisonReport& report,
                          const std::string& label_a = "domain A",
                          const std::string& label_b = "domain B");
void write_regression_tsv(std::ostream& out, const RegressionResult& result);
void write_regression_json(std::ostream& out, const RegressionResult& result,
                           const DesignMatrix& design);

}  // namespace prestamo
