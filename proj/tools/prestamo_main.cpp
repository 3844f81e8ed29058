#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prestamo/error.h"
#include "prestamo/ingest.h"
#include "prestamo/langid.h"
#include "prestamo/lexicon.h"
#include "prestamo/matcher.h"
#include "prestamo/morphology.h"
#include "prestamo/pipeline.h"
#include "prestamo/regression.h"
#include "prestamo/stats.h"
#include "prestamo/tokenizer.h"
#include "prestamo/utf8.h"

namespace fs = std::filesystem;
using namespace prestamo;

namespace {

struct GlobalOptions {
  int threads = 1;
  std::optional<long long> seed;
  std::string output_dir = ".";
};

void require_readable(const std::string& path, const std::string& what) {
  if (path.empty()) return;
  if (!fs::exists(path)) {
    throw Error(ErrorCode::Config, what + " not found: " + path);
  }
}

std::ofstream open_output(const GlobalOptions& global, const std::string& name,
                          std::string* full_path = nullptr) {
  fs::path dir(global.output_dir);
  fs::create_directories(dir);
  fs::path path = dir / name;
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Unreadable, "cannot write " + path.string());
  if (full_path) *full_path = path.string();
  return out;
}

WordClass parse_word_class(const std::string& name) {
  return word_class_from_name(name);
}

struct LexiconPaths {
  std::string loanwords;
  std::string natives;
  std::string exclusions;
};

std::vector<ExpandedLexicon> load_expanded(const LexiconPaths& paths) {
  if (paths.loanwords.empty() && paths.natives.empty()) {
    throw Error(ErrorCode::Config, "need --loanwords and/or --natives");
  }
  require_readable(paths.loanwords, "loanword lexicon");
  require_readable(paths.natives, "native lexicon");
  require_readable(paths.exclusions, "exclusion list");
  std::set<std::string> exclusions;
  if (!paths.exclusions.empty()) exclusions = load_exclusions(paths.exclusions);
  std::vector<ExpandedLexicon> expanded;
  auto add = [&](const std::string& path, WordClass word_class) {
    if (path.empty()) return;
    Lexicon lexicon = load_lexicon(path, word_class);
    attach_exclusions(lexicon, exclusions);
    expanded.push_back(expand_lexicon(lexicon));
  };
  add(paths.loanwords, WordClass::Loanword);
  add(paths.natives, WordClass::Native);
  return expanded;
}

// --- discover ---------------------------------------------------------------

struct DiscoverOptions {
  std::vector<std::string> inputs;
  std::string english_wordlist;
  std::string spanish_wordlist;
  std::size_t min_stem_length = 4;
};

void cmd_discover(const GlobalOptions& global, const DiscoverOptions& opt) {
  require_readable(opt.english_wordlist, "English wordlist");
  require_readable(opt.spanish_wordlist, "Spanish wordlist");
  auto english = load_wordlist(opt.english_wordlist);
  auto spanish = load_wordlist(opt.spanish_wordlist);

  CandidateScanner scanner;
  for (const std::string& input : opt.inputs) {
    PostReader reader(input);
    while (auto post = reader.next()) {
      for (const Token& token : tokenize(post->text)) {
        if (token.kind != TokenKind::Word) continue;
        scanner.add_token(utf8::to_lower(utf8::compose_spanish(token.surface)));
      }
    }
  }
  auto reports = scanner.finish(english, spanish, opt.min_stem_length);
  std::ofstream out = open_output(global, "candidates.tsv");
  write_candidate_tsv(out, reports);
}

// --- expand -----------------------------------------------------------------

void cmd_expand(const GlobalOptions& global, const LexiconPaths& paths) {
  std::vector<ExpandedLexicon> expanded = load_expanded(paths);
  std::ofstream out = open_output(global, "expanded.tsv");
  write_expanded_tsv(out, expanded);
  for (const ExpandedLexicon& lexicon : expanded) {
    std::cerr << word_class_name(lexicon.word_class) << " entries: "
              << lexicon.entries.size() << "\n";
  }
}

// --- match ------------------------------------------------------------------

struct MatchCmdOptions {
  std::vector<std::string> inputs;
  LexiconPaths lexicons;
  bool fold_diacritics = false;
  int window = 0;
};

void cmd_match(const GlobalOptions& global, const MatchCmdOptions& opt) {
  MatchOptions match_options;
  match_options.fold_diacritics = opt.fold_diacritics;
  match_options.window = opt.window;
  Matcher matcher(load_expanded(opt.lexicons), match_options);

  ScanOptions scan_options;
  scan_options.threads = global.threads;

  std::ofstream records_out = open_output(global, "matches.jsonl");
  ScanStats total;
  for (const std::string& input : opt.inputs) {
    ScanStats stats = scan_corpus_file(input, matcher, scan_options,
                                       [&](const MatchRecord& record) {
                                         records_out << serialize_match_record(record)
                                                     << '\n';
                                       });
    total.lines += stats.lines;
    total.malformed += stats.malformed;
    total.posts += stats.posts;
    total.retweets += stats.retweets;
    total.records += stats.records;
    merge_summaries(total.summary, stats.summary);
  }
  std::ofstream summary_out = open_output(global, "summary.tsv");
  summary_out << serialize_summary(total.summary);
  std::cerr << total.lines << " lines, " << total.posts << " posts, "
            << total.retweets << " retweets, " << total.records
            << " match records\n";
}

// --- features ---------------------------------------------------------------

struct FeaturesCmdOptions {
  std::vector<std::string> inputs;
  std::string matches;
  std::string langid_model;
  std::string natives;
  std::string exclusions;
  std::string gazetteer;
  bool fold_diacritics = false;
  int window = 0;
};

void cmd_features(const GlobalOptions& global, const FeaturesCmdOptions& opt) {
  require_readable(opt.langid_model, "language model");
  require_readable(opt.natives, "native lexicon");
  require_readable(opt.gazetteer, "gazetteer");
  if (!opt.exclusions.empty()) require_readable(opt.exclusions, "exclusion list");

  LanguageModel model = load_language_model(opt.langid_model);
  Gazetteer gazetteer = Gazetteer::load(opt.gazetteer);
  LexiconPaths native_only;
  native_only.natives = opt.natives;
  native_only.exclusions = opt.exclusions;
  MatchOptions match_options;
  match_options.fold_diacritics = opt.fold_diacritics;
  match_options.window = opt.window;
  Matcher native_matcher(load_expanded(native_only), match_options);

  std::vector<Post> posts;
  for (const std::string& input : opt.inputs) {
    PostReader reader(input);
    while (auto post = reader.next()) posts.push_back(std::move(*post));
  }
  std::string matches_path =
      opt.matches.empty() ? (fs::path(global.output_dir) / "matches.jsonl").string()
                          : opt.matches;
  std::vector<MatchRecord> records = load_match_records(matches_path);

  FeatureStage stage =
      build_features(posts, records, model, native_matcher, gazetteer);

  std::ofstream obs_out = open_output(global, "observations.jsonl");
  for (const Observation& obs : stage.observations) {
    obs_out << serialize_observation(obs) << '\n';
  }
  std::ofstream prof_out = open_output(global, "profiles.jsonl");
  for (const AuthorProfile& profile : stage.profiles) {
    prof_out << serialize_author_profile(profile) << '\n';
  }
  std::cerr << stage.observations.size() << " observations, "
            << stage.profiles.size() << " profiles\n";
}

// --- rate -------------------------------------------------------------------

struct RateCmdOptions {
  std::string summary;
  std::string word_class = "loanword";
  std::size_t top_k = 50;
};

void cmd_rate(const GlobalOptions& global, const RateCmdOptions& opt) {
  std::string path = opt.summary.empty()
                         ? (fs::path(global.output_dir) / "summary.tsv").string()
                         : opt.summary;
  CorpusSummary summary = load_summary(path);
  RateTable table = top_k_rate_table(summary, opt.top_k,
                                     parse_word_class(opt.word_class));
  std::ofstream out = open_output(global, "rates.tsv");
  write_rate_table(out, table);
}

// --- compare ----------------------------------------------------------------

struct CompareCmdOptions {
  std::string summary_a;
  std::string summary_b;
  std::string word_class = "loanword";
  std::size_t top_k = 50;
  std::size_t bonferroni_m = 1;
  bool svg = false;
  std::string label_a = "domain A";
  std::string label_b = "domain B";
};

void cmd_compare(const GlobalOptions& global, const CompareCmdOptions& opt) {
  CorpusSummary a = load_summary(opt.summary_a);
  CorpusSummary b = load_summary(opt.summary_b);
  ComparisonReport report =
      compare_domains(a, b, parse_word_class(opt.word_class), opt.top_k,
                      opt.bonferroni_m);
  {
    std::ofstream out = open_output(global, "comparison.tsv");
    write_comparison_tsv(out, report);
  }
  {
    std::ofstream out = open_output(global, "comparison.json");
    write_comparison_json(out, report);
  }
  if (opt.svg) {
    std::ofstream out = open_output(global, "comparison.svg");
    write_comparison_svg(out, report, opt.label_a, opt.label_b);
  }
}

// --- regress ----------------------------------------------------------------

struct RegressCmdOptions {
  std::string observations;
  std::string profiles;
  std::string word_class = "loanword";
  std::size_t rare_threshold = 5;
  std::vector<double> l2_grid;
  std::size_t bonferroni_m = 0;
};

void cmd_regress(const GlobalOptions& global, const RegressCmdOptions& opt) {
  if (!global.seed) {
    throw Error(ErrorCode::Config, "regress needs an explicit --seed");
  }
  std::string obs_path =
      opt.observations.empty()
          ? (fs::path(global.output_dir) / "observations.jsonl").string()
          : opt.observations;
  std::string prof_path =
      opt.profiles.empty()
          ? (fs::path(global.output_dir) / "profiles.jsonl").string()
          : opt.profiles;
  std::vector<Observation> all = load_observations(obs_path);
  auto profiles = load_author_profiles(prof_path);

  WordClass word_class = parse_word_class(opt.word_class);
  std::vector<Observation> observations;
  for (Observation& obs : all) {
    if (obs.record.word_class == word_class) observations.push_back(std::move(obs));
  }

  RegressionSpec spec;
  spec.word_class = word_class;
  spec.rare_threshold = opt.rare_threshold;
  spec.l2_grid = opt.l2_grid;
  spec.seed = static_cast<std::uint64_t>(*global.seed);
  spec.bonferroni_m = opt.bonferroni_m;

  DesignMatrix design = encode_design(observations, profiles, spec);
  RegressionResult result = grid_search_l2(design, spec);
  {
    std::ofstream out = open_output(global, "regression.tsv");
    write_regression_tsv(out, result);
  }
  {
    std::ofstream out = open_output(global, "regression.json");
    write_regression_json(out, result, design);
  }
  std::cerr << "n=" << result.n_observations << " lambda=" << result.chosen_lambda
            << " lr=" << result.lr_statistic << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Loanword integration toolkit for Spanish social media corpora"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.set_config("--config", "", "Key/value config file");
  app.add_option("--threads", global.threads, "Worker threads for corpus scans")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--seed", global.seed, "Random seed (required for regress)");
  app.add_option("--output-dir", global.output_dir, "Directory for outputs")
      ->capture_default_str();

  DiscoverOptions discover;
  CLI::App* discover_cmd =
      app.add_subcommand("discover", "Mine -(e)ar loanword verb candidates");
  discover_cmd->add_option("--input", discover.inputs, "JSONL post file")
      ->required();
  discover_cmd
      ->add_option("--english-wordlist", discover.english_wordlist,
                   "English stems, one per line")
      ->required();
  discover_cmd
      ->add_option("--spanish-wordlist", discover.spanish_wordlist,
                   "Spanish words, one per line")
      ->required();
  discover_cmd
      ->add_option("--min-stem-length", discover.min_stem_length,
                   "Minimum stem length in codepoints")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  LexiconPaths expand;
  CLI::App* expand_cmd =
      app.add_subcommand("expand", "Generate every matchable surface form");
  expand_cmd->add_option("--loanwords", expand.loanwords, "Loanword pair TSV");
  expand_cmd->add_option("--natives", expand.natives, "Native pair TSV");
  expand_cmd->add_option("--exclusions", expand.exclusions,
                         "Excluded surfaces, one per line");

  MatchCmdOptions match;
  CLI::App* match_cmd =
      app.add_subcommand("match", "Scan posts for integrated and light uses");
  match_cmd->add_option("--input", match.inputs, "JSONL post file")->required();
  match_cmd->add_option("--loanwords", match.lexicons.loanwords,
                        "Loanword pair TSV");
  match_cmd->add_option("--natives", match.lexicons.natives, "Native pair TSV");
  match_cmd->add_option("--exclusions", match.lexicons.exclusions,
                        "Excluded surfaces, one per line");
  match_cmd->add_flag("--fold-diacritics", match.fold_diacritics,
                      "Match accent-insensitively");
  match_cmd
      ->add_option("--window", match.window,
                   "Free tokens allowed inside a light phrase")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  FeaturesCmdOptions features;
  CLI::App* features_cmd = app.add_subcommand(
      "features", "Per-record post features and per-author profiles");
  features_cmd->add_option("--input", features.inputs, "JSONL post file")
      ->required();
  features_cmd->add_option("--matches", features.matches,
                           "Match records from a prior match run");
  features_cmd
      ->add_option("--langid-model", features.langid_model,
                   "Language identification model TSV")
      ->required();
  features_cmd->add_option("--natives", features.natives, "Native pair TSV")
      ->required();
  features_cmd->add_option("--exclusions", features.exclusions,
                           "Excluded surfaces, one per line");
  features_cmd->add_option("--gazetteer", features.gazetteer,
                           "Keyword-to-region TSV")
      ->required();
  features_cmd->add_flag("--fold-diacritics", features.fold_diacritics,
                         "Match accent-insensitively");
  features_cmd
      ->add_option("--window", features.window,
                   "Free tokens allowed inside a light phrase")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  RateCmdOptions rate;
  CLI::App* rate_cmd =
      app.add_subcommand("rate", "Integration rate table from a match summary");
  rate_cmd->add_option("--summary", rate.summary, "Summary TSV from match");
  rate_cmd->add_option("--word-class", rate.word_class, "loanword or native")
      ->check(CLI::IsMember({"loanword", "native"}))
      ->capture_default_str();
  rate_cmd->add_option("--top-k", rate.top_k, "Rows to keep, by total count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  CompareCmdOptions compare;
  CLI::App* compare_cmd =
      app.add_subcommand("compare", "Paired rate comparison of two corpora");
  compare_cmd->add_option("--summary-a", compare.summary_a, "First summary TSV")
      ->required();
  compare_cmd
      ->add_option("--summary-b", compare.summary_b, "Second summary TSV")
      ->required();
  compare_cmd
      ->add_option("--word-class", compare.word_class, "loanword or native")
      ->check(CLI::IsMember({"loanword", "native"}))
      ->capture_default_str();
  compare_cmd->add_option("--top-k", compare.top_k, "Word pairs to compare")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  compare_cmd
      ->add_option("--bonferroni-m", compare.bonferroni_m,
                   "Comparison family size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  compare_cmd->add_flag("--svg", compare.svg, "Also write a rate scatter SVG");
  compare_cmd->add_option("--label-a", compare.label_a, "Axis label, first corpus")
      ->capture_default_str();
  compare_cmd->add_option("--label-b", compare.label_b, "Axis label, second corpus")
      ->capture_default_str();

  RegressCmdOptions regress;
  CLI::App* regress_cmd = app.add_subcommand(
      "regress", "Fixed-effects ridge logistic regression of integrated use");
  regress_cmd->add_option("--observations", regress.observations,
                          "Observation JSONL from features");
  regress_cmd->add_option("--profiles", regress.profiles,
                          "Profile JSONL from features");
  regress_cmd
      ->add_option("--word-class", regress.word_class, "loanword or native")
      ->check(CLI::IsMember({"loanword", "native"}))
      ->capture_default_str();
  regress_cmd
      ->add_option("--rare-threshold", regress.rare_threshold,
                   "Fixed-effect levels below this count share one RARE column")
      ->capture_default_str();
  regress_cmd
      ->add_option("--l2-grid", regress.l2_grid,
                   "Ridge weights to grid search")
      ->delimiter(',');
  regress_cmd
      ->add_option("--bonferroni-m", regress.bonferroni_m,
                   "Adjustment family size; 0 counts the non-fixed-effect terms")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << " [" << error_code_name(e.code())
              << "]\n";
    return e.code() == ErrorCode::Config ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (discover_cmd->parsed()) cmd_discover(global, discover);
    if (expand_cmd->parsed()) cmd_expand(global, expand);
    if (match_cmd->parsed()) cmd_match(global, match);
    if (features_cmd->parsed()) cmd_features(global, features);
    if (rate_cmd->parsed()) cmd_rate(global, rate);
    if (compare_cmd->parsed()) cmd_compare(global, compare);
    if (regress_cmd->parsed()) cmd_regress(global, regress);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << " [" << error_code_name(e.code())
              << "]\n";
    return e.code() == ErrorCode::Config ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
