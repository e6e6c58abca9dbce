#ifndef REBUTRANK_RUNNER_HPP
#define REBUTRANK_RUNNER_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rebutrank/corpus.hpp"
#include "rebutrank/eval.hpp"
#include "rebutrank/scorers.hpp"
#include "rebutrank/textproc.hpp"
#include "rebutrank/tuning.hpp"

namespace rebutrank {

enum class SplitName { Train, Validation, Test };
SplitName parse_split_name(const std::string& s);
const char* to_string(SplitName s);

struct RunConfig {
  std::filesystem::path corpus_path;
  std::optional<CorpusFormat> format; // inferred from extension when unset
  std::optional<std::filesystem::path> embeddings_path;
  std::string embedding_key_prefix;
  std::filesystem::path stopwords_path;
  std::optional<std::filesystem::path> manifest_path;
  std::uint64_t seed = 42;
  SplitName split = SplitName::Test;
  std::vector<Setting> settings = {Setting::All, Setting::Explicit,
                                   Setting::Implicit};
  std::vector<ScorerConfig> methods;
  std::filesystem::path output_dir = "out";
  int jobs = 1;
  bool rand_empirical = false;
  EmbeddingMode embedding_mode = EmbeddingMode::Centroid;
  VocabCounting vocab_counting = VocabCounting::SpeechPairs;
};

RunConfig load_run_config(const std::filesystem::path& path);
void validate_run_config(const RunConfig& config);
std::string config_hash(const RunConfig& config);
std::string file_checksum(const std::filesystem::path& path);

CorpusFormat effective_format(const RunConfig& config);

// ScorerConfig <-> JSON fragments (also the tuned sd.json / sde.json format).
ScorerConfig scorer_config_from_json_file(const std::filesystem::path& path);
std::string scorer_config_to_json(const ScorerConfig& config);

struct SettingStats {
  std::size_t n_instances = 0;        // qualifying supporting speeches
  std::size_t n_opposing = 0;         // distinct candidate speeches
  double avg_candidates = 0.0;
  double pct_positive = 0.0;          // gold candidates / all candidates, in %
};

struct IngestResult {
  SplitAssignment split;
  // stats[split][setting]
  std::map<SplitName, std::map<Setting, SettingStats>> stats;
  std::string table; // aligned text rendering
};

IngestResult run_ingest(const RunConfig& config);

struct TuneResult {
  std::optional<ScorerConfig> sd;
  std::optional<ScorerConfig> sde;
};

struct TuneOptions {
  bool tune_sd_variant = true;
  bool tune_sde_variant = true;
  GridSpec grid;
  Setting setting = Setting::All;
};

TuneResult run_tune(const RunConfig& config, const TuneOptions& options);

struct EvaluateResult {
  std::vector<EvalReport> reports;
  std::string table;
  std::map<std::string, std::filesystem::path> report_paths; // method_setting
};

EvaluateResult run_evaluate(const RunConfig& config);

} // namespace rebutrank

#endif
