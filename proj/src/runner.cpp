#include "rebutrank/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <functional>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "rebutrank/embeddings.hpp"

namespace rebutrank {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::uint64_t fnv1a(std::string_view data,
                    std::uint64_t h = 14695981039346656037ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

// index-claiming worker pool; results land by index, so output bytes do not
// depend on the worker count
void parallel_for(std::size_t n, int jobs,
                  const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> workers;
  int count = std::min<int>(jobs, static_cast<int>(n));
  workers.reserve(static_cast<std::size_t>(count));
  for (int t = 0; t < count; ++t) workers.emplace_back(body);
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

SdParams sd_params_from_json(const json& doc) {
  SdParams p;
  p.f_sim = parse_agg(doc.at("f_sim").get<std::string>());
  p.g_sim = parse_agg(doc.at("g_sim").get<std::string>());
  p.f_dissim = parse_agg(doc.at("f_dissim").get<std::string>());
  p.g_dissim = parse_agg(doc.at("g_dissim").get<std::string>());
  p.alpha = doc.at("alpha").get<double>();
  return p;
}

ScorerConfig scorer_config_from_json(const json& entry,
                                     EmbeddingMode default_mode) {
  ScorerConfig config;
  config.embedding_mode = default_mode;
  if (entry.is_string()) {
    config.method = parse_method(entry.get<std::string>());
    return config;
  }
  if (!entry.is_object())
    throw ConfigError("method entry must be a string or an object");
  config.method = parse_method(entry.at("method").get<std::string>());
  if (entry.contains("sd_params"))
    config.sd_params = sd_params_from_json(entry["sd_params"]);
  if (entry.contains("embedding_mode"))
    config.embedding_mode =
        parse_embedding_mode(entry["embedding_mode"].get<std::string>());
  if (entry.contains("external"))
    config.external_path = entry["external"].get<std::string>();
  return config;
}

} // namespace

SplitName parse_split_name(const std::string& s) {
  std::string v;
  for (char c : s) v += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (v == "train") return SplitName::Train;
  if (v == "validation") return SplitName::Validation;
  if (v == "test") return SplitName::Test;
  throw ConfigError("unknown split: " + s);
}

const char* to_string(SplitName s) {
  switch (s) {
    case SplitName::Train: return "train";
    case SplitName::Validation: return "validation";
    default: return "test";
  }
}

CorpusFormat effective_format(const RunConfig& config) {
  if (config.format) return *config.format;
  std::string ext = config.corpus_path.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".csv") return CorpusFormat::Csv;
  if (ext == ".jsonl" || ext == ".json" || ext == ".ndjson")
    return CorpusFormat::Jsonl;
  throw ConfigError("cannot infer corpus format from " +
                    config.corpus_path.string() + "; pass --format");
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("bad config file " + path.string() + ": " + e.what());
  }
  RunConfig config;
  try {
    if (doc.contains("corpus"))
      config.corpus_path = doc["corpus"].get<std::string>();
    if (doc.contains("format"))
      config.format = parse_corpus_format(doc["format"].get<std::string>());
    if (doc.contains("embeddings"))
      config.embeddings_path = doc["embeddings"].get<std::string>();
    if (doc.contains("embedding_key_prefix"))
      config.embedding_key_prefix = doc["embedding_key_prefix"].get<std::string>();
    if (doc.contains("stopwords"))
      config.stopwords_path = doc["stopwords"].get<std::string>();
    if (doc.contains("manifest"))
      config.manifest_path = doc["manifest"].get<std::string>();
    if (doc.contains("seed")) config.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("split"))
      config.split = parse_split_name(doc["split"].get<std::string>());
    if (doc.contains("embedding_mode"))
      config.embedding_mode =
          parse_embedding_mode(doc["embedding_mode"].get<std::string>());
    if (doc.contains("settings")) {
      config.settings.clear();
      for (const auto& s : doc["settings"])
        config.settings.push_back(parse_setting(s.get<std::string>()));
    }
    if (doc.contains("methods")) {
      for (const auto& entry : doc["methods"])
        config.methods.push_back(
            scorer_config_from_json(entry, config.embedding_mode));
    }
    if (doc.contains("out")) config.output_dir = doc["out"].get<std::string>();
    if (doc.contains("jobs")) config.jobs = doc["jobs"].get<int>();
    if (doc.contains("rand_empirical"))
      config.rand_empirical = doc["rand_empirical"].get<bool>();
    if (doc.contains("vocab_counting")) {
      std::string v = doc["vocab_counting"].get<std::string>();
      if (v == "pairs") config.vocab_counting = VocabCounting::SpeechPairs;
      else if (v == "speeches") config.vocab_counting = VocabCounting::PerSpeech;
      else throw ConfigError("unknown vocab_counting: " + v);
    }
  } catch (const json::exception& e) {
    throw ConfigError("bad config file " + path.string() + ": " + e.what());
  }
  return config;
}

void validate_run_config(const RunConfig& config) {
  if (config.corpus_path.empty()) throw ConfigError("no corpus path given");
  if (config.settings.empty()) throw ConfigError("no settings selected");
  if (config.jobs < 1) throw ConfigError("jobs must be >= 1");
  for (const auto& method : config.methods) {
    validate_scorer_config(method);
    if ((method.method == Method::SD || method.method == Method::SDe) &&
        !config.embeddings_path)
      throw ConfigError(std::string(method_display_name(method.method)) +
                        " needs --embeddings");
  }
}

std::string scorer_config_to_json(const ScorerConfig& config) {
  ordered_json doc;
  doc["method"] = method_token(config.method);
  if (config.sd_params) {
    const SdParams& p = *config.sd_params;
    ordered_json sd;
    sd["f_sim"] = to_string(p.f_sim);
    sd["g_sim"] = to_string(p.g_sim);
    sd["f_dissim"] = to_string(p.f_dissim);
    sd["g_dissim"] = to_string(p.g_dissim);
    sd["alpha"] = p.alpha;
    doc["sd_params"] = sd;
  }
  doc["embedding_mode"] = to_string(config.embedding_mode);
  if (config.external_path) doc["external"] = *config.external_path;
  return doc.dump(2) + "\n";
}

ScorerConfig scorer_config_from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scorer config: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("bad scorer config " + path.string() + ": " + e.what());
  }
  ScorerConfig config = scorer_config_from_json(doc, EmbeddingMode::Centroid);
  validate_scorer_config(config);
  return config;
}

std::string config_hash(const RunConfig& config) {
  std::ostringstream os;
  os << config.corpus_path.string() << '\x1f';
  os << (config.format ? (*config.format == CorpusFormat::Csv ? "csv" : "jsonl")
                       : "auto")
     << '\x1f';
  os << (config.embeddings_path ? config.embeddings_path->string() : "")
     << '\x1f';
  os << config.embedding_key_prefix << '\x1f';
  os << config.stopwords_path.string() << '\x1f';
  os << (config.manifest_path ? config.manifest_path->string() : "") << '\x1f';
  os << config.seed << '\x1f';
  os << to_string(config.split) << '\x1f';
  for (Setting s : config.settings) os << setting_token(s) << ',';
  os << '\x1f';
  for (const auto& m : config.methods) os << scorer_config_to_json(m) << ',';
  os << '\x1f';
  os << config.rand_empirical << '\x1f';
  os << to_string(config.embedding_mode) << '\x1f';
  os << (config.vocab_counting == VocabCounting::SpeechPairs ? "pairs"
                                                             : "speeches");
  // jobs and output_dir deliberately left out: neither the worker count nor
  // where reports land may change output bytes
  return hex64(fnv1a(os.str()));
}

std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for checksum: " + path.string());
  std::uint64_t h = 14695981039346656037ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    h = fnv1a(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
    if (!in) break;
  }
  return hex64(h);
}

namespace {

const std::set<std::string>& motions_for(const SplitAssignment& split,
                                         SplitName name) {
  switch (name) {
    case SplitName::Train: return split.train;
    case SplitName::Validation: return split.validation;
    default: return split.test;
  }
}

SplitAssignment resolve_split(const RunConfig& config, const CorpusIndex& index) {
  if (config.manifest_path) return load_split(*config.manifest_path);
  return split_motions(index, config.seed);
}

std::map<std::string, TokenizedSpeech> tokenize_instances(
    const CorpusIndex& index, const std::vector<TaskInstance>& instances) {
  std::map<std::string, TokenizedSpeech> tokenized;
  auto add = [&](const std::string& id) {
    if (!tokenized.count(id)) tokenized.emplace(id, tokenize(index.speeches.at(id)));
  };
  for (const auto& inst : instances) {
    add(inst.supporting_id);
    for (const auto& cand : inst.candidate_ids) add(cand);
  }
  return tokenized;
}

Vocabulary training_vocabulary(const RunConfig& config, const CorpusIndex& index,
                               const SplitAssignment& split) {
  auto train_instances = build_instances(index, split.train, Setting::All);
  auto tokenized = tokenize_instances(index, train_instances);
  return build_vocabulary(train_instances, tokenized, 0.01,
                          config.vocab_counting);
}

std::set<std::string> speech_ids_of(const std::vector<TaskInstance>& instances) {
  std::set<std::string> ids;
  for (const auto& inst : instances) {
    ids.insert(inst.supporting_id);
    ids.insert(inst.candidate_ids.begin(), inst.candidate_ids.end());
  }
  return ids;
}

} // namespace

IngestResult run_ingest(const RunConfig& config) {
  validate_run_config(config);
  CorpusIndex index = load_corpus(config.corpus_path, effective_format(config));
  IngestResult result;
  result.split = split_motions(index, config.seed);

  std::filesystem::create_directories(config.output_dir);
  std::filesystem::path manifest = config.manifest_path
                                       ? *config.manifest_path
                                       : config.output_dir / "split.json";
  save_split(result.split, manifest);

  const SplitName split_names[3] = {SplitName::Train, SplitName::Validation,
                                    SplitName::Test};
  const Setting settings[3] = {Setting::All, Setting::Explicit,
                               Setting::Implicit};
  std::vector<std::vector<std::string>> grid;
  grid.push_back({"Split", "Setting", "Supporting", "Opposing", "AvgCand",
                  "%Positive"});
  for (SplitName name : split_names) {
    const auto& motions = motions_for(result.split, name);
    for (Setting setting : settings) {
      auto instances = build_instances(index, motions, setting);
      SettingStats stats;
      stats.n_instances = instances.size();
      std::set<std::string> opposing;
      std::size_t total_cands = 0, total_gold = 0;
      for (const auto& inst : instances) {
        opposing.insert(inst.candidate_ids.begin(), inst.candidate_ids.end());
        total_cands += inst.candidate_ids.size();
        total_gold += inst.gold_ids.size();
      }
      stats.n_opposing = opposing.size();
      if (!instances.empty()) {
        stats.avg_candidates = static_cast<double>(total_cands) /
                               static_cast<double>(instances.size());
        stats.pct_positive = 100.0 * static_cast<double>(total_gold) /
                             static_cast<double>(total_cands);
      }
      result.stats[name][setting] = stats;

      std::ostringstream avg, pct;
      avg << std::fixed << std::setprecision(2) << stats.avg_candidates;
      pct << std::fixed << std::setprecision(1) << stats.pct_positive;
      grid.push_back({to_string(name), to_string(setting),
                      std::to_string(stats.n_instances),
                      std::to_string(stats.n_opposing), avg.str(), pct.str()});
    }
  }

  std::vector<std::size_t> widths(grid[0].size(), 0);
  for (const auto& row : grid)
    for (std::size_t c = 0; c < row.size(); ++c)
      widths[c] = std::max(widths[c], row[c].size());
  std::string table;
  for (const auto& row : grid) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) line += "  ";
      line += row[c];
      if (c + 1 < row.size()) line.append(widths[c] - row[c].size(), ' ');
    }
    table += line;
    table += '\n';
  }
  result.table = std::move(table);
  return result;
}

TuneResult run_tune(const RunConfig& config, const TuneOptions& options) {
  validate_run_config(config);
  if (!config.embeddings_path)
    throw ConfigError("tuning needs --embeddings");
  CorpusIndex index = load_corpus(config.corpus_path, effective_format(config));
  SplitAssignment split = resolve_split(config, index);

  auto train = build_instances(index, split.train, options.setting);
  auto validation = build_instances(index, split.validation, options.setting);

  Vocabulary vocab = training_vocabulary(config, index, split);
  EmbeddingTable table =
      load_embeddings(*config.embeddings_path, config.embedding_key_prefix);

  std::set<std::string> ids = speech_ids_of(train);
  {
    auto more = speech_ids_of(validation);
    ids.insert(more.begin(), more.end());
  }
  FeatureOptions fopts;
  fopts.sentence_level = true;
  FeatureStore features =
      build_features(index, ids, vocab, {}, &table, fopts);

  TuneResult result;
  if (options.tune_sd_variant)
    result.sd = tune_sd(train, validation, features, config.embedding_mode,
                        options.grid, Method::SD);
  if (options.tune_sde_variant)
    result.sde = tune_sd(train, validation, features, config.embedding_mode,
                         options.grid, Method::SDe);
  return result;
}

EvaluateResult run_evaluate(const RunConfig& config) {
  validate_run_config(config);
  if (config.methods.empty()) throw ConfigError("no methods selected");
  CorpusIndex index = load_corpus(config.corpus_path, effective_format(config));
  SplitAssignment split = resolve_split(config, index);
  std::string checksum = file_checksum(config.corpus_path);
  std::string chash = config_hash(config);

  const auto& motions = motions_for(split, config.split);
  std::map<int, std::vector<TaskInstance>> instances_by_setting;
  for (Setting setting : config.settings)
    instances_by_setting[static_cast<int>(setting)] =
        build_instances(index, motions, setting);

  Vocabulary vocab = training_vocabulary(config, index, split);
  std::set<std::string> stopwords;
  if (!config.stopwords_path.empty())
    stopwords = load_stopwords(config.stopwords_path);

  std::optional<EmbeddingTable> table;
  if (config.embeddings_path)
    table = load_embeddings(*config.embeddings_path,
                            config.embedding_key_prefix);

  FeatureOptions fopts;
  for (const auto& m : config.methods) {
    if (m.method == Method::SD || m.method == Method::SDe)
      fopts.sentence_level = true;
    if (m.method == Method::Ngrams) fopts.ngrams = true;
  }
  std::set<std::string> ids;
  for (const auto& [_, instances] : instances_by_setting) {
    auto more = speech_ids_of(instances);
    ids.insert(more.begin(), more.end());
  }
  FeatureStore features = build_features(
      index, ids, vocab, stopwords, table ? &*table : nullptr, fopts);

  std::map<std::string, ExternalScores> external_by_path;
  for (const auto& m : config.methods)
    if (m.method == Method::External && m.external_path &&
        !external_by_path.count(*m.external_path))
      external_by_path.emplace(*m.external_path,
                               load_external_scores(*m.external_path));

  std::filesystem::create_directories(config.output_dir);
  EvaluateResult result;
  for (const auto& method : config.methods) {
    const ExternalScores* external = nullptr;
    if (method.method == Method::External && method.external_path)
      external = &external_by_path.at(*method.external_path);
    for (Setting setting : config.settings) {
      const auto& instances = instances_by_setting[static_cast<int>(setting)];
      if (instances.empty()) continue;
      std::vector<ScoredInstance> scored(instances.size());
      parallel_for(instances.size(), config.jobs, [&](std::size_t i) {
        scored[i] = score_instance(instances[i], features, method, external);
      });
      EvalReport report = evaluate(instances, scored);
      report.setting = setting;
      report.method = method_display_name(method.method);
      report.random_baseline = random_baseline(instances);
      if (config.rand_empirical)
        report.random_baseline_empirical =
            empirical_random_baseline(instances, split.seed);
      report.seed = split.seed;
      report.config_hash = chash;
      report.corpus_checksum = checksum;

      std::string name = std::string("report_") + method_token(method.method) +
                         "_" + setting_token(setting) + ".json";
      std::filesystem::path path = config.output_dir / name;
      write_report(report, path);
      result.report_paths[std::string(method_token(method.method)) + "_" +
                          setting_token(setting)] = path;
      result.reports.push_back(std::move(report));
    }
  }
  result.table = comparison_table(result.reports);
  return result;
}

} // namespace rebutrank
