#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rebutrank/runner.hpp"
#include "rebutrank/transport.hpp"

using namespace rebutrank;

namespace {

struct FlagSet {
  std::string config_file;
  std::string corpus;
  std::string format;
  std::string embeddings;
  std::string key_prefix;
  std::string stopwords;
  std::string manifest;
  std::uint64_t seed = 42;
  std::string split;
  std::vector<std::string> settings;
  std::vector<std::string> methods;
  std::string external;
  std::string out;
  int jobs = 1;
  bool rand_empirical = false;
  std::string embedding_mode;
  std::string vocab_counting;
  std::string sd_config;
  std::string sde_config;
};

void add_common_flags(CLI::App* cmd, FlagSet& f) {
  cmd->add_option("--config", f.config_file,
                  "JSON run config; explicit flags override its values");
  cmd->add_option("--corpus", f.corpus, "corpus file");
  cmd->add_option("--format", f.format, "corpus format: csv|jsonl");
  cmd->add_option("--embeddings", f.embeddings,
                  "word embedding file (word2vec text format)");
  cmd->add_option("--embedding-key-prefix", f.key_prefix,
                  "prefix stripped from embedding keys (e.g. /c/en/)");
  cmd->add_option("--stopwords", f.stopwords,
                  "stopword list, one word per line");
  cmd->add_option("--manifest", f.manifest, "split manifest path");
  cmd->add_option("--seed", f.seed, "motion split seed");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--jobs", f.jobs, "worker threads");
  cmd->add_option("--embedding-mode", f.embedding_mode,
                  "sentence similarity mode: centroid|wmd");
  cmd->add_option("--vocab-counting", f.vocab_counting,
                  "vocabulary threshold universe: pairs|speeches");
}

RunConfig assemble_config(CLI::App* cmd, const FlagSet& f) {
  RunConfig config;
  if (cmd->count("--config")) config = load_run_config(f.config_file);
  auto passed = [&](const std::string& name) {
    const CLI::Option* opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (passed("--corpus")) config.corpus_path = f.corpus;
  if (passed("--format")) config.format = parse_corpus_format(f.format);
  if (passed("--embeddings")) config.embeddings_path = f.embeddings;
  if (passed("--embedding-key-prefix")) config.embedding_key_prefix = f.key_prefix;
  if (passed("--stopwords")) config.stopwords_path = f.stopwords;
  if (passed("--manifest")) config.manifest_path = f.manifest;
  if (passed("--seed")) config.seed = f.seed;
  if (passed("--out")) config.output_dir = f.out;
  if (passed("--jobs")) config.jobs = f.jobs;
  if (passed("--embedding-mode"))
    config.embedding_mode = parse_embedding_mode(f.embedding_mode);
  if (passed("--vocab-counting")) {
    if (f.vocab_counting == "pairs")
      config.vocab_counting = VocabCounting::SpeechPairs;
    else if (f.vocab_counting == "speeches")
      config.vocab_counting = VocabCounting::PerSpeech;
    else
      throw ConfigError("unknown vocab counting: " + f.vocab_counting);
  }
  if (passed("--split")) config.split = parse_split_name(f.split);
  if (passed("--settings")) {
    config.settings.clear();
    for (const auto& s : f.settings) config.settings.push_back(parse_setting(s));
  }
  if (passed("--rand-empirical")) config.rand_empirical = f.rand_empirical;
  if (passed("--methods")) {
    config.methods.clear();
    for (const auto& token : f.methods) {
      Method m = parse_method(token);
      if (m == Method::SD) {
        if (f.sd_config.empty())
          throw ConfigError("method sd needs --sd-config <tuned json>");
        config.methods.push_back(scorer_config_from_json_file(f.sd_config));
      } else if (m == Method::SDe) {
        if (f.sde_config.empty())
          throw ConfigError("method sde needs --sde-config <tuned json>");
        config.methods.push_back(scorer_config_from_json_file(f.sde_config));
      } else {
        ScorerConfig sc;
        sc.method = m;
        sc.embedding_mode = config.embedding_mode;
        config.methods.push_back(sc);
      }
    }
  }
  if (passed("--external")) {
    bool found = false;
    for (auto& m : config.methods)
      if (m.method == Method::External) {
        m.external_path = f.external;
        found = true;
      }
    if (!found) {
      ScorerConfig sc;
      sc.method = Method::External;
      sc.embedding_mode = config.embedding_mode;
      sc.external_path = f.external;
      config.methods.push_back(sc);
    }
  }
  return config;
}

int cmd_emd(const std::string& problem_arg) {
  nlohmann::json doc;
  if (!problem_arg.empty() && problem_arg.front() == '{') {
    doc = nlohmann::json::parse(problem_arg);
  } else {
    std::ifstream in(problem_arg, std::ios::binary);
    if (!in) throw IoError("cannot open problem file: " + problem_arg);
    in >> doc;
  }
  TransportProblem problem;
  auto supply = doc.at("supply").get<std::vector<double>>();
  auto demand = doc.at("demand").get<std::vector<double>>();
  auto cost = doc.at("cost").get<std::vector<std::vector<double>>>();
  problem.supply = Eigen::Map<Eigen::VectorXd>(supply.data(),
                                               static_cast<Eigen::Index>(supply.size()));
  problem.demand = Eigen::Map<Eigen::VectorXd>(demand.data(),
                                               static_cast<Eigen::Index>(demand.size()));
  problem.cost.resize(static_cast<Eigen::Index>(supply.size()),
                      static_cast<Eigen::Index>(demand.size()));
  for (std::size_t i = 0; i < cost.size(); ++i) {
    if (cost[i].size() != demand.size())
      throw ConfigError("cost row " + std::to_string(i) + " has wrong length");
    for (std::size_t j = 0; j < cost[i].size(); ++j)
      problem.cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          cost[i][j];
  }
  TransportPlan plan = emd(problem);
  for (const auto& [i, j, mass] : plan.flows)
    std::cout << i << " -> " << j << " : " << mass << "\n";
  std::cout << "objective " << plan.objective << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"counter-speech retrieval: rank opposing speeches by how "
               "likely each one rebuts a given supporting speech"};
  app.require_subcommand(1);

  FlagSet ingest_flags, tune_flags, eval_flags;
  std::string tune_objective = "mrr", tune_setting = "all";
  std::string emd_problem;

  CLI::App* ingest = app.add_subcommand(
      "ingest", "load a corpus, write the split manifest, print statistics");
  add_common_flags(ingest, ingest_flags);

  CLI::App* tune = app.add_subcommand(
      "tune", "grid-search SD / SD-e aggregators and alpha");
  add_common_flags(tune, tune_flags);
  tune->add_option("--objective", tune_objective, "mrr|accuracy");
  tune->add_option("--tune-setting", tune_setting,
                   "instance setting used for tuning");

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "score and rank candidates, write per-method reports");
  add_common_flags(evaluate, eval_flags);
  evaluate->add_option("--split", eval_flags.split,
                       "evaluation split: train|validation|test");
  evaluate
      ->add_option("--settings", eval_flags.settings,
                   "comma-separated subset of all,explicit,implicit")
      ->delimiter(',');
  evaluate
      ->add_option("--methods", eval_flags.methods,
                   "comma-separated: cos,js,sd,sde,ngrs,mi,cmi,external")
      ->delimiter(',');
  evaluate->add_option("--external", eval_flags.external,
                       "external score file (jsonl)");
  evaluate->add_option("--sd-config", eval_flags.sd_config,
                       "tuned SD config json");
  evaluate->add_option("--sde-config", eval_flags.sde_config,
                       "tuned SD-e config json");
  evaluate->add_flag("--rand-empirical", eval_flags.rand_empirical,
                     "also estimate the random baseline by shuffling");

  CLI::App* emd_cmd = app.add_subcommand(
      "emd", "solve one transport problem (debugging aid)");
  emd_cmd->add_option("--problem", emd_problem,
                      "JSON file or inline object with supply/demand/cost")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) {
      RunConfig config = assemble_config(ingest, ingest_flags);
      IngestResult result = run_ingest(config);
      std::cout << result.table;
      return 0;
    }
    if (tune->parsed()) {
      RunConfig config = assemble_config(tune, tune_flags);
      TuneOptions options;
      options.grid.objective = parse_objective(tune_objective);
      options.setting = parse_setting(tune_setting);
      TuneResult result = run_tune(config, options);
      std::filesystem::create_directories(config.output_dir);
      if (result.sd) {
        std::ofstream out(config.output_dir / "sd.json", std::ios::binary);
        out << scorer_config_to_json(*result.sd);
        std::cout << "sd: " << scorer_config_to_json(*result.sd);
      }
      if (result.sde) {
        std::ofstream out(config.output_dir / "sde.json", std::ios::binary);
        out << scorer_config_to_json(*result.sde);
        std::cout << "sde: " << scorer_config_to_json(*result.sde);
      }
      return 0;
    }
    if (evaluate->parsed()) {
      RunConfig config = assemble_config(evaluate, eval_flags);
      EvaluateResult result = run_evaluate(config);
      std::cout << result.table;
      return 0;
    }
    if (emd_cmd->parsed()) return cmd_emd(emd_problem);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
