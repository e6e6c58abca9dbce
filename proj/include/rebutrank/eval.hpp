#ifndef REBUTRANK_EVAL_HPP
#define REBUTRANK_EVAL_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rebutrank/corpus.hpp"
#include "rebutrank/scorers.hpp"

namespace rebutrank {

struct EvalRow {
  std::string supporting_id;
  std::vector<std::string> ranking;
  std::vector<std::string> gold_ids; // sorted
  double reciprocal_rank = 0.0;
  int hit = 0;
};

struct EvalReport {
  Setting setting = Setting::All;
  std::string method;
  std::size_t n_instances = 0;
  double accuracy_top1 = 0.0;
  double mrr = 0.0;
  double random_baseline = 0.0;
  std::optional<double> random_baseline_empirical;
  std::vector<EvalRow> rows;
  // run provenance
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string corpus_checksum;
};

// hit = top-ranked candidate is gold; reciprocal rank = 1/r with r the best
// 1-based rank of any gold candidate. Aggregates are unweighted means in
// instance order.
EvalReport evaluate(const std::vector<TaskInstance>& instances,
                    const std::vector<ScoredInstance>& scored);

// Expected top-1 accuracy of a uniformly random ranking:
// mean of |gold| / |candidates|.
double random_baseline(const std::vector<TaskInstance>& instances);

// Shuffle-based estimate of the same quantity, deterministic in the seed.
double empirical_random_baseline(const std::vector<TaskInstance>& instances,
                                 std::uint64_t seed, int shuffles = 1000);

// Aligned text table, methods sorted by All-setting MRR (descending), one
// Acc/MRR column pair per setting, missing cells rendered as "-".
std::string comparison_table(const std::vector<EvalReport>& reports);

std::string report_to_json(const EvalReport& report);
void write_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport load_report(const std::filesystem::path& path);

} // namespace rebutrank

#endif
