#ifndef REBUTRANK_TUNING_HPP
#define REBUTRANK_TUNING_HPP

#include <optional>
#include <utility>
#include <vector>

#include "rebutrank/corpus.hpp"
#include "rebutrank/scorers.hpp"

namespace rebutrank {

enum class Objective { MRR, AccuracyTop1 };

const char* to_string(Objective o);
Objective parse_objective(const std::string& s);

struct GridSpec {
  std::vector<Agg> agg_functions = {Agg::Min, Agg::Max, Agg::Avg, Agg::Product};
  std::vector<double> alpha_values = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                                      0.6, 0.7, 0.8, 0.9, 1.0};
  Objective objective = Objective::MRR;
  // Explicit (f, g) pair lists; when set they replace the cross product of
  // agg_functions for that side.
  std::optional<std::vector<std::pair<Agg, Agg>>> sim_pairs;
  std::optional<std::vector<std::pair<Agg, Agg>>> dissim_pairs;
};

// Exhaustive grid search over (sim pair, distinct dissim pair, alpha).
// SD tunes on the validation instances, SDe on train + validation. Ties
// resolve to the first combination in enumeration order.
ScorerConfig tune_sd(const std::vector<TaskInstance>& train_instances,
                     const std::vector<TaskInstance>& validation_instances,
                     const FeatureStore& features, EmbeddingMode mode,
                     const GridSpec& grid, Method variant);

} // namespace rebutrank

#endif
