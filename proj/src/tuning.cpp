#include "rebutrank/tuning.hpp"

#include <array>
#include <cctype>

#include <Eigen/Core>

#include "rebutrank/eval.hpp"

namespace rebutrank {

const char* to_string(Objective o) {
  return o == Objective::MRR ? "mrr" : "accuracy";
}

Objective parse_objective(const std::string& s) {
  std::string v;
  for (char c : s) v += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (v == "mrr") return Objective::MRR;
  if (v == "accuracy" || v == "accuracy_top1" || v == "acc")
    return Objective::AccuracyTop1;
  throw ConfigError("unknown tuning objective: " + s);
}

namespace {

constexpr std::size_t kPairCount = 16; // 4 f choices x 4 g choices

std::size_t pair_index(Agg f, Agg g) {
  return static_cast<std::size_t>(f) * 4 + static_cast<std::size_t>(g);
}

// per (instance, candidate): all 16 (f, g) aggregates of each matrix
struct CandidateAggregates {
  std::array<double, kPairCount> word;
  std::array<double, kPairCount> emb;
};

constexpr Agg kAggs[4] = {Agg::Min, Agg::Max, Agg::Avg, Agg::Product};

std::vector<std::pair<Agg, Agg>> default_pairs(const std::vector<Agg>& fns) {
  std::vector<std::pair<Agg, Agg>> pairs;
  for (Agg f : fns)
    for (Agg g : fns) pairs.emplace_back(f, g);
  return pairs;
}

} // namespace

ScorerConfig tune_sd(const std::vector<TaskInstance>& train_instances,
                     const std::vector<TaskInstance>& validation_instances,
                     const FeatureStore& features, EmbeddingMode mode,
                     const GridSpec& grid, Method variant) {
  if (variant != Method::SD && variant != Method::SDe)
    throw ConfigError("tune_sd handles SD and SD-e only");
  if (!features.has_embeddings)
    throw ConfigError("tuning needs an embedding table");
  if (grid.alpha_values.empty()) throw ConfigError("empty alpha grid");

  // SD-e earns the bigger tuning pool: train + validation.
  std::vector<TaskInstance> tuning = validation_instances;
  if (variant == Method::SDe)
    tuning.insert(tuning.begin(), train_instances.begin(),
                  train_instances.end());
  if (tuning.empty()) throw EmptyTuningSet("no instances to tune on");

  bool use_word = variant == Method::SD;

  // Matrices and their 16 aggregates are computed once per candidate; every
  // grid point after that is a couple of lookups.
  std::vector<std::vector<CandidateAggregates>> cache(tuning.size());
  for (std::size_t t = 0; t < tuning.size(); ++t) {
    const TaskInstance& inst = tuning[t];
    const SpeechFeatures& sup = features.at(inst.supporting_id);
    cache[t].resize(inst.candidate_ids.size());
    for (std::size_t c = 0; c < inst.candidate_ids.size(); ++c) {
      const SpeechFeatures& cand = features.at(inst.candidate_ids[c]);
      Eigen::MatrixXd e = embedding_similarity_matrix(sup, cand, mode);
      for (Agg f : kAggs)
        for (Agg g : kAggs)
          cache[t][c].emb[pair_index(f, g)] = aggregate(e, f, g);
      if (use_word) {
        Eigen::MatrixXd w = word_similarity_matrix(sup, cand);
        for (Agg f : kAggs)
          for (Agg g : kAggs)
            cache[t][c].word[pair_index(f, g)] = aggregate(w, f, g);
      }
    }
  }

  auto objective_of = [&](std::size_t sim, std::size_t dissim, double alpha) {
    double hits = 0.0, rr_sum = 0.0;
    std::map<std::string, double> scores;
    for (std::size_t t = 0; t < tuning.size(); ++t) {
      const TaskInstance& inst = tuning[t];
      scores.clear();
      for (std::size_t c = 0; c < inst.candidate_ids.size(); ++c) {
        const CandidateAggregates& agg = cache[t][c];
        double s = agg.emb[sim], d = agg.emb[dissim];
        if (use_word) {
          s += agg.word[sim];
          d += agg.word[dissim];
        }
        scores[inst.candidate_ids[c]] = alpha * s - (1.0 - alpha) * d;
      }
      auto ranking = rank_candidates(scores);
      if (inst.gold_ids.count(ranking.front())) hits += 1.0;
      for (std::size_t r = 0; r < ranking.size(); ++r)
        if (inst.gold_ids.count(ranking[r])) {
          rr_sum += 1.0 / static_cast<double>(r + 1);
          break;
        }
    }
    double n = static_cast<double>(tuning.size());
    return grid.objective == Objective::MRR ? rr_sum / n : hits / n;
  };

  auto sim_pairs = grid.sim_pairs ? *grid.sim_pairs
                                  : default_pairs(grid.agg_functions);
  auto dissim_pairs = grid.dissim_pairs ? *grid.dissim_pairs
                                        : default_pairs(grid.agg_functions);

  std::optional<SdParams> best;
  double best_value = 0.0;
  for (const auto& [fs, gs] : sim_pairs)
    for (const auto& [fd, gd] : dissim_pairs) {
      if (fs == fd && gs == gd) continue; // sim and dissim must differ
      for (double alpha : grid.alpha_values) {
        double value = objective_of(pair_index(fs, gs), pair_index(fd, gd), alpha);
        if (!best || value > best_value) {
          best = SdParams{fs, gs, fd, gd, alpha};
          best_value = value;
        }
      }
    }
  if (!best) throw ConfigError("grid admits no sim/dissim combination");

  ScorerConfig config;
  config.method = variant;
  config.sd_params = *best;
  config.embedding_mode = mode;
  return config;
}

} // namespace rebutrank
