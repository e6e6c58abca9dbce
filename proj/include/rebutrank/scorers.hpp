#ifndef REBUTRANK_SCORERS_HPP
#define REBUTRANK_SCORERS_HPP

#include <Eigen/Core>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rebutrank/corpus.hpp"
#include "rebutrank/embeddings.hpp"
#include "rebutrank/textproc.hpp"

namespace rebutrank {

enum class Method { Cos, JS, SD, SDe, Ngrams, MI, CMI, External };
enum class Agg { Min, Max, Avg, Product };
enum class EmbeddingMode { Centroid, Wmd };

const char* to_string(Method m);
const char* to_string(Agg a);
const char* to_string(EmbeddingMode m);
Method parse_method(const std::string& s);
Agg parse_agg(const std::string& s);
EmbeddingMode parse_embedding_mode(const std::string& s);

// Canonical lowercase token used in report file names (js, sde, cmi, ...).
const char* method_token(Method m);
// Display name used in tables (JS, SD-e, c-MI, ...).
const char* method_display_name(Method m);

struct SdParams {
  Agg f_sim = Agg::Max;
  Agg g_sim = Agg::Avg;
  Agg f_dissim = Agg::Min;
  Agg g_dissim = Agg::Avg;
  double alpha = 0.5;
};

struct ScorerConfig {
  Method method = Method::JS;
  std::optional<SdParams> sd_params; // present iff method is SD or SDe
  EmbeddingMode embedding_mode = EmbeddingMode::Centroid;
  std::optional<std::string> external_path;
};

// Checks the sd_params presence rule and the sim != dissim constraint.
void validate_scorer_config(const ScorerConfig& config);

struct ScoredInstance {
  std::string supporting_id;
  std::map<std::string, double> scores; // exactly the candidate ids
  std::vector<std::string> ranking;     // descending score, ties by id
};

// Everything the scorers need about one speech, precomputed once.
struct SpeechFeatures {
  TokenizedSpeech tokens;
  TermVector freq_vector;   // NormalizedFreq, whole speech
  TermVector binary_vector; // Binary, whole speech
  std::vector<TermVector> sentence_vectors; // NormalizedFreq per sentence
  NgramSet ngrams;
  // embedding side; empty when no table was supplied
  std::vector<std::optional<Eigen::VectorXd>> sentence_centroids;
  std::vector<std::optional<WordDistribution>> sentence_distributions;
};

struct FeatureStore {
  std::map<std::string, SpeechFeatures> by_id;
  std::size_t vocabulary_size = 0;
  bool has_embeddings = false;

  const SpeechFeatures& at(const std::string& id) const;
};

struct FeatureOptions {
  bool sentence_level = false; // sentence vectors + embedding features
  bool ngrams = false;
};

FeatureStore build_features(const CorpusIndex& index,
                            const std::set<std::string>& speech_ids,
                            const Vocabulary& vocab,
                            const std::set<std::string>& stopwords,
                            const EmbeddingTable* table,
                            const FeatureOptions& options);

// --- pairwise similarity primitives -----------------------------------------

double cosine_similarity(const TermVector& a, const TermVector& b);

// 1 - JSD(p, q) with base-2 logs; in [0, 1]; 0 when either operand is empty.
double js_similarity(const TermVector& a, const TermVector& b);

// 1 / (1 + L1): empty-vs-empty is 1; an empty side is the zero vector.
double sentence_similarity_word(const TermVector& s, const TermVector& t);

double sentence_similarity_embedding(
    const std::optional<Eigen::VectorXd>& s_centroid,
    const std::optional<WordDistribution>& s_dist,
    const std::optional<Eigen::VectorXd>& t_centroid,
    const std::optional<WordDistribution>& t_dist, EmbeddingMode mode);

// u_i = f over row i, result = g over the u_i. Product aggregation runs in
// log-space for positive inputs with a 1e-300 floor.
double aggregate(const Eigen::MatrixXd& sim_matrix, Agg f, Agg g);

// Sentence-pair similarity matrices for one (supporting, candidate) pair;
// rows are supporting sentences, columns candidate sentences.
Eigen::MatrixXd word_similarity_matrix(const SpeechFeatures& sup,
                                       const SpeechFeatures& cand);
Eigen::MatrixXd embedding_similarity_matrix(const SpeechFeatures& sup,
                                            const SpeechFeatures& cand,
                                            EmbeddingMode mode);

// --- per-instance scorers ----------------------------------------------------

ScoredInstance score_cosine(const TaskInstance& instance,
                            const FeatureStore& features);
ScoredInstance score_js(const TaskInstance& instance,
                        const FeatureStore& features);
ScoredInstance score_sd(const TaskInstance& instance,
                        const FeatureStore& features,
                        const ScorerConfig& config);
ScoredInstance score_ngrams(const TaskInstance& instance,
                            const FeatureStore& features);
ScoredInstance score_mi(const TaskInstance& instance,
                        const FeatureStore& features);
ScoredInstance score_cmi(const TaskInstance& instance,
                         const FeatureStore& features);

// Binary-vector mutual information in bits over vocabulary indices.
double mutual_information_bits(const TermVector& s, const TermVector& c,
                               std::size_t vocabulary_size);

struct ExternalScores {
  std::map<std::pair<std::string, std::string>, double> by_pair;
};

// JSONL records {"supporting_id", "candidate_id", "score"}; duplicate pairs
// with conflicting scores are rejected.
ExternalScores load_external_scores(const std::filesystem::path& path);

ScoredInstance score_external(const TaskInstance& instance,
                              const ExternalScores& scores);

ScoredInstance score_instance(const TaskInstance& instance,
                              const FeatureStore& features,
                              const ScorerConfig& config,
                              const ExternalScores* external = nullptr);

// Descending score; equal scores resolve lexicographically by candidate id.
std::vector<std::string> rank_candidates(
    const std::map<std::string, double>& scores);

} // namespace rebutrank

#endif
