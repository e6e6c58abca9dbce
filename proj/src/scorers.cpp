#include "rebutrank/scorers.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "rebutrank/transport.hpp"

namespace rebutrank {

namespace {

using nlohmann::json;

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

} // namespace

const char* to_string(Method m) { return method_display_name(m); }

const char* to_string(Agg a) {
  switch (a) {
    case Agg::Min: return "min";
    case Agg::Max: return "max";
    case Agg::Avg: return "avg";
    default: return "product";
  }
}

const char* to_string(EmbeddingMode m) {
  return m == EmbeddingMode::Centroid ? "centroid" : "wmd";
}

const char* method_token(Method m) {
  switch (m) {
    case Method::Cos: return "cos";
    case Method::JS: return "js";
    case Method::SD: return "sd";
    case Method::SDe: return "sde";
    case Method::Ngrams: return "ngrs";
    case Method::MI: return "mi";
    case Method::CMI: return "cmi";
    default: return "external";
  }
}

const char* method_display_name(Method m) {
  switch (m) {
    case Method::Cos: return "Cos";
    case Method::JS: return "JS";
    case Method::SD: return "SD";
    case Method::SDe: return "SD-e";
    case Method::Ngrams: return "ngrs";
    case Method::MI: return "MI";
    case Method::CMI: return "c-MI";
    default: return "External";
  }
}

Method parse_method(const std::string& s) {
  std::string v = lower(s);
  if (v == "cos") return Method::Cos;
  if (v == "js") return Method::JS;
  if (v == "sd") return Method::SD;
  if (v == "sde" || v == "sd-e") return Method::SDe;
  if (v == "ngrs" || v == "ngrams") return Method::Ngrams;
  if (v == "mi") return Method::MI;
  if (v == "cmi" || v == "c-mi") return Method::CMI;
  if (v == "external") return Method::External;
  throw ConfigError("unknown method: " + s);
}

Agg parse_agg(const std::string& s) {
  std::string v = lower(s);
  if (v == "min") return Agg::Min;
  if (v == "max") return Agg::Max;
  if (v == "avg") return Agg::Avg;
  if (v == "product") return Agg::Product;
  throw ConfigError("unknown aggregation function: " + s);
}

EmbeddingMode parse_embedding_mode(const std::string& s) {
  std::string v = lower(s);
  if (v == "centroid") return EmbeddingMode::Centroid;
  if (v == "wmd") return EmbeddingMode::Wmd;
  throw ConfigError("unknown embedding mode: " + s);
}

void validate_scorer_config(const ScorerConfig& config) {
  bool needs_sd = config.method == Method::SD || config.method == Method::SDe;
  if (needs_sd != config.sd_params.has_value())
    throw ConfigError(std::string("sd_params must be given for SD/SD-e and "
                                  "only for them (method: ") +
                      method_display_name(config.method) + ")");
  if (config.sd_params) {
    const SdParams& p = *config.sd_params;
    if (p.f_sim == p.f_dissim && p.g_sim == p.g_dissim)
      throw ConfigError("sim and dissim aggregator pairs must differ");
    if (!(p.alpha >= 0.0 && p.alpha <= 1.0))
      throw ConfigError("alpha must lie in [0, 1]");
  }
  if (config.method == Method::External && !config.external_path)
    throw ConfigError("external method needs a score file path");
}

const SpeechFeatures& FeatureStore::at(const std::string& id) const {
  auto it = by_id.find(id);
  if (it == by_id.end()) throw Error("no features for speech " + id);
  return it->second;
}

FeatureStore build_features(const CorpusIndex& index,
                            const std::set<std::string>& speech_ids,
                            const Vocabulary& vocab,
                            const std::set<std::string>& stopwords,
                            const EmbeddingTable* table,
                            const FeatureOptions& options) {
  FeatureStore store;
  store.vocabulary_size = vocab.terms.size();
  store.has_embeddings = table != nullptr;
  for (const auto& id : speech_ids) {
    auto sit = index.speeches.find(id);
    if (sit == index.speeches.end())
      throw Error("speech " + id + " not in corpus");
    SpeechFeatures f;
    f.tokens = tokenize(sit->second);
    f.freq_vector = term_vector(f.tokens, vocab, VectorKind::NormalizedFreq);
    f.binary_vector = term_vector(f.tokens, vocab, VectorKind::Binary);
    if (options.sentence_level) {
      for (const auto& stems : f.tokens.stemmed_tokens)
        f.sentence_vectors.push_back(sentence_term_vector(stems, vocab));
      if (table) {
        for (const auto& tokens : f.tokens.sentence_tokens) {
          f.sentence_centroids.push_back(centroid(tokens, *table));
          f.sentence_distributions.push_back(word_distribution(tokens, *table));
        }
      }
    }
    if (options.ngrams) f.ngrams = extract_ngrams(f.tokens, stopwords);
    store.by_id.emplace(id, std::move(f));
  }
  return store;
}

double cosine_similarity(const TermVector& a, const TermVector& b) {
  if (a.empty() || b.empty()) return 0.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.entries.size() && j < b.entries.size()) {
    if (a.entries[i].first == b.entries[j].first) {
      dot += a.entries[i].second * b.entries[j].second;
      ++i, ++j;
    } else if (a.entries[i].first < b.entries[j].first) {
      ++i;
    } else {
      ++j;
    }
  }
  for (const auto& [_, w] : a.entries) na += w * w;
  for (const auto& [_, w] : b.entries) nb += w * w;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double js_similarity(const TermVector& a, const TermVector& b) {
  if (a.empty() || b.empty()) return 0.0;
  // JSD(p, q) = H(m) - (H(p) + H(q)) / 2 expanded termwise over the union
  // support; base-2 logs keep it in [0, 1].
  double jsd = 0.0;
  std::size_t i = 0, j = 0;
  auto term = [](double p, double m) { return p > 0.0 ? p * std::log2(p / m) : 0.0; };
  while (i < a.entries.size() || j < b.entries.size()) {
    double p = 0.0, q = 0.0;
    bool take_a = j == b.entries.size() ||
                  (i < a.entries.size() &&
                   a.entries[i].first <= b.entries[j].first);
    bool take_b = i == a.entries.size() ||
                  (j < b.entries.size() &&
                   b.entries[j].first <= a.entries[i].first);
    if (take_a) p = a.entries[i++].second;
    if (take_b) q = b.entries[j++].second;
    double m = 0.5 * (p + q);
    jsd += 0.5 * term(p, m) + 0.5 * term(q, m);
  }
  return 1.0 - jsd;
}

double sentence_similarity_word(const TermVector& s, const TermVector& t) {
  double l1 = 0.0;
  std::size_t i = 0, j = 0;
  while (i < s.entries.size() || j < t.entries.size()) {
    double p = 0.0, q = 0.0;
    bool take_s = j == t.entries.size() ||
                  (i < s.entries.size() &&
                   s.entries[i].first <= t.entries[j].first);
    bool take_t = i == s.entries.size() ||
                  (j < t.entries.size() &&
                   t.entries[j].first <= s.entries[i].first);
    if (take_s) p = s.entries[i++].second;
    if (take_t) q = t.entries[j++].second;
    l1 += std::abs(p - q);
  }
  return 1.0 / (1.0 + l1);
}

double sentence_similarity_embedding(
    const std::optional<Eigen::VectorXd>& s_centroid,
    const std::optional<WordDistribution>& s_dist,
    const std::optional<Eigen::VectorXd>& t_centroid,
    const std::optional<WordDistribution>& t_dist, EmbeddingMode mode) {
  if (mode == EmbeddingMode::Centroid) {
    if (!s_centroid || !t_centroid) return 0.0;
    return 1.0 / (1.0 + (*s_centroid - *t_centroid).norm());
  }
  if (!s_dist || !t_dist) return 0.0;
  return 1.0 / (1.0 + wmd(*s_dist, *t_dist));
}

namespace {

double fold(const double* values, Eigen::Index count, Eigen::Index stride,
            Agg agg) {
  if (agg == Agg::Product) {
    bool positive = true;
    for (Eigen::Index i = 0; i < count; ++i)
      if (values[i * stride] <= 0.0) {
        positive = false;
        break;
      }
    if (positive) {
      double log_sum = 0.0;
      for (Eigen::Index i = 0; i < count; ++i)
        log_sum += std::log(std::max(values[i * stride], 1e-300));
      return std::exp(log_sum);
    }
    double prod = 1.0;
    for (Eigen::Index i = 0; i < count; ++i) prod *= values[i * stride];
    return prod;
  }
  double acc = values[0];
  if (agg == Agg::Avg) {
    for (Eigen::Index i = 1; i < count; ++i) acc += values[i * stride];
    return acc / static_cast<double>(count);
  }
  for (Eigen::Index i = 1; i < count; ++i) {
    double v = values[i * stride];
    acc = agg == Agg::Min ? std::min(acc, v) : std::max(acc, v);
  }
  return acc;
}

} // namespace

double aggregate(const Eigen::MatrixXd& sim_matrix, Agg f, Agg g) {
  if (sim_matrix.rows() == 0 || sim_matrix.cols() == 0)
    throw EmptyMatrix("aggregate over an empty similarity matrix");
  Eigen::VectorXd u(sim_matrix.rows());
  for (Eigen::Index i = 0; i < sim_matrix.rows(); ++i) {
    // row i is strided in the column-major storage
    u[i] = fold(sim_matrix.data() + i, sim_matrix.cols(), sim_matrix.rows(), f);
  }
  return fold(u.data(), u.size(), 1, g);
}

Eigen::MatrixXd word_similarity_matrix(const SpeechFeatures& sup,
                                       const SpeechFeatures& cand) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(sup.sentence_vectors.size()),
                    static_cast<Eigen::Index>(cand.sentence_vectors.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = sentence_similarity_word(
          sup.sentence_vectors[static_cast<std::size_t>(i)],
          cand.sentence_vectors[static_cast<std::size_t>(j)]);
  return m;
}

Eigen::MatrixXd embedding_similarity_matrix(const SpeechFeatures& sup,
                                            const SpeechFeatures& cand,
                                            EmbeddingMode mode) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(sup.sentence_centroids.size()),
                    static_cast<Eigen::Index>(cand.sentence_centroids.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      auto si = static_cast<std::size_t>(i);
      auto sj = static_cast<std::size_t>(j);
      m(i, j) = sentence_similarity_embedding(
          sup.sentence_centroids[si], sup.sentence_distributions[si],
          cand.sentence_centroids[sj], cand.sentence_distributions[sj], mode);
    }
  return m;
}

namespace {

ScoredInstance make_scored(const TaskInstance& instance,
                           std::map<std::string, double> scores) {
  ScoredInstance out;
  out.supporting_id = instance.supporting_id;
  out.ranking = rank_candidates(scores);
  out.scores = std::move(scores);
  return out;
}

} // namespace

ScoredInstance score_cosine(const TaskInstance& instance,
                            const FeatureStore& features) {
  const SpeechFeatures& sup = features.at(instance.supporting_id);
  std::map<std::string, double> scores;
  for (const auto& cand : instance.candidate_ids)
    scores[cand] = cosine_similarity(sup.freq_vector,
                                     features.at(cand).freq_vector);
  return make_scored(instance, std::move(scores));
}

ScoredInstance score_js(const TaskInstance& instance,
                        const FeatureStore& features) {
  const SpeechFeatures& sup = features.at(instance.supporting_id);
  std::map<std::string, double> scores;
  for (const auto& cand : instance.candidate_ids)
    scores[cand] = js_similarity(sup.freq_vector, features.at(cand).freq_vector);
  return make_scored(instance, std::move(scores));
}

ScoredInstance score_sd(const TaskInstance& instance,
                        const FeatureStore& features,
                        const ScorerConfig& config) {
  validate_scorer_config(config);
  if (!features.has_embeddings)
    throw ConfigError("SD scoring needs an embedding table");
  const SdParams& p = *config.sd_params;
  const SpeechFeatures& sup = features.at(instance.supporting_id);
  std::map<std::string, double> scores;
  for (const auto& cand_id : instance.candidate_ids) {
    const SpeechFeatures& cand = features.at(cand_id);
    Eigen::MatrixXd e =
        embedding_similarity_matrix(sup, cand, config.embedding_mode);
    double sim = aggregate(e, p.f_sim, p.g_sim);
    double dissim = aggregate(e, p.f_dissim, p.g_dissim);
    if (config.method == Method::SD) {
      Eigen::MatrixXd w = word_similarity_matrix(sup, cand);
      sim += aggregate(w, p.f_sim, p.g_sim);
      dissim += aggregate(w, p.f_dissim, p.g_dissim);
    }
    scores[cand_id] = p.alpha * sim - (1.0 - p.alpha) * dissim;
  }
  return make_scored(instance, std::move(scores));
}

ScoredInstance score_ngrams(const TaskInstance& instance,
                            const FeatureStore& features) {
  const SpeechFeatures& sup = features.at(instance.supporting_id);
  std::map<std::string, double> scores;
  for (const auto& cand_id : instance.candidate_ids) {
    const SpeechFeatures& cand = features.at(cand_id);
    double total = 0.0;
    for (const auto& g : cand.ngrams.ngrams) {
      if (!sup.ngrams.ngrams.count(g)) continue;
      bool exclusive = true;
      for (const auto& other_id : instance.candidate_ids) {
        if (other_id == cand_id) continue;
        if (features.at(other_id).ngrams.ngrams.count(g)) {
          exclusive = false;
          break;
        }
      }
      if (exclusive) total += static_cast<double>(g.size());
    }
    scores[cand_id] = total;
  }
  return make_scored(instance, std::move(scores));
}

namespace {

double mi_from_counts(const std::array<std::array<double, 2>, 2>& n) {
  double total = n[0][0] + n[0][1] + n[1][0] + n[1][1];
  if (total <= 0.0) return 0.0;
  double px[2] = {(n[0][0] + n[0][1]) / total, (n[1][0] + n[1][1]) / total};
  double py[2] = {(n[0][0] + n[1][0]) / total, (n[0][1] + n[1][1]) / total};
  double mi = 0.0;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      double pxy = n[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] / total;
      if (pxy > 0.0) mi += pxy * std::log2(pxy / (px[x] * py[y]));
    }
  return std::max(mi, 0.0);
}

} // namespace

double mutual_information_bits(const TermVector& s, const TermVector& c,
                               std::size_t vocabulary_size) {
  if (vocabulary_size == 0) return 0.0;
  double n11 = 0.0;
  std::size_t i = 0, j = 0;
  while (i < s.entries.size() && j < c.entries.size()) {
    if (s.entries[i].first == c.entries[j].first) {
      n11 += 1.0;
      ++i, ++j;
    } else if (s.entries[i].first < c.entries[j].first) {
      ++i;
    } else {
      ++j;
    }
  }
  double ns = static_cast<double>(s.entries.size());
  double nc = static_cast<double>(c.entries.size());
  double v = static_cast<double>(vocabulary_size);
  std::array<std::array<double, 2>, 2> n{};
  n[1][1] = n11;
  n[1][0] = ns - n11;
  n[0][1] = nc - n11;
  n[0][0] = v - ns - nc + n11;
  return mi_from_counts(n);
}

ScoredInstance score_mi(const TaskInstance& instance,
                        const FeatureStore& features) {
  const SpeechFeatures& sup = features.at(instance.supporting_id);
  std::map<std::string, double> scores;
  for (const auto& cand : instance.candidate_ids)
    scores[cand] = mutual_information_bits(
        sup.binary_vector, features.at(cand).binary_vector,
        features.vocabulary_size);
  return make_scored(instance, std::move(scores));
}

ScoredInstance score_cmi(const TaskInstance& instance,
                         const FeatureStore& features) {
  std::size_t v = features.vocabulary_size;
  if (instance.candidate_ids.size() < 2 || v == 0) return score_mi(instance, features);

  const SpeechFeatures& sup = features.at(instance.supporting_id);
  std::vector<char> s_dense(v, 0);
  for (const auto& [idx, _] : sup.binary_vector.entries)
    s_dense[static_cast<std::size_t>(idx)] = 1;

  // presence totals across all candidates; per-candidate "others" counts
  // follow by subtraction
  std::vector<int> total_ones(v, 0);
  for (const auto& cand : instance.candidate_ids)
    for (const auto& [idx, _] : features.at(cand).binary_vector.entries)
      ++total_ones[static_cast<std::size_t>(idx)];

  int n_cand = static_cast<int>(instance.candidate_ids.size());
  std::map<std::string, double> scores;
  for (const auto& cand_id : instance.candidate_ids) {
    std::vector<char> c_dense(v, 0);
    for (const auto& [idx, _] : features.at(cand_id).binary_vector.entries)
      c_dense[static_cast<std::size_t>(idx)] = 1;
    int n_others = n_cand - 1;
    // sample universe: (other candidate j, vocabulary index i), partitioned
    // by the other's value k at i; at fixed i that contributes m_k(i) copies
    // of the (s_i, c_i) observation to partition k
    std::array<std::array<double, 2>, 2> part0{}, part1{};
    for (std::size_t i = 0; i < v; ++i) {
      int ones = total_ones[i] - (c_dense[i] ? 1 : 0);
      int zeros = n_others - ones;
      auto x = static_cast<std::size_t>(s_dense[i]);
      auto y = static_cast<std::size_t>(c_dense[i]);
      part0[x][y] += static_cast<double>(zeros);
      part1[x][y] += static_cast<double>(ones);
    }
    double total = static_cast<double>(n_others) * static_cast<double>(v);
    double n0 = part0[0][0] + part0[0][1] + part0[1][0] + part0[1][1];
    double n1 = total - n0;
    double score = 0.0;
    if (n0 > 0.0) score += (n0 / total) * mi_from_counts(part0);
    if (n1 > 0.0) score += (n1 / total) * mi_from_counts(part1);
    scores[cand_id] = score;
  }
  return make_scored(instance, std::move(scores));
}

ExternalScores load_external_scores(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open score file: " + path.string());
  ExternalScores scores;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string where = path.string() + ":" + std::to_string(line_no);
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw MalformedScoreFile(where + ": " + e.what());
    }
    std::string sup, cand;
    double value;
    try {
      sup = rec.at("supporting_id").get<std::string>();
      cand = rec.at("candidate_id").get<std::string>();
      value = rec.at("score").get<double>();
    } catch (const json::exception& e) {
      throw MalformedScoreFile(where + ": " + e.what());
    }
    if (!std::isfinite(value))
      throw MalformedScoreFile(where + ": non-finite score");
    auto [it, inserted] = scores.by_pair.emplace(std::make_pair(sup, cand), value);
    if (!inserted && it->second != value)
      throw MalformedScoreFile(where + ": conflicting score for (" + sup +
                               ", " + cand + ")");
  }
  return scores;
}

ScoredInstance score_external(const TaskInstance& instance,
                              const ExternalScores& scores) {
  std::map<std::string, double> out;
  for (const auto& cand : instance.candidate_ids) {
    auto it = scores.by_pair.find({instance.supporting_id, cand});
    if (it == scores.by_pair.end())
      throw MissingScore("no score for (" + instance.supporting_id + ", " +
                         cand + ")");
    out[cand] = it->second;
  }
  return make_scored(instance, std::move(out));
}

ScoredInstance score_instance(const TaskInstance& instance,
                              const FeatureStore& features,
                              const ScorerConfig& config,
                              const ExternalScores* external) {
  switch (config.method) {
    case Method::Cos: return score_cosine(instance, features);
    case Method::JS: return score_js(instance, features);
    case Method::SD:
    case Method::SDe: return score_sd(instance, features, config);
    case Method::Ngrams: return score_ngrams(instance, features);
    case Method::MI: return score_mi(instance, features);
    case Method::CMI: return score_cmi(instance, features);
    case Method::External:
      if (!external) throw ConfigError("external scores were not loaded");
      return score_external(instance, *external);
  }
  throw ConfigError("unhandled method");
}

std::vector<std::string> rank_candidates(
    const std::map<std::string, double>& scores) {
  std::vector<std::string> ranking;
  ranking.reserve(scores.size());
  for (const auto& [id, _] : scores) ranking.push_back(id);
  std::stable_sort(ranking.begin(), ranking.end(),
                   [&](const std::string& a, const std::string& b) {
                     return scores.at(a) > scores.at(b);
                   });
  return ranking;
}

} // namespace rebutrank
