#include "fixtures.hpp"

#include <algorithm>
#include <stdexcept>

namespace testsupport {

using namespace rebutrank;

std::filesystem::path fixture_path(const std::string& name) {
#ifdef REBUTRANK_FIXTURE_DIR
  return std::filesystem::path(REBUTRANK_FIXTURE_DIR) / name;
#else
  return std::filesystem::path("tests/fixtures") / name;
#endif
}

std::filesystem::path make_temp_dir(const std::string& tag) {
  static Rng rng(0x7e57d1234abcdefULL);
  auto dir = std::filesystem::temp_directory_path() /
             ("rebutrank_" + tag + "_" + std::to_string(rng.next() % 1000000));
  std::filesystem::create_directories(dir);
  return dir;
}

Speech make_speech(std::string id, std::string motion, Stance stance,
                   std::string author, std::vector<std::string> sentences,
                   std::optional<std::string> counter_of,
                   std::optional<CounterKind> kind) {
  Speech sp;
  sp.id = std::move(id);
  sp.motion_id = std::move(motion);
  sp.stance = stance;
  sp.author_id = std::move(author);
  sp.sentences = std::move(sentences);
  sp.counter_of = std::move(counter_of);
  sp.counter_kind = kind;
  return sp;
}

Vocabulary toy_vocabulary(std::vector<std::string> terms) {
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  Vocabulary v;
  v.threshold = 0.01;
  v.pair_count = 1;
  v.terms = terms;
  for (std::size_t i = 0; i < v.terms.size(); ++i) {
    v.term_to_index[v.terms[i]] = static_cast<int>(i);
    v.doc_pair_frequency[v.terms[i]] = 1;
  }
  return v;
}

TermVector make_term_vector(std::vector<std::pair<int, double>> entries,
                            VectorKind kind) {
  std::sort(entries.begin(), entries.end());
  TermVector v;
  v.kind = kind;
  v.entries = std::move(entries);
  return v;
}

EmbeddingTable toy_embedding_table(int words, int dimension,
                                   std::uint64_t seed) {
  Rng rng(seed);
  EmbeddingTable table;
  table.dimension = dimension;
  for (int w = 0; w < words; ++w) {
    Eigen::VectorXd v(dimension);
    for (int d = 0; d < dimension; ++d) v(d) = 2.0 * rng.next_double() - 1.0;
    table.vectors.emplace("w" + std::to_string(w), std::move(v));
  }
  return table;
}

WordDistribution random_distribution(Rng& rng, int max_points, int dimension) {
  int n = rng.next_int(1, max_points);
  WordDistribution dist;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd p(dimension);
    for (int d = 0; d < dimension; ++d) p(d) = 2.0 * rng.next_double() - 1.0;
    double w = rng.next_double() + 0.05;
    dist.points.emplace_back(std::move(p), w);
    total += w;
  }
  for (auto& [_, w] : dist.points) w /= total;
  return dist;
}

TermVector random_binary_vector(Rng& rng, int vocab_size, double density) {
  std::vector<std::pair<int, double>> entries;
  for (int i = 0; i < vocab_size; ++i)
    if (rng.next_double() < density) entries.emplace_back(i, 1.0);
  return make_term_vector(std::move(entries), VectorKind::Binary);
}

std::vector<int> dense_binary(const TermVector& v, int vocab_size) {
  std::vector<int> out(vocab_size, 0);
  for (const auto& [index, _] : v.entries) out[index] = 1;
  return out;
}

CorpusIndex synthetic_corpus(int motions) {
  std::vector<Speech> speeches;
  for (int m = 1; m <= motions; ++m) {
    std::string mid = "mot" + std::to_string(m);
    std::string topic = "topic" + std::to_string(m);
    std::string sup_id = mid + "_sup";
    speeches.push_back(make_speech(
        sup_id, mid, Stance::Supporting, mid + "_a1",
        {"We should adopt " + topic + " because it improves welfare.",
         "The evidence on " + topic + " is overwhelming."}));
    speeches.push_back(make_speech(
        mid + "_exp", mid, Stance::Opposing, mid + "_a2",
        {"The previous speaker said " + topic + " improves welfare.",
         "That claim about " + topic + " does not survive scrutiny."},
        sup_id, CounterKind::Explicit));
    speeches.push_back(make_speech(
        mid + "_imp", mid, Stance::Opposing, mid + "_a3",
        {"Welfare is not served by " + topic + " at all.",
         "Consider the costs of " + topic + " instead."},
        sup_id, CounterKind::Implicit));
    speeches.push_back(make_speech(
        mid + "_oth1", mid, Stance::Opposing, mid + "_a4",
        {"Liberty matters more than convenience.",
         "Budgets are finite and priorities compete."}));
    speeches.push_back(make_speech(
        mid + "_oth2", mid, Stance::Opposing, mid + "_a5",
        {"History counsels caution with sweeping reforms.",
         "Incremental change beats upheaval."}));
  }
  return build_index(std::move(speeches));
}

} // namespace testsupport
