#ifndef REBUTRANK_EMBEDDINGS_HPP
#define REBUTRANK_EMBEDDINGS_HPP

#include <Eigen/Core>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rebutrank {

// Immutable after load; concurrent lookup is safe.
struct EmbeddingTable {
  int dimension = 0;
  std::map<std::string, Eigen::VectorXd> vectors;
};

// nBOW distribution: positive weights summing to 1, all points of one
// dimension.
struct WordDistribution {
  std::vector<std::pair<Eigen::VectorXd, double>> points;
};

// word2vec text format: optional "count dim" header, then "word v1 ... vd"
// lines. Duplicate words keep the first occurrence. key_prefix is stripped
// from the start of each word when present (ConceptNet releases use /c/en/).
EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               const std::string& key_prefix = "");

void save_embeddings(const EmbeddingTable& table,
                     const std::filesystem::path& path);

// Unweighted mean over in-table tokens with multiplicity; nullopt when no
// token is in the table.
std::optional<Eigen::VectorXd> centroid(const std::vector<std::string>& tokens,
                                        const EmbeddingTable& table);

// One point per distinct in-table token (lexicographic order), weight
// proportional to count; nullopt when empty.
std::optional<WordDistribution> word_distribution(
    const std::vector<std::string>& tokens, const EmbeddingTable& table);

} // namespace rebutrank

#endif
