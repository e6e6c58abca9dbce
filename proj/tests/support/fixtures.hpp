#ifndef TESTS_SUPPORT_FIXTURES_HPP
#define TESTS_SUPPORT_FIXTURES_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rebutrank/corpus.hpp"
#include "rebutrank/embeddings.hpp"
#include "rebutrank/scorers.hpp"
#include "rebutrank/textproc.hpp"

namespace testsupport {

std::filesystem::path fixture_path(const std::string& name);

// Fresh empty directory under the system temp dir; caller owns cleanup (or
// doesn't — the OS temp dir is fair game).
std::filesystem::path make_temp_dir(const std::string& tag);

rebutrank::Speech make_speech(
    std::string id, std::string motion, rebutrank::Stance stance,
    std::string author, std::vector<std::string> sentences,
    std::optional<std::string> counter_of = std::nullopt,
    std::optional<rebutrank::CounterKind> kind = std::nullopt);

// Vocabulary over the given stems, every term retained.
rebutrank::Vocabulary toy_vocabulary(std::vector<std::string> terms);

rebutrank::TermVector make_term_vector(
    std::vector<std::pair<int, double>> entries,
    rebutrank::VectorKind kind = rebutrank::VectorKind::NormalizedFreq);

// Deterministic in-memory table: words w0..w{n-1} with fixed pseudo-random
// coordinates in [-1, 1].
rebutrank::EmbeddingTable toy_embedding_table(int words, int dimension,
                                              std::uint64_t seed = 11);

rebutrank::WordDistribution random_distribution(Rng& rng, int max_points,
                                                int dimension);

// Random sorted binary TermVector over [0, vocab_size); density in (0, 1).
rebutrank::TermVector random_binary_vector(Rng& rng, int vocab_size,
                                           double density);

// Dense 0/1 expansion of a binary TermVector.
std::vector<int> dense_binary(const rebutrank::TermVector& v, int vocab_size);

// One corpus with `motions` copies of the standard shape: one supporting
// speech, its explicit counter, its implicit counter, and two unrelated
// opposing speeches, all by distinct authors.
rebutrank::CorpusIndex synthetic_corpus(int motions);

} // namespace testsupport

#endif
