#ifndef REBUTRANK_TEXTPROC_HPP
#define REBUTRANK_TEXTPROC_HPP

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rebutrank/corpus.hpp"

namespace rebutrank {

struct TokenizedSpeech {
  std::string speech_id;
  // one inner list per sentence; lowercase surface tokens
  std::vector<std::vector<std::string>> sentence_tokens;
  // same shape, Porter-stemmed
  std::vector<std::vector<std::string>> stemmed_tokens;
};

// Counting universe for the vocabulary frequency threshold.
enum class VocabCounting {
  SpeechPairs, // term counts once per (supporting, candidate) training pair
  PerSpeech,   // plain document frequency over distinct training speeches
};

struct Vocabulary {
  double threshold = 0.01;
  std::size_t pair_count = 0; // size of the counting universe
  std::vector<std::string> terms; // sorted; index = position
  std::map<std::string, int> term_to_index;
  std::map<std::string, std::size_t> doc_pair_frequency; // retained terms only
};

enum class VectorKind { NormalizedFreq, Binary };

// Sparse term vector over a Vocabulary; entries sorted by index.
struct TermVector {
  VectorKind kind = VectorKind::NormalizedFreq;
  std::vector<std::pair<int, double>> entries;

  bool empty() const { return entries.empty(); }
};

struct NgramSet {
  std::string speech_id;
  std::set<std::vector<std::string>> ngrams; // token tuples, length 2..4
};

// Lowercases, splits on whitespace, strips leading/trailing punctuation.
std::vector<std::string> tokenize_sentence(std::string_view sentence);

TokenizedSpeech tokenize(const Speech& speech);

Vocabulary build_vocabulary(const std::vector<TaskInstance>& train_instances,
                            const std::map<std::string, TokenizedSpeech>& tokenized,
                            double threshold = 0.01,
                            VocabCounting counting = VocabCounting::SpeechPairs);

TermVector term_vector(const TokenizedSpeech& tok, const Vocabulary& vocab,
                       VectorKind kind);

// NormalizedFreq vector of a single sentence's stemmed tokens.
TermVector sentence_term_vector(const std::vector<std::string>& stemmed_tokens,
                                const Vocabulary& vocab);

std::set<std::string> load_stopwords(const std::filesystem::path& path);

// Maximal stopword-free ngrams (length 2..4) over unstemmed lowercase tokens;
// windows never cross sentence boundaries.
NgramSet extract_ngrams(const TokenizedSpeech& tok,
                        const std::set<std::string>& stopwords);

void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path);
Vocabulary load_vocabulary(const std::filesystem::path& path);

} // namespace rebutrank

#endif
