#include "rebutrank/textproc.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <json.hpp>

#include "rebutrank/porter.hpp"

namespace rebutrank {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

bool is_space_byte(unsigned char c) { return c < 0x80 && std::isspace(c); }
bool is_punct_byte(unsigned char c) { return c < 0x80 && std::ispunct(c); }

} // namespace

std::vector<std::string> tokenize_sentence(std::string_view sentence) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < sentence.size()) {
    while (i < sentence.size() &&
           is_space_byte(static_cast<unsigned char>(sentence[i])))
      ++i;
    std::size_t start = i;
    while (i < sentence.size() &&
           !is_space_byte(static_cast<unsigned char>(sentence[i])))
      ++i;
    if (i == start) break;
    std::size_t a = start, b = i;
    while (a < b && is_punct_byte(static_cast<unsigned char>(sentence[a]))) ++a;
    while (b > a && is_punct_byte(static_cast<unsigned char>(sentence[b - 1])))
      --b;
    if (a == b) continue;
    std::string tok;
    tok.reserve(b - a);
    for (std::size_t p = a; p < b; ++p) {
      unsigned char c = static_cast<unsigned char>(sentence[p]);
      tok += c < 0x80 ? static_cast<char>(std::tolower(c)) : sentence[p];
    }
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

TokenizedSpeech tokenize(const Speech& speech) {
  TokenizedSpeech tok;
  tok.speech_id = speech.id;
  tok.sentence_tokens.reserve(speech.sentences.size());
  tok.stemmed_tokens.reserve(speech.sentences.size());
  for (const auto& sentence : speech.sentences) {
    auto tokens = tokenize_sentence(sentence);
    std::vector<std::string> stems;
    stems.reserve(tokens.size());
    for (const auto& t : tokens) stems.push_back(porter_stem(t));
    tok.sentence_tokens.push_back(std::move(tokens));
    tok.stemmed_tokens.push_back(std::move(stems));
  }
  return tok;
}

Vocabulary build_vocabulary(const std::vector<TaskInstance>& train_instances,
                            const std::map<std::string, TokenizedSpeech>& tokenized,
                            double threshold, VocabCounting counting) {
  if (train_instances.empty())
    throw EmptyTrainingSet("no training instances for vocabulary construction");

  std::map<std::string, std::set<std::string>> stem_sets; // speech -> stems
  auto stems_of = [&](const std::string& id) -> const std::set<std::string>& {
    auto it = stem_sets.find(id);
    if (it != stem_sets.end()) return it->second;
    auto tit = tokenized.find(id);
    if (tit == tokenized.end())
      throw EmptyTrainingSet("speech " + id + " missing from tokenized map");
    std::set<std::string> stems;
    for (const auto& sentence : tit->second.stemmed_tokens)
      stems.insert(sentence.begin(), sentence.end());
    return stem_sets.emplace(id, std::move(stems)).first->second;
  };

  std::map<std::string, std::size_t> freq;
  std::size_t universe = 0;
  if (counting == VocabCounting::SpeechPairs) {
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& inst : train_instances)
      for (const auto& cand : inst.candidate_ids)
        pairs.emplace(inst.supporting_id, cand);
    universe = pairs.size();
    for (const auto& [sup, cand] : pairs) {
      // a term appears in a pair if it occurs in either member
      std::set<std::string> seen = stems_of(sup);
      const auto& cs = stems_of(cand);
      seen.insert(cs.begin(), cs.end());
      for (const auto& term : seen) ++freq[term];
    }
  } else {
    std::set<std::string> speech_ids;
    for (const auto& inst : train_instances) {
      speech_ids.insert(inst.supporting_id);
      speech_ids.insert(inst.candidate_ids.begin(), inst.candidate_ids.end());
    }
    universe = speech_ids.size();
    for (const auto& id : speech_ids)
      for (const auto& term : stems_of(id)) ++freq[term];
  }
  if (universe == 0)
    throw EmptyTrainingSet("training instances contain no speech pairs");

  Vocabulary vocab;
  vocab.threshold = threshold;
  vocab.pair_count = universe;
  for (const auto& [term, count] : freq) {
    if (static_cast<double>(count) >=
        threshold * static_cast<double>(universe)) {
      vocab.term_to_index.emplace(term, static_cast<int>(vocab.terms.size()));
      vocab.terms.push_back(term);
      vocab.doc_pair_frequency.emplace(term, count);
    }
  }
  return vocab;
}

namespace {

TermVector vector_from_counts(const std::map<int, std::size_t>& counts,
                              VectorKind kind) {
  TermVector v;
  v.kind = kind;
  std::size_t total = 0;
  for (const auto& [_, c] : counts) total += c;
  v.entries.reserve(counts.size());
  for (const auto& [index, c] : counts)
    v.entries.emplace_back(index,
                           kind == VectorKind::Binary
                               ? 1.0
                               : static_cast<double>(c) /
                                     static_cast<double>(total));
  return v;
}

} // namespace

TermVector term_vector(const TokenizedSpeech& tok, const Vocabulary& vocab,
                       VectorKind kind) {
  std::map<int, std::size_t> counts;
  for (const auto& sentence : tok.stemmed_tokens)
    for (const auto& stem : sentence) {
      auto it = vocab.term_to_index.find(stem);
      if (it != vocab.term_to_index.end()) ++counts[it->second];
    }
  return vector_from_counts(counts, kind);
}

TermVector sentence_term_vector(const std::vector<std::string>& stemmed_tokens,
                                const Vocabulary& vocab) {
  std::map<int, std::size_t> counts;
  for (const auto& stem : stemmed_tokens) {
    auto it = vocab.term_to_index.find(stem);
    if (it != vocab.term_to_index.end()) ++counts[it->second];
  }
  return vector_from_counts(counts, VectorKind::NormalizedFreq);
}

std::set<std::string> load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open stopword list: " + path.string());
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    if (line.empty()) continue;
    for (char& c : line)
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    words.insert(line);
  }
  return words;
}

NgramSet extract_ngrams(const TokenizedSpeech& tok,
                        const std::set<std::string>& stopwords) {
  NgramSet result;
  result.speech_id = tok.speech_id;
  std::set<std::vector<std::string>> candidates;
  for (const auto& sentence : tok.sentence_tokens) {
    std::size_t n = sentence.size();
    for (std::size_t len = 2; len <= 4; ++len) {
      if (n < len) break;
      for (std::size_t start = 0; start + len <= n; ++start) {
        bool clean = true;
        for (std::size_t p = start; p < start + len; ++p)
          if (stopwords.count(sentence[p])) {
            clean = false;
            break;
          }
        if (clean)
          candidates.insert(std::vector<std::string>(
              sentence.begin() + static_cast<std::ptrdiff_t>(start),
              sentence.begin() + static_cast<std::ptrdiff_t>(start + len)));
      }
    }
  }
  // drop everything contained in a longer candidate (containment is
  // transitive, so checking candidates equals checking retained ngrams)
  std::set<std::vector<std::string>> covered;
  for (const auto& g : candidates) {
    for (std::size_t len = 2; len < g.size(); ++len)
      for (std::size_t start = 0; start + len <= g.size(); ++start)
        covered.insert(std::vector<std::string>(
            g.begin() + static_cast<std::ptrdiff_t>(start),
            g.begin() + static_cast<std::ptrdiff_t>(start + len)));
  }
  for (const auto& g : candidates)
    if (!covered.count(g)) result.ngrams.insert(g);
  return result;
}

void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path) {
  ordered_json doc;
  doc["threshold"] = vocab.threshold;
  doc["pairs"] = vocab.pair_count;
  doc["terms"] = json::array();
  for (const auto& term : vocab.terms) {
    ordered_json entry;
    entry["term"] = term;
    entry["pair_freq"] = vocab.doc_pair_frequency.at(term);
    doc["terms"].push_back(entry);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write vocabulary: " + path.string());
  out << doc.dump(2) << "\n";
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open vocabulary: " + path.string());
  json doc;
  try {
    in >> doc;
    Vocabulary vocab;
    vocab.threshold = doc.at("threshold").get<double>();
    vocab.pair_count = doc.at("pairs").get<std::size_t>();
    for (const auto& entry : doc.at("terms")) {
      std::string term = entry.at("term").get<std::string>();
      vocab.term_to_index.emplace(term, static_cast<int>(vocab.terms.size()));
      vocab.doc_pair_frequency.emplace(term,
                                       entry.at("pair_freq").get<std::size_t>());
      vocab.terms.push_back(std::move(term));
    }
    return vocab;
  } catch (const json::exception& e) {
    throw IoError("bad vocabulary file " + path.string() + ": " + e.what());
  }
}

} // namespace rebutrank
