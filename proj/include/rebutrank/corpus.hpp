#ifndef REBUTRANK_CORPUS_HPP
#define REBUTRANK_CORPUS_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rebutrank/errors.hpp"

namespace rebutrank {

enum class Stance { Supporting, Opposing };
enum class CounterKind { Explicit, Implicit };
enum class Setting { All, Explicit, Implicit };
enum class CorpusFormat { Csv, Jsonl };

const char* to_string(Stance s);
const char* to_string(CounterKind k);
const char* to_string(Setting s);
// lowercase form used in file names and flag values
const char* setting_token(Setting s);
Stance parse_stance(const std::string& s);
CounterKind parse_counter_kind(const std::string& s);
Setting parse_setting(const std::string& s);
CorpusFormat parse_corpus_format(const std::string& s);

// One transcript. Sentences are stored raw, one per line of the source
// transcript; no further segmentation happens downstream.
struct Speech {
  std::string id;
  std::string motion_id;
  Stance stance = Stance::Supporting;
  std::string author_id;
  std::vector<std::string> sentences;
  std::optional<std::string> counter_of;
  std::optional<CounterKind> counter_kind;
};

struct MotionSpeeches {
  std::vector<std::string> supporting; // sorted by id
  std::vector<std::string> opposing;   // sorted by id
};

// Immutable after load; safe for concurrent reads.
struct CorpusIndex {
  std::map<std::string, Speech> speeches;
  std::map<std::string, MotionSpeeches> by_motion;
  // supporting id -> (opposing id, kind), sorted by opposing id
  std::map<std::string, std::vector<std::pair<std::string, CounterKind>>> counters_of;
};

struct SplitAssignment {
  std::uint64_t seed = 0;
  std::set<std::string> train;
  std::set<std::string> validation;
  std::set<std::string> test;
};

struct TaskInstance {
  std::string supporting_id;
  std::vector<std::string> candidate_ids; // sorted lexicographically
  std::set<std::string> gold_ids;         // subset of candidate_ids
  Setting setting = Setting::All;
};

CorpusIndex load_corpus(const std::filesystem::path& path, CorpusFormat format);
void save_corpus(const CorpusIndex& index, const std::filesystem::path& path,
                 CorpusFormat format);

// 60/20/20 by motion count, largest remainder, ties toward train then
// validation. Deterministic in (motion set, seed).
SplitAssignment split_motions(const CorpusIndex& index, std::uint64_t seed);

std::vector<TaskInstance> build_instances(const CorpusIndex& index,
                                          const std::set<std::string>& motions,
                                          Setting setting);

void save_split(const SplitAssignment& split, const std::filesystem::path& path);
SplitAssignment load_split(const std::filesystem::path& path);

// Validates every Speech invariant and cross-reference; load_corpus calls this
// before returning. Exposed so synthetic corpora in tests go through the same
// checks.
CorpusIndex build_index(std::vector<Speech> speeches);

} // namespace rebutrank

#endif
