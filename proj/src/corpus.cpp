#include "rebutrank/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace rebutrank {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Sentences travel inside one CSV field, separated by the two characters
// backslash + 'n', so a row never spans physical lines.
std::vector<std::string> split_transcript(const std::string& field) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = field.find("\\n", pos);
    if (next == std::string::npos) {
      out.push_back(field.substr(pos));
      return out;
    }
    out.push_back(field.substr(pos, next - pos));
    pos = next + 2;
  }
}

std::string join_transcript(const std::vector<std::string>& sentences) {
  std::string out;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (i) out += "\\n";
    out += sentences[i];
  }
  return out;
}

// RFC-4180 style: quoted fields may contain commas, doubled quotes, and
// newlines. Returns one record per call; empty optional at EOF.
std::optional<std::vector<std::string>> read_csv_record(std::istream& in,
                                                        std::size_t& line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool any = false;
  int c;
  while ((c = in.get()) != EOF) {
    any = true;
    char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get();
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line_no;
        field += ch;
      }
    } else if (ch == '"' && field.empty()) {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch == '\n') {
      ++line_no;
      if (!field.empty() && field.back() == '\r') field.pop_back();
      fields.push_back(std::move(field));
      return fields;
    } else {
      field += ch;
    }
  }
  if (!any) return std::nullopt;
  if (!field.empty() && field.back() == '\r') field.pop_back();
  fields.push_back(std::move(field));
  return fields;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

constexpr const char* kCsvHeader =
    "id,motion_id,stance,author_id,counter_of,counter_kind,transcript";

std::vector<Speech> load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file: " + path.string());
  std::size_t line_no = 1;
  auto header = read_csv_record(in, line_no);
  if (!header) throw MalformedRow("empty corpus file: " + path.string());
  {
    std::ostringstream joined;
    for (std::size_t i = 0; i < header->size(); ++i)
      joined << (i ? "," : "") << (*header)[i];
    if (joined.str() != kCsvHeader)
      throw MalformedRow("unexpected CSV header: " + joined.str());
  }
  std::vector<Speech> speeches;
  while (auto rec = read_csv_record(in, line_no)) {
    if (rec->size() == 1 && (*rec)[0].empty()) continue; // trailing blank line
    std::string where = "line " + std::to_string(line_no);
    if (rec->size() != 7)
      throw MalformedRow(where + ": expected 7 fields, got " +
                         std::to_string(rec->size()));
    Speech sp;
    sp.id = (*rec)[0];
    sp.motion_id = (*rec)[1];
    sp.stance = parse_stance((*rec)[2]);
    sp.author_id = (*rec)[3];
    if (!(*rec)[4].empty()) sp.counter_of = (*rec)[4];
    if (!(*rec)[5].empty()) sp.counter_kind = parse_counter_kind((*rec)[5]);
    sp.sentences = split_transcript((*rec)[6]);
    speeches.push_back(std::move(sp));
  }
  return speeches;
}

std::vector<Speech> load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file: " + path.string());
  std::vector<Speech> speeches;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::string where = "line " + std::to_string(line_no);
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw MalformedRow(where + ": " + e.what());
    }
    if (!rec.is_object()) throw MalformedRow(where + ": not a JSON object");
    Speech sp;
    try {
      sp.id = rec.at("id").get<std::string>();
      sp.motion_id = rec.at("motion_id").get<std::string>();
      sp.stance = parse_stance(rec.at("stance").get<std::string>());
      sp.author_id = rec.at("author_id").get<std::string>();
      const json* sent = rec.contains("transcript") ? &rec["transcript"]
                         : rec.contains("sentences") ? &rec["sentences"]
                                                     : nullptr;
      if (!sent) throw MalformedRow(where + ": missing transcript");
      for (const auto& s : *sent) sp.sentences.push_back(s.get<std::string>());
      if (rec.contains("counter_of") && !rec["counter_of"].is_null())
        sp.counter_of = rec["counter_of"].get<std::string>();
      if (rec.contains("counter_kind") && !rec["counter_kind"].is_null())
        sp.counter_kind = parse_counter_kind(rec["counter_kind"].get<std::string>());
    } catch (const json::exception& e) {
      throw MalformedRow(where + ": " + e.what());
    }
    speeches.push_back(std::move(sp));
  }
  return speeches;
}

} // namespace

const char* to_string(Stance s) {
  return s == Stance::Supporting ? "supporting" : "opposing";
}

const char* to_string(CounterKind k) {
  return k == CounterKind::Explicit ? "explicit" : "implicit";
}

const char* to_string(Setting s) {
  switch (s) {
    case Setting::All: return "All";
    case Setting::Explicit: return "Explicit";
    default: return "Implicit";
  }
}

const char* setting_token(Setting s) {
  switch (s) {
    case Setting::All: return "all";
    case Setting::Explicit: return "explicit";
    default: return "implicit";
  }
}

Stance parse_stance(const std::string& s) {
  std::string v = lower(trim(s));
  if (v == "supporting") return Stance::Supporting;
  if (v == "opposing") return Stance::Opposing;
  throw MalformedRow("unknown stance: " + s);
}

CounterKind parse_counter_kind(const std::string& s) {
  std::string v = lower(trim(s));
  if (v == "explicit") return CounterKind::Explicit;
  if (v == "implicit") return CounterKind::Implicit;
  throw MalformedRow("unknown counter kind: " + s);
}

Setting parse_setting(const std::string& s) {
  std::string v = lower(trim(s));
  if (v == "all") return Setting::All;
  if (v == "explicit") return Setting::Explicit;
  if (v == "implicit") return Setting::Implicit;
  throw ConfigError("unknown setting: " + s);
}

CorpusFormat parse_corpus_format(const std::string& s) {
  std::string v = lower(trim(s));
  if (v == "csv") return CorpusFormat::Csv;
  if (v == "jsonl") return CorpusFormat::Jsonl;
  throw ConfigError("unknown corpus format: " + s);
}

CorpusIndex build_index(std::vector<Speech> speeches) {
  CorpusIndex index;
  for (auto& sp : speeches) {
    if (sp.id.empty()) throw MalformedRow("speech with empty id");
    const std::string& id = sp.id;
    if (sp.motion_id.empty())
      throw MalformedRow("speech " + id + ": empty motion_id");
    if (sp.author_id.empty())
      throw MalformedRow("speech " + id + ": empty author_id");
    if (sp.sentences.empty())
      throw MalformedRow("speech " + id + ": no sentences");
    for (const auto& s : sp.sentences)
      if (trim(s).empty())
        throw MalformedRow("speech " + id + ": blank sentence");
    if (sp.counter_of.has_value() != sp.counter_kind.has_value())
      throw MalformedRow("speech " + id +
                         ": counter_of and counter_kind must come together");
    if (sp.counter_of && sp.stance != Stance::Opposing)
      throw MalformedRow("speech " + id +
                         ": counter_of on a supporting speech");
    if (!index.speeches.emplace(id, std::move(sp)).second)
      throw DuplicateId("duplicate speech id: " + id);
  }
  for (const auto& [id, sp] : index.speeches) {
    auto& motion = index.by_motion[sp.motion_id];
    (sp.stance == Stance::Supporting ? motion.supporting : motion.opposing)
        .push_back(id);
    if (sp.counter_of) {
      auto it = index.speeches.find(*sp.counter_of);
      if (it == index.speeches.end())
        throw DanglingCounterLink("speech " + id + ": counter_of target " +
                                  *sp.counter_of + " not in corpus");
      const Speech& target = it->second;
      if (target.stance != Stance::Supporting)
        throw DanglingCounterLink("speech " + id + ": counter_of target " +
                                  *sp.counter_of + " is not supporting");
      if (target.motion_id != sp.motion_id)
        throw DanglingCounterLink("speech " + id + ": counter_of target " +
                                  *sp.counter_of + " is of another motion");
      index.counters_of[*sp.counter_of].emplace_back(id, *sp.counter_kind);
    }
  }
  // map iteration is already sorted; the per-motion vectors inherit that order
  return index;
}

CorpusIndex load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  return build_index(format == CorpusFormat::Csv ? load_csv(path)
                                                 : load_jsonl(path));
}

void save_corpus(const CorpusIndex& index, const std::filesystem::path& path,
                 CorpusFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write corpus file: " + path.string());
  if (format == CorpusFormat::Csv) {
    out << kCsvHeader << "\n";
    for (const auto& [id, sp] : index.speeches) {
      out << csv_escape(id) << ',' << csv_escape(sp.motion_id) << ','
          << to_string(sp.stance) << ',' << csv_escape(sp.author_id) << ','
          << (sp.counter_of ? csv_escape(*sp.counter_of) : "") << ','
          << (sp.counter_kind ? to_string(*sp.counter_kind) : "") << ','
          << csv_escape(join_transcript(sp.sentences)) << "\n";
    }
  } else {
    for (const auto& [id, sp] : index.speeches) {
      ordered_json rec;
      rec["id"] = id;
      rec["motion_id"] = sp.motion_id;
      rec["stance"] = to_string(sp.stance);
      rec["author_id"] = sp.author_id;
      if (sp.counter_of) {
        rec["counter_of"] = *sp.counter_of;
        rec["counter_kind"] = to_string(*sp.counter_kind);
      }
      rec["transcript"] = sp.sentences;
      out << rec.dump() << "\n";
    }
  }
}

SplitAssignment split_motions(const CorpusIndex& index, std::uint64_t seed) {
  std::vector<std::string> motions;
  for (const auto& [motion_id, _] : index.by_motion) motions.push_back(motion_id);
  std::size_t n = motions.size();
  if (n < 5)
    throw TooFewMotions("need at least 5 motions, got " + std::to_string(n));

  // Fisher-Yates with our own generator: std::shuffle's output is
  // implementation-defined, and split manifests must be portable.
  std::uint64_t state = seed;
  for (std::size_t i = n - 1; i > 0; --i) {
    std::size_t j = static_cast<std::size_t>(splitmix64(state) % (i + 1));
    std::swap(motions[i], motions[j]);
  }

  // largest remainder over 60/20/20, ties toward train then validation
  const double shares[3] = {0.6, 0.2, 0.2};
  std::size_t counts[3];
  double remainders[3];
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    double quota = shares[i] * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(quota);
    remainders[i] = quota - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  for (std::size_t left = n - assigned; left > 0; --left) {
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if (remainders[i] > remainders[best]) best = i;
    ++counts[best];
    remainders[best] = -1.0;
  }

  SplitAssignment split;
  split.seed = seed;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < counts[0]; ++i) split.train.insert(motions[pos++]);
  for (std::size_t i = 0; i < counts[1]; ++i)
    split.validation.insert(motions[pos++]);
  while (pos < n) split.test.insert(motions[pos++]);
  return split;
}

std::vector<TaskInstance> build_instances(const CorpusIndex& index,
                                          const std::set<std::string>& motions,
                                          Setting setting) {
  std::vector<TaskInstance> instances;
  for (const auto& motion_id : motions) {
    auto mit = index.by_motion.find(motion_id);
    if (mit == index.by_motion.end()) continue;
    const MotionSpeeches& motion = mit->second;
    for (const auto& sup_id : motion.supporting) {
      const Speech& sup = index.speeches.at(sup_id);

      std::set<std::string> removed; // own counters of the excluded kind
      std::set<std::string> gold;
      auto cit = index.counters_of.find(sup_id);
      if (cit != index.counters_of.end()) {
        for (const auto& [opp_id, kind] : cit->second) {
          bool wanted = setting == Setting::All ||
                        (setting == Setting::Explicit &&
                         kind == CounterKind::Explicit) ||
                        (setting == Setting::Implicit &&
                         kind == CounterKind::Implicit);
          (wanted ? gold : removed).insert(opp_id);
        }
      }

      TaskInstance inst;
      inst.supporting_id = sup_id;
      inst.setting = setting;
      for (const auto& opp_id : motion.opposing) {
        if (removed.count(opp_id)) continue;
        if (index.speeches.at(opp_id).author_id == sup.author_id) continue;
        inst.candidate_ids.push_back(opp_id);
        if (gold.count(opp_id)) inst.gold_ids.insert(opp_id);
      }
      // (a) a counter exists; (b) at least one further opposing speech
      if (inst.gold_ids.empty()) continue;
      if (inst.candidate_ids.size() <= inst.gold_ids.size()) continue;
      instances.push_back(std::move(inst));
    }
  }
  return instances;
}

void save_split(const SplitAssignment& split, const std::filesystem::path& path) {
  ordered_json doc;
  doc["seed"] = split.seed;
  doc["train"] = split.train;
  doc["validation"] = split.validation;
  doc["test"] = split.test;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write split manifest: " + path.string());
  out << doc.dump(2) << "\n";
}

SplitAssignment load_split(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open split manifest: " + path.string());
  json doc;
  try {
    in >> doc;
    SplitAssignment split;
    split.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& m : doc.at("train")) split.train.insert(m.get<std::string>());
    for (const auto& m : doc.at("validation"))
      split.validation.insert(m.get<std::string>());
    for (const auto& m : doc.at("test")) split.test.insert(m.get<std::string>());
    return split;
  } catch (const json::exception& e) {
    throw IoError("bad split manifest " + path.string() + ": " + e.what());
  }
}

} // namespace rebutrank
