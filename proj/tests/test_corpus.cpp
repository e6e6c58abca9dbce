#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "fixtures.hpp"
#include "rebutrank/corpus.hpp"

using namespace rebutrank;
using testsupport::fixture_path;
using testsupport::make_speech;
using testsupport::make_temp_dir;

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

bool same_speech(const Speech& a, const Speech& b) {
  return a.id == b.id && a.motion_id == b.motion_id && a.stance == b.stance &&
         a.author_id == b.author_id && a.sentences == b.sentences &&
         a.counter_of == b.counter_of && a.counter_kind == b.counter_kind;
}

bool same_index(const CorpusIndex& a, const CorpusIndex& b) {
  if (a.speeches.size() != b.speeches.size()) return false;
  for (const auto& [id, sp] : a.speeches) {
    auto it = b.speeches.find(id);
    if (it == b.speeches.end() || !same_speech(sp, it->second)) return false;
  }
  return a.by_motion.size() == b.by_motion.size() &&
         a.counters_of == b.counters_of;
}

std::vector<Speech> one_motion_speeches() {
  return {
      make_speech("s1", "m1", Stance::Supporting, "a1", {"First point.", "Second point."}),
      make_speech("s2", "m1", Stance::Supporting, "a2", {"Another case."}),
      make_speech("o1", "m1", Stance::Opposing, "a3", {"Reply one."}, "s1",
                  CounterKind::Explicit),
      make_speech("o2", "m1", Stance::Opposing, "a4", {"Reply two."}, "s1",
                  CounterKind::Implicit),
      make_speech("o3", "m1", Stance::Opposing, "a5", {"Reply three."}, "s2",
                  CounterKind::Explicit),
  };
}

} // namespace

TEST_CASE("csv fixture loads with links intact") {
  auto index = load_corpus(fixture_path("corpus_small.csv"), CorpusFormat::Csv);
  CHECK(index.speeches.size() == 46);
  CHECK(index.by_motion.size() == 10);

  const Speech& sup = index.speeches.at("s011");
  CHECK(sup.stance == Stance::Supporting);
  CHECK(sup.author_id == "a011");
  CHECK(sup.sentences.size() == 3);
  CHECK(sup.sentences[0] == "We should ban gambling because gambling ruins households.");

  const Speech& exp = index.speeches.at("o011");
  CHECK(exp.counter_of == "s011");
  CHECK(exp.counter_kind == CounterKind::Explicit);

  auto& counters = index.counters_of.at("s011");
  REQUIRE(counters.size() == 2);
  CHECK(counters[0].first == "o011");
  CHECK(counters[0].second == CounterKind::Explicit);
  CHECK(counters[1].first == "o012");
  CHECK(counters[1].second == CounterKind::Implicit);

  auto& m01 = index.by_motion.at("m01");
  CHECK(m01.supporting == std::vector<std::string>{"s011"});
  CHECK(m01.opposing == std::vector<std::string>{"o011", "o012", "o013", "o014"});
}

TEST_CASE("two supporting plus three opposing round-trips counter links") {
  auto index = build_index(one_motion_speeches());
  CHECK(index.counters_of.at("s1").size() == 2);
  CHECK(index.counters_of.at("s2").size() == 1);
}

TEST_CASE("long transcripts keep their line-split sentences") {
  auto index = load_corpus(fixture_path("corpus_long.csv"), CorpusFormat::Csv);
  CHECK(index.speeches.at("edu_opp").sentences ==
        read_lines(fixture_path("long_explicit.txt")));
  CHECK(index.speeches.at("asean_opp").sentences ==
        read_lines(fixture_path("long_implicit.txt")));
  CHECK(index.speeches.at("edu_opp").sentences.size() == 32);
  CHECK(index.speeches.at("asean_opp").sentences.size() == 35);
}

TEST_CASE("jsonl loads transcript and sentences keys alike") {
  auto index = load_corpus(fixture_path("corpus_small.jsonl"), CorpusFormat::Jsonl);
  CHECK(index.speeches.size() == 5);
  CHECK(index.speeches.at("j_imp").sentences.size() == 2);
  CHECK(index.speeches.at("j_oth1").counter_of == std::nullopt);
  CHECK(index.speeches.at("j_exp").counter_kind == CounterKind::Explicit);
}

TEST_CASE("save and reload round-trips in both formats") {
  auto index = load_corpus(fixture_path("corpus_small.csv"), CorpusFormat::Csv);
  auto dir = make_temp_dir("corpus_rt");

  save_corpus(index, dir / "copy.csv", CorpusFormat::Csv);
  CHECK(same_index(index, load_corpus(dir / "copy.csv", CorpusFormat::Csv)));

  save_corpus(index, dir / "copy.jsonl", CorpusFormat::Jsonl);
  CHECK(same_index(index, load_corpus(dir / "copy.jsonl", CorpusFormat::Jsonl)));
}

TEST_CASE("validation error contracts") {
  SUBCASE("counter link into another motion") {
    auto speeches = one_motion_speeches();
    speeches.push_back(make_speech("x1", "m2", Stance::Supporting, "a9", {"Hi."}));
    speeches.push_back(make_speech("x2", "m2", Stance::Opposing, "a8", {"No."},
                                   "s1", CounterKind::Explicit));
    CHECK_THROWS_AS(build_index(std::move(speeches)), DanglingCounterLink);
  }
  SUBCASE("counter link to a missing speech") {
    auto speeches = one_motion_speeches();
    speeches.push_back(make_speech("o9", "m1", Stance::Opposing, "a9", {"No."},
                                   "ghost", CounterKind::Explicit));
    CHECK_THROWS_AS(build_index(std::move(speeches)), DanglingCounterLink);
  }
  SUBCASE("counter link to an opposing speech") {
    auto speeches = one_motion_speeches();
    speeches.push_back(make_speech("o9", "m1", Stance::Opposing, "a9", {"No."},
                                   "o1", CounterKind::Explicit));
    CHECK_THROWS_AS(build_index(std::move(speeches)), DanglingCounterLink);
  }
  SUBCASE("duplicate id") {
    auto speeches = one_motion_speeches();
    speeches.push_back(speeches.front());
    CHECK_THROWS_AS(build_index(std::move(speeches)), DuplicateId);
  }
  SUBCASE("counter_of without a kind") {
    auto speeches = one_motion_speeches();
    speeches.push_back(make_speech("o9", "m1", Stance::Opposing, "a9", {"No."},
                                   "s1", std::nullopt));
    CHECK_THROWS_AS(build_index(std::move(speeches)), MalformedRow);
  }
  SUBCASE("counter_of on a supporting speech") {
    auto speeches = one_motion_speeches();
    speeches.push_back(make_speech("s9", "m1", Stance::Supporting, "a9", {"Yes."},
                                   "s1", CounterKind::Explicit));
    CHECK_THROWS_AS(build_index(std::move(speeches)), MalformedRow);
  }
  SUBCASE("empty transcript") {
    auto speeches = one_motion_speeches();
    speeches.push_back(make_speech("s9", "m1", Stance::Supporting, "a9", {}));
    CHECK_THROWS_AS(build_index(std::move(speeches)), MalformedRow);
  }
  SUBCASE("unknown stance in csv") {
    auto dir = make_temp_dir("corpus_bad");
    std::ofstream out(dir / "bad.csv");
    out << "id,motion_id,stance,author_id,counter_of,counter_kind,transcript\n"
        << "s1,m1,waffling,a1,,,Some text.\n";
    out.close();
    CHECK_THROWS_AS(load_corpus(dir / "bad.csv", CorpusFormat::Csv), MalformedRow);
  }
  SUBCASE("wrong csv header") {
    auto dir = make_temp_dir("corpus_hdr");
    std::ofstream out(dir / "bad.csv");
    out << "id,motion,stance,author_id,counter_of,counter_kind,transcript\n";
    out.close();
    CHECK_THROWS_AS(load_corpus(dir / "bad.csv", CorpusFormat::Csv), MalformedRow);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_corpus("no/such/file.csv", CorpusFormat::Csv), IoError);
  }
}

TEST_CASE("split shares follow 60/20/20 with largest remainder") {
  SUBCASE("10 motions, seed 7") {
    auto index = testsupport::synthetic_corpus(10);
    auto split = split_motions(index, 7);
    CHECK(split.seed == 7);
    CHECK(split.train.size() == 6);
    CHECK(split.validation.size() == 2);
    CHECK(split.test.size() == 2);
    auto again = split_motions(index, 7);
    CHECK(again.train == split.train);
    CHECK(again.validation == split.validation);
    CHECK(again.test == split.test);
  }
  SUBCASE("5 motions round toward train") {
    auto split = split_motions(testsupport::synthetic_corpus(5), 1);
    CHECK(split.train.size() == 3);
    CHECK(split.validation.size() == 1);
    CHECK(split.test.size() == 1);
  }
  SUBCASE("7 motions: validation wins the remainder tie over test") {
    auto split = split_motions(testsupport::synthetic_corpus(7), 1);
    CHECK(split.train.size() == 4);
    CHECK(split.validation.size() == 2);
    CHECK(split.test.size() == 1);
  }
  SUBCASE("too few motions") {
    CHECK_THROWS_AS(split_motions(testsupport::synthetic_corpus(4), 1),
                    TooFewMotions);
  }
}

TEST_CASE("different seeds give different valid partitions") {
  auto index = testsupport::synthetic_corpus(12);
  auto a = split_motions(index, 7);
  auto b = split_motions(index, 8);
  CHECK(a.train != b.train); // 12 motions: collision odds are negligible

  for (const auto* split : {&a, &b}) {
    std::set<std::string> all;
    all.insert(split->train.begin(), split->train.end());
    all.insert(split->validation.begin(), split->validation.end());
    all.insert(split->test.begin(), split->test.end());
    CHECK(all.size() == split->train.size() + split->validation.size() +
                            split->test.size());
    CHECK(all.size() == index.by_motion.size());
    for (const auto& [motion, _] : index.by_motion) CHECK(all.count(motion) == 1);
  }
}

TEST_CASE("split manifest round-trips") {
  auto split = split_motions(testsupport::synthetic_corpus(10), 42);
  auto dir = make_temp_dir("split_rt");
  save_split(split, dir / "split.json");
  auto loaded = load_split(dir / "split.json");
  CHECK(loaded.seed == split.seed);
  CHECK(loaded.train == split.train);
  CHECK(loaded.validation == split.validation);
  CHECK(loaded.test == split.test);
}

TEST_CASE("instances of the standard motion shape") {
  auto index = load_corpus(fixture_path("corpus_small.csv"), CorpusFormat::Csv);
  std::set<std::string> m01{"m01"};

  auto all = build_instances(index, m01, Setting::All);
  REQUIRE(all.size() == 1);
  CHECK(all[0].supporting_id == "s011");
  CHECK(all[0].candidate_ids ==
        std::vector<std::string>{"o011", "o012", "o013", "o014"});
  CHECK(all[0].gold_ids == std::set<std::string>{"o011", "o012"});

  auto explicit_setting = build_instances(index, m01, Setting::Explicit);
  REQUIRE(explicit_setting.size() == 1);
  CHECK(explicit_setting[0].candidate_ids ==
        std::vector<std::string>{"o011", "o013", "o014"});
  CHECK(explicit_setting[0].gold_ids == std::set<std::string>{"o011"});

  auto implicit_setting = build_instances(index, m01, Setting::Implicit);
  REQUIRE(implicit_setting.size() == 1);
  CHECK(implicit_setting[0].candidate_ids ==
        std::vector<std::string>{"o012", "o013", "o014"});
  CHECK(implicit_setting[0].gold_ids == std::set<std::string>{"o012"});
}

TEST_CASE("author overlap excludes the lone distractor") {
  auto index = load_corpus(fixture_path("corpus_small.csv"), CorpusFormat::Csv);
  // m09's only non-counter opposing speech shares the supporting author, so
  // after filtering the candidate pool is exactly the gold set
  for (auto setting : {Setting::All, Setting::Explicit, Setting::Implicit})
    CHECK(build_instances(index, {"m09"}, setting).empty());

  // flip the author and the instance appears
  std::vector<Speech> speeches;
  for (const auto& [_, sp] : index.speeches)
    if (sp.motion_id == "m09") speeches.push_back(sp);
  for (auto& sp : speeches)
    if (sp.id == "o092") sp.author_id = "a093";
  auto fixed = build_index(std::move(speeches));
  CHECK(build_instances(fixed, {"m09"}, Setting::All).size() == 1);
  CHECK(build_instances(fixed, {"m09"}, Setting::Explicit).size() == 1);
}

TEST_CASE("counters-only supporting speech yields no instance") {
  auto index = load_corpus(fixture_path("corpus_small.csv"), CorpusFormat::Csv);
  for (auto setting : {Setting::All, Setting::Explicit, Setting::Implicit})
    CHECK(build_instances(index, {"m10"}, setting).empty());
}

TEST_CASE("instance invariants hold across the fixture corpus") {
  auto index = load_corpus(fixture_path("corpus_small.csv"), CorpusFormat::Csv);
  std::set<std::string> motions;
  for (const auto& [motion, _] : index.by_motion) motions.insert(motion);

  for (auto setting : {Setting::All, Setting::Explicit, Setting::Implicit}) {
    auto instances = build_instances(index, motions, setting);
    CHECK(instances.size() == 8); // m01..m08; m09 and m10 drop out
    for (const auto& inst : instances) {
      CHECK(std::is_sorted(inst.candidate_ids.begin(), inst.candidate_ids.end()));
      CHECK(!inst.gold_ids.empty());
      CHECK(inst.gold_ids.size() < inst.candidate_ids.size());
      const Speech& sup = index.speeches.at(inst.supporting_id);
      for (const auto& cid : inst.candidate_ids) {
        const Speech& cand = index.speeches.at(cid);
        CHECK(cand.stance == Stance::Opposing);
        CHECK(cand.motion_id == sup.motion_id);
        CHECK(cand.author_id != sup.author_id);
      }
      for (const auto& gid : inst.gold_ids)
        CHECK(std::find(inst.candidate_ids.begin(), inst.candidate_ids.end(),
                        gid) != inst.candidate_ids.end());
      CHECK(inst.setting == setting);
    }
  }
}

TEST_CASE("per-setting gold sets partition the all-setting golds") {
  auto index = load_corpus(fixture_path("corpus_small.csv"), CorpusFormat::Csv);
  std::set<std::string> motions;
  for (const auto& [motion, _] : index.by_motion) motions.insert(motion);

  std::map<std::string, std::set<std::string>> all_gold, exp_gold, imp_gold;
  for (const auto& inst : build_instances(index, motions, Setting::All))
    all_gold[inst.supporting_id] = inst.gold_ids;
  for (const auto& inst : build_instances(index, motions, Setting::Explicit))
    exp_gold[inst.supporting_id] = inst.gold_ids;
  for (const auto& inst : build_instances(index, motions, Setting::Implicit))
    imp_gold[inst.supporting_id] = inst.gold_ids;

  // every fixture supporting speech has one counter of each kind, so the
  // id sets coincide here; disjointness + union are the general contract
  REQUIRE(!all_gold.empty());
  for (const auto& [sup, gold] : all_gold) {
    std::set<std::string> setwise;
    for (const auto& g : exp_gold[sup]) {
      CHECK(imp_gold[sup].count(g) == 0);
      setwise.insert(g);
    }
    setwise.insert(imp_gold[sup].begin(), imp_gold[sup].end());
    CHECK(setwise == gold);
  }
}

TEST_CASE("candidate count is always at least two") {
  auto index = load_corpus(fixture_path("corpus_small.csv"), CorpusFormat::Csv);
  std::set<std::string> motions;
  for (const auto& [motion, _] : index.by_motion) motions.insert(motion);
  for (auto setting : {Setting::All, Setting::Explicit, Setting::Implicit})
    for (const auto& inst : build_instances(index, motions, setting))
      CHECK(inst.candidate_ids.size() >= 2);
}
