#include "rebutrank/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

namespace rebutrank {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

} // namespace

EvalReport evaluate(const std::vector<TaskInstance>& instances,
                    const std::vector<ScoredInstance>& scored) {
  if (instances.size() != scored.size())
    throw InstanceMismatch("got " + std::to_string(scored.size()) +
                           " scored instances for " +
                           std::to_string(instances.size()) + " tasks");
  EvalReport report;
  if (!instances.empty()) report.setting = instances.front().setting;
  double hits = 0.0, rr_sum = 0.0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const TaskInstance& inst = instances[i];
    const ScoredInstance& sc = scored[i];
    if (sc.supporting_id != inst.supporting_id)
      throw InstanceMismatch("scored " + sc.supporting_id + " where " +
                             inst.supporting_id + " was expected");
    if (sc.ranking.size() != inst.candidate_ids.size())
      throw InstanceMismatch("ranking size mismatch for " + inst.supporting_id);
    {
      std::vector<std::string> sorted_ranking = sc.ranking;
      std::sort(sorted_ranking.begin(), sorted_ranking.end());
      if (!std::equal(sorted_ranking.begin(), sorted_ranking.end(),
                      inst.candidate_ids.begin()))
        throw InstanceMismatch("ranking is not a candidate permutation for " +
                               inst.supporting_id);
    }
    EvalRow row;
    row.supporting_id = inst.supporting_id;
    row.ranking = sc.ranking;
    row.gold_ids.assign(inst.gold_ids.begin(), inst.gold_ids.end());
    row.hit = inst.gold_ids.count(sc.ranking.front()) ? 1 : 0;
    for (std::size_t r = 0; r < sc.ranking.size(); ++r)
      if (inst.gold_ids.count(sc.ranking[r])) {
        row.reciprocal_rank = 1.0 / static_cast<double>(r + 1);
        break;
      }
    hits += row.hit;
    rr_sum += row.reciprocal_rank;
    report.rows.push_back(std::move(row));
  }
  report.n_instances = instances.size();
  if (!instances.empty()) {
    report.accuracy_top1 = hits / static_cast<double>(instances.size());
    report.mrr = rr_sum / static_cast<double>(instances.size());
  }
  return report;
}

double random_baseline(const std::vector<TaskInstance>& instances) {
  if (instances.empty())
    throw EmptyInstanceSet("random baseline over zero instances");
  double sum = 0.0;
  for (const auto& inst : instances)
    sum += static_cast<double>(inst.gold_ids.size()) /
           static_cast<double>(inst.candidate_ids.size());
  return sum / static_cast<double>(instances.size());
}

double empirical_random_baseline(const std::vector<TaskInstance>& instances,
                                 std::uint64_t seed, int shuffles) {
  if (instances.empty())
    throw EmptyInstanceSet("random baseline over zero instances");
  std::uint64_t state = seed;
  double sum = 0.0;
  for (const auto& inst : instances) {
    int hits = 0;
    std::vector<std::string> order = inst.candidate_ids;
    for (int s = 0; s < shuffles; ++s) {
      for (std::size_t i = order.size() - 1; i > 0; --i) {
        std::size_t j = static_cast<std::size_t>(splitmix64(state) % (i + 1));
        std::swap(order[i], order[j]);
      }
      if (inst.gold_ids.count(order.front())) ++hits;
    }
    sum += static_cast<double>(hits) / static_cast<double>(shuffles);
  }
  return sum / static_cast<double>(instances.size());
}

std::string comparison_table(const std::vector<EvalReport>& reports) {
  const Setting setting_order[3] = {Setting::All, Setting::Explicit,
                                    Setting::Implicit};
  std::vector<Setting> settings;
  for (Setting s : setting_order)
    if (std::any_of(reports.begin(), reports.end(),
                    [&](const EvalReport& r) { return r.setting == s; }))
      settings.push_back(s);

  // method -> setting -> report
  std::map<std::string, std::map<int, const EvalReport*>> by_method;
  for (const auto& r : reports)
    by_method[r.method][static_cast<int>(r.setting)] = &r;

  std::vector<std::string> methods;
  for (const auto& [m, _] : by_method) methods.push_back(m);
  std::stable_sort(methods.begin(), methods.end(),
                   [&](const std::string& a, const std::string& b) {
                     auto mrr = [&](const std::string& m) {
                       auto it = by_method[m].find(static_cast<int>(Setting::All));
                       return it == by_method[m].end() ? -1.0 : it->second->mrr;
                     };
                     double ma = mrr(a), mb = mrr(b);
                     if (ma != mb) return ma > mb;
                     return a < b;
                   });

  auto fmt_acc = [](double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(1) << v * 100.0;
    return os.str();
  };
  auto fmt_mrr = [](double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    return os.str();
  };

  std::vector<std::vector<std::string>> grid;
  {
    std::vector<std::string> h1 = {"Method"}, h2 = {""};
    for (Setting s : settings) {
      h1.push_back(to_string(s));
      h1.push_back("");
      h2.push_back("Acc");
      h2.push_back("MRR");
    }
    grid.push_back(h1);
    grid.push_back(h2);
  }
  for (const auto& m : methods) {
    std::vector<std::string> row = {m};
    for (Setting s : settings) {
      auto it = by_method[m].find(static_cast<int>(s));
      if (it == by_method[m].end()) {
        row.push_back("-");
        row.push_back("-");
      } else {
        row.push_back(fmt_acc(it->second->accuracy_top1));
        row.push_back(fmt_mrr(it->second->mrr));
      }
    }
    grid.push_back(row);
  }
  {
    std::vector<std::string> row = {"Rand"};
    for (Setting s : settings) {
      const EvalReport* any = nullptr;
      for (const auto& r : reports)
        if (r.setting == s) {
          any = &r;
          break;
        }
      row.push_back(any ? fmt_acc(any->random_baseline) : "-");
      row.push_back("-");
    }
    grid.push_back(row);
  }

  std::vector<std::size_t> widths(grid[0].size(), 0);
  for (const auto& row : grid)
    for (std::size_t c = 0; c < row.size(); ++c)
      widths[c] = std::max(widths[c], row[c].size());
  std::string out;
  for (const auto& row : grid) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) line += "  ";
      line += row[c];
      if (c + 1 < row.size())
        line.append(widths[c] - row[c].size(), ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line;
    out += '\n';
  }
  return out;
}

std::string report_to_json(const EvalReport& report) {
  ordered_json doc;
  doc["method"] = report.method;
  doc["setting"] = setting_token(report.setting);
  doc["n_instances"] = report.n_instances;
  doc["accuracy_top1"] = report.accuracy_top1;
  doc["mrr"] = report.mrr;
  doc["random_baseline"] = report.random_baseline;
  if (report.random_baseline_empirical)
    doc["random_baseline_empirical"] = *report.random_baseline_empirical;
  doc["seed"] = report.seed;
  doc["config_hash"] = report.config_hash;
  doc["corpus_checksum"] = report.corpus_checksum;
  doc["rows"] = json::array();
  for (const auto& row : report.rows) {
    ordered_json r;
    r["supporting_id"] = row.supporting_id;
    r["ranking"] = row.ranking;
    r["gold_ids"] = row.gold_ids;
    r["reciprocal_rank"] = row.reciprocal_rank;
    r["hit"] = row.hit;
    doc["rows"].push_back(std::move(r));
  }
  return doc.dump(2) + "\n";
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write report: " + path.string());
  out << report_to_json(report);
}

EvalReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open report: " + path.string());
  json doc;
  try {
    in >> doc;
    EvalReport report;
    report.method = doc.at("method").get<std::string>();
    report.setting = parse_setting(doc.at("setting").get<std::string>());
    report.n_instances = doc.at("n_instances").get<std::size_t>();
    report.accuracy_top1 = doc.at("accuracy_top1").get<double>();
    report.mrr = doc.at("mrr").get<double>();
    report.random_baseline = doc.at("random_baseline").get<double>();
    if (doc.contains("random_baseline_empirical"))
      report.random_baseline_empirical =
          doc["random_baseline_empirical"].get<double>();
    report.seed = doc.at("seed").get<std::uint64_t>();
    report.config_hash = doc.at("config_hash").get<std::string>();
    report.corpus_checksum = doc.at("corpus_checksum").get<std::string>();
    for (const auto& r : doc.at("rows")) {
      EvalRow row;
      row.supporting_id = r.at("supporting_id").get<std::string>();
      row.ranking = r.at("ranking").get<std::vector<std::string>>();
      row.gold_ids = r.at("gold_ids").get<std::vector<std::string>>();
      row.reciprocal_rank = r.at("reciprocal_rank").get<double>();
      row.hit = r.at("hit").get<int>();
      report.rows.push_back(std::move(row));
    }
    return report;
  } catch (const json::exception& e) {
    throw IoError("bad report file " + path.string() + ": " + e.what());
  }
}

} // namespace rebutrank
