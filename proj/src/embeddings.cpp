#include "rebutrank/embeddings.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <string_view>
#include <system_error>
#include <vector>

#include "rebutrank/errors.hpp"

namespace rebutrank {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool parse_double(std::string_view s, double& value) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  return ec == std::errc() && ptr == end;
}

bool parse_size(std::string_view s, std::size_t& value) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  return ec == std::errc() && ptr == end;
}

// shortest round-trip formatting (std::format is unavailable on this
// toolchain; to_chars gives the same guarantee)
void append_double(std::string& out, double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  out.append(buf, ptr);
}

} // namespace

EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               const std::string& key_prefix) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embedding file: " + path.string());
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (first) {
      first = false;
      std::size_t count, dim;
      if (fields.size() == 2 && parse_size(fields[0], count) &&
          parse_size(fields[1], dim)) {
        table.dimension = static_cast<int>(dim);
        continue; // header line
      }
    }
    if (fields.size() < 2)
      throw UnparseableLine("line " + std::to_string(line_no) +
                            ": expected word and values");
    std::string word(fields[0]);
    if (!key_prefix.empty() && word.rfind(key_prefix, 0) == 0)
      word = word.substr(key_prefix.size());
    int dim = static_cast<int>(fields.size()) - 1;
    if (table.dimension == 0) table.dimension = dim;
    if (dim != table.dimension)
      throw DimensionMismatch("line " + std::to_string(line_no) + ": got " +
                              std::to_string(dim) + " values, expected " +
                              std::to_string(table.dimension));
    Eigen::VectorXd vec(dim);
    for (int i = 0; i < dim; ++i) {
      double v;
      if (!parse_double(fields[static_cast<std::size_t>(i) + 1], v) ||
          !std::isfinite(v))
        throw UnparseableLine("line " + std::to_string(line_no) +
                              ": bad value \"" +
                              std::string(fields[static_cast<std::size_t>(i) + 1]) +
                              "\"");
      vec[i] = v;
    }
    table.vectors.emplace(std::move(word), std::move(vec)); // first one wins
  }
  return table;
}

void save_embeddings(const EmbeddingTable& table,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write embedding file: " + path.string());
  std::string buf;
  buf += std::to_string(table.vectors.size());
  buf += ' ';
  buf += std::to_string(table.dimension);
  buf += '\n';
  out << buf;
  for (const auto& [word, vec] : table.vectors) {
    buf = word;
    for (int i = 0; i < vec.size(); ++i) {
      buf += ' ';
      append_double(buf, vec[i]);
    }
    buf += '\n';
    out << buf;
  }
}

std::optional<Eigen::VectorXd> centroid(const std::vector<std::string>& tokens,
                                        const EmbeddingTable& table) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(table.dimension);
  std::size_t hits = 0;
  for (const auto& tok : tokens) {
    auto it = table.vectors.find(tok);
    if (it == table.vectors.end()) continue;
    sum += it->second;
    ++hits;
  }
  if (hits == 0) return std::nullopt;
  return sum / static_cast<double>(hits);
}

std::optional<WordDistribution> word_distribution(
    const std::vector<std::string>& tokens, const EmbeddingTable& table) {
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& tok : tokens) {
    auto it = table.vectors.find(tok);
    if (it == table.vectors.end()) continue;
    ++counts[tok];
    ++total;
  }
  if (total == 0) return std::nullopt;
  WordDistribution dist;
  dist.points.reserve(counts.size());
  for (const auto& [word, count] : counts)
    dist.points.emplace_back(table.vectors.at(word),
                             static_cast<double>(count) /
                                 static_cast<double>(total));
  return dist;
}

} // namespace rebutrank
