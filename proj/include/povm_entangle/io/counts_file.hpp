#pragma once

#include "povm_entangle/io/json.hpp"

#include <cctype>
#include <map>
#include <optional>
#include <sstream>

namespace povm::io {

inline std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::int64_t parse_count(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size()) throw InputError(where + ": count '" + s + "' is not an integer");
  if (v < 0) throw InputError(where + ": count must be nonnegative");
  return v;
}

namespace detail {

/// Collects (pair, outcome) cells in arbitrary order, then checks that the
/// table is complete.
class CountTable {
 public:
  CountTable() = default;
  /// Fixes the outcome order up front; rows may then only use these labels.
  explicit CountTable(const std::vector<std::string>& order) : fixed_(true) {
    for (const auto& o : order) {
      const std::string key = upper(o);
      if (!index_.emplace(key, labels_.size()).second) throw InputError("duplicate outcome label " + key);
      labels_.push_back(key);
    }
  }

  void add(int pair, const std::string& outcome, std::int64_t count, const std::string& where) {
    std::string key = upper(outcome);
    if (key.empty()) throw InputError(where + ": empty outcome label");
    if (!index_.count(key)) {
      if (fixed_) throw InputError(where + ": outcome " + key + " is not among the declared outcomes");
      index_[key] = labels_.size();
      labels_.push_back(key);
    }
    if (!cells_.emplace(std::make_pair(pair, index_[key]), count).second)
      throw InputError(where + ": duplicate entry for probe pair (" + pair_name(pair) + "), outcome " + key);
  }

  CoincidenceCounts build(const BasisMap& map) const {
    if (labels_.empty()) throw InputError("counts file contains no data rows");
    std::vector<std::int64_t> counts(labels_.size() * kProbePairs);
    for (int pair = 0; pair < kProbePairs; ++pair)
      for (std::size_t k = 0; k < labels_.size(); ++k) {
        auto it = cells_.find({pair, k});
        if (it == cells_.end())
          throw InputError("missing entry for probe pair (" + pair_name(pair) + "), outcome " + labels_[k]);
        counts[pair * labels_.size() + k] = it->second;
      }
    return CoincidenceCounts(labels_, std::move(counts), map);
  }

 private:
  std::vector<std::string> labels_;
  std::map<std::string, std::size_t> index_;
  std::map<std::pair<int, std::size_t>, std::int64_t> cells_;
  bool fixed_ = false;
};

}  // namespace detail

/// CSV with header `probe_a,probe_b,outcome,count`. Outcome labels keep the
/// order of their first appearance.
inline CoincidenceCounts parse_counts_csv(const std::string& text, const std::string& origin = "counts",
                                          const BasisMap& map = BasisMap::standard()) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool header = false;
  detail::CountTable table;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    const auto fields = split(line, ',');
    if (!header) {
      std::vector<std::string> names;
      for (const auto& f : fields) names.push_back(upper(f));
      if (names != std::vector<std::string>{"PROBE_A", "PROBE_B", "OUTCOME", "COUNT"})
        throw InputError(where + ": expected header 'probe_a,probe_b,outcome,count'");
      header = true;
      continue;
    }
    if (fields.size() != 4)
      throw InputError(where + ": expected 4 fields, found " + std::to_string(fields.size()));
    Polarization a, b;
    try {
      a = parse_polarization(fields[0]);
    } catch (const InputError& e) {
      throw InputError(where + ": field probe_a: " + e.what());
    }
    try {
      b = parse_polarization(fields[1]);
    } catch (const InputError& e) {
      throw InputError(where + ": field probe_b: " + e.what());
    }
    table.add(pair_index(a, b), fields[2], parse_count(fields[3], where + ": field count"), where);
  }
  if (!header) throw InputError(origin + ": empty counts file");
  try {
    return table.build(map);
  } catch (const InputError& e) {
    throw InputError(origin + ": " + e.what());
  }
}

inline std::string format_counts_csv(const CoincidenceCounts& counts) {
  std::string out = "probe_a,probe_b,outcome,count\n";
  for (int pair = 0; pair < kProbePairs; ++pair)
    for (std::size_t k = 0; k < counts.num_outcomes(); ++k) {
      out += kPolarizationNames[pair / 6];
      out += ',';
      out += kPolarizationNames[pair % 6];
      out += ',' + counts.outcomes()[k] + ',' + std::to_string(counts.at(pair, k)) + '\n';
    }
  return out;
}

/// {"basis_map": optional, "outcomes": optional order, "counts": {"H,H": {"AA": n, ...}, ...}}
inline CoincidenceCounts counts_from_json(const json& j, const std::string& origin = "counts",
                                          std::optional<BasisMap> map_override = {}) {
  const json counts = field<json>(j, "counts");
  if (!counts.is_object()) throw InputError(origin + ": 'counts' must be an object");
  BasisMap map = BasisMap::standard();
  if (j.contains("basis_map")) map = j.at("basis_map").get<BasisMap>();
  if (map_override) map = *map_override;
  detail::CountTable table = j.contains("outcomes")
                                 ? detail::CountTable(field<std::vector<std::string>>(j, "outcomes"))
                                 : detail::CountTable();
  for (const auto& [key, row] : counts.items()) {
    const std::string where = origin + ": pair '" + key + "'";
    const auto parts = split(key, ',');
    if (parts.size() != 2) throw InputError(where + ": expected a key such as \"H,V\"");
    const int pair = pair_index(parse_polarization(parts[0]), parse_polarization(parts[1]));
    if (!row.is_object()) throw InputError(where + ": expected an object of outcome counts");
    for (const auto& [outcome, value] : row.items()) {
      if (!value.is_number_integer()) throw InputError(where + ": count for " + outcome + " is not an integer");
      table.add(pair, outcome, parse_count(std::to_string(value.get<std::int64_t>()), where), where);
    }
  }
  try {
    return table.build(map);
  } catch (const InputError& e) {
    throw InputError(origin + ": " + e.what());
  }
}

inline json counts_to_json(const CoincidenceCounts& counts) {
  json rows = json::object();
  for (int pair = 0; pair < kProbePairs; ++pair) {
    json row = json::object();
    for (std::size_t k = 0; k < counts.num_outcomes(); ++k) row[counts.outcomes()[k]] = counts.at(pair, k);
    rows[pair_name(pair)] = row;
  }
  return json{{"basis_map", counts.basis_map()}, {"outcomes", counts.outcomes()}, {"counts", rows}};
}

inline bool has_json_extension(const std::string& path) {
  return path.size() >= 5 && upper(path.substr(path.size() - 5)) == ".JSON";
}

/// Format chosen by extension: `.json` or CSV otherwise.
inline CoincidenceCounts read_counts(const std::string& path, std::optional<BasisMap> map_override = {}) {
  const std::string text = read_text(path);
  if (has_json_extension(path)) return counts_from_json(parse_text(text, path), path, map_override);
  return parse_counts_csv(text, path, map_override.value_or(BasisMap::standard()));
}

inline void write_counts(const std::string& path, const CoincidenceCounts& counts) {
  write_text(path, has_json_extension(path) ? dump(counts_to_json(counts)) : format_counts_csv(counts));
}

}  // namespace povm::io
