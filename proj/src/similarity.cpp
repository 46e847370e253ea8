#include "multiref/similarity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "multiref/errors.hpp"
#include "multiref/parallel.hpp"
#include "multiref/text.hpp"

namespace multiref {

namespace {

using nlohmann::json;

[[noreturn]] void fail(std::size_t line, const std::string& message) {
  throw ParseError(message, line);
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

void validate_thresholds(const BinThresholds& t) {
  if (!(t.low_hi < t.med_hi) || !(t.low_hi > -1.0) || !(t.low_hi < 1.0) ||
      !(t.med_hi > -1.0) || !(t.med_hi < 1.0)) {
    throw Error("invalid bin thresholds: low_hi must be below med_hi and both "
                "inside (-1, 1)");
  }
}

struct PairKey {
  std::string_view a;
  std::string_view b;

  bool operator<(const PairKey& other) const {
    if (a != other.a) {
      return a < other.a;
    }
    return b < other.b;
  }
};

PairKey canonical_pair(std::string_view x, std::string_view y) {
  if (y < x) {
    std::swap(x, y);
  }
  return PairKey{x, y};
}

}  // namespace

EmbeddingTable load_embeddings(std::istream& in, EmbeddingLoadReport* report) {
  std::size_t dimension = 0;
  std::vector<float> data;
  std::unordered_map<std::string, std::size_t, TransparentHash, std::equal_to<>>
      index;
  EmbeddingLoadReport local;
  EmbeddingLoadReport& rep = report ? *report : local;

  std::string line;
  std::size_t line_no = 0;
  std::vector<float> row;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    std::vector<std::string_view> fields;
    {
      std::string_view sv(line);
      std::size_t pos = 0;
      while (pos < sv.size()) {
        while (pos < sv.size() && (sv[pos] == ' ' || sv[pos] == '\t')) {
          ++pos;
        }
        std::size_t start = pos;
        while (pos < sv.size() && sv[pos] != ' ' && sv[pos] != '\t') {
          ++pos;
        }
        if (pos > start) {
          fields.push_back(sv.substr(start, pos - start));
        }
      }
    }
    if (fields.empty()) {
      continue;
    }
    if (fields.size() < 2) {
      fail(line_no, "expected `token v1 ... vd`");
    }
    std::string token(fields[0]);
    std::size_t d = fields.size() - 1;
    if (dimension == 0) {
      dimension = d;
    } else if (d != dimension) {
      fail(line_no, "expected " + std::to_string(dimension) +
                        " components, found " + std::to_string(d));
    }
    row.clear();
    row.reserve(d);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      float value = 0.0f;
      auto [ptr, ec] = std::from_chars(fields[i].data(),
                                       fields[i].data() + fields[i].size(),
                                       value);
      if (ec != std::errc{} || ptr != fields[i].data() + fields[i].size()) {
        fail(line_no, "invalid number '" + std::string(fields[i]) + "'");
      }
      if (!std::isfinite(value)) {
        fail(line_no, "non-finite component '" + std::string(fields[i]) + "'");
      }
      row.push_back(value);
    }
    if (index.contains(token)) {
      ++rep.duplicate_conflicts;
      continue;
    }
    index.emplace(std::move(token), index.size());
    data.insert(data.end(), row.begin(), row.end());
    ++rep.entries;
  }
  if (index.empty()) {
    throw Error("embedding table is empty");
  }
  return EmbeddingTable(dimension, std::move(data), std::move(index));
}

EmbeddingTable load_embeddings_file(const std::string& path,
                                    EmbeddingLoadReport* report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open embedding file: " + path);
  }
  return load_embeddings(in, report);
}

std::vector<double> embed(std::string_view text, const EmbeddingTable& table) {
  std::vector<double> sum(table.dimension(), 0.0);
  std::size_t known = 0;
  for (const std::string& token : text::scorer_tokens(text)) {
    std::span<const float> vec = table.lookup(token);
    if (vec.empty()) {
      continue;
    }
    for (std::size_t i = 0; i < vec.size(); ++i) {
      sum[i] += vec[i];
    }
    ++known;
  }
  if (known == 0) {
    throw NoKnownTokensError("no known tokens in text");
  }
  for (double& v : sum) {
    v /= static_cast<double>(known);
  }
  return sum;
}

double EmbeddingScorer::score(std::string_view a, std::string_view b) const {
  std::vector<double> va = embed(a, table_);
  std::vector<double> vb = embed(b, table_);
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    dot += va[i] * vb[i];
    na += va[i] * va[i];
    nb += vb[i] * vb[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw ZeroVectorError("embedding has zero norm");
  }
  if (va == vb) {
    return 1.0;
  }
  double value = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(value, -1.0, 1.0);
}

std::string bin_name(SimilarityBin bin) {
  switch (bin) {
    case SimilarityBin::kLow:
      return "low";
    case SimilarityBin::kMedium:
      return "medium";
    case SimilarityBin::kHigh:
      return "high";
  }
  throw Error("invalid bin value");
}

SimilarityBin parse_bin(std::string_view name) {
  if (name == "low") {
    return SimilarityBin::kLow;
  }
  if (name == "medium") {
    return SimilarityBin::kMedium;
  }
  if (name == "high") {
    return SimilarityBin::kHigh;
  }
  throw Error("unknown similarity bin '" + std::string(name) + "'");
}

std::string subcategory_name(HighSubcategory sub) {
  switch (sub) {
    case HighSubcategory::kNone:
      return "";
    case HighSubcategory::kExactly1:
      return "exactly_1.0";
    case HighSubcategory::k0p9To1p0:
      return "0.9_to_1.0";
    case HighSubcategory::k0p85To0p9:
      return "0.85_to_0.9";
  }
  throw Error("invalid subcategory value");
}

HighSubcategory parse_subcategory(std::string_view name) {
  if (name.empty()) {
    return HighSubcategory::kNone;
  }
  if (name == "exactly_1.0") {
    return HighSubcategory::kExactly1;
  }
  if (name == "0.9_to_1.0") {
    return HighSubcategory::k0p9To1p0;
  }
  if (name == "0.85_to_0.9") {
    return HighSubcategory::k0p85To0p9;
  }
  throw Error("unknown high subcategory '" + std::string(name) + "'");
}

BinAssignment assign_bin(double score, const BinThresholds& thresholds) {
  validate_thresholds(thresholds);
  if (!(score >= -1.0 && score <= 1.0)) {
    throw Error("similarity score " + std::to_string(score) +
                " outside [-1, 1]");
  }
  BinAssignment result;
  if (score < thresholds.low_hi) {
    result.bin = SimilarityBin::kLow;
  } else if (score < thresholds.med_hi) {
    result.bin = SimilarityBin::kMedium;
  } else {
    result.bin = SimilarityBin::kHigh;
    if (score == 1.0) {
      result.high_subcategory = HighSubcategory::kExactly1;
    } else if (score >= 0.9) {
      result.high_subcategory = HighSubcategory::k0p9To1p0;
    } else if (score >= 0.85) {
      result.high_subcategory = HighSubcategory::k0p85To0p9;
    }
  }
  return result;
}

ScoredGroup score_group(const ParallelGroup& group,
                        const SimilarityScorer& scorer,
                        const BinThresholds& thresholds) {
  const std::size_t n = group.references.size();
  if (n < 2) {
    throw FewerThanTwoReferencesError(
        "group '" + group.group_id + "' has " + std::to_string(n) +
        " reference(s); at least 2 are required");
  }
  ScoredGroup result;
  result.group_id = group.group_id;
  result.pairwise.reserve(n * (n - 1) / 2);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const ReferenceText& a = group.references[i];
      const ReferenceText& b = group.references[j];
      double value = 0.0;
      auto context = [&](const char* what) {
        return "group '" + group.group_id + "' pair ('" + a.ref_id + "', '" +
               b.ref_id + "'): " + what;
      };
      try {
        value = scorer.score(a.text, b.text);
      } catch (const NoKnownTokensError& e) {
        throw NoKnownTokensError(context(e.what()));
      } catch (const ZeroVectorError& e) {
        throw ZeroVectorError(context(e.what()));
      }
      result.pairwise.push_back(PairScore{a.ref_id, b.ref_id, value});
      sum += value;
    }
  }
  result.sim_p = std::clamp(
      sum / static_cast<double>(result.pairwise.size()), -1.0, 1.0);
  BinAssignment bin = assign_bin(result.sim_p, thresholds);
  result.bin = bin.bin;
  result.high_subcategory = bin.high_subcategory;
  return result;
}

std::vector<ScoredGroup> score_corpus(const Corpus& corpus,
                                      const SimilarityScorer& scorer,
                                      const BinThresholds& thresholds,
                                      unsigned threads) {
  validate_thresholds(thresholds);
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < corpus.groups.size(); ++i) {
    if (corpus.groups[i].references.size() >= 2) {
      eligible.push_back(i);
    }
  }
  std::vector<ScoredGroup> results(eligible.size());
  parallel_for(eligible.size(), threads, [&](std::size_t k) {
    results[k] = score_group(corpus.groups[eligible[k]], scorer, thresholds);
  });
  return results;
}

std::map<std::string, std::vector<PairScore>> read_pair_scores(
    std::istream& in) {
  std::map<std::string, std::vector<PairScore>> result;
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    if (!saw_header) {
      if (line != "group_id,ref_id_a,ref_id_b,score") {
        fail(line_no,
             "expected header `group_id,ref_id_a,ref_id_b,score`, found `" +
                 line + "`");
      }
      saw_header = true;
      continue;
    }
    std::vector<std::string_view> fields = split_fields(line, ',');
    if (fields.size() != 4) {
      fail(line_no, "expected 4 fields, found " +
                        std::to_string(fields.size()));
    }
    if (fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      fail(line_no, "empty identifier field");
    }
    double score = 0.0;
    auto [ptr, ec] = std::from_chars(fields[3].data(),
                                     fields[3].data() + fields[3].size(),
                                     score);
    if (ec != std::errc{} || ptr != fields[3].data() + fields[3].size()) {
      fail(line_no, "invalid score '" + std::string(fields[3]) + "'");
    }
    if (!(score >= -1.0 && score <= 1.0)) {
      fail(line_no, "score " + std::string(fields[3]) + " outside [-1, 1]");
    }
    result[std::string(fields[0])].push_back(
        PairScore{std::string(fields[1]), std::string(fields[2]), score});
  }
  if (!saw_header) {
    throw ParseError("pairwise-score input is empty");
  }
  return result;
}

std::map<std::string, std::vector<PairScore>> read_pair_scores_file(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open score file: " + path);
  }
  return read_pair_scores(in);
}

std::vector<ScoredGroup> import_scores(
    const Corpus& corpus,
    const std::map<std::string, std::vector<PairScore>>& imported,
    const SimilarityScorer* fallback, const ImportOptions& options,
    std::vector<std::string>* warnings) {
  validate_thresholds(options.thresholds);
  std::vector<std::string> local_warnings;
  std::vector<std::string>& warn = warnings ? *warnings : local_warnings;

  std::set<std::string> known_groups;
  for (const auto& group : corpus.groups) {
    known_groups.insert(group.group_id);
  }
  for (const auto& [group_id, pairs] : imported) {
    if (!known_groups.contains(group_id)) {
      std::string message = "unknown group_id '" + group_id +
                            "' in imported scores";
      if (options.strict) {
        throw Error(message);
      }
      warn.push_back(message + ", skipped");
    }
  }

  std::vector<ScoredGroup> results;
  for (const auto& group : corpus.groups) {
    if (group.references.size() < 2) {
      continue;
    }
    auto it = imported.find(group.group_id);
    if (it == imported.end()) {
      if (fallback) {
        results.push_back(score_group(group, *fallback, options.thresholds));
      }
      continue;
    }

    std::map<PairKey, double> by_pair;
    bool bad = false;
    std::string problem;
    for (const PairScore& pair : it->second) {
      PairKey key = canonical_pair(pair.ref_id_a, pair.ref_id_b);
      bool known_a = false;
      bool known_b = false;
      for (const auto& ref : group.references) {
        known_a = known_a || ref.ref_id == pair.ref_id_a;
        known_b = known_b || ref.ref_id == pair.ref_id_b;
      }
      if (!known_a || !known_b) {
        bad = true;
        problem = "pair ('" + pair.ref_id_a + "', '" + pair.ref_id_b +
                  "') names a ref_id not in group '" + group.group_id + "'";
        break;
      }
      if (pair.ref_id_a == pair.ref_id_b) {
        bad = true;
        problem = "self-pair for ref_id '" + pair.ref_id_a + "' in group '" +
                  group.group_id + "'";
        break;
      }
      if (!by_pair.emplace(key, pair.score).second) {
        bad = true;
        problem = "duplicate pair ('" + pair.ref_id_a + "', '" +
                  pair.ref_id_b + "') in group '" + group.group_id + "'";
        break;
      }
    }
    const std::size_t n = group.references.size();
    const std::size_t expected = n * (n - 1) / 2;
    if (!bad && by_pair.size() != expected) {
      bad = true;
      problem = "group '" + group.group_id + "' has " +
                std::to_string(by_pair.size()) + " imported pair(s); " +
                std::to_string(expected) + " required";
    }
    if (bad) {
      if (options.strict) {
        throw IncompletePairSetError(problem);
      }
      warn.push_back(problem + "; imported scores for the group discarded");
      if (fallback) {
        results.push_back(score_group(group, *fallback, options.thresholds));
      }
      continue;
    }

    ScoredGroup scored;
    scored.group_id = group.group_id;
    scored.pairwise.reserve(expected);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        PairKey key = canonical_pair(group.references[i].ref_id,
                                     group.references[j].ref_id);
        double value = by_pair.at(key);
        scored.pairwise.push_back(PairScore{group.references[i].ref_id,
                                            group.references[j].ref_id,
                                            value});
        sum += value;
      }
    }
    scored.sim_p = std::clamp(
        sum / static_cast<double>(scored.pairwise.size()), -1.0, 1.0);
    BinAssignment bin = assign_bin(scored.sim_p, options.thresholds);
    scored.bin = bin.bin;
    scored.high_subcategory = bin.high_subcategory;
    results.push_back(std::move(scored));
  }
  return results;
}

std::vector<HistogramBin> histogram(const std::vector<ScoredGroup>& scored,
                                    double bin_width) {
  if (!(bin_width > 0.0 && bin_width <= 2.0)) {
    throw Error("bin width must be in (0, 2]");
  }
  std::size_t bins = static_cast<std::size_t>(std::ceil(2.0 / bin_width));
  std::vector<HistogramBin> result(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    result[i].lower_edge = -1.0 + static_cast<double>(i) * bin_width;
  }
  for (const auto& group : scored) {
    double offset = (group.sim_p + 1.0) / bin_width;
    long long raw = static_cast<long long>(std::floor(offset));
    if (raw < 0) {
      raw = 0;
    }
    std::size_t idx = static_cast<std::size_t>(raw);
    if (idx >= bins) {
      idx = bins - 1;
    }
    ++result[idx].count;
  }
  return result;
}

std::string scored_group_json(const ScoredGroup& group) {
  json pairs = json::array();
  for (const auto& pair : group.pairwise) {
    json p;
    p["ref_id_a"] = pair.ref_id_a;
    p["ref_id_b"] = pair.ref_id_b;
    p["score"] = pair.score;
    pairs.push_back(std::move(p));
  }
  json obj;
  obj["group_id"] = group.group_id;
  obj["sim_p"] = group.sim_p;
  obj["bin"] = bin_name(group.bin);
  if (group.high_subcategory != HighSubcategory::kNone) {
    obj["high_subcategory"] = subcategory_name(group.high_subcategory);
  }
  obj["pairwise"] = std::move(pairs);
  return obj.dump();
}

void write_scored(const std::vector<ScoredGroup>& scored, std::ostream& out) {
  for (const auto& group : scored) {
    out << scored_group_json(group) << '\n';
  }
}

void write_scored_file(const std::vector<ScoredGroup>& scored,
                       const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot open output file: " + path);
  }
  write_scored(scored, out);
}

std::vector<ScoredGroup> load_scored(std::istream& in) {
  std::vector<ScoredGroup> result;
  std::string line;
  std::size_t line_no = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error&) {
      fail(line_no, "invalid JSON");
    }
    if (!obj.is_object()) {
      fail(line_no, "each line must be a JSON object");
    }
    ScoredGroup group;
    try {
      group.group_id = obj.at("group_id").get<std::string>();
      group.sim_p = obj.at("sim_p").get<double>();
      group.bin = parse_bin(obj.at("bin").get<std::string>());
      if (obj.contains("high_subcategory")) {
        group.high_subcategory =
            parse_subcategory(obj.at("high_subcategory").get<std::string>());
      }
      for (const auto& p : obj.at("pairwise")) {
        PairScore pair;
        pair.ref_id_a = p.at("ref_id_a").get<std::string>();
        pair.ref_id_b = p.at("ref_id_b").get<std::string>();
        pair.score = p.at("score").get<double>();
        if (!(pair.score >= -1.0 && pair.score <= 1.0)) {
          fail(line_no, "pairwise score outside [-1, 1]");
        }
        group.pairwise.push_back(std::move(pair));
      }
    } catch (const json::exception& e) {
      fail(line_no, std::string("invalid scored record: ") + e.what());
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      fail(line_no, e.what());
    }
    if (!(group.sim_p >= -1.0 && group.sim_p <= 1.0)) {
      fail(line_no, "sim_p outside [-1, 1]");
    }
    if (!seen.insert(group.group_id).second) {
      fail(line_no, "duplicate group_id '" + group.group_id + "'");
    }
    result.push_back(std::move(group));
  }
  return result;
}

std::vector<ScoredGroup> load_scored_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open scored file: " + path);
  }
  return load_scored(in);
}

BinCounts count_bins(const std::vector<ScoredGroup>& scored) {
  BinCounts counts;
  for (const auto& group : scored) {
    switch (group.bin) {
      case SimilarityBin::kLow:
        ++counts.low;
        break;
      case SimilarityBin::kMedium:
        ++counts.medium;
        break;
      case SimilarityBin::kHigh:
        ++counts.high;
        switch (group.high_subcategory) {
          case HighSubcategory::kExactly1:
            ++counts.high_exactly_1;
            break;
          case HighSubcategory::k0p9To1p0:
            ++counts.high_0p9_to_1p0;
            break;
          case HighSubcategory::k0p85To0p9:
            ++counts.high_0p85_to_0p9;
            break;
          case HighSubcategory::kNone:
            break;
        }
        break;
    }
  }
  return counts;
}

}  // namespace multiref
