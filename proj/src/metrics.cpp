#include "multiref/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "multiref/errors.hpp"

namespace multiref {

namespace {

using nlohmann::json;

[[noreturn]] void fail(std::size_t line, const std::string& message) {
  throw ParseError(message, line);
}

void validate_bleu_config(const BleuConfig& config) {
  if (config.max_order < 1 || config.max_order > 9) {
    throw Error("bleu max_order must be between 1 and 9");
  }
}

void validate_chrf_config(const ChrfConfig& config) {
  if (config.char_order < 1 || config.word_order < 1) {
    throw Error("chrf orders must be at least 1");
  }
  if (!(config.beta > 0.0)) {
    throw Error("chrf beta must be positive");
  }
}

std::vector<std::string> bleu_tokens(const std::string& textline,
                                     const BleuConfig& config) {
  return text::word_tokens(textline, config.tokenizer, config.lowercase);
}

// n-grams as joined token keys; '\0' cannot appear inside a token.
std::map<std::string, std::uint64_t> ngram_counts(
    const std::vector<std::string>& tokens, std::size_t order) {
  std::map<std::string, std::uint64_t> counts;
  if (tokens.size() < order) {
    return counts;
  }
  for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t k = 1; k < order; ++k) {
      key.push_back('\0');
      key.append(tokens[i + k]);
    }
    ++counts[key];
  }
  return counts;
}

std::map<std::u32string, std::uint64_t> char_ngram_counts(
    const std::u32string& text, std::size_t order) {
  std::map<std::u32string, std::uint64_t> counts;
  if (text.size() < order) {
    return counts;
  }
  for (std::size_t i = 0; i + order <= text.size(); ++i) {
    ++counts[text.substr(i, order)];
  }
  return counts;
}

template <class Key>
std::uint64_t overlap(const std::map<Key, std::uint64_t>& hyp,
                      const std::map<Key, std::uint64_t>& ref) {
  std::uint64_t matched = 0;
  for (const auto& [key, count] : hyp) {
    auto it = ref.find(key);
    if (it != ref.end()) {
      matched += std::min(count, it->second);
    }
  }
  return matched;
}

struct PrCount {
  std::uint64_t matched = 0;
  std::uint64_t hyp_total = 0;
  std::uint64_t ref_total = 0;
};

double f_beta(const PrCount& c, double beta) {
  double precision = c.hyp_total > 0
                         ? static_cast<double>(c.matched) /
                               static_cast<double>(c.hyp_total)
                         : 0.0;
  double recall = c.ref_total > 0 ? static_cast<double>(c.matched) /
                                        static_cast<double>(c.ref_total)
                                  : 0.0;
  double b2 = beta * beta;
  double denom = b2 * precision + recall;
  if (denom == 0.0) {
    return 0.0;
  }
  return (1.0 + b2) * precision * recall / denom;
}

// Per-reference chrF++ on the 0..1 scale. Orders with no n-grams on either
// side are skipped; with no effective order at all, only exact equality of
// the stripped texts counts as a match.
double chrf_against_reference(const std::u32string& hyp_chars,
                              const std::vector<std::string>& hyp_words,
                              const std::u32string& ref_chars,
                              const std::vector<std::string>& ref_words,
                              const ChrfConfig& config) {
  double sum = 0.0;
  std::size_t effective = 0;
  for (int order = 1; order <= config.char_order; ++order) {
    auto hyp_counts = char_ngram_counts(hyp_chars, order);
    auto ref_counts = char_ngram_counts(ref_chars, order);
    PrCount c;
    for (const auto& [key, count] : hyp_counts) {
      c.hyp_total += count;
    }
    for (const auto& [key, count] : ref_counts) {
      c.ref_total += count;
    }
    if (c.hyp_total == 0 && c.ref_total == 0) {
      continue;
    }
    c.matched = overlap(hyp_counts, ref_counts);
    sum += f_beta(c, config.beta);
    ++effective;
  }
  for (int order = 1; order <= config.word_order; ++order) {
    auto hyp_counts = ngram_counts(hyp_words, order);
    auto ref_counts = ngram_counts(ref_words, order);
    PrCount c;
    for (const auto& [key, count] : hyp_counts) {
      c.hyp_total += count;
    }
    for (const auto& [key, count] : ref_counts) {
      c.ref_total += count;
    }
    if (c.hyp_total == 0 && c.ref_total == 0) {
      continue;
    }
    c.matched = overlap(hyp_counts, ref_counts);
    sum += f_beta(c, config.beta);
    ++effective;
  }
  if (effective == 0) {
    return hyp_chars == ref_chars ? 1.0 : 0.0;
  }
  return sum / static_cast<double>(effective);
}

}  // namespace

void BleuStats::add(const BleuStats& other) {
  if (matched.empty()) {
    matched.assign(other.matched.size(), 0);
    total.assign(other.total.size(), 0);
  }
  if (matched.size() != other.matched.size()) {
    throw Error("cannot aggregate BLEU stats with different orders");
  }
  for (std::size_t i = 0; i < matched.size(); ++i) {
    matched[i] += other.matched[i];
    total[i] += other.total[i];
  }
  hyp_len += other.hyp_len;
  ref_len += other.ref_len;
}

BleuStats bleu_segment_stats(const SegmentEval& segment,
                             const BleuConfig& config) {
  validate_bleu_config(config);
  if (segment.references.empty()) {
    throw Error("segment '" + segment.segment_id + "' has no references");
  }
  const std::size_t orders = static_cast<std::size_t>(config.max_order);
  BleuStats stats;
  stats.matched.assign(orders, 0);
  stats.total.assign(orders, 0);

  std::vector<std::string> hyp = bleu_tokens(segment.hypothesis, config);
  std::vector<std::vector<std::string>> refs;
  refs.reserve(segment.references.size());
  for (const auto& ref : segment.references) {
    refs.push_back(bleu_tokens(ref, config));
  }

  stats.hyp_len = hyp.size();
  std::uint64_t best_len = refs[0].size();
  for (const auto& ref : refs) {
    std::uint64_t len = ref.size();
    std::uint64_t best_gap = best_len > stats.hyp_len
                                 ? best_len - stats.hyp_len
                                 : stats.hyp_len - best_len;
    std::uint64_t gap =
        len > stats.hyp_len ? len - stats.hyp_len : stats.hyp_len - len;
    if (gap < best_gap || (gap == best_gap && len < best_len)) {
      best_len = len;
    }
  }
  stats.ref_len = best_len;

  for (std::size_t order = 1; order <= orders; ++order) {
    auto hyp_counts = ngram_counts(hyp, order);
    std::map<std::string, std::uint64_t> clip;
    for (const auto& ref : refs) {
      for (const auto& [key, count] : ngram_counts(ref, order)) {
        std::uint64_t& best = clip[key];
        best = std::max(best, count);
      }
    }
    std::uint64_t matched = overlap(hyp_counts, clip);
    std::uint64_t total =
        hyp.size() + 1 >= order ? hyp.size() + 1 - order : 0;
    stats.matched[order - 1] = matched;
    stats.total[order - 1] = total;
  }
  return stats;
}

double bleu_finalize(const BleuStats& aggregate, const BleuConfig& config,
                     std::map<std::string, double>* details) {
  validate_bleu_config(config);
  const std::size_t orders = static_cast<std::size_t>(config.max_order);
  if (aggregate.matched.size() != orders) {
    throw Error("BLEU stats order mismatch");
  }
  double bp = 1.0;
  if (aggregate.hyp_len == 0) {
    bp = 0.0;
  } else if (aggregate.hyp_len < aggregate.ref_len) {
    bp = std::exp(1.0 - static_cast<double>(aggregate.ref_len) /
                            static_cast<double>(aggregate.hyp_len));
  }
  double log_sum = 0.0;
  bool zero = false;
  std::vector<double> precisions(orders, 0.0);
  for (std::size_t i = 0; i < orders; ++i) {
    if (aggregate.total[i] == 0 || aggregate.matched[i] == 0) {
      zero = true;
      continue;
    }
    precisions[i] = static_cast<double>(aggregate.matched[i]) /
                    static_cast<double>(aggregate.total[i]);
    log_sum += std::log(precisions[i]);
  }
  double score = 0.0;
  if (!zero && aggregate.hyp_len > 0) {
    score = bp * std::exp(log_sum / static_cast<double>(orders)) * 100.0;
  }
  if (details) {
    (*details)["bp"] = bp;
    (*details)["hyp_len"] = static_cast<double>(aggregate.hyp_len);
    (*details)["ref_len"] = static_cast<double>(aggregate.ref_len);
    for (std::size_t i = 0; i < orders; ++i) {
      (*details)["p" + std::to_string(i + 1)] = precisions[i];
    }
  }
  return score;
}

MetricReport bleu_corpus(const std::vector<SegmentEval>& segments,
                         const BleuConfig& config) {
  validate_bleu_config(config);
  if (segments.empty()) {
    throw Error("cannot compute BLEU over an empty segment list");
  }
  BleuStats aggregate;
  std::map<std::string, BleuStats> by_language;
  for (const auto& segment : segments) {
    BleuStats stats = bleu_segment_stats(segment, config);
    aggregate.add(stats);
    by_language[segment.language].add(stats);
  }
  MetricReport report;
  report.metric = "bleu";
  report.corpus_score = bleu_finalize(aggregate, config, &report.details);
  for (const auto& [language, stats] : by_language) {
    report.per_language[language] = bleu_finalize(stats, config);
  }
  return report;
}

double chrfpp_segment(const std::string& hypothesis,
                      const std::vector<std::string>& references,
                      const ChrfConfig& config) {
  validate_chrf_config(config);
  if (references.empty()) {
    throw Error("chrF++ segment has no references");
  }
  std::u32string hyp_chars = text::codepoints_no_space(hypothesis);
  std::vector<std::string> hyp_words =
      text::word_tokens(hypothesis, text::WordTokenizerRule::kPunct, false);
  double best = 0.0;
  for (const auto& reference : references) {
    std::u32string ref_chars = text::codepoints_no_space(reference);
    std::vector<std::string> ref_words =
        text::word_tokens(reference, text::WordTokenizerRule::kPunct, false);
    double value = chrf_against_reference(hyp_chars, hyp_words, ref_chars,
                                          ref_words, config);
    best = std::max(best, value);
  }
  return best * 100.0;
}

MetricReport chrfpp_corpus(const std::vector<SegmentEval>& segments,
                           const ChrfConfig& config) {
  validate_chrf_config(config);
  if (segments.empty()) {
    throw Error("cannot compute chrF++ over an empty segment list");
  }
  MetricReport report;
  report.metric = "chrfpp";
  report.per_segment.reserve(segments.size());
  std::map<std::string, std::pair<double, std::size_t>> by_language;
  double sum = 0.0;
  for (const auto& segment : segments) {
    if (segment.references.empty()) {
      throw Error("segment '" + segment.segment_id + "' has no references");
    }
    double value = chrfpp_segment(segment.hypothesis, segment.references,
                                  config);
    report.per_segment.push_back(value);
    sum += value;
    auto& bucket = by_language[segment.language];
    bucket.first += value;
    bucket.second += 1;
  }
  report.corpus_score = sum / static_cast<double>(segments.size());
  for (const auto& [language, bucket] : by_language) {
    report.per_language[language] =
        bucket.first / static_cast<double>(bucket.second);
  }
  return report;
}

std::vector<ExternalScoreRow> read_external_scores(std::istream& in) {
  std::vector<ExternalScoreRow> rows;
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
      if (line != "segment_id,ref_id,score") {
        fail(line_no, "expected header `segment_id,ref_id,score`, found `" +
                          line + "`");
      }
      saw_header = true;
      continue;
    }
    std::size_t first = line.find(',');
    std::size_t second =
        first == std::string::npos ? std::string::npos
                                   : line.find(',', first + 1);
    if (first == std::string::npos || second == std::string::npos ||
        line.find(',', second + 1) != std::string::npos) {
      fail(line_no, "expected 3 fields");
    }
    ExternalScoreRow row;
    row.segment_id = line.substr(0, first);
    row.ref_id = line.substr(first + 1, second - first - 1);
    std::string score_text = line.substr(second + 1);
    if (row.segment_id.empty() || row.ref_id.empty()) {
      fail(line_no, "empty identifier field");
    }
    auto [ptr, ec] = std::from_chars(
        score_text.data(), score_text.data() + score_text.size(), row.score);
    if (ec != std::errc{} || ptr != score_text.data() + score_text.size() ||
        !std::isfinite(row.score)) {
      fail(line_no, "invalid score '" + score_text + "'");
    }
    rows.push_back(std::move(row));
  }
  if (!saw_header) {
    throw ParseError("external-score input is empty");
  }
  return rows;
}

std::vector<ExternalScoreRow> read_external_scores_file(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open external-score file: " + path);
  }
  return read_external_scores(in);
}

MetricReport average_external_scores(
    const std::vector<ExternalScoreRow>& rows,
    const std::vector<SegmentEval>& segments) {
  if (segments.empty()) {
    throw Error("cannot average external scores over an empty segment list");
  }
  std::map<std::string, std::map<std::string, double>> by_segment;
  std::set<std::string> segment_ids;
  for (const auto& segment : segments) {
    if (!segment_ids.insert(segment.segment_id).second) {
      throw Error("duplicate segment_id '" + segment.segment_id + "'");
    }
  }
  for (const auto& row : rows) {
    if (!segment_ids.contains(row.segment_id)) {
      throw Error("external score names unknown segment_id '" +
                  row.segment_id + "'");
    }
    auto& per_ref = by_segment[row.segment_id];
    if (!per_ref.emplace(row.ref_id, row.score).second) {
      throw Error("duplicate external score for (" + row.segment_id + ", " +
                  row.ref_id + ")");
    }
  }
  MetricReport report;
  report.metric = "external";
  report.per_segment.reserve(segments.size());
  std::map<std::string, std::pair<double, std::size_t>> by_language;
  double sum = 0.0;
  for (const auto& segment : segments) {
    auto it = by_segment.find(segment.segment_id);
    if (it == by_segment.end() || it->second.empty()) {
      throw Error("segment '" + segment.segment_id +
                  "' has no external scores");
    }
    double segment_sum = 0.0;
    for (const auto& [ref_id, score] : it->second) {
      segment_sum += score;
    }
    double mean = segment_sum / static_cast<double>(it->second.size());
    report.per_segment.push_back(mean);
    sum += mean;
    auto& bucket = by_language[segment.language];
    bucket.first += mean;
    bucket.second += 1;
  }
  report.corpus_score = sum / static_cast<double>(segments.size());
  for (const auto& [language, bucket] : by_language) {
    report.per_language[language] =
        bucket.first / static_cast<double>(bucket.second);
  }
  return report;
}

GainReport per_language_gain(const MetricReport& a, const MetricReport& b) {
  for (const auto& [language, score] : a.per_language) {
    if (!b.per_language.contains(language)) {
      throw Error("language '" + language + "' missing from second report");
    }
  }
  for (const auto& [language, score] : b.per_language) {
    if (!a.per_language.contains(language)) {
      throw Error("language '" + language + "' missing from first report");
    }
  }
  GainReport gain;
  gain.overall = b.corpus_score - a.corpus_score;
  for (const auto& [language, score] : a.per_language) {
    gain.per_language[language] = b.per_language.at(language) - score;
  }
  return gain;
}

std::vector<Hypothesis> load_hypotheses(std::istream& in) {
  std::vector<Hypothesis> result;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
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
    Hypothesis hyp;
    try {
      hyp.segment_id = obj.at("segment_id").get<std::string>();
      hyp.language = obj.at("language").get<std::string>();
      hyp.hypothesis = obj.at("hypothesis").get<std::string>();
    } catch (const json::exception& e) {
      fail(line_no, std::string("invalid hypothesis record: ") + e.what());
    }
    if (hyp.segment_id.empty()) {
      fail(line_no, "field 'segment_id' must be non-empty");
    }
    if (!seen.insert(hyp.segment_id).second) {
      fail(line_no, "duplicate segment_id '" + hyp.segment_id + "'");
    }
    result.push_back(std::move(hyp));
  }
  return result;
}

std::vector<Hypothesis> load_hypotheses_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open hypothesis file: " + path);
  }
  return load_hypotheses(in);
}

void write_hypotheses(const std::vector<Hypothesis>& hypotheses,
                      std::ostream& out) {
  for (const auto& hyp : hypotheses) {
    json obj;
    obj["segment_id"] = hyp.segment_id;
    obj["language"] = hyp.language;
    obj["hypothesis"] = hyp.hypothesis;
    out << obj.dump() << '\n';
  }
}

std::vector<SegmentEval> join_segments(
    const std::vector<Hypothesis>& hypotheses, const Corpus& references) {
  std::map<std::string, const Hypothesis*> by_id;
  for (const auto& hyp : hypotheses) {
    if (!by_id.emplace(hyp.segment_id, &hyp).second) {
      throw Error("duplicate hypothesis for segment '" + hyp.segment_id + "'");
    }
  }
  std::set<std::string> corpus_ids;
  std::vector<SegmentEval> segments;
  segments.reserve(references.groups.size());
  for (const auto& group : references.groups) {
    corpus_ids.insert(group.group_id);
    auto it = by_id.find(group.group_id);
    if (it == by_id.end()) {
      throw Error("no hypothesis for segment '" + group.group_id + "'");
    }
    if (!it->second->language.empty() &&
        it->second->language != group.language) {
      throw Error("hypothesis for segment '" + group.group_id +
                  "' has language '" + it->second->language +
                  "' but the reference group is '" + group.language + "'");
    }
    SegmentEval segment;
    segment.segment_id = group.group_id;
    segment.language = group.language;
    segment.hypothesis = it->second->hypothesis;
    for (const auto& ref : group.references) {
      segment.references.push_back(ref.text);
    }
    segments.push_back(std::move(segment));
  }
  for (const auto& hyp : hypotheses) {
    if (!corpus_ids.contains(hyp.segment_id)) {
      throw Error("hypothesis segment '" + hyp.segment_id +
                  "' not present in the reference corpus");
    }
  }
  return segments;
}

std::string metric_report_json(const MetricReport& report,
                               bool include_per_segment) {
  json obj;
  obj["metric"] = report.metric;
  obj["corpus_score"] = report.corpus_score;
  json languages = json::object();
  for (const auto& [language, score] : report.per_language) {
    languages[language] = score;
  }
  obj["per_language"] = std::move(languages);
  if (!report.details.empty()) {
    json details = json::object();
    for (const auto& [key, value] : report.details) {
      details[key] = value;
    }
    obj["details"] = std::move(details);
  }
  if (include_per_segment && !report.per_segment.empty()) {
    obj["per_segment"] = report.per_segment;
  }
  return obj.dump(2) + "\n";
}

}  // namespace multiref
