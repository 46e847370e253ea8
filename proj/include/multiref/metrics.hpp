#ifndef MULTIREF_METRICS_HPP
#define MULTIREF_METRICS_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "multiref/corpus.hpp"
#include "multiref/text.hpp"

namespace multiref {

struct SegmentEval {
  std::string segment_id;
  std::string language;
  std::string hypothesis;
  std::vector<std::string> references;

  bool operator==(const SegmentEval&) const = default;
};

struct BleuConfig {
  int max_order = 4;
  text::WordTokenizerRule tokenizer = text::WordTokenizerRule::kPunct;
  bool lowercase = false;
};

struct ChrfConfig {
  int char_order = 6;
  int word_order = 2;
  double beta = 2.0;
};

struct MetricConfig {
  BleuConfig bleu;
  ChrfConfig chrfpp;
};

struct MetricReport {
  std::string metric;
  double corpus_score = 0.0;
  std::vector<double> per_segment;  // parallel to input order; may be empty
  std::map<std::string, double> per_language;
  std::map<std::string, double> details;
};

// Clipped n-gram counts for one segment; matched uses the maximum count of
// each n-gram across the references, ref_len is the reference length closest
// to the hypothesis length (ties go to the shorter).
struct BleuStats {
  std::vector<std::uint64_t> matched;
  std::vector<std::uint64_t> total;
  std::uint64_t hyp_len = 0;
  std::uint64_t ref_len = 0;

  void add(const BleuStats& other);
};

BleuStats bleu_segment_stats(const SegmentEval& segment,
                             const BleuConfig& config);

// Corpus score from aggregated stats: BP * exp(mean log p_n) * 100, zero when
// any p_n is zero (no smoothing).
double bleu_finalize(const BleuStats& aggregate, const BleuConfig& config,
                     std::map<std::string, double>* details = nullptr);

MetricReport bleu_corpus(const std::vector<SegmentEval>& segments,
                         const BleuConfig& config = {});

// Best-reference segment score on the 0..100 scale: char n-grams 1..6 on the
// whitespace-stripped text plus word n-grams 1..2, F_beta averaged over the
// orders where either side has n-grams.
double chrfpp_segment(const std::string& hypothesis,
                      const std::vector<std::string>& references,
                      const ChrfConfig& config = {});

MetricReport chrfpp_corpus(const std::vector<SegmentEval>& segments,
                           const ChrfConfig& config = {});

struct ExternalScoreRow {
  std::string segment_id;
  std::string ref_id;
  double score = 0.0;

  bool operator==(const ExternalScoreRow&) const = default;
};

// CSV with header `segment_id,ref_id,score`.
std::vector<ExternalScoreRow> read_external_scores(std::istream& in);
std::vector<ExternalScoreRow> read_external_scores_file(
    const std::string& path);

// Mean per segment over its references, then mean of segment means. Scores
// keep their native scale.
MetricReport average_external_scores(
    const std::vector<ExternalScoreRow>& rows,
    const std::vector<SegmentEval>& segments);

struct GainReport {
  std::map<std::string, double> per_language;
  double overall = 0.0;
};

// score_b - score_a per language and overall; both reports must cover the
// same languages.
GainReport per_language_gain(const MetricReport& a, const MetricReport& b);

struct Hypothesis {
  std::string segment_id;
  std::string language;
  std::string hypothesis;

  bool operator==(const Hypothesis&) const = default;
};

// Line-delimited records {segment_id, language, hypothesis}.
std::vector<Hypothesis> load_hypotheses(std::istream& in);
std::vector<Hypothesis> load_hypotheses_file(const std::string& path);
void write_hypotheses(const std::vector<Hypothesis>& hypotheses,
                      std::ostream& out);

// Pairs every corpus group with its hypothesis, in corpus order. The two
// segment-id sets must match exactly.
std::vector<SegmentEval> join_segments(
    const std::vector<Hypothesis>& hypotheses, const Corpus& references);

std::string metric_report_json(const MetricReport& report,
                               bool include_per_segment = false);

}  // namespace multiref

#endif  // MULTIREF_METRICS_HPP
