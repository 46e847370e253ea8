#ifndef MULTIREF_REPORT_HPP
#define MULTIREF_REPORT_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "multiref/corpus.hpp"
#include "multiref/dataset.hpp"
#include "multiref/metrics.hpp"
#include "multiref/similarity.hpp"

namespace multiref {

// Line-delimited records {group_id, language, ref_id, source, target} in
// dataset order. Returns the number of lines written.
std::size_t export_pairs(const Dataset& dataset, std::ostream& out);
std::vector<TrainingInstance> load_pairs(std::istream& in);
std::vector<TrainingInstance> load_pairs_file(const std::string& path);

inline constexpr const char* kPromptDelimiter = " ###> ";

// One `<source> ###> <target>` line per instance; newlines inside either
// text become the two characters \n. Texts containing the delimiter raise
// DelimiterCollision.
void export_prompt_lines(const Dataset& dataset, std::ostream& out);

struct CompositionRow {
  std::string language;
  std::size_t books = 0;
  std::size_t src = 0;
  std::size_t total = 0;
  double pct_used = 0.0;  // src/total rounded to 2 decimals

  bool operator==(const CompositionRow&) const = default;
};

// Per-language usage of corpus groups by the dataset, sorted by src
// ascending (ties by language). Synthetic `#rep` ids count toward their
// original group.
std::vector<CompositionRow> composition_report(const Dataset& dataset,
                                               const Corpus& corpus);

// CSV with header `language,books,src,total,pct_used`.
std::string composition_csv(const std::vector<CompositionRow>& rows);

// CSV with header `lower_edge,count`.
std::string histogram_csv(const std::vector<HistogramBin>& bins);

// Bar chart with vertical rules at the two bin thresholds (red low_hi, blue
// med_hi).
std::string histogram_svg(const std::vector<HistogramBin>& bins,
                          const BinThresholds& thresholds = {});

// CSV with header `language,books,sources,references` plus a total row.
std::string corpus_stats_csv(const CorpusStats& stats);

std::string gain_report_json(const GainReport& gain);

}  // namespace multiref

#endif  // MULTIREF_REPORT_HPP
