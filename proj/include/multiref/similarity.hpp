#ifndef MULTIREF_SIMILARITY_HPP
#define MULTIREF_SIMILARITY_HPP

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "multiref/corpus.hpp"

namespace multiref {

struct TransparentHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view sv) const {
    return std::hash<std::string_view>{}(sv);
  }
};

// Token vectors stored contiguously; entries maps token to row index.
class EmbeddingTable {
 public:
  EmbeddingTable(std::size_t dimension, std::vector<float> data,
                 std::unordered_map<std::string, std::size_t, TransparentHash,
                                    std::equal_to<>>
                     index)
      : dimension_(dimension), data_(std::move(data)), index_(std::move(index)) {}

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return index_.size(); }

  // Returns the vector for token, or an empty span when out of vocabulary.
  std::span<const float> lookup(std::string_view token) const {
    auto it = index_.find(token);
    if (it == index_.end()) {
      return {};
    }
    return std::span<const float>(data_.data() + it->second * dimension_,
                                  dimension_);
  }

 private:
  std::size_t dimension_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t, TransparentHash, std::equal_to<>>
      index_;
};

struct EmbeddingLoadReport {
  std::size_t entries = 0;
  std::size_t duplicate_conflicts = 0;
};

// Text format: one entry per line, `token v1 v2 ... vd`. Duplicate tokens
// keep the first occurrence; conflicts are counted in the report.
EmbeddingTable load_embeddings(std::istream& in,
                               EmbeddingLoadReport* report = nullptr);
EmbeddingTable load_embeddings_file(const std::string& path,
                                    EmbeddingLoadReport* report = nullptr);

// Componentwise average of the in-vocabulary token vectors.
std::vector<double> embed(std::string_view text, const EmbeddingTable& table);

class SimilarityScorer {
 public:
  virtual ~SimilarityScorer() = default;
  virtual double score(std::string_view a, std::string_view b) const = 0;
  virtual std::string name() const = 0;
};

// Cosine over averaged token embeddings, clamped to [-1, 1].
class EmbeddingScorer : public SimilarityScorer {
 public:
  explicit EmbeddingScorer(const EmbeddingTable& table) : table_(table) {}

  double score(std::string_view a, std::string_view b) const override;
  std::string name() const override { return "embedding-cosine"; }

 private:
  const EmbeddingTable& table_;
};

enum class SimilarityBin { kLow, kMedium, kHigh };
enum class HighSubcategory { kNone, kExactly1, k0p9To1p0, k0p85To0p9 };

std::string bin_name(SimilarityBin bin);
SimilarityBin parse_bin(std::string_view name);
std::string subcategory_name(HighSubcategory sub);
HighSubcategory parse_subcategory(std::string_view name);

struct BinThresholds {
  double low_hi = 0.45;
  double med_hi = 0.85;
};

struct BinAssignment {
  SimilarityBin bin = SimilarityBin::kLow;
  HighSubcategory high_subcategory = HighSubcategory::kNone;

  bool operator==(const BinAssignment&) const = default;
};

// Low [-1, low_hi), Medium [low_hi, med_hi), High [med_hi, 1]. High splits
// into exactly_1.0, [0.9, 1.0), [0.85, 0.9).
BinAssignment assign_bin(double score, const BinThresholds& thresholds = {});

struct PairScore {
  std::string ref_id_a;
  std::string ref_id_b;
  double score = 0.0;

  bool operator==(const PairScore&) const = default;
};

struct ScoredGroup {
  std::string group_id;
  std::vector<PairScore> pairwise;
  double sim_p = 0.0;
  SimilarityBin bin = SimilarityBin::kLow;
  HighSubcategory high_subcategory = HighSubcategory::kNone;

  bool operator==(const ScoredGroup&) const = default;
};

// Scores all C(n,2) unordered reference pairs in reference order and
// averages them. Throws FewerThanTwoReferences for groups with < 2 refs;
// scorer errors are rethrown with the group and pair identified.
ScoredGroup score_group(const ParallelGroup& group,
                        const SimilarityScorer& scorer,
                        const BinThresholds& thresholds = {});

// Scores every multi-reference group; single-reference groups are skipped.
// Output order matches corpus order for any thread count.
std::vector<ScoredGroup> score_corpus(const Corpus& corpus,
                                      const SimilarityScorer& scorer,
                                      const BinThresholds& thresholds = {},
                                      unsigned threads = 1);

struct ImportOptions {
  bool strict = true;  // lenient mode warns and skips instead of throwing
  BinThresholds thresholds;
};

// CSV with header `group_id,ref_id_a,ref_id_b,score`, one unordered pair
// per row.
std::map<std::string, std::vector<PairScore>> read_pair_scores(
    std::istream& in);
std::map<std::string, std::vector<PairScore>> read_pair_scores_file(
    const std::string& path);

// Applies imported pairwise scores to the corpus. A group with any imported
// pairs must have its full C(n,2) pair set imported (no mixed provenance);
// groups without imported pairs fall back to the scorer when one is given,
// otherwise they are skipped. Unknown group_ids throw in strict mode and are
// reported in `warnings` otherwise.
std::vector<ScoredGroup> import_scores(
    const Corpus& corpus,
    const std::map<std::string, std::vector<PairScore>>& imported,
    const SimilarityScorer* fallback, const ImportOptions& options = {},
    std::vector<std::string>* warnings = nullptr);

struct HistogramBin {
  double lower_edge = 0.0;
  std::size_t count = 0;

  bool operator==(const HistogramBin&) const = default;
};

// Fixed-width bins covering [-1, 1], left-closed/right-open, last bin
// right-closed. Counts sum to the number of scored groups.
std::vector<HistogramBin> histogram(const std::vector<ScoredGroup>& scored,
                                    double bin_width);

// Line-delimited records {bin, group_id, high_subcategory?, pairwise, sim_p}.
std::string scored_group_json(const ScoredGroup& group);
void write_scored(const std::vector<ScoredGroup>& scored, std::ostream& out);
void write_scored_file(const std::vector<ScoredGroup>& scored,
                       const std::string& path);
std::vector<ScoredGroup> load_scored(std::istream& in);
std::vector<ScoredGroup> load_scored_file(const std::string& path);

struct BinCounts {
  std::size_t low = 0;
  std::size_t medium = 0;
  std::size_t high = 0;
  std::size_t high_exactly_1 = 0;
  std::size_t high_0p9_to_1p0 = 0;
  std::size_t high_0p85_to_0p9 = 0;
};

BinCounts count_bins(const std::vector<ScoredGroup>& scored);

}  // namespace multiref

#endif  // MULTIREF_SIMILARITY_HPP
