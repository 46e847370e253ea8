#ifndef MULTIREF_DATASET_HPP
#define MULTIREF_DATASET_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "multiref/corpus.hpp"
#include "multiref/similarity.hpp"

namespace multiref {

struct TrainingInstance {
  std::string group_id;
  std::string ref_id;
  std::string language;
  std::string source_text;
  std::string target_text;

  bool operator==(const TrainingInstance&) const = default;
};

enum class DatasetKind {
  kSingle,
  kBinFiltered,
  kUnfiltered,
  kMediumPlus,
  kAblationHigh
};

std::string dataset_kind_name(DatasetKind kind);
DatasetKind parse_dataset_kind(std::string_view name);

struct DatasetSpec {
  DatasetKind kind = DatasetKind::kUnfiltered;
  std::optional<SimilarityBin> bin;              // bin_filtered
  std::optional<SimilarityBin> add_bin;          // medium_plus
  std::optional<int> steps;                      // medium_plus, 0..10
  std::optional<HighSubcategory> subcategory;    // ablation_high
  std::optional<std::size_t> n_source;
  std::uint64_t seed = 0;

  bool operator==(const DatasetSpec&) const = default;
};

struct Dataset {
  DatasetSpec spec;
  std::vector<TrainingInstance> instances;
  std::size_t num_source = 0;
  std::size_t num_instance = 0;

  bool operator==(const Dataset&) const = default;
};

// One instance per sampled group, with one uniformly chosen reference.
// Omitting n_source keeps every group.
Dataset build_single(const Corpus& corpus, std::optional<std::size_t> n_source,
                     std::uint64_t seed);

// Keeps exactly the groups in the given bin with all their references.
Dataset build_bin_filtered(const Corpus& corpus,
                           const std::vector<ScoredGroup>& scored,
                           SimilarityBin bin,
                           std::optional<std::size_t> n_source,
                           std::uint64_t seed);

// All groups, all references, optionally subsampled by group.
Dataset build_unfiltered(const Corpus& corpus,
                         std::optional<std::size_t> n_source,
                         std::uint64_t seed);

// Full Medium bin plus the first `steps` slices of a seeded permutation of
// the add_bin groups; slices hold ceil(N/10) groups so step 10 exhausts the
// bin. Step k is always a superset of step k-1.
Dataset build_medium_plus(const Corpus& corpus,
                          const std::vector<ScoredGroup>& scored,
                          SimilarityBin add_bin, int steps,
                          std::uint64_t seed);

// Synthetic two-reference groups built by repeating one reference of k
// sampled pool groups. Ids gain a `#rep` suffix.
std::vector<ParallelGroup> augment_repetition(
    const std::vector<const ParallelGroup*>& pool, std::size_t k,
    std::uint64_t seed);

// Full Medium bin plus a slice (10% of the High bin's group count) drawn
// from one High subcategory; a shortfall is filled with repetition-augmented
// groups from the other two subcategories.
Dataset build_ablation_high(const Corpus& corpus,
                            const std::vector<ScoredGroup>& scored,
                            HighSubcategory subcategory, std::uint64_t seed);

Dataset build_dataset(const Corpus& corpus,
                      const std::vector<ScoredGroup>& scored,
                      const DatasetSpec& spec);

// Seeded uniform permutation of the instances; counts unchanged.
Dataset shuffle_instances(const Dataset& dataset, std::uint64_t seed);

InstanceCounts count_instances(const Dataset& dataset);

// JSON manifest text recording the dataset spec, counts, and instance-file
// hash.
std::string dataset_manifest(const Dataset& dataset,
                             const std::string& instance_hash);

}  // namespace multiref

#endif  // MULTIREF_DATASET_HPP
