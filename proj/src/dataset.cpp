#include "multiref/dataset.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

#include <json.hpp>

#include "multiref/errors.hpp"
#include "multiref/rng.hpp"

namespace multiref {

namespace {

using nlohmann::json;

std::map<std::string, const ScoredGroup*> index_scores(
    const std::vector<ScoredGroup>& scored) {
  std::map<std::string, const ScoredGroup*> by_id;
  for (const auto& group : scored) {
    by_id[group.group_id] = &group;
  }
  return by_id;
}

void require_scored(const Corpus& corpus,
                    const std::map<std::string, const ScoredGroup*>& by_id) {
  for (const auto& group : corpus.groups) {
    if (group.references.size() >= 2 && !by_id.contains(group.group_id)) {
      throw Error("multi-reference group '" + group.group_id +
                  "' has no similarity score");
    }
  }
}

void append_all_references(const ParallelGroup& group,
                           std::vector<TrainingInstance>& out) {
  for (const auto& ref : group.references) {
    out.push_back(TrainingInstance{group.group_id, ref.ref_id, group.language,
                                   group.source_text, ref.text});
  }
}

Dataset finalize(DatasetSpec spec, std::vector<TrainingInstance> instances) {
  Dataset dataset;
  dataset.spec = std::move(spec);
  dataset.instances = std::move(instances);
  InstanceCounts counts = count_instances(dataset);
  dataset.num_source = counts.num_source;
  dataset.num_instance = counts.num_instance;
  return dataset;
}

std::vector<std::size_t> maybe_subsample(std::size_t available,
                                         std::optional<std::size_t> n_source,
                                         std::uint64_t seed,
                                         std::string_view label) {
  if (!n_source) {
    std::vector<std::size_t> all(available);
    for (std::size_t i = 0; i < available; ++i) {
      all[i] = i;
    }
    return all;
  }
  if (*n_source > available) {
    throw Error("requested " + std::to_string(*n_source) +
                " source groups but only " + std::to_string(available) +
                " are available");
  }
  rng::Stream stream(seed, label);
  return stream.sample(available, *n_source);
}

}  // namespace

std::string dataset_kind_name(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kSingle:
      return "single";
    case DatasetKind::kBinFiltered:
      return "bin_filtered";
    case DatasetKind::kUnfiltered:
      return "unfiltered";
    case DatasetKind::kMediumPlus:
      return "medium_plus";
    case DatasetKind::kAblationHigh:
      return "ablation_high";
  }
  throw Error("invalid dataset kind value");
}

DatasetKind parse_dataset_kind(std::string_view name) {
  if (name == "single") {
    return DatasetKind::kSingle;
  }
  if (name == "bin_filtered") {
    return DatasetKind::kBinFiltered;
  }
  if (name == "unfiltered") {
    return DatasetKind::kUnfiltered;
  }
  if (name == "medium_plus") {
    return DatasetKind::kMediumPlus;
  }
  if (name == "ablation_high") {
    return DatasetKind::kAblationHigh;
  }
  throw Error("unknown dataset kind '" + std::string(name) + "'");
}

Dataset build_single(const Corpus& corpus, std::optional<std::size_t> n_source,
                     std::uint64_t seed) {
  std::vector<std::size_t> picked =
      maybe_subsample(corpus.groups.size(), n_source, seed, "single/sample");
  std::vector<TrainingInstance> instances;
  instances.reserve(picked.size());
  for (std::size_t idx : picked) {
    const ParallelGroup& group = corpus.groups[idx];
    rng::Stream ref_stream(seed, "single/ref", idx);
    const ReferenceText& ref =
        group.references[ref_stream.below(group.references.size())];
    instances.push_back(TrainingInstance{group.group_id, ref.ref_id,
                                         group.language, group.source_text,
                                         ref.text});
  }
  DatasetSpec spec;
  spec.kind = DatasetKind::kSingle;
  spec.n_source = n_source;
  spec.seed = seed;
  return finalize(std::move(spec), std::move(instances));
}

Dataset build_bin_filtered(const Corpus& corpus,
                           const std::vector<ScoredGroup>& scored,
                           SimilarityBin bin,
                           std::optional<std::size_t> n_source,
                           std::uint64_t seed) {
  auto by_id = index_scores(scored);
  require_scored(corpus, by_id);
  std::vector<const ParallelGroup*> kept;
  for (const auto& group : corpus.groups) {
    auto it = by_id.find(group.group_id);
    if (it != by_id.end() && it->second->bin == bin) {
      kept.push_back(&group);
    }
  }
  std::vector<std::size_t> picked =
      maybe_subsample(kept.size(), n_source, seed, "bin_filtered/sample");
  std::vector<TrainingInstance> instances;
  for (std::size_t idx : picked) {
    append_all_references(*kept[idx], instances);
  }
  DatasetSpec spec;
  spec.kind = DatasetKind::kBinFiltered;
  spec.bin = bin;
  spec.n_source = n_source;
  spec.seed = seed;
  return finalize(std::move(spec), std::move(instances));
}

Dataset build_unfiltered(const Corpus& corpus,
                         std::optional<std::size_t> n_source,
                         std::uint64_t seed) {
  std::vector<std::size_t> picked =
      maybe_subsample(corpus.groups.size(), n_source, seed,
                      "unfiltered/sample");
  std::vector<TrainingInstance> instances;
  for (std::size_t idx : picked) {
    append_all_references(corpus.groups[idx], instances);
  }
  DatasetSpec spec;
  spec.kind = DatasetKind::kUnfiltered;
  spec.n_source = n_source;
  spec.seed = seed;
  return finalize(std::move(spec), std::move(instances));
}

Dataset build_medium_plus(const Corpus& corpus,
                          const std::vector<ScoredGroup>& scored,
                          SimilarityBin add_bin, int steps,
                          std::uint64_t seed) {
  if (add_bin == SimilarityBin::kMedium) {
    throw Error("add_bin must be low or high");
  }
  if (steps < 0 || steps > 10) {
    throw Error("steps must be between 0 and 10");
  }
  auto by_id = index_scores(scored);
  require_scored(corpus, by_id);

  std::vector<std::size_t> add_pool;
  std::set<std::size_t> included;
  for (std::size_t i = 0; i < corpus.groups.size(); ++i) {
    auto it = by_id.find(corpus.groups[i].group_id);
    if (it == by_id.end()) {
      continue;
    }
    if (it->second->bin == SimilarityBin::kMedium) {
      included.insert(i);
    } else if (it->second->bin == add_bin) {
      add_pool.push_back(i);
    }
  }

  rng::Stream stream(seed, "medium_plus/" + bin_name(add_bin));
  stream.shuffle(add_pool);
  std::size_t slice = (add_pool.size() + 9) / 10;
  std::size_t take = std::min(add_pool.size(),
                              slice * static_cast<std::size_t>(steps));
  for (std::size_t k = 0; k < take; ++k) {
    included.insert(add_pool[k]);
  }

  std::vector<TrainingInstance> instances;
  for (std::size_t idx : included) {
    append_all_references(corpus.groups[idx], instances);
  }
  DatasetSpec spec;
  spec.kind = DatasetKind::kMediumPlus;
  spec.add_bin = add_bin;
  spec.steps = steps;
  spec.seed = seed;
  return finalize(std::move(spec), std::move(instances));
}

std::vector<ParallelGroup> augment_repetition(
    const std::vector<const ParallelGroup*>& pool, std::size_t k,
    std::uint64_t seed) {
  if (k > pool.size()) {
    throw Error("repetition pool exhausted: need " + std::to_string(k) +
                " group(s), have " + std::to_string(pool.size()));
  }
  rng::Stream stream(seed, "augment/sample");
  std::vector<std::size_t> picked = stream.sample(pool.size(), k);
  std::vector<ParallelGroup> synthetic;
  synthetic.reserve(k);
  for (std::size_t idx : picked) {
    const ParallelGroup& original = *pool[idx];
    rng::Stream ref_stream(seed, "augment/ref", idx);
    const ReferenceText& ref =
        original.references[ref_stream.below(original.references.size())];
    ParallelGroup group;
    group.group_id = original.group_id + "#rep";
    group.language = original.language;
    group.book_id = original.book_id;
    group.paragraph_index = original.paragraph_index;
    group.source_text = original.source_text;
    ReferenceText copy = ref;
    copy.ref_id = ref.ref_id + "#rep";
    group.references = {ref, std::move(copy)};
    synthetic.push_back(std::move(group));
  }
  return synthetic;
}

Dataset build_ablation_high(const Corpus& corpus,
                            const std::vector<ScoredGroup>& scored,
                            HighSubcategory subcategory, std::uint64_t seed) {
  if (subcategory == HighSubcategory::kNone) {
    throw Error("ablation subcategory must be one of exactly_1.0, 0.9_to_1.0, "
                "0.85_to_0.9");
  }
  auto by_id = index_scores(scored);
  require_scored(corpus, by_id);

  std::vector<std::size_t> medium;
  std::vector<std::size_t> in_subcategory;
  std::vector<const ParallelGroup*> other_high;
  std::size_t high_total = 0;
  for (std::size_t i = 0; i < corpus.groups.size(); ++i) {
    auto it = by_id.find(corpus.groups[i].group_id);
    if (it == by_id.end()) {
      continue;
    }
    if (it->second->bin == SimilarityBin::kMedium) {
      medium.push_back(i);
    } else if (it->second->bin == SimilarityBin::kHigh) {
      ++high_total;
      if (it->second->high_subcategory == subcategory) {
        in_subcategory.push_back(i);
      } else {
        other_high.push_back(&corpus.groups[i]);
      }
    }
  }

  std::size_t slice = (high_total + 9) / 10;
  std::size_t from_subcategory = std::min(slice, in_subcategory.size());
  rng::Stream stream(seed, "ablation/" + subcategory_name(subcategory));
  std::vector<std::size_t> picked =
      stream.sample(in_subcategory.size(), from_subcategory);

  std::vector<TrainingInstance> instances;
  std::set<std::size_t> included(medium.begin(), medium.end());
  for (std::size_t k : picked) {
    included.insert(in_subcategory[k]);
  }
  for (std::size_t idx : included) {
    append_all_references(corpus.groups[idx], instances);
  }
  std::size_t shortfall = slice - from_subcategory;
  if (shortfall > 0) {
    for (const auto& group : augment_repetition(other_high, shortfall, seed)) {
      append_all_references(group, instances);
    }
  }
  DatasetSpec spec;
  spec.kind = DatasetKind::kAblationHigh;
  spec.subcategory = subcategory;
  spec.seed = seed;
  return finalize(std::move(spec), std::move(instances));
}

Dataset build_dataset(const Corpus& corpus,
                      const std::vector<ScoredGroup>& scored,
                      const DatasetSpec& spec) {
  switch (spec.kind) {
    case DatasetKind::kSingle:
      return build_single(corpus, spec.n_source, spec.seed);
    case DatasetKind::kBinFiltered:
      if (!spec.bin) {
        throw Error("bin_filtered dataset requires 'bin'");
      }
      return build_bin_filtered(corpus, scored, *spec.bin, spec.n_source,
                                spec.seed);
    case DatasetKind::kUnfiltered:
      return build_unfiltered(corpus, spec.n_source, spec.seed);
    case DatasetKind::kMediumPlus:
      if (!spec.add_bin || !spec.steps) {
        throw Error("medium_plus dataset requires 'add_bin' and 'steps'");
      }
      return build_medium_plus(corpus, scored, *spec.add_bin, *spec.steps,
                               spec.seed);
    case DatasetKind::kAblationHigh:
      if (!spec.subcategory) {
        throw Error("ablation_high dataset requires 'subcategory'");
      }
      return build_ablation_high(corpus, scored, *spec.subcategory, spec.seed);
  }
  throw Error("invalid dataset kind value");
}

Dataset shuffle_instances(const Dataset& dataset, std::uint64_t seed) {
  Dataset result = dataset;
  rng::Stream stream(seed, "shuffle_instances");
  stream.shuffle(result.instances);
  return result;
}

InstanceCounts count_instances(const Dataset& dataset) {
  InstanceCounts counts;
  std::set<std::string> groups;
  for (const auto& instance : dataset.instances) {
    groups.insert(instance.group_id);
  }
  counts.num_source = groups.size();
  counts.num_instance = dataset.instances.size();
  return counts;
}

std::string dataset_manifest(const Dataset& dataset,
                             const std::string& instance_hash) {
  json spec;
  spec["kind"] = dataset_kind_name(dataset.spec.kind);
  if (dataset.spec.bin) {
    spec["bin"] = bin_name(*dataset.spec.bin);
  }
  if (dataset.spec.add_bin) {
    spec["add_bin"] = bin_name(*dataset.spec.add_bin);
  }
  if (dataset.spec.steps) {
    spec["steps"] = *dataset.spec.steps;
  }
  if (dataset.spec.subcategory) {
    spec["subcategory"] = subcategory_name(*dataset.spec.subcategory);
  }
  if (dataset.spec.n_source) {
    spec["n_source"] = *dataset.spec.n_source;
  }
  spec["seed"] = dataset.spec.seed;

  json manifest;
  manifest["spec"] = std::move(spec);
  manifest["num_source"] = dataset.num_source;
  manifest["num_instance"] = dataset.num_instance;
  manifest["instance_hash"] = instance_hash;
  return manifest.dump(2) + "\n";
}

}  // namespace multiref
