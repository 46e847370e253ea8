#ifndef MULTIREF_PIPELINE_HPP
#define MULTIREF_PIPELINE_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "multiref/dataset.hpp"
#include "multiref/metrics.hpp"
#include "multiref/significance.hpp"
#include "multiref/similarity.hpp"
#include "multiref/split.hpp"

namespace multiref {

struct DatasetRequest {
  std::string name;
  DatasetSpec spec;
  bool seed_explicit = false;  // otherwise derived from the global seed
};

// Mirror of the config file. Unknown keys are rejected at parse time.
struct PipelineConfig {
  std::string corpus_path;
  std::string embeddings_path;
  std::string scores_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0 = auto; never recorded in outputs
  bool lenient = false;
  std::optional<std::size_t> word_limit;
  BinThresholds thresholds;
  double histogram_bin_width = 0.05;
  SplitSpec split;
  bool split_seed_explicit = false;
  std::vector<DatasetRequest> datasets;
  bool export_prompts = true;
  bool shuffle_exports = true;
  MetricConfig metrics;
  BootstrapConfig bootstrap;
};

PipelineConfig parse_pipeline_config(const std::string& text);
PipelineConfig load_pipeline_config(const std::string& path);

// Fully resolved config echo (excludes out_dir and threads, which do not
// affect output bytes).
std::string resolved_config_json(const PipelineConfig& config);

std::uint64_t derive_seed(std::uint64_t seed, const std::string& label);

// score -> bin -> split -> build -> export in one deterministic pass.
// Progress goes to `log`; artifacts and run_manifest.json go to out_dir.
void pipeline_all(const PipelineConfig& config, std::ostream& log);

// Scores a corpus stream record by record with bounded memory, writing
// scored lines in input order. Returns the number of groups scored.
std::size_t stream_score(std::istream& corpus_in, std::ostream& scored_out,
                         const SimilarityScorer& scorer,
                         const BinThresholds& thresholds, unsigned threads,
                         std::size_t chunk_size = 256);

}  // namespace multiref

#endif  // MULTIREF_PIPELINE_HPP
