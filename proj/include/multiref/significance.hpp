#ifndef MULTIREF_SIGNIFICANCE_HPP
#define MULTIREF_SIGNIFICANCE_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "multiref/metrics.hpp"

namespace multiref {

struct BootstrapConfig {
  std::size_t resamples = 1000;
  double sample_fraction = 1.0;  // resample size as a fraction of N
  std::uint64_t seed = 0;
  double alpha = 0.01;
  unsigned threads = 1;
};

struct SignificanceResult {
  std::string system_name;
  std::string baseline_name;
  std::string metric;
  std::size_t wins_system = 0;
  std::size_t wins_baseline = 0;
  std::size_t ties = 0;
  double p_value = 1.0;
  double baseline_score = 0.0;
  double system_score = 0.0;
  bool significant = false;
  std::size_t resamples = 0;
  double sample_fraction = 1.0;
  std::uint64_t seed = 0;
  double alpha = 0.01;

  bool operator==(const SignificanceResult&) const = default;
};

// A corpus metric that can be re-evaluated over resampled segment indices
// from precomputed per-segment statistics.
class ResamplableMetric {
 public:
  virtual ~ResamplableMetric() = default;
  virtual std::string name() const = 0;
  virtual std::size_t size() const = 0;
  virtual double score(std::span<const std::uint32_t> indices) const = 0;
  double full_score() const;
};

// metric is "bleu" or "chrfpp".
std::unique_ptr<ResamplableMetric> make_resampler(
    const std::string& metric, const std::vector<SegmentEval>& segments,
    const MetricConfig& config);

// Mean of fixed per-segment values (chrF++-style aggregation or imported
// external scores).
std::unique_ptr<ResamplableMetric> make_mean_resampler(
    const std::string& name, std::vector<double> per_segment);

// Paired bootstrap over ceil(fraction*N) draws with replacement, the same
// draw applied to both systems. One-sided: ties count against the system,
// p_value = (wins_baseline + ties) / resamples. Bitwise deterministic for
// any thread count.
SignificanceResult paired_bootstrap(const ResamplableMetric& baseline,
                                    const ResamplableMetric& system,
                                    const BootstrapConfig& config);

// Convenience: aligns the two hypothesis sets by segment_id (they must cover
// the identical set with identical references) and runs the test.
SignificanceResult paired_bootstrap_segments(
    const std::vector<SegmentEval>& baseline,
    const std::vector<SegmentEval>& system, const std::string& metric,
    const MetricConfig& metric_config, const BootstrapConfig& config);

struct GridSystem {
  std::string name;
  std::vector<SegmentEval> segments;
  std::vector<double> external;  // per-segment external means; empty if none
};

// One result per (system != baseline, metric), in input order.
std::vector<SignificanceResult> significance_grid(
    const std::vector<GridSystem>& systems, const std::string& baseline_name,
    const std::vector<std::string>& metrics, const MetricConfig& metric_config,
    const BootstrapConfig& config);

std::string significance_results_json(
    const std::vector<SignificanceResult>& results);
std::string significance_results_table(
    const std::vector<SignificanceResult>& results);

}  // namespace multiref

#endif  // MULTIREF_SIGNIFICANCE_HPP
