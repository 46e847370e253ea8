#include "multiref/significance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <utility>

#include <json.hpp>

#include "multiref/errors.hpp"
#include "multiref/parallel.hpp"
#include "multiref/rng.hpp"

namespace multiref {

namespace {

using nlohmann::json;

class BleuResampler : public ResamplableMetric {
 public:
  BleuResampler(const std::vector<SegmentEval>& segments,
                const BleuConfig& config)
      : config_(config) {
    stats_.reserve(segments.size());
    for (const auto& segment : segments) {
      stats_.push_back(bleu_segment_stats(segment, config));
    }
  }

  std::string name() const override { return "bleu"; }
  std::size_t size() const override { return stats_.size(); }

  double score(std::span<const std::uint32_t> indices) const override {
    BleuStats aggregate;
    for (std::uint32_t idx : indices) {
      aggregate.add(stats_[idx]);
    }
    return bleu_finalize(aggregate, config_);
  }

 private:
  BleuConfig config_;
  std::vector<BleuStats> stats_;
};

class MeanResampler : public ResamplableMetric {
 public:
  MeanResampler(std::string name, std::vector<double> per_segment)
      : name_(std::move(name)), per_segment_(std::move(per_segment)) {}

  std::string name() const override { return name_; }
  std::size_t size() const override { return per_segment_.size(); }

  double score(std::span<const std::uint32_t> indices) const override {
    if (indices.empty()) {
      return 0.0;
    }
    double sum = 0.0;
    for (std::uint32_t idx : indices) {
      sum += per_segment_[idx];
    }
    return sum / static_cast<double>(indices.size());
  }

 private:
  std::string name_;
  std::vector<double> per_segment_;
};

void validate_config(const BootstrapConfig& config) {
  if (config.resamples < 1) {
    throw Error("resamples must be at least 1");
  }
  if (!(config.sample_fraction > 0.0 && config.sample_fraction <= 1.0)) {
    throw Error("sample_fraction must be in (0, 1]");
  }
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw Error("alpha must be in (0, 1)");
  }
}

}  // namespace

double ResamplableMetric::full_score() const {
  std::vector<std::uint32_t> all(size());
  std::iota(all.begin(), all.end(), 0);
  return score(all);
}

std::unique_ptr<ResamplableMetric> make_resampler(
    const std::string& metric, const std::vector<SegmentEval>& segments,
    const MetricConfig& config) {
  if (metric == "bleu") {
    return std::make_unique<BleuResampler>(segments, config.bleu);
  }
  if (metric == "chrfpp") {
    std::vector<double> values;
    values.reserve(segments.size());
    for (const auto& segment : segments) {
      values.push_back(
          chrfpp_segment(segment.hypothesis, segment.references,
                         config.chrfpp));
    }
    return make_mean_resampler("chrfpp", std::move(values));
  }
  throw Error("unknown metric '" + metric + "' (expected bleu or chrfpp)");
}

std::unique_ptr<ResamplableMetric> make_mean_resampler(
    const std::string& name, std::vector<double> per_segment) {
  return std::make_unique<MeanResampler>(name, std::move(per_segment));
}

SignificanceResult paired_bootstrap(const ResamplableMetric& baseline,
                                    const ResamplableMetric& system,
                                    const BootstrapConfig& config) {
  validate_config(config);
  const std::size_t n = baseline.size();
  if (n == 0) {
    throw Error("cannot bootstrap over zero segments");
  }
  if (system.size() != n) {
    throw Error("baseline and system cover different segment counts");
  }
  const std::size_t draw = static_cast<std::size_t>(
      std::ceil(config.sample_fraction * static_cast<double>(n)));

  std::vector<signed char> outcomes(config.resamples, 0);
  parallel_for(config.resamples, config.threads, [&](std::size_t iter) {
    rng::Stream stream(config.seed, "bootstrap", iter);
    std::vector<std::uint32_t> indices(draw);
    for (std::size_t k = 0; k < draw; ++k) {
      indices[k] = static_cast<std::uint32_t>(stream.below(n));
    }
    double base = baseline.score(indices);
    double sys = system.score(indices);
    outcomes[iter] = sys > base ? 1 : (sys < base ? -1 : 0);
  });

  SignificanceResult result;
  result.metric = system.name();
  for (signed char outcome : outcomes) {
    if (outcome > 0) {
      ++result.wins_system;
    } else if (outcome < 0) {
      ++result.wins_baseline;
    } else {
      ++result.ties;
    }
  }
  result.p_value = static_cast<double>(result.wins_baseline + result.ties) /
                   static_cast<double>(config.resamples);
  result.baseline_score = baseline.full_score();
  result.system_score = system.full_score();
  result.significant = result.p_value < config.alpha;
  result.resamples = config.resamples;
  result.sample_fraction = config.sample_fraction;
  result.seed = config.seed;
  result.alpha = config.alpha;
  return result;
}

SignificanceResult paired_bootstrap_segments(
    const std::vector<SegmentEval>& baseline,
    const std::vector<SegmentEval>& system, const std::string& metric,
    const MetricConfig& metric_config, const BootstrapConfig& config) {
  if (baseline.empty()) {
    throw Error("cannot bootstrap over zero segments");
  }
  std::map<std::string, const SegmentEval*> by_id;
  for (const auto& segment : system) {
    if (!by_id.emplace(segment.segment_id, &segment).second) {
      throw Error("duplicate segment_id '" + segment.segment_id +
                  "' in system output");
    }
  }
  if (by_id.size() != baseline.size()) {
    throw Error("baseline and system cover different segment sets");
  }
  std::vector<SegmentEval> aligned;
  aligned.reserve(baseline.size());
  for (const auto& segment : baseline) {
    auto it = by_id.find(segment.segment_id);
    if (it == by_id.end()) {
      throw Error("system output missing segment '" + segment.segment_id +
                  "'");
    }
    if (it->second->references != segment.references) {
      throw Error("segment '" + segment.segment_id +
                  "' has different references in the two systems");
    }
    aligned.push_back(*it->second);
  }
  auto base_metric = make_resampler(metric, baseline, metric_config);
  auto sys_metric = make_resampler(metric, aligned, metric_config);
  return paired_bootstrap(*base_metric, *sys_metric, config);
}

std::vector<SignificanceResult> significance_grid(
    const std::vector<GridSystem>& systems, const std::string& baseline_name,
    const std::vector<std::string>& metrics, const MetricConfig& metric_config,
    const BootstrapConfig& config) {
  const GridSystem* baseline = nullptr;
  std::set<std::string> names;
  for (const auto& system : systems) {
    if (!names.insert(system.name).second) {
      throw Error("duplicate system name '" + system.name + "'");
    }
    if (system.name == baseline_name) {
      baseline = &system;
    }
  }
  if (!baseline) {
    throw Error("unknown baseline '" + baseline_name + "'");
  }
  const std::size_t n = baseline->segments.size();
  for (const auto& system : systems) {
    if (system.segments.size() != n) {
      throw Error("system '" + system.name +
                  "' covers a different segment count than the baseline");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (system.segments[i].segment_id !=
          baseline->segments[i].segment_id) {
        throw Error("system '" + system.name + "' segment order differs from "
                    "the baseline at position " + std::to_string(i));
      }
    }
  }

  std::vector<SignificanceResult> results;
  for (const auto& system : systems) {
    if (system.name == baseline_name) {
      continue;
    }
    for (const auto& metric : metrics) {
      std::unique_ptr<ResamplableMetric> base_metric;
      std::unique_ptr<ResamplableMetric> sys_metric;
      if (metric == "external") {
        if (baseline->external.size() != n || system.external.size() != n) {
          throw Error("external scores missing for metric 'external' "
                      "(system '" + system.name + "')");
        }
        base_metric = make_mean_resampler("external", baseline->external);
        sys_metric = make_mean_resampler("external", system.external);
      } else {
        base_metric = make_resampler(metric, baseline->segments,
                                     metric_config);
        sys_metric = make_resampler(metric, system.segments, metric_config);
      }
      SignificanceResult result =
          paired_bootstrap(*base_metric, *sys_metric, config);
      result.system_name = system.name;
      result.baseline_name = baseline_name;
      result.metric = metric;
      results.push_back(std::move(result));
    }
  }
  return results;
}

std::string significance_results_json(
    const std::vector<SignificanceResult>& results) {
  json rows = json::array();
  for (const auto& result : results) {
    json row;
    row["system"] = result.system_name;
    row["baseline"] = result.baseline_name;
    row["metric"] = result.metric;
    row["baseline_score"] = result.baseline_score;
    row["system_score"] = result.system_score;
    row["wins_system"] = result.wins_system;
    row["wins_baseline"] = result.wins_baseline;
    row["ties"] = result.ties;
    row["p_value"] = result.p_value;
    row["significant"] = result.significant;
    row["resamples"] = result.resamples;
    row["sample_fraction"] = result.sample_fraction;
    row["seed"] = result.seed;
    row["alpha"] = result.alpha;
    rows.push_back(std::move(row));
  }
  return rows.dump(2) + "\n";
}

std::string significance_results_table(
    const std::vector<SignificanceResult>& results) {
  std::string out;
  char buffer[256];
  std::snprintf(buffer, sizeof(buffer), "%-20s %-10s %12s %12s %10s %5s\n",
                "system", "metric", "baseline", "system", "p_value", "sig");
  out += buffer;
  for (const auto& result : results) {
    std::snprintf(buffer, sizeof(buffer),
                  "%-20s %-10s %12.4f %12.4f %10.4f %5s\n",
                  result.system_name.c_str(), result.metric.c_str(),
                  result.baseline_score, result.system_score, result.p_value,
                  result.significant ? "yes" : "no");
    out += buffer;
  }
  return out;
}

}  // namespace multiref
