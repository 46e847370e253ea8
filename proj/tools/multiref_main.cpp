#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "multiref/corpus.hpp"
#include "multiref/dataset.hpp"
#include "multiref/errors.hpp"
#include "multiref/hash.hpp"
#include "multiref/metrics.hpp"
#include "multiref/parallel.hpp"
#include "multiref/pipeline.hpp"
#include "multiref/report.hpp"
#include "multiref/significance.hpp"
#include "multiref/similarity.hpp"
#include "multiref/split.hpp"

namespace {

using nlohmann::json;

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw multiref::Error("cannot open output file: " + path);
  out << text;
  out.flush();
  if (!out) throw multiref::Error("failed writing output file: " + path);
}

std::string file_hash(const std::string& path) {
  return "fnv1a64:" + multiref::hash_file(path);
}

// Each file-producing subcommand pairs its outputs with a manifest tying
// them to the exact inputs and parameters.
void write_manifest(const std::string& manifest_path,
                    const std::string& command,
                    const std::map<std::string, std::string>& inputs,
                    const std::map<std::string, std::string>& outputs,
                    json params) {
  json m;
  m["command"] = command;
  m["inputs"] = json::object();
  for (const auto& [path, hash] : inputs) m["inputs"][path] = hash;
  m["outputs"] = json::object();
  for (const auto& [path, hash] : outputs) m["outputs"][path] = hash;
  m["params"] = std::move(params);
  write_text_file(manifest_path, m.dump(2) + "\n");
}

struct IngestArgs {
  std::string corpus;
  std::string out;
  std::string stats;
  bool lenient = false;
  std::optional<std::size_t> word_limit;
};

void run_ingest(const IngestArgs& args) {
  multiref::LoadOptions options;
  options.lenient = args.lenient;
  multiref::LoadReport report;
  multiref::Corpus corpus =
      multiref::load_corpus_file(args.corpus, options, &report);
  for (const auto& message : report.messages) {
    std::cerr << "warning: " << message << "\n";
  }
  std::size_t before = corpus.groups.size();
  if (args.word_limit) {
    corpus = multiref::filter_by_word_limit(corpus, *args.word_limit);
  }
  multiref::write_corpus_file(corpus, args.out);
  std::map<std::string, std::string> outputs{{args.out, file_hash(args.out)}};
  if (!args.stats.empty()) {
    write_text_file(args.stats,
                    multiref::corpus_stats_csv(multiref::corpus_stats(corpus)));
    outputs.emplace(args.stats, file_hash(args.stats));
  }
  json params;
  params["lenient"] = args.lenient;
  if (args.word_limit) params["word_limit"] = *args.word_limit;
  write_manifest(args.out + ".manifest.json", "ingest",
                 {{args.corpus, file_hash(args.corpus)}}, outputs, params);
  std::cout << "loaded " << before << " group(s), wrote "
            << corpus.groups.size() << " to " << args.out << "\n";
}

struct ScoreArgs {
  std::string corpus;
  std::string embeddings;
  std::string import_csv;
  std::string out;
  double low_hi = 0.45;
  double med_hi = 0.85;
  unsigned threads = 0;
  std::size_t chunk_size = 256;
  bool lenient = false;
};

void run_score(const ScoreArgs& args) {
  if (args.embeddings.empty() && args.import_csv.empty()) {
    throw multiref::UsageError(
        "score requires --embeddings or --import (or both)");
  }
  multiref::BinThresholds thresholds{args.low_hi, args.med_hi};
  unsigned threads = multiref::resolve_threads(args.threads);
  std::map<std::string, std::string> inputs{
      {args.corpus, file_hash(args.corpus)}};

  std::unique_ptr<multiref::EmbeddingTable> table;
  std::unique_ptr<multiref::EmbeddingScorer> scorer;
  if (!args.embeddings.empty()) {
    table = std::make_unique<multiref::EmbeddingTable>(
        multiref::load_embeddings_file(args.embeddings));
    scorer = std::make_unique<multiref::EmbeddingScorer>(*table);
    inputs.emplace(args.embeddings, file_hash(args.embeddings));
  }

  std::size_t scored_count = 0;
  if (args.import_csv.empty()) {
    // Streaming path: constant memory in corpus size.
    std::ifstream in(args.corpus, std::ios::binary);
    if (!in) throw multiref::Error("cannot open corpus: " + args.corpus);
    std::ofstream out(args.out, std::ios::binary);
    if (!out) throw multiref::Error("cannot open output file: " + args.out);
    scored_count = multiref::stream_score(in, out, *scorer, thresholds,
                                          threads, args.chunk_size);
    out.flush();
    if (!out) throw multiref::Error("failed writing output file: " + args.out);
  } else {
    multiref::Corpus corpus = multiref::load_corpus_file(args.corpus);
    auto imported = multiref::read_pair_scores_file(args.import_csv);
    inputs.emplace(args.import_csv, file_hash(args.import_csv));
    multiref::ImportOptions options;
    options.strict = !args.lenient;
    options.thresholds = thresholds;
    std::vector<std::string> warnings;
    auto scored = multiref::import_scores(corpus, imported, scorer.get(),
                                          options, &warnings);
    for (const auto& warning : warnings) {
      std::cerr << "warning: " << warning << "\n";
    }
    multiref::write_scored_file(scored, args.out);
    scored_count = scored.size();
  }

  json params;
  params["thresholds"] = {{"low_hi", thresholds.low_hi},
                          {"med_hi", thresholds.med_hi}};
  if (!args.import_csv.empty()) params["lenient"] = args.lenient;
  write_manifest(args.out + ".manifest.json", "score", inputs,
                 {{args.out, file_hash(args.out)}}, params);
  std::cout << "scored " << scored_count << " group(s) to " << args.out
            << "\n";
}

struct BinArgs {
  std::string scored;
  std::string summary;
  std::string hist_csv;
  std::string hist_svg;
  double bin_width = 0.05;
  double low_hi = 0.45;
  double med_hi = 0.85;
};

std::string bin_summary_csv(const multiref::BinCounts& counts) {
  std::string out = "bin,count\n";
  out += "low," + std::to_string(counts.low) + "\n";
  out += "medium," + std::to_string(counts.medium) + "\n";
  out += "high," + std::to_string(counts.high) + "\n";
  out += "high_exactly_1.0," + std::to_string(counts.high_exactly_1) + "\n";
  out += "high_0.9_to_1.0," + std::to_string(counts.high_0p9_to_1p0) + "\n";
  out += "high_0.85_to_0.9," + std::to_string(counts.high_0p85_to_0p9) + "\n";
  return out;
}

void run_bin(const BinArgs& args) {
  auto scored = multiref::load_scored_file(args.scored);
  std::map<std::string, std::string> outputs;
  write_text_file(args.summary,
                  bin_summary_csv(multiref::count_bins(scored)));
  outputs.emplace(args.summary, file_hash(args.summary));
  if (!args.hist_csv.empty() || !args.hist_svg.empty()) {
    auto bins = multiref::histogram(scored, args.bin_width);
    if (!args.hist_csv.empty()) {
      write_text_file(args.hist_csv, multiref::histogram_csv(bins));
      outputs.emplace(args.hist_csv, file_hash(args.hist_csv));
    }
    if (!args.hist_svg.empty()) {
      multiref::BinThresholds thresholds{args.low_hi, args.med_hi};
      write_text_file(args.hist_svg, multiref::histogram_svg(bins, thresholds));
      outputs.emplace(args.hist_svg, file_hash(args.hist_svg));
    }
  }
  json params;
  params["bin_width"] = args.bin_width;
  write_manifest(args.summary + ".manifest.json", "bin",
                 {{args.scored, file_hash(args.scored)}}, outputs, params);
  std::cout << "summarized " << scored.size() << " scored group(s)\n";
}

struct BuildArgs {
  std::string corpus;
  std::string scored;
  std::string kind;
  std::string bin;
  std::string add_bin;
  std::string subcategory;
  int steps = -1;
  std::int64_t n_source = -1;
  std::uint64_t seed = 0;
  bool shuffle = false;
  std::string out;
};

void run_build(const BuildArgs& args) {
  multiref::DatasetSpec spec;
  spec.kind = multiref::parse_dataset_kind(args.kind);
  spec.seed = args.seed;
  if (!args.bin.empty()) spec.bin = multiref::parse_bin(args.bin);
  if (!args.add_bin.empty()) spec.add_bin = multiref::parse_bin(args.add_bin);
  if (args.steps >= 0) spec.steps = args.steps;
  if (!args.subcategory.empty()) {
    spec.subcategory = multiref::parse_subcategory(args.subcategory);
  }
  if (args.n_source >= 0) {
    spec.n_source = static_cast<std::size_t>(args.n_source);
  }

  bool needs_scores = spec.kind == multiref::DatasetKind::kBinFiltered ||
                      spec.kind == multiref::DatasetKind::kMediumPlus ||
                      spec.kind == multiref::DatasetKind::kAblationHigh;
  if (needs_scores && args.scored.empty()) {
    throw multiref::UsageError("--kind " + args.kind + " requires --scored");
  }

  multiref::Corpus corpus = multiref::load_corpus_file(args.corpus);
  std::vector<multiref::ScoredGroup> scored;
  std::map<std::string, std::string> inputs{
      {args.corpus, file_hash(args.corpus)}};
  if (!args.scored.empty()) {
    scored = multiref::load_scored_file(args.scored);
    inputs.emplace(args.scored, file_hash(args.scored));
  }

  multiref::Dataset dataset = multiref::build_dataset(corpus, scored, spec);
  if (args.shuffle) {
    dataset = multiref::shuffle_instances(dataset, spec.seed);
  }

  std::ofstream out(args.out, std::ios::binary);
  if (!out) throw multiref::Error("cannot open output file: " + args.out);
  multiref::export_pairs(dataset, out);
  out.flush();
  if (!out) throw multiref::Error("failed writing output file: " + args.out);

  json m = json::parse(
      multiref::dataset_manifest(dataset, file_hash(args.out)));
  m["command"] = "build";
  m["inputs"] = json::object();
  for (const auto& [path, hash] : inputs) m["inputs"][path] = hash;
  m["outputs"] = json::object();
  m["outputs"][args.out] = file_hash(args.out);
  m["shuffled"] = args.shuffle;
  write_text_file(args.out + ".manifest.json", m.dump(2) + "\n");
  std::cout << "built " << dataset.num_source << " source(s), "
            << dataset.num_instance << " instance(s) to " << args.out << "\n";
}

struct SplitArgs {
  std::string corpus;
  std::string scored;
  std::string out_dir;
  double train_fraction = 0.8;
  double val_test_ratio = 0.5;
  double tolerance = 0.05;
  std::uint64_t seed = 0;
};

void run_split(const SplitArgs& args) {
  multiref::Corpus corpus = multiref::load_corpus_file(args.corpus);
  auto scored = multiref::load_scored_file(args.scored);
  multiref::SplitSpec spec;
  spec.train_fraction = args.train_fraction;
  spec.val_test_ratio = args.val_test_ratio;
  spec.ratio_tolerance = args.tolerance;
  spec.seed = args.seed;

  multiref::SplitResult result = multiref::split(corpus, scored, spec);
  for (const auto& warning : result.warnings) {
    std::cerr << "warning: " << warning << "\n";
  }
  multiref::SplitValidation validation =
      multiref::validate_split(result, corpus, scored, spec);
  for (const auto& warning : validation.ratio_warnings) {
    std::cerr << "warning: " << warning << "\n";
  }
  if (!validation.ok()) {
    std::string detail = validation.violations.front();
    throw multiref::Error("split validation failed: " + detail);
  }

  std::filesystem::create_directories(args.out_dir);
  std::filesystem::path dir(args.out_dir);
  multiref::write_corpus_file(result.train, (dir / "train.jsonl").string());
  multiref::write_corpus_file(result.val, (dir / "val.jsonl").string());
  multiref::write_corpus_file(result.test, (dir / "test.jsonl").string());

  json m = json::parse(multiref::split_manifest(
      result, spec, "train.jsonl", "val.jsonl", "test.jsonl"));
  m["command"] = "split";
  m["inputs"] = json::object();
  m["inputs"][args.corpus] = file_hash(args.corpus);
  m["inputs"][args.scored] = file_hash(args.scored);
  m["outputs"] = json::object();
  for (const char* name : {"train.jsonl", "val.jsonl", "test.jsonl"}) {
    m["outputs"][name] = file_hash((dir / name).string());
  }
  write_text_file((dir / "manifest.json").string(), m.dump(2) + "\n");
  std::cout << "split " << corpus.groups.size() << " group(s): train "
            << result.train.groups.size() << ", val "
            << result.val.groups.size() << ", test "
            << result.test.groups.size() << "\n";
}

struct ExportArgs {
  std::string pairs;
  std::string corpus;
  std::string prompts;
  std::string composition;
};

void run_export(const ExportArgs& args) {
  if (args.prompts.empty() && args.composition.empty()) {
    throw multiref::UsageError(
        "export requires --prompts and/or --composition");
  }
  if (!args.composition.empty() && args.corpus.empty()) {
    throw multiref::UsageError("--composition requires --corpus");
  }
  multiref::Dataset dataset;
  dataset.instances = multiref::load_pairs_file(args.pairs);
  multiref::InstanceCounts counts = multiref::count_instances(dataset);
  dataset.num_source = counts.num_source;
  dataset.num_instance = counts.num_instance;

  std::map<std::string, std::string> inputs{
      {args.pairs, file_hash(args.pairs)}};
  std::map<std::string, std::string> outputs;
  std::string manifest_path;
  if (!args.prompts.empty()) {
    std::ofstream out(args.prompts, std::ios::binary);
    if (!out) {
      throw multiref::Error("cannot open output file: " + args.prompts);
    }
    multiref::export_prompt_lines(dataset, out);
    out.flush();
    if (!out) {
      throw multiref::Error("failed writing output file: " + args.prompts);
    }
    outputs.emplace(args.prompts, file_hash(args.prompts));
    manifest_path = args.prompts + ".manifest.json";
  }
  if (!args.composition.empty()) {
    multiref::Corpus corpus = multiref::load_corpus_file(args.corpus);
    inputs.emplace(args.corpus, file_hash(args.corpus));
    auto rows = multiref::composition_report(dataset, corpus);
    write_text_file(args.composition, multiref::composition_csv(rows));
    outputs.emplace(args.composition, file_hash(args.composition));
    if (manifest_path.empty()) {
      manifest_path = args.composition + ".manifest.json";
    }
  }
  json params;
  params["num_instance"] = dataset.num_instance;
  params["num_source"] = dataset.num_source;
  write_manifest(manifest_path, "export", inputs, outputs, params);
  std::cout << "exported " << dataset.num_instance << " instance(s)\n";
}

struct EvalArgs {
  std::string corpus;
  std::string hyp;
  std::string metric = "all";
  std::string external;
  std::string out;
  bool per_segment = false;
  int max_order = 4;
  std::string tokenizer = "punct";
  bool lowercase = false;
  int char_order = 6;
  int word_order = 2;
  double beta = 2.0;
};

void run_eval(const EvalArgs& args) {
  bool want_bleu = args.metric == "bleu" || args.metric == "all";
  bool want_chrfpp = args.metric == "chrfpp" || args.metric == "all";
  bool want_external =
      args.metric == "external" || (args.metric == "all" && !args.external.empty());
  if (want_external && args.external.empty()) {
    throw multiref::UsageError("--metric external requires --external");
  }

  multiref::Corpus corpus = multiref::load_corpus_file(args.corpus);
  auto hypotheses = multiref::load_hypotheses_file(args.hyp);
  auto segments = multiref::join_segments(hypotheses, corpus);

  multiref::BleuConfig bleu_config;
  bleu_config.max_order = args.max_order;
  bleu_config.tokenizer = multiref::text::parse_tokenizer_rule(args.tokenizer);
  bleu_config.lowercase = args.lowercase;
  multiref::ChrfConfig chrf_config;
  chrf_config.char_order = args.char_order;
  chrf_config.word_order = args.word_order;
  chrf_config.beta = args.beta;

  std::vector<multiref::MetricReport> reports;
  if (want_bleu) reports.push_back(multiref::bleu_corpus(segments, bleu_config));
  if (want_chrfpp) {
    reports.push_back(multiref::chrfpp_corpus(segments, chrf_config));
  }
  if (want_external) {
    auto rows = multiref::read_external_scores_file(args.external);
    reports.push_back(multiref::average_external_scores(rows, segments));
  }

  char line[128];
  for (const auto& report : reports) {
    std::snprintf(line, sizeof(line), "%-10s %.4f", report.metric.c_str(),
                  report.corpus_score);
    std::cout << line << "\n";
  }

  if (!args.out.empty()) {
    json combined = json::object();
    for (const auto& report : reports) {
      combined[report.metric] = json::parse(
          multiref::metric_report_json(report, args.per_segment));
    }
    write_text_file(args.out, combined.dump(2) + "\n");
    std::map<std::string, std::string> inputs{
        {args.corpus, file_hash(args.corpus)},
        {args.hyp, file_hash(args.hyp)}};
    if (want_external) inputs.emplace(args.external, file_hash(args.external));
    json params;
    params["metric"] = args.metric;
    params["bleu"] = {{"max_order", args.max_order},
                      {"tokenizer", args.tokenizer},
                      {"lowercase", args.lowercase}};
    params["chrfpp"] = {{"char_order", args.char_order},
                        {"word_order", args.word_order},
                        {"beta", args.beta}};
    write_manifest(args.out + ".manifest.json", "eval", inputs,
                   {{args.out, file_hash(args.out)}}, params);
  }
}

struct SigtestArgs {
  std::string corpus;
  std::string baseline;
  std::string system;
  std::string metric = "bleu";
  std::string external_baseline;
  std::string external_system;
  std::string out;
  std::size_t resamples = 1000;
  double sample_fraction = 1.0;
  double alpha = 0.01;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

void run_sigtest(const SigtestArgs& args) {
  multiref::Corpus corpus = multiref::load_corpus_file(args.corpus);
  auto baseline_segments =
      multiref::join_segments(multiref::load_hypotheses_file(args.baseline),
                              corpus);
  auto system_segments = multiref::join_segments(
      multiref::load_hypotheses_file(args.system), corpus);

  multiref::BootstrapConfig config;
  config.resamples = args.resamples;
  config.sample_fraction = args.sample_fraction;
  config.alpha = args.alpha;
  config.seed = args.seed;
  config.threads = multiref::resolve_threads(args.threads);

  multiref::SignificanceResult result;
  if (args.metric == "external") {
    if (args.external_baseline.empty() || args.external_system.empty()) {
      throw multiref::UsageError(
          "--metric external requires --external-baseline and "
          "--external-system");
    }
    auto baseline_rows =
        multiref::read_external_scores_file(args.external_baseline);
    auto system_rows = multiref::read_external_scores_file(args.external_system);
    auto baseline_report =
        multiref::average_external_scores(baseline_rows, baseline_segments);
    auto system_report =
        multiref::average_external_scores(system_rows, system_segments);
    auto baseline_metric = multiref::make_mean_resampler(
        "external", baseline_report.per_segment);
    auto system_metric =
        multiref::make_mean_resampler("external", system_report.per_segment);
    result = multiref::paired_bootstrap(*baseline_metric, *system_metric,
                                        config);
  } else {
    multiref::MetricConfig metric_config;
    result = multiref::paired_bootstrap_segments(
        baseline_segments, system_segments, args.metric, metric_config,
        config);
  }
  result.baseline_name = std::filesystem::path(args.baseline).stem().string();
  result.system_name = std::filesystem::path(args.system).stem().string();

  std::vector<multiref::SignificanceResult> results{result};
  std::cout << multiref::significance_results_table(results);
  if (!args.out.empty()) {
    write_text_file(args.out, multiref::significance_results_json(results));
    std::map<std::string, std::string> inputs{
        {args.corpus, file_hash(args.corpus)},
        {args.baseline, file_hash(args.baseline)},
        {args.system, file_hash(args.system)}};
    if (!args.external_baseline.empty()) {
      inputs.emplace(args.external_baseline, file_hash(args.external_baseline));
    }
    if (!args.external_system.empty()) {
      inputs.emplace(args.external_system, file_hash(args.external_system));
    }
    json params;
    params["metric"] = args.metric;
    params["resamples"] = args.resamples;
    params["sample_fraction"] = args.sample_fraction;
    params["alpha"] = args.alpha;
    params["seed"] = args.seed;
    write_manifest(args.out + ".manifest.json", "sigtest", inputs,
                   {{args.out, file_hash(args.out)}}, params);
  }
}

struct ReportArgs {
  std::string corpus;
  std::string stats;
  std::string baseline_report;
  std::string system_report;
  std::string gain;
};

multiref::MetricReport parse_metric_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw multiref::Error("cannot open metric report: " + path);
  json parsed;
  try {
    parsed = json::parse(in);
  } catch (const json::exception& e) {
    throw multiref::ParseError(path + ": " + e.what());
  }
  if (parsed.is_object() && !parsed.contains("per_language")) {
    // eval --out files key the report by metric name; unwrap when the
    // choice is unambiguous.
    std::vector<std::string> metrics;
    for (const auto& [key, value] : parsed.items()) {
      if (value.is_object() && value.contains("per_language")) {
        metrics.push_back(key);
      }
    }
    if (metrics.size() == 1) {
      parsed = parsed.at(metrics.front());
    } else if (metrics.size() > 1) {
      std::string names;
      for (const auto& name : metrics) {
        names += names.empty() ? name : ", " + name;
      }
      throw multiref::UsageError(path + ": holds reports for " + names +
                                 "; gain needs a single-metric report");
    }
  }
  if (!parsed.is_object() || !parsed.contains("per_language")) {
    throw multiref::ParseError(path +
                               ": expected a metric report object with "
                               "per_language scores");
  }
  multiref::MetricReport report;
  report.metric = parsed.value("metric", std::string{});
  report.corpus_score = parsed.value("corpus_score", 0.0);
  for (const auto& [language, value] : parsed.at("per_language").items()) {
    if (!value.is_number()) {
      throw multiref::ParseError(path + ": per_language." + language +
                                 " is not a number");
    }
    report.per_language[language] = value.get<double>();
  }
  return report;
}

void run_report(const ReportArgs& args) {
  bool want_stats = !args.stats.empty();
  bool want_gain = !args.gain.empty();
  if (!want_stats && !want_gain) {
    throw multiref::UsageError("report requires --stats and/or --gain");
  }
  if (want_stats && args.corpus.empty()) {
    throw multiref::UsageError("--stats requires --corpus");
  }
  if (want_gain &&
      (args.baseline_report.empty() || args.system_report.empty())) {
    throw multiref::UsageError(
        "--gain requires --baseline-report and --system-report");
  }
  if (want_stats) {
    multiref::Corpus corpus = multiref::load_corpus_file(args.corpus);
    write_text_file(args.stats,
                    multiref::corpus_stats_csv(multiref::corpus_stats(corpus)));
    write_manifest(args.stats + ".manifest.json", "report",
                   {{args.corpus, file_hash(args.corpus)}},
                   {{args.stats, file_hash(args.stats)}}, json::object());
    std::cout << "wrote " << args.stats << "\n";
  }
  if (want_gain) {
    multiref::MetricReport a = parse_metric_report(args.baseline_report);
    multiref::MetricReport b = parse_metric_report(args.system_report);
    multiref::GainReport gain = multiref::per_language_gain(a, b);
    write_text_file(args.gain, multiref::gain_report_json(gain));
    write_manifest(
        args.gain + ".manifest.json", "report",
        {{args.baseline_report, file_hash(args.baseline_report)},
         {args.system_report, file_hash(args.system_report)}},
        {{args.gain, file_hash(args.gain)}}, json::object());
    std::cout << "wrote " << args.gain << "\n";
  }
}

struct AllArgs {
  std::string config;
  std::string out_dir;
  unsigned threads = 0;
  bool threads_set = false;
};

void run_all(const AllArgs& args) {
  multiref::PipelineConfig config = multiref::load_pipeline_config(args.config);
  if (!args.out_dir.empty()) config.out_dir = args.out_dir;
  if (args.threads_set) config.threads = args.threads;
  multiref::pipeline_all(config, std::cerr);
  std::cout << "wrote "
            << (std::filesystem::path(config.out_dir) / "run_manifest.json")
                   .string()
            << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curation and evaluation for multi-reference literary corpora"};
  app.require_subcommand(1);

  IngestArgs ingest_args;
  std::int64_t ingest_word_limit = -1;
  auto* ingest = app.add_subcommand(
      "ingest", "validate a corpus file and write its normalized form");
  ingest->add_option("--corpus", ingest_args.corpus, "input corpus (JSONL)")
      ->required();
  ingest->add_option("--out", ingest_args.out, "normalized corpus output")
      ->required();
  ingest->add_option("--stats", ingest_args.stats,
                     "also write per-language stats CSV");
  ingest->add_flag("--lenient", ingest_args.lenient,
                   "skip malformed lines instead of failing");
  ingest->add_option("--word-limit", ingest_word_limit,
                     "drop groups with any reference at or above this word count")
      ->check(CLI::NonNegativeNumber);

  ScoreArgs score_args;
  auto* score = app.add_subcommand(
      "score", "score pairwise reference similarity for every group");
  score->add_option("--corpus", score_args.corpus, "input corpus (JSONL)")
      ->required();
  score->add_option("--embeddings", score_args.embeddings,
                    "token embedding table (text format)");
  score->add_option("--import", score_args.import_csv,
                    "imported pairwise scores CSV");
  score->add_option("--out", score_args.out, "scored output (JSONL)")
      ->required();
  score->add_option("--low-hi", score_args.low_hi,
                    "Low/Medium bin boundary");
  score->add_option("--med-hi", score_args.med_hi,
                    "Medium/High bin boundary");
  score->add_option("--threads", score_args.threads, "worker thread count");
  score->add_option("--chunk-size", score_args.chunk_size,
                    "streaming chunk size")
      ->check(CLI::PositiveNumber);
  score->add_flag("--lenient", score_args.lenient,
                  "warn instead of failing on incomplete imported scores");

  BinArgs bin_args;
  auto* bin = app.add_subcommand(
      "bin", "summarize similarity bins and write histograms");
  bin->add_option("--scored", bin_args.scored, "scored groups (JSONL)")
      ->required();
  bin->add_option("--summary", bin_args.summary, "bin summary CSV output")
      ->required();
  bin->add_option("--histogram", bin_args.hist_csv, "histogram CSV output");
  bin->add_option("--svg", bin_args.hist_svg, "histogram SVG output");
  bin->add_option("--bin-width", bin_args.bin_width, "histogram bin width");
  bin->add_option("--low-hi", bin_args.low_hi, "Low/Medium bin boundary");
  bin->add_option("--med-hi", bin_args.med_hi, "Medium/High bin boundary");

  BuildArgs build_args;
  auto* build =
      app.add_subcommand("build", "build a training dataset variant");
  build->add_option("--corpus", build_args.corpus, "input corpus (JSONL)")
      ->required();
  build->add_option("--scored", build_args.scored, "scored groups (JSONL)");
  build
      ->add_option("--kind", build_args.kind,
                   "single, bin_filtered, unfiltered, medium_plus, or "
                   "ablation_high")
      ->required()
      ->check(CLI::IsMember({"single", "bin_filtered", "unfiltered",
                             "medium_plus", "ablation_high"}));
  build->add_option("--bin", build_args.bin, "bin for bin_filtered")
      ->check(CLI::IsMember({"low", "medium", "high"}));
  build->add_option("--add-bin", build_args.add_bin,
                    "bin added on top of Medium for medium_plus")
      ->check(CLI::IsMember({"low", "medium", "high"}));
  build->add_option("--steps", build_args.steps,
                    "number of tenth-slices of the add bin to include")
      ->check(CLI::Range(0, 10));
  build
      ->add_option("--subcategory", build_args.subcategory,
                   "High subcategory for ablation_high")
      ->check(CLI::IsMember({"exactly_1.0", "0.9_to_1.0", "0.85_to_0.9"}));
  build->add_option("--n-source", build_args.n_source,
                    "subsample to this many source groups")
      ->check(CLI::NonNegativeNumber);
  build->add_option("--seed", build_args.seed, "sampling seed");
  build->add_flag("--shuffle", build_args.shuffle,
                  "shuffle instances before writing");
  build->add_option("--out", build_args.out, "instance pairs output (JSONL)")
      ->required();

  SplitArgs split_args;
  auto* split = app.add_subcommand(
      "split", "book-disjoint train/val/test partition");
  split->add_option("--corpus", split_args.corpus, "input corpus (JSONL)")
      ->required();
  split->add_option("--scored", split_args.scored, "scored groups (JSONL)")
      ->required();
  split->add_option("--out-dir", split_args.out_dir, "partition directory")
      ->required();
  split->add_option("--train-fraction", split_args.train_fraction,
                    "target fraction of paragraphs in train");
  split->add_option("--val-test-ratio", split_args.val_test_ratio,
                    "fraction of the held-out pool placed in val");
  split->add_option("--tolerance", split_args.tolerance,
                    "allowed deviation from the train fraction");
  split->add_option("--seed", split_args.seed, "assignment seed");

  ExportArgs export_args;
  auto* export_cmd = app.add_subcommand(
      "export", "derive prompt lines and composition reports from a dataset");
  export_cmd->add_option("--pairs", export_args.pairs,
                         "dataset instance pairs (JSONL)")
      ->required();
  export_cmd->add_option("--corpus", export_args.corpus,
                         "corpus for composition percentages");
  export_cmd->add_option("--prompts", export_args.prompts,
                         "prompt lines output");
  export_cmd->add_option("--composition", export_args.composition,
                         "composition CSV output");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand(
      "eval", "score hypotheses against multi-reference gold translations");
  eval->add_option("--corpus", eval_args.corpus, "reference corpus (JSONL)")
      ->required();
  eval->add_option("--hyp", eval_args.hyp, "hypotheses (JSONL)")->required();
  eval->add_option("--metric", eval_args.metric, "bleu, chrfpp, external, or all")
      ->check(CLI::IsMember({"bleu", "chrfpp", "external", "all"}));
  eval->add_option("--external", eval_args.external,
                   "imported per-reference scores CSV");
  eval->add_option("--out", eval_args.out, "metric report JSON output");
  eval->add_flag("--per-segment", eval_args.per_segment,
                 "include per-segment scores in the report");
  eval->add_option("--max-order", eval_args.max_order, "BLEU n-gram order")
      ->check(CLI::PositiveNumber);
  eval->add_option("--tokenizer", eval_args.tokenizer,
                   "BLEU tokenizer: punct or whitespace")
      ->check(CLI::IsMember({"punct", "whitespace"}));
  eval->add_flag("--lowercase", eval_args.lowercase,
                 "case-insensitive BLEU");
  eval->add_option("--char-order", eval_args.char_order,
                   "chrF++ character n-gram order")
      ->check(CLI::PositiveNumber);
  eval->add_option("--word-order", eval_args.word_order,
                   "chrF++ word n-gram order")
      ->check(CLI::NonNegativeNumber);
  eval->add_option("--beta", eval_args.beta, "chrF++ recall weight");

  SigtestArgs sigtest_args;
  auto* sigtest = app.add_subcommand(
      "sigtest", "paired bootstrap significance test between two systems");
  sigtest->add_option("--corpus", sigtest_args.corpus,
                      "reference corpus (JSONL)")
      ->required();
  sigtest->add_option("--baseline", sigtest_args.baseline,
                      "baseline hypotheses (JSONL)")
      ->required();
  sigtest->add_option("--system", sigtest_args.system,
                      "system hypotheses (JSONL)")
      ->required();
  sigtest->add_option("--metric", sigtest_args.metric,
                      "bleu, chrfpp, or external")
      ->check(CLI::IsMember({"bleu", "chrfpp", "external"}));
  sigtest->add_option("--external-baseline", sigtest_args.external_baseline,
                      "baseline external scores CSV");
  sigtest->add_option("--external-system", sigtest_args.external_system,
                      "system external scores CSV");
  sigtest->add_option("--out", sigtest_args.out, "results JSON output");
  sigtest->add_option("--resamples", sigtest_args.resamples,
                      "bootstrap iterations")
      ->check(CLI::PositiveNumber);
  sigtest->add_option("--sample-fraction", sigtest_args.sample_fraction,
                      "resample size as a fraction of the segment count");
  sigtest->add_option("--alpha", sigtest_args.alpha, "significance level");
  sigtest->add_option("--seed", sigtest_args.seed, "resampling seed");
  sigtest->add_option("--threads", sigtest_args.threads,
                      "worker thread count");

  ReportArgs report_args;
  auto* report = app.add_subcommand(
      "report", "corpus statistics and per-language gain reports");
  report->add_option("--corpus", report_args.corpus, "input corpus (JSONL)");
  report->add_option("--stats", report_args.stats,
                     "per-language stats CSV output");
  report->add_option("--baseline-report", report_args.baseline_report,
                     "baseline metric report JSON");
  report->add_option("--system-report", report_args.system_report,
                     "system metric report JSON");
  report->add_option("--gain", report_args.gain,
                     "per-language gain JSON output");

  AllArgs all_args;
  auto* all = app.add_subcommand(
      "all", "run the full pipeline from a config file");
  all->add_option("--config", all_args.config, "pipeline config (JSON)")
      ->required();
  all->add_option("--out-dir", all_args.out_dir,
                  "override the configured output directory");
  auto* all_threads =
      all->add_option("--threads", all_args.threads, "worker thread count");

  ingest->callback([&] {
    if (ingest_word_limit >= 0) {
      ingest_args.word_limit = static_cast<std::size_t>(ingest_word_limit);
    }
    run_ingest(ingest_args);
  });
  score->callback([&] { run_score(score_args); });
  bin->callback([&] { run_bin(bin_args); });
  build->callback([&] { run_build(build_args); });
  split->callback([&] { run_split(split_args); });
  export_cmd->callback([&] { run_export(export_args); });
  eval->callback([&] { run_eval(eval_args); });
  sigtest->callback([&] { run_sigtest(sigtest_args); });
  report->callback([&] { run_report(report_args); });
  all->callback([&] {
    all_args.threads_set = all_threads->count() > 0;
    run_all(all_args);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const multiref::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const multiref::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
