#include "multiref/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "multiref/errors.hpp"
#include "multiref/hash.hpp"
#include "multiref/parallel.hpp"
#include "multiref/report.hpp"
#include "multiref/rng.hpp"

namespace multiref {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void check_keys(const json& obj, const std::string& scope,
                const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) {
      throw UsageError("unknown config key '" +
                       (scope.empty() ? key : scope + "." + key) + "'");
    }
  }
}

[[noreturn]] void bad_value(const std::string& key,
                            const std::string& expected) {
  throw UsageError("config key '" + key + "' must be " + expected);
}

std::string get_string(const json& obj, const std::string& scope,
                       const char* key, const std::string& fallback = "") {
  auto it = obj.find(key);
  if (it == obj.end()) {
    return fallback;
  }
  if (!it->is_string()) {
    bad_value(scope.empty() ? key : scope + "." + std::string(key),
              "a string");
  }
  return it->get<std::string>();
}

double get_number(const json& obj, const std::string& scope, const char* key,
                  double fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    return fallback;
  }
  if (!it->is_number()) {
    bad_value(scope.empty() ? key : scope + "." + std::string(key),
              "a number");
  }
  return it->get<double>();
}

std::uint64_t get_seed(const json& obj, const std::string& scope,
                       const char* key, std::uint64_t fallback,
                       bool* explicit_flag = nullptr) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    return fallback;
  }
  if (!it->is_number_integer()) {
    bad_value(scope.empty() ? key : scope + "." + std::string(key),
              "an integer");
  }
  if (explicit_flag) {
    *explicit_flag = true;
  }
  return it->get<std::uint64_t>();
}

bool get_bool(const json& obj, const std::string& scope, const char* key,
              bool fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    return fallback;
  }
  if (!it->is_boolean()) {
    bad_value(scope.empty() ? key : scope + "." + std::string(key),
              "a boolean");
  }
  return it->get<bool>();
}

DatasetRequest parse_dataset_request(const json& obj, std::size_t index,
                                     std::uint64_t global_seed) {
  std::string scope = "datasets[" + std::to_string(index) + "]";
  if (!obj.is_object()) {
    throw UsageError("config key '" + scope + "' must be an object");
  }
  check_keys(obj, scope,
             {"name", "kind", "bin", "add_bin", "steps", "subcategory",
              "n_source", "seed"});
  DatasetRequest request;
  request.name = get_string(obj, scope, "name");
  if (request.name.empty()) {
    throw UsageError("config key '" + scope + ".name' must be a non-empty "
                     "string");
  }
  for (char c : request.name) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) {
      throw UsageError("config key '" + scope + ".name' may only contain "
                       "letters, digits, '_' and '-'");
    }
  }
  std::string kind = get_string(obj, scope, "kind");
  try {
    request.spec.kind = parse_dataset_kind(kind);
  } catch (const Error& e) {
    throw UsageError(scope + ": " + e.what());
  }
  if (obj.contains("bin")) {
    try {
      request.spec.bin = parse_bin(get_string(obj, scope, "bin"));
    } catch (const Error& e) {
      throw UsageError(scope + ": " + e.what());
    }
  }
  if (obj.contains("add_bin")) {
    try {
      request.spec.add_bin = parse_bin(get_string(obj, scope, "add_bin"));
    } catch (const Error& e) {
      throw UsageError(scope + ": " + e.what());
    }
  }
  if (obj.contains("steps")) {
    double steps = get_number(obj, scope, "steps", 0.0);
    if (steps < 0 || steps > 10 || steps != static_cast<int>(steps)) {
      throw UsageError("config key '" + scope + ".steps' must be an integer "
                       "between 0 and 10");
    }
    request.spec.steps = static_cast<int>(steps);
  }
  if (obj.contains("subcategory")) {
    try {
      request.spec.subcategory =
          parse_subcategory(get_string(obj, scope, "subcategory"));
    } catch (const Error& e) {
      throw UsageError(scope + ": " + e.what());
    }
  }
  if (obj.contains("n_source")) {
    double n = get_number(obj, scope, "n_source", 0.0);
    if (n < 0 || n != static_cast<std::uint64_t>(n)) {
      throw UsageError("config key '" + scope + ".n_source' must be a "
                       "non-negative integer");
    }
    request.spec.n_source = static_cast<std::size_t>(n);
  }
  request.spec.seed =
      get_seed(obj, scope, "seed", 0, &request.seed_explicit);
  if (!request.seed_explicit) {
    request.spec.seed = derive_seed(global_seed, "dataset/" + request.name);
  }
  return request;
}

std::string hash_of_file(const fs::path& path) {
  return "fnv1a64:" + hash_file(path.string());
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot open output file: " + path.string());
  }
  out << text;
  if (!out) {
    throw Error("failed writing output file: " + path.string());
  }
}

json config_echo(const PipelineConfig& config) {
  json echo;
  echo["corpus"] = config.corpus_path;
  if (!config.embeddings_path.empty()) {
    echo["embeddings"] = config.embeddings_path;
  }
  if (!config.scores_path.empty()) {
    echo["scores"] = config.scores_path;
  }
  echo["seed"] = config.seed;
  echo["lenient"] = config.lenient;
  if (config.word_limit) {
    echo["word_limit"] = *config.word_limit;
  }
  echo["thresholds"] = {{"low_hi", config.thresholds.low_hi},
                        {"med_hi", config.thresholds.med_hi}};
  echo["histogram"] = {{"bin_width", config.histogram_bin_width}};
  echo["split"] = {{"train_fraction", config.split.train_fraction},
                   {"val_test_ratio", config.split.val_test_ratio},
                   {"ratio_tolerance", config.split.ratio_tolerance},
                   {"seed", config.split.seed}};
  json datasets = json::array();
  for (const auto& request : config.datasets) {
    json d;
    d["name"] = request.name;
    d["kind"] = dataset_kind_name(request.spec.kind);
    if (request.spec.bin) {
      d["bin"] = bin_name(*request.spec.bin);
    }
    if (request.spec.add_bin) {
      d["add_bin"] = bin_name(*request.spec.add_bin);
    }
    if (request.spec.steps) {
      d["steps"] = *request.spec.steps;
    }
    if (request.spec.subcategory) {
      d["subcategory"] = subcategory_name(*request.spec.subcategory);
    }
    if (request.spec.n_source) {
      d["n_source"] = *request.spec.n_source;
    }
    d["seed"] = request.spec.seed;
    datasets.push_back(std::move(d));
  }
  echo["datasets"] = std::move(datasets);
  echo["export"] = {{"prompts", config.export_prompts},
                    {"shuffle", config.shuffle_exports}};
  echo["metrics"] = {
      {"bleu",
       {{"max_order", config.metrics.bleu.max_order},
        {"tokenizer", text::tokenizer_rule_name(config.metrics.bleu.tokenizer)},
        {"lowercase", config.metrics.bleu.lowercase}}},
      {"chrfpp",
       {{"char_order", config.metrics.chrfpp.char_order},
        {"word_order", config.metrics.chrfpp.word_order},
        {"beta", config.metrics.chrfpp.beta}}}};
  echo["bootstrap"] = {{"resamples", config.bootstrap.resamples},
                       {"sample_fraction", config.bootstrap.sample_fraction},
                       {"alpha", config.bootstrap.alpha},
                       {"seed", config.bootstrap.seed}};
  return echo;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, const std::string& label) {
  return rng::Stream(seed, label).next();
}

PipelineConfig parse_pipeline_config(const std::string& text) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("invalid config: ") + e.what());
  }
  if (!obj.is_object()) {
    throw UsageError("config must be a JSON object");
  }
  check_keys(obj, "",
             {"corpus", "embeddings", "scores", "out_dir", "seed", "threads",
              "lenient", "word_limit", "thresholds", "histogram", "split",
              "datasets", "export", "metrics", "bootstrap"});

  PipelineConfig config;
  config.corpus_path = get_string(obj, "", "corpus");
  config.embeddings_path = get_string(obj, "", "embeddings");
  config.scores_path = get_string(obj, "", "scores");
  config.out_dir = get_string(obj, "", "out_dir");
  config.seed = get_seed(obj, "", "seed", 0);
  double threads = get_number(obj, "", "threads", 0.0);
  if (threads < 0 || threads != static_cast<unsigned>(threads)) {
    bad_value("threads", "a non-negative integer");
  }
  config.threads = static_cast<unsigned>(threads);
  config.lenient = get_bool(obj, "", "lenient", false);
  if (obj.contains("word_limit")) {
    double limit = get_number(obj, "", "word_limit", 0.0);
    if (limit < 1 || limit != static_cast<std::uint64_t>(limit)) {
      bad_value("word_limit", "a positive integer");
    }
    config.word_limit = static_cast<std::size_t>(limit);
  }
  if (obj.contains("thresholds")) {
    const json& t = obj["thresholds"];
    if (!t.is_object()) {
      bad_value("thresholds", "an object");
    }
    check_keys(t, "thresholds", {"low_hi", "med_hi"});
    config.thresholds.low_hi =
        get_number(t, "thresholds", "low_hi", config.thresholds.low_hi);
    config.thresholds.med_hi =
        get_number(t, "thresholds", "med_hi", config.thresholds.med_hi);
  }
  if (obj.contains("histogram")) {
    const json& h = obj["histogram"];
    if (!h.is_object()) {
      bad_value("histogram", "an object");
    }
    check_keys(h, "histogram", {"bin_width"});
    config.histogram_bin_width =
        get_number(h, "histogram", "bin_width", config.histogram_bin_width);
  }
  config.split.seed = config.seed;
  if (obj.contains("split")) {
    const json& s = obj["split"];
    if (!s.is_object()) {
      bad_value("split", "an object");
    }
    check_keys(s, "split",
               {"train_fraction", "val_test_ratio", "ratio_tolerance",
                "seed"});
    config.split.train_fraction =
        get_number(s, "split", "train_fraction", config.split.train_fraction);
    config.split.val_test_ratio =
        get_number(s, "split", "val_test_ratio", config.split.val_test_ratio);
    config.split.ratio_tolerance = get_number(
        s, "split", "ratio_tolerance", config.split.ratio_tolerance);
    config.split.seed = get_seed(s, "split", "seed", config.seed,
                                 &config.split_seed_explicit);
  }
  if (obj.contains("datasets")) {
    const json& list = obj["datasets"];
    if (!list.is_array()) {
      bad_value("datasets", "an array");
    }
    std::set<std::string> names;
    for (std::size_t i = 0; i < list.size(); ++i) {
      DatasetRequest request =
          parse_dataset_request(list[i], i, config.seed);
      if (!names.insert(request.name).second) {
        throw UsageError("duplicate dataset name '" + request.name + "'");
      }
      config.datasets.push_back(std::move(request));
    }
  }
  if (obj.contains("export")) {
    const json& e = obj["export"];
    if (!e.is_object()) {
      bad_value("export", "an object");
    }
    check_keys(e, "export", {"prompts", "shuffle"});
    config.export_prompts = get_bool(e, "export", "prompts", true);
    config.shuffle_exports = get_bool(e, "export", "shuffle", true);
  }
  if (obj.contains("metrics")) {
    const json& m = obj["metrics"];
    if (!m.is_object()) {
      bad_value("metrics", "an object");
    }
    check_keys(m, "metrics", {"bleu", "chrfpp"});
    if (m.contains("bleu")) {
      const json& b = m["bleu"];
      if (!b.is_object()) {
        bad_value("metrics.bleu", "an object");
      }
      check_keys(b, "metrics.bleu", {"max_order", "tokenizer", "lowercase"});
      double order = get_number(b, "metrics.bleu", "max_order",
                                config.metrics.bleu.max_order);
      if (order < 1 || order > 9 || order != static_cast<int>(order)) {
        bad_value("metrics.bleu.max_order", "an integer between 1 and 9");
      }
      config.metrics.bleu.max_order = static_cast<int>(order);
      std::string rule =
          get_string(b, "metrics.bleu", "tokenizer",
                     std::string(text::tokenizer_rule_name(
                         config.metrics.bleu.tokenizer)));
      try {
        config.metrics.bleu.tokenizer = text::parse_tokenizer_rule(rule);
      } catch (const Error& e2) {
        throw UsageError(std::string("metrics.bleu: ") + e2.what());
      }
      config.metrics.bleu.lowercase = get_bool(
          b, "metrics.bleu", "lowercase", config.metrics.bleu.lowercase);
    }
    if (m.contains("chrfpp")) {
      const json& c = m["chrfpp"];
      if (!c.is_object()) {
        bad_value("metrics.chrfpp", "an object");
      }
      check_keys(c, "metrics.chrfpp", {"char_order", "word_order", "beta"});
      double char_order = get_number(c, "metrics.chrfpp", "char_order",
                                     config.metrics.chrfpp.char_order);
      double word_order = get_number(c, "metrics.chrfpp", "word_order",
                                     config.metrics.chrfpp.word_order);
      if (char_order < 1 || char_order != static_cast<int>(char_order) ||
          word_order < 1 || word_order != static_cast<int>(word_order)) {
        bad_value("metrics.chrfpp orders", "positive integers");
      }
      config.metrics.chrfpp.char_order = static_cast<int>(char_order);
      config.metrics.chrfpp.word_order = static_cast<int>(word_order);
      config.metrics.chrfpp.beta = get_number(c, "metrics.chrfpp", "beta",
                                              config.metrics.chrfpp.beta);
      if (!(config.metrics.chrfpp.beta > 0.0)) {
        bad_value("metrics.chrfpp.beta", "positive");
      }
    }
  }
  config.bootstrap.seed = config.seed;
  if (obj.contains("bootstrap")) {
    const json& b = obj["bootstrap"];
    if (!b.is_object()) {
      bad_value("bootstrap", "an object");
    }
    check_keys(b, "bootstrap",
               {"resamples", "sample_fraction", "alpha", "seed"});
    double resamples = get_number(b, "bootstrap", "resamples",
                                  static_cast<double>(
                                      config.bootstrap.resamples));
    if (resamples < 1 || resamples != static_cast<std::uint64_t>(resamples)) {
      bad_value("bootstrap.resamples", "a positive integer");
    }
    config.bootstrap.resamples = static_cast<std::size_t>(resamples);
    config.bootstrap.sample_fraction = get_number(
        b, "bootstrap", "sample_fraction", config.bootstrap.sample_fraction);
    if (!(config.bootstrap.sample_fraction > 0.0 &&
          config.bootstrap.sample_fraction <= 1.0)) {
      bad_value("bootstrap.sample_fraction", "in (0, 1]");
    }
    config.bootstrap.alpha =
        get_number(b, "bootstrap", "alpha", config.bootstrap.alpha);
    config.bootstrap.seed = get_seed(b, "bootstrap", "seed", config.seed);
  }

  if (config.corpus_path.empty()) {
    throw UsageError("config requires 'corpus'");
  }
  if (config.out_dir.empty()) {
    throw UsageError("config requires 'out_dir'");
  }
  if (config.embeddings_path.empty() && config.scores_path.empty()) {
    throw UsageError("config requires 'embeddings' or 'scores'");
  }
  if (!(config.histogram_bin_width > 0.0 &&
        config.histogram_bin_width <= 2.0)) {
    throw UsageError("config key 'histogram.bin_width' must be in (0, 2]");
  }
  if (!(config.thresholds.low_hi < config.thresholds.med_hi)) {
    throw UsageError("config key 'thresholds' requires low_hi < med_hi");
  }
  if (!(config.split.train_fraction > 0.0 &&
        config.split.train_fraction < 1.0)) {
    throw UsageError("config key 'split.train_fraction' must be in (0, 1)");
  }
  if (!(config.split.val_test_ratio > 0.0 &&
        config.split.val_test_ratio < 1.0)) {
    throw UsageError("config key 'split.val_test_ratio' must be in (0, 1)");
  }
  return config;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw UsageError("cannot open config file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_pipeline_config(buffer.str());
}

std::string resolved_config_json(const PipelineConfig& config) {
  return config_echo(config).dump(2) + "\n";
}

void pipeline_all(const PipelineConfig& config, std::ostream& log) {
  const unsigned threads = resolve_threads(config.threads);
  const fs::path out_dir(config.out_dir);
  fs::create_directories(out_dir);
  fs::create_directories(out_dir / "split");
  fs::create_directories(out_dir / "datasets");
  fs::create_directories(out_dir / "exports");
  fs::create_directories(out_dir / "reports");

  log << "resolved config:\n" << resolved_config_json(config);
  log << "threads: " << threads << "\n";

  json manifest;
  manifest["config"] = config_echo(config);
  json inputs = json::object();
  json outputs = json::object();
  std::vector<std::string> stages_done;
  std::string current_stage;

  auto record_output = [&](const std::string& relative) {
    outputs[relative] = hash_of_file(out_dir / relative);
  };
  auto write_manifest = [&](const std::string& failed,
                            const std::string& message) {
    manifest["inputs"] = inputs;
    manifest["outputs"] = outputs;
    manifest["stages"] = stages_done;
    if (!failed.empty()) {
      manifest["failed_stage"] = failed;
      manifest["error"] = message;
    }
    write_text_file(out_dir / "run_manifest.json", manifest.dump(2) + "\n");
  };

  try {
    current_stage = "ingest";
    inputs[config.corpus_path] = hash_of_file(config.corpus_path);
    LoadOptions load_options;
    load_options.lenient = config.lenient;
    LoadReport load_report;
    Corpus corpus =
        load_corpus_file(config.corpus_path, load_options, &load_report);
    for (const auto& message : load_report.messages) {
      log << "ingest: " << message << "\n";
    }
    if (config.word_limit) {
      corpus = filter_by_word_limit(corpus, *config.word_limit);
    }
    log << "ingest: " << corpus.groups.size() << " group(s)\n";
    stages_done.push_back(current_stage);

    current_stage = "score";
    std::vector<ScoredGroup> scored;
    std::unique_ptr<EmbeddingTable> table;
    std::unique_ptr<EmbeddingScorer> scorer;
    if (!config.embeddings_path.empty()) {
      inputs[config.embeddings_path] = hash_of_file(config.embeddings_path);
      table = std::make_unique<EmbeddingTable>(
          load_embeddings_file(config.embeddings_path));
      scorer = std::make_unique<EmbeddingScorer>(*table);
    }
    if (!config.scores_path.empty()) {
      inputs[config.scores_path] = hash_of_file(config.scores_path);
      auto imported = read_pair_scores_file(config.scores_path);
      ImportOptions import_options;
      import_options.strict = !config.lenient;
      import_options.thresholds = config.thresholds;
      std::vector<std::string> warnings;
      scored = import_scores(corpus, imported, scorer.get(), import_options,
                             &warnings);
      for (const auto& warning : warnings) {
        log << "score: " << warning << "\n";
      }
    } else {
      scored = score_corpus(corpus, *scorer, config.thresholds, threads);
    }
    write_scored_file(scored, (out_dir / "scored.jsonl").string());
    record_output("scored.jsonl");
    log << "score: " << scored.size() << " group(s) scored\n";
    stages_done.push_back(current_stage);

    current_stage = "bin";
    BinCounts counts = count_bins(scored);
    std::string bin_summary = "bin,count\n";
    bin_summary += "low," + std::to_string(counts.low) + "\n";
    bin_summary += "medium," + std::to_string(counts.medium) + "\n";
    bin_summary += "high," + std::to_string(counts.high) + "\n";
    bin_summary +=
        "high_exactly_1.0," + std::to_string(counts.high_exactly_1) + "\n";
    bin_summary +=
        "high_0.9_to_1.0," + std::to_string(counts.high_0p9_to_1p0) + "\n";
    bin_summary +=
        "high_0.85_to_0.9," + std::to_string(counts.high_0p85_to_0p9) + "\n";
    write_text_file(out_dir / "reports" / "bin_summary.csv", bin_summary);
    record_output("reports/bin_summary.csv");
    auto bins = histogram(scored, config.histogram_bin_width);
    write_text_file(out_dir / "reports" / "histogram.csv",
                    histogram_csv(bins));
    record_output("reports/histogram.csv");
    write_text_file(out_dir / "reports" / "histogram.svg",
                    histogram_svg(bins, config.thresholds));
    record_output("reports/histogram.svg");
    stages_done.push_back(current_stage);

    current_stage = "split";
    SplitResult split_result = split(corpus, scored, config.split);
    for (const auto& warning : split_result.warnings) {
      log << "split: " << warning << "\n";
    }
    SplitValidation validation =
        validate_split(split_result, corpus, scored, config.split);
    for (const auto& warning : validation.ratio_warnings) {
      log << "split: " << warning << "\n";
    }
    if (!validation.ok()) {
      throw Error("split validation failed: " + validation.violations[0]);
    }
    write_corpus_file(split_result.train,
                      (out_dir / "split" / "train.jsonl").string());
    write_corpus_file(split_result.val,
                      (out_dir / "split" / "val.jsonl").string());
    write_corpus_file(split_result.test,
                      (out_dir / "split" / "test.jsonl").string());
    write_text_file(out_dir / "split" / "manifest.json",
                    split_manifest(split_result, config.split,
                                   "split/train.jsonl", "split/val.jsonl",
                                   "split/test.jsonl"));
    record_output("split/train.jsonl");
    record_output("split/val.jsonl");
    record_output("split/test.jsonl");
    record_output("split/manifest.json");
    log << "split: train " << split_result.train.groups.size() << ", val "
        << split_result.val.groups.size() << ", test "
        << split_result.test.groups.size() << "\n";
    stages_done.push_back(current_stage);

    current_stage = "build";
    std::vector<Dataset> built;
    built.reserve(config.datasets.size());
    for (const auto& request : config.datasets) {
      Dataset dataset = build_dataset(split_result.train, scored,
                                      request.spec);
      if (config.shuffle_exports) {
        dataset = shuffle_instances(dataset, request.spec.seed);
      }
      log << "build: " << request.name << " num_source="
          << dataset.num_source << " num_instance=" << dataset.num_instance
          << "\n";
      built.push_back(std::move(dataset));
    }
    stages_done.push_back(current_stage);

    current_stage = "export";
    for (std::size_t i = 0; i < config.datasets.size(); ++i) {
      const auto& request = config.datasets[i];
      const Dataset& dataset = built[i];
      std::string pairs_rel = "datasets/" + request.name + ".jsonl";
      {
        std::ofstream out(out_dir / pairs_rel, std::ios::binary);
        if (!out) {
          throw Error("cannot open output file: " +
                      (out_dir / pairs_rel).string());
        }
        if (export_pairs(dataset, out) == 0) {
          log << "export: dataset '" << request.name << "' is empty\n";
        }
      }
      record_output(pairs_rel);
      std::string manifest_rel =
          "datasets/" + request.name + ".manifest.json";
      write_text_file(out_dir / manifest_rel,
                      dataset_manifest(dataset,
                                       hash_of_file(out_dir / pairs_rel)));
      record_output(manifest_rel);
      if (config.export_prompts) {
        std::string prompts_rel = "exports/" + request.name + ".prompts.txt";
        std::ofstream out(out_dir / prompts_rel, std::ios::binary);
        if (!out) {
          throw Error("cannot open output file: " +
                      (out_dir / prompts_rel).string());
        }
        export_prompt_lines(dataset, out);
        out.flush();
        if (!out) {
          throw Error("failed writing output file: " +
                      (out_dir / prompts_rel).string());
        }
        out.close();
        record_output(prompts_rel);
      }
      std::string composition_rel =
          "reports/composition_" + request.name + ".csv";
      write_text_file(out_dir / composition_rel,
                      composition_csv(composition_report(dataset, corpus)));
      record_output(composition_rel);
    }
    stages_done.push_back(current_stage);

    write_manifest("", "");
  } catch (const std::exception& e) {
    write_manifest(current_stage, e.what());
    throw;
  }
}

std::size_t stream_score(std::istream& corpus_in, std::ostream& scored_out,
                         const SimilarityScorer& scorer,
                         const BinThresholds& thresholds, unsigned threads,
                         std::size_t chunk_size) {
  if (chunk_size == 0) {
    chunk_size = 1;
  }
  std::size_t scored_count = 0;
  std::size_t line_no = 0;
  std::string line;
  bool done = false;
  while (!done) {
    std::vector<ParallelGroup> chunk;
    chunk.reserve(chunk_size);
    while (chunk.size() < chunk_size) {
      if (!std::getline(corpus_in, line)) {
        done = true;
        break;
      }
      ++line_no;
      if (line_no == 1 && line.size() >= 3 &&
          static_cast<unsigned char>(line[0]) == 0xEF &&
          static_cast<unsigned char>(line[1]) == 0xBB &&
          static_cast<unsigned char>(line[2]) == 0xBF) {
        throw ParseError("input must not start with a byte order mark", 1);
      }
      ParallelGroup group;
      if (!parse_corpus_line(line, line_no, &group)) {
        continue;
      }
      if (group.references.size() < 2) {
        continue;
      }
      chunk.push_back(std::move(group));
    }
    if (chunk.empty()) {
      continue;
    }
    std::vector<std::string> lines(chunk.size());
    parallel_for(chunk.size(), threads, [&](std::size_t i) {
      lines[i] = scored_group_json(score_group(chunk[i], scorer, thresholds));
    });
    for (const auto& scored_line : lines) {
      scored_out << scored_line << '\n';
    }
    scored_count += chunk.size();
  }
  return scored_count;
}

}  // namespace multiref
