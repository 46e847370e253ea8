#include "multiref/split.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <utility>

#include <json.hpp>

#include "multiref/errors.hpp"
#include "multiref/rng.hpp"

namespace multiref {

namespace {

using nlohmann::json;

enum class Part { kTrain, kVal, kTest };

void validate_spec(const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw Error("train_fraction must be in (0, 1)");
  }
  if (!(spec.val_test_ratio > 0.0 && spec.val_test_ratio < 1.0)) {
    throw Error("val_test_ratio must be in (0, 1)");
  }
}

}  // namespace

SplitResult split(const Corpus& corpus, const std::vector<ScoredGroup>& scored,
                  const SplitSpec& spec) {
  validate_spec(spec);
  if (corpus.groups.empty()) {
    throw Error("cannot split an empty corpus");
  }
  std::map<std::string, const ScoredGroup*> score_by_id;
  for (const auto& group : scored) {
    score_by_id[group.group_id] = &group;
  }
  for (const auto& group : corpus.groups) {
    if (group.references.size() >= 2 &&
        !score_by_id.contains(group.group_id)) {
      throw Error("multi-reference group '" + group.group_id +
                  "' has no similarity score");
    }
  }

  // language -> book -> indices of its groups, in corpus order
  std::map<std::string, std::map<std::string, std::vector<std::size_t>>>
      by_language;
  for (std::size_t i = 0; i < corpus.groups.size(); ++i) {
    const auto& group = corpus.groups[i];
    by_language[group.language][group.book_id].push_back(i);
  }

  SplitResult result;
  std::map<std::size_t, Part> assignment;

  for (const auto& [language, books] : by_language) {
    std::size_t total = 0;
    for (const auto& [book, indices] : books) {
      total += indices.size();
    }

    if (books.size() < 2) {
      result.warnings.push_back("language '" + language +
                                "' has fewer than 2 books; placed wholly in "
                                "train");
      for (const auto& [book, indices] : books) {
        result.book_assignment[language][book] = "train";
        for (std::size_t idx : indices) {
          assignment[idx] = Part::kTrain;
        }
      }
      result.per_language_ratios[language] = 1.0;
      continue;
    }

    std::vector<std::string> order;
    order.reserve(books.size());
    for (const auto& [book, indices] : books) {
      order.push_back(book);
    }
    rng::Stream book_stream(spec.seed, "split/books/" + language);
    book_stream.shuffle(order);
    std::stable_sort(order.begin(), order.end(),
                     [&](const std::string& a, const std::string& b) {
                       return books.at(a).size() > books.at(b).size();
                     });

    const double target = spec.train_fraction * static_cast<double>(total);
    std::size_t train_paragraphs = 0;
    std::vector<std::size_t> heldout;
    for (const std::string& book : order) {
      const auto& indices = books.at(book);
      if (static_cast<double>(train_paragraphs + indices.size()) <=
          target + 1e-9) {
        result.book_assignment[language][book] = "train";
        train_paragraphs += indices.size();
        for (std::size_t idx : indices) {
          assignment[idx] = Part::kTrain;
        }
      } else {
        result.book_assignment[language][book] = "heldout";
        heldout.insert(heldout.end(), indices.begin(), indices.end());
      }
    }
    result.per_language_ratios[language] =
        static_cast<double>(train_paragraphs) / static_cast<double>(total);

    std::sort(heldout.begin(), heldout.end());
    rng::Stream para_stream(spec.seed, "split/heldout/" + language);
    para_stream.shuffle(heldout);
    std::size_t val_count = static_cast<std::size_t>(
        std::llround(spec.val_test_ratio * static_cast<double>(heldout.size())));
    for (std::size_t k = 0; k < heldout.size(); ++k) {
      std::size_t idx = heldout[k];
      if (k < val_count) {
        assignment[idx] = Part::kVal;
        continue;
      }
      const auto& group = corpus.groups[idx];
      auto it = score_by_id.find(group.group_id);
      bool medium_multi = group.references.size() >= 2 &&
                          it != score_by_id.end() &&
                          it->second->bin == SimilarityBin::kMedium;
      assignment[idx] = medium_multi ? Part::kTest : Part::kVal;
    }
  }

  result.train.metadata = corpus.metadata;
  result.val.metadata = corpus.metadata;
  result.test.metadata = corpus.metadata;
  for (std::size_t i = 0; i < corpus.groups.size(); ++i) {
    switch (assignment.at(i)) {
      case Part::kTrain:
        result.train.groups.push_back(corpus.groups[i]);
        break;
      case Part::kVal:
        result.val.groups.push_back(corpus.groups[i]);
        break;
      case Part::kTest:
        result.test.groups.push_back(corpus.groups[i]);
        break;
    }
  }
  return result;
}

SplitValidation validate_split(const SplitResult& result, const Corpus& corpus,
                               const std::vector<ScoredGroup>& scored,
                               const SplitSpec& spec) {
  SplitValidation report;

  std::map<std::string, const ScoredGroup*> score_by_id;
  for (const auto& group : scored) {
    score_by_id[group.group_id] = &group;
  }

  std::map<std::string, int> seen;
  auto record = [&](const Corpus& part) {
    for (const auto& group : part.groups) {
      ++seen[group.group_id];
    }
  };
  record(result.train);
  record(result.val);
  record(result.test);
  for (const auto& group : corpus.groups) {
    auto it = seen.find(group.group_id);
    if (it == seen.end()) {
      report.violations.push_back("group '" + group.group_id +
                                  "' missing from all partitions");
    } else if (it->second != 1) {
      report.violations.push_back("group '" + group.group_id + "' appears in " +
                                  std::to_string(it->second) + " partitions");
    }
  }
  if (seen.size() != corpus.groups.size()) {
    std::set<std::string> corpus_ids;
    for (const auto& group : corpus.groups) {
      corpus_ids.insert(group.group_id);
    }
    for (const auto& [group_id, count] : seen) {
      if (!corpus_ids.contains(group_id)) {
        report.violations.push_back("group '" + group_id +
                                    "' not present in the corpus");
      }
    }
  }

  std::set<std::pair<std::string, std::string>> train_books;
  for (const auto& group : result.train.groups) {
    train_books.insert({group.language, group.book_id});
  }
  auto check_disjoint = [&](const Corpus& part, const char* name) {
    for (const auto& group : part.groups) {
      if (train_books.contains({group.language, group.book_id})) {
        report.violations.push_back("book '" + group.book_id +
                                    "' (language '" + group.language +
                                    "') appears in both train and " + name);
      }
    }
  };
  check_disjoint(result.val, "val");
  check_disjoint(result.test, "test");

  for (const auto& group : result.test.groups) {
    if (group.references.size() < 2) {
      report.violations.push_back("test group '" + group.group_id +
                                  "' has fewer than 2 references");
      continue;
    }
    auto it = score_by_id.find(group.group_id);
    if (it == score_by_id.end()) {
      report.violations.push_back("test group '" + group.group_id +
                                  "' has no similarity score");
    } else if (it->second->bin != SimilarityBin::kMedium) {
      report.violations.push_back("test group '" + group.group_id +
                                  "' is not in the medium bin");
    }
  }

  for (const auto& [language, ratio] : result.per_language_ratios) {
    double deviation = std::abs(ratio - spec.train_fraction);
    if (deviation > spec.ratio_tolerance) {
      char buffer[160];
      std::snprintf(buffer, sizeof(buffer),
                    "language '%s' achieved train fraction %.4f (target %.2f "
                    "+/- %.2f)",
                    language.c_str(), ratio, spec.train_fraction,
                    spec.ratio_tolerance);
      report.ratio_warnings.push_back(buffer);
    }
  }
  return report;
}

std::string split_manifest(const SplitResult& result, const SplitSpec& spec,
                           const std::string& train_path,
                           const std::string& val_path,
                           const std::string& test_path) {
  json manifest;
  manifest["seed"] = spec.seed;
  manifest["train_fraction"] = spec.train_fraction;
  manifest["val_test_ratio"] = spec.val_test_ratio;
  manifest["paths"] = {
      {"train", train_path}, {"val", val_path}, {"test", test_path}};
  json ratios = json::object();
  for (const auto& [language, ratio] : result.per_language_ratios) {
    ratios[language] = ratio;
  }
  manifest["per_language_ratios"] = std::move(ratios);
  json books = json::object();
  for (const auto& [language, mapping] : result.book_assignment) {
    json entry = json::object();
    for (const auto& [book, part] : mapping) {
      entry[book] = part;
    }
    books[language] = std::move(entry);
  }
  manifest["book_assignment"] = std::move(books);
  json counts;
  counts["train"] = result.train.groups.size();
  counts["val"] = result.val.groups.size();
  counts["test"] = result.test.groups.size();
  manifest["group_counts"] = std::move(counts);
  if (!result.warnings.empty()) {
    manifest["warnings"] = result.warnings;
  }
  return manifest.dump(2) + "\n";
}

}  // namespace multiref
