#ifndef MULTIREF_SPLIT_HPP
#define MULTIREF_SPLIT_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "multiref/corpus.hpp"
#include "multiref/similarity.hpp"

namespace multiref {

struct SplitSpec {
  double train_fraction = 0.8;
  double val_test_ratio = 0.5;  // fraction of the held-out pool placed in val
  std::uint64_t seed = 0;
  double ratio_tolerance = 0.05;
};

// book_assignment is keyed by language then book_id; held-out books can have
// paragraphs in both val and test, so the value is "train" or "heldout".
struct SplitResult {
  Corpus train;
  Corpus val;
  Corpus test;
  std::map<std::string, double> per_language_ratios;
  std::map<std::string, std::map<std::string, std::string>> book_assignment;
  std::vector<std::string> warnings;
};

// Per language: seeded book-level assignment targeting train_fraction of the
// paragraphs, with books never straddling train and held-out. Held-out
// paragraphs are shuffled and split val/test; test keeps only Medium-bin
// multi-reference groups, the rest move to val.
SplitResult split(const Corpus& corpus, const std::vector<ScoredGroup>& scored,
                  const SplitSpec& spec);

struct SplitValidation {
  std::vector<std::string> violations;
  std::vector<std::string> ratio_warnings;

  bool ok() const { return violations.empty(); }
};

SplitValidation validate_split(const SplitResult& result, const Corpus& corpus,
                               const std::vector<ScoredGroup>& scored,
                               const SplitSpec& spec);

// JSON manifest text with book_assignment, ratios, seed, and partition paths.
std::string split_manifest(const SplitResult& result, const SplitSpec& spec,
                           const std::string& train_path,
                           const std::string& val_path,
                           const std::string& test_path);

}  // namespace multiref

#endif  // MULTIREF_SPLIT_HPP
