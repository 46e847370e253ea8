#ifndef MULTIREF_TESTS_FIXTURES_HPP
#define MULTIREF_TESTS_FIXTURES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "multiref/corpus.hpp"

namespace testutil {

// Orthogonal/parallel vectors chosen so reference pairs land in every bin:
// alpha/beta are orthogonal, alpha/delta sit at cos 1/sqrt(2), omega is a
// scaled alpha.
inline constexpr const char* kEmbeddingsTable =
    "alpha 1 0 0\n"
    "beta 0 1 0\n"
    "gamma 0 0 1\n"
    "delta 1 1 0\n"
    "omega 2 0 0\n";

inline multiref::ParallelGroup make_group(
    const std::string& id, const std::string& language,
    const std::string& book, std::int64_t paragraph,
    const std::vector<std::string>& ref_texts) {
  multiref::ParallelGroup group;
  group.group_id = id;
  group.language = language;
  group.book_id = book;
  group.paragraph_index = paragraph;
  group.source_text = "source " + id;
  for (std::size_t i = 0; i < ref_texts.size(); ++i) {
    group.references.push_back(
        {"r" + std::to_string(i + 1), "", ref_texts[i]});
  }
  return group;
}

// 18 two-reference groups over two languages (6 books of 2 in de, 3 books
// of 2 in fr); reference pairs cycle low, medium, high, exactly-1.0.
inline multiref::Corpus sample_corpus() {
  const std::vector<std::vector<std::string>> flavors = {
      {"alpha", "beta"},
      {"alpha", "delta"},
      {"alpha alpha delta", "alpha delta delta"},
      {"alpha", "omega"},
  };
  multiref::Corpus corpus;
  std::size_t next = 0;
  for (const std::string language : {"de", "fr"}) {
    int books = language == "de" ? 6 : 3;
    for (int b = 1; b <= books; ++b) {
      std::string book = language + "-b" + std::to_string(b);
      for (int p = 0; p < 2; ++p) {
        std::string id =
            language + "-g" + std::to_string(b) + "-" + std::to_string(p);
        corpus.groups.push_back(
            make_group(id, language, book, p, flavors[next % flavors.size()]));
        ++next;
      }
    }
  }
  return corpus;
}

}  // namespace testutil

#endif  // MULTIREF_TESTS_FIXTURES_HPP
