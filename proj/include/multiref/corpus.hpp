#ifndef MULTIREF_CORPUS_HPP
#define MULTIREF_CORPUS_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace multiref {

// One expert translation of a source paragraph. translator_id is optional
// and stored empty when absent.
struct ReferenceText {
  std::string ref_id;
  std::string translator_id;
  std::string text;

  bool operator==(const ReferenceText&) const = default;
};

// One source paragraph with its full set of reference translations.
// (language, book_id, paragraph_index) is the provenance of the paragraph.
struct ParallelGroup {
  std::string group_id;
  std::string language;
  std::string book_id;
  std::int64_t paragraph_index = 0;
  std::string source_text;
  std::vector<ReferenceText> references;

  bool operator==(const ParallelGroup&) const = default;
};

// Immutable after construction; iteration order is ingestion order.
struct Corpus {
  std::vector<ParallelGroup> groups;
  std::map<std::string, std::string> metadata;

  bool operator==(const Corpus&) const = default;
};

struct LanguageStats {
  std::string language;
  std::size_t book_count = 0;
  std::size_t source_count = 0;
  std::size_t reference_count = 0;

  bool operator==(const LanguageStats&) const = default;
};

// Per-language composition rows sorted by source_count ascending, plus a
// totals row consistent with count_instances.
struct CorpusStats {
  std::vector<LanguageStats> per_language;
  LanguageStats totals;  // language == "total"
};

struct LoadOptions {
  bool lenient = false;  // skip and count malformed lines instead of failing
};

struct LoadReport {
  std::size_t lines = 0;
  std::size_t loaded = 0;
  std::size_t skipped = 0;
  std::vector<std::string> messages;
};

// Reads the line-delimited corpus record format (one JSON object per line;
// optional metadata records carry a single "metadata" key). Strict mode
// throws ParseError naming the line and field; lenient mode skips bad lines
// and reports them.
Corpus load_corpus(std::istream& in, const LoadOptions& options = {},
                   LoadReport* report = nullptr);
Corpus load_corpus_file(const std::string& path, const LoadOptions& options = {},
                        LoadReport* report = nullptr);

// Parses a single corpus record line. Returns false for blank or metadata
// lines; throws ParseError (tagged with line_no) for malformed records.
bool parse_corpus_line(const std::string& line, std::size_t line_no,
                       ParallelGroup* group);

// Canonical serialization; load_corpus(write_corpus(c)) == c.
std::string corpus_group_json(const ParallelGroup& group);
void write_corpus(const Corpus& corpus, std::ostream& out);
void write_corpus_file(const Corpus& corpus, const std::string& path);

// Keeps exactly the groups whose references ALL have a word count strictly
// below limit; order preserved. Source length is unconstrained.
Corpus filter_by_word_limit(const Corpus& corpus, std::size_t limit = 128);

struct InstanceCounts {
  std::size_t num_source = 0;    // distinct source texts (groups)
  std::size_t num_instance = 0;  // total (source, reference) pairs

  bool operator==(const InstanceCounts&) const = default;
};

InstanceCounts count_instances(const Corpus& corpus);

CorpusStats corpus_stats(const Corpus& corpus);

}  // namespace multiref

#endif  // MULTIREF_CORPUS_HPP
