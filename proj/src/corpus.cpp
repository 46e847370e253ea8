#include "multiref/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "multiref/errors.hpp"
#include "multiref/text.hpp"

namespace multiref {

namespace {

using nlohmann::json;

[[noreturn]] void fail(std::size_t line, const std::string& message) {
  throw ParseError(message, line);
}

std::string require_string(const json& obj, const char* field, std::size_t line,
                           bool allow_empty = false) {
  auto it = obj.find(field);
  if (it == obj.end()) {
    fail(line, std::string("missing field '") + field + "'");
  }
  if (!it->is_string()) {
    fail(line, std::string("field '") + field + "' must be a string");
  }
  std::string value = it->get<std::string>();
  if (!allow_empty && value.empty()) {
    fail(line, std::string("field '") + field + "' must be non-empty");
  }
  return value;
}

ParallelGroup parse_group(const json& obj, std::size_t line) {
  ParallelGroup group;
  group.group_id = require_string(obj, "group_id", line);
  group.language = require_string(obj, "language", line);
  group.book_id = require_string(obj, "book_id", line);

  auto pit = obj.find("paragraph_index");
  if (pit == obj.end()) {
    fail(line, "missing field 'paragraph_index'");
  }
  if (!pit->is_number_integer() || pit->get<std::int64_t>() < 0) {
    fail(line, "field 'paragraph_index' must be a non-negative integer");
  }
  group.paragraph_index = pit->get<std::int64_t>();

  group.source_text = require_string(obj, "source_text", line);

  auto rit = obj.find("references");
  if (rit == obj.end()) {
    fail(line, "missing field 'references'");
  }
  if (!rit->is_array() || rit->empty()) {
    fail(line, "field 'references' must be a non-empty array");
  }
  std::set<std::string> seen_ref_ids;
  for (const auto& ref_obj : *rit) {
    if (!ref_obj.is_object()) {
      fail(line, "field 'references' entries must be objects");
    }
    ReferenceText ref;
    ref.ref_id = require_string(ref_obj, "ref_id", line);
    if (!seen_ref_ids.insert(ref.ref_id).second) {
      fail(line, "duplicate ref_id '" + ref.ref_id + "' in group '" +
                     group.group_id + "'");
    }
    auto tit = ref_obj.find("translator_id");
    if (tit != ref_obj.end() && !tit->is_null()) {
      if (!tit->is_string()) {
        fail(line, "field 'translator_id' must be a string");
      }
      ref.translator_id = tit->get<std::string>();
    }
    ref.text = require_string(ref_obj, "text", line);
    group.references.push_back(std::move(ref));
  }
  return group;
}

json group_to_json(const ParallelGroup& group) {
  json refs = json::array();
  for (const auto& ref : group.references) {
    json r;
    r["ref_id"] = ref.ref_id;
    if (!ref.translator_id.empty()) {
      r["translator_id"] = ref.translator_id;
    }
    r["text"] = ref.text;
    refs.push_back(std::move(r));
  }
  json obj;
  obj["group_id"] = group.group_id;
  obj["language"] = group.language;
  obj["book_id"] = group.book_id;
  obj["paragraph_index"] = group.paragraph_index;
  obj["source_text"] = group.source_text;
  obj["references"] = std::move(refs);
  return obj;
}

}  // namespace

bool parse_corpus_line(const std::string& line, std::size_t line_no,
                       ParallelGroup* group) {
  std::string stripped = line;
  if (!stripped.empty() && stripped.back() == '\r') {
    stripped.pop_back();
  }
  bool blank = true;
  for (char c : stripped) {
    if (c != ' ' && c != '\t') {
      blank = false;
      break;
    }
  }
  if (blank) {
    return false;
  }
  json obj;
  try {
    obj = json::parse(stripped);
  } catch (const json::parse_error&) {
    fail(line_no, "invalid JSON");
  }
  if (!obj.is_object()) {
    fail(line_no, "each line must be a JSON object");
  }
  if (obj.contains("metadata")) {
    return false;
  }
  *group = parse_group(obj, line_no);
  return true;
}

std::string corpus_group_json(const ParallelGroup& group) {
  return group_to_json(group).dump();
}

Corpus load_corpus(std::istream& in, const LoadOptions& options,
                   LoadReport* report) {
  Corpus corpus;
  std::set<std::string> seen_group_ids;
  LoadReport local;
  LoadReport& rep = report ? *report : local;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 &&
        static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB &&
        static_cast<unsigned char>(line[2]) == 0xBF) {
      fail(1, "input must not start with a byte order mark");
    }
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    ++rep.lines;
    bool blank = true;
    for (char c : line) {
      if (c != ' ' && c != '\t') {
        blank = false;
        break;
      }
    }
    if (blank) {
      --rep.lines;
      continue;
    }
    try {
      json obj = json::parse(line, nullptr, true);
      if (!obj.is_object()) {
        fail(line_no, "each line must be a JSON object");
      }
      if (obj.contains("metadata")) {
        const json& meta = obj["metadata"];
        if (!meta.is_object()) {
          fail(line_no, "field 'metadata' must be an object");
        }
        for (const auto& [key, value] : meta.items()) {
          if (!value.is_string()) {
            fail(line_no, "metadata values must be strings");
          }
          corpus.metadata[key] = value.get<std::string>();
        }
        continue;
      }
      ParallelGroup group = parse_group(obj, line_no);
      if (!seen_group_ids.insert(group.group_id).second) {
        fail(line_no, "duplicate group_id '" + group.group_id + "'");
      }
      corpus.groups.push_back(std::move(group));
      ++rep.loaded;
    } catch (const json::parse_error&) {
      if (!options.lenient) {
        fail(line_no, "invalid JSON");
      }
      ++rep.skipped;
      rep.messages.push_back("line " + std::to_string(line_no) +
                             ": invalid JSON, skipped");
    } catch (const ParseError& e) {
      if (!options.lenient) {
        throw;
      }
      ++rep.skipped;
      rep.messages.push_back(std::string(e.what()) + ", skipped");
    }
  }
  return corpus;
}

Corpus load_corpus_file(const std::string& path, const LoadOptions& options,
                        LoadReport* report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open corpus file: " + path);
  }
  return load_corpus(in, options, report);
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  if (!corpus.metadata.empty()) {
    json meta;
    meta["metadata"] = corpus.metadata;
    out << meta.dump() << '\n';
  }
  for (const auto& group : corpus.groups) {
    out << corpus_group_json(group) << '\n';
  }
}

void write_corpus_file(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot open output file: " + path);
  }
  write_corpus(corpus, out);
}

Corpus filter_by_word_limit(const Corpus& corpus, std::size_t limit) {
  Corpus result;
  result.metadata = corpus.metadata;
  for (const auto& group : corpus.groups) {
    bool keep = true;
    for (const auto& ref : group.references) {
      if (text::word_count(ref.text) >= limit) {
        keep = false;
        break;
      }
    }
    if (keep) {
      result.groups.push_back(group);
    }
  }
  return result;
}

InstanceCounts count_instances(const Corpus& corpus) {
  InstanceCounts counts;
  counts.num_source = corpus.groups.size();
  for (const auto& group : corpus.groups) {
    counts.num_instance += group.references.size();
  }
  return counts;
}

CorpusStats corpus_stats(const Corpus& corpus) {
  std::map<std::string, LanguageStats> by_language;
  std::map<std::string, std::set<std::string>> books;
  for (const auto& group : corpus.groups) {
    LanguageStats& stats = by_language[group.language];
    stats.language = group.language;
    stats.source_count += 1;
    stats.reference_count += group.references.size();
    books[group.language].insert(group.book_id);
  }
  CorpusStats result;
  result.totals.language = "total";
  for (auto& [language, stats] : by_language) {
    stats.book_count = books[language].size();
    result.totals.book_count += stats.book_count;
    result.totals.source_count += stats.source_count;
    result.totals.reference_count += stats.reference_count;
    result.per_language.push_back(stats);
  }
  std::stable_sort(result.per_language.begin(), result.per_language.end(),
                   [](const LanguageStats& a, const LanguageStats& b) {
                     if (a.source_count != b.source_count) {
                       return a.source_count < b.source_count;
                     }
                     return a.language < b.language;
                   });
  return result;
}

}  // namespace multiref
