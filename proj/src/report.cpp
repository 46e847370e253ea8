#include "multiref/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "multiref/errors.hpp"

namespace multiref {

namespace {

using nlohmann::json;

[[noreturn]] void fail(std::size_t line, const std::string& message) {
  throw ParseError(message, line);
}

std::string escape_newlines(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (c == '\n') {
      out += "\\n";
    } else if (c == '\r') {
      out += "\\r";
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string strip_rep_suffix(const std::string& group_id) {
  static const std::string kSuffix = "#rep";
  if (group_id.size() > kSuffix.size() &&
      group_id.compare(group_id.size() - kSuffix.size(), kSuffix.size(),
                       kSuffix) == 0) {
    return group_id.substr(0, group_id.size() - kSuffix.size());
  }
  return group_id;
}

std::string shortest_double(double value) {
  return json(value).dump();
}

}  // namespace

std::size_t export_pairs(const Dataset& dataset, std::ostream& out) {
  for (const auto& instance : dataset.instances) {
    json obj;
    obj["group_id"] = instance.group_id;
    obj["language"] = instance.language;
    obj["ref_id"] = instance.ref_id;
    obj["source"] = instance.source_text;
    obj["target"] = instance.target_text;
    out << obj.dump() << '\n';
  }
  return dataset.instances.size();
}

std::vector<TrainingInstance> load_pairs(std::istream& in) {
  std::vector<TrainingInstance> instances;
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error&) {
      fail(line_no, "invalid JSON");
    }
    TrainingInstance instance;
    try {
      instance.group_id = obj.at("group_id").get<std::string>();
      instance.language = obj.at("language").get<std::string>();
      instance.ref_id = obj.at("ref_id").get<std::string>();
      instance.source_text = obj.at("source").get<std::string>();
      instance.target_text = obj.at("target").get<std::string>();
    } catch (const json::exception& e) {
      fail(line_no, std::string("invalid pair record: ") + e.what());
    }
    if (!seen.insert({instance.group_id, instance.ref_id}).second) {
      fail(line_no, "duplicate (group_id, ref_id) pair ('" +
                        instance.group_id + "', '" + instance.ref_id + "')");
    }
    instances.push_back(std::move(instance));
  }
  return instances;
}

std::vector<TrainingInstance> load_pairs_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open dataset file: " + path);
  }
  return load_pairs(in);
}

void export_prompt_lines(const Dataset& dataset, std::ostream& out) {
  for (const auto& instance : dataset.instances) {
    std::string source = escape_newlines(instance.source_text);
    std::string target = escape_newlines(instance.target_text);
    if (source.find(kPromptDelimiter) != std::string::npos ||
        target.find(kPromptDelimiter) != std::string::npos) {
      throw DelimiterCollisionError(
          "instance ('" + instance.group_id + "', '" + instance.ref_id +
          "') contains the prompt delimiter \" ###> \"");
    }
    out << source << kPromptDelimiter << target << '\n';
  }
}

std::vector<CompositionRow> composition_report(const Dataset& dataset,
                                               const Corpus& corpus) {
  std::map<std::string, const ParallelGroup*> by_id;
  for (const auto& group : corpus.groups) {
    by_id[group.group_id] = &group;
  }
  std::set<std::string> used_ids;
  for (const auto& instance : dataset.instances) {
    std::string resolved = strip_rep_suffix(instance.group_id);
    if (!by_id.contains(resolved)) {
      throw Error("dataset references unknown group '" + instance.group_id +
                  "'");
    }
    used_ids.insert(std::move(resolved));
  }

  std::map<std::string, CompositionRow> rows;
  std::map<std::string, std::set<std::string>> used_books;
  for (const auto& group : corpus.groups) {
    CompositionRow& row = rows[group.language];
    row.language = group.language;
    row.total += 1;
    if (used_ids.contains(group.group_id)) {
      row.src += 1;
      used_books[group.language].insert(group.book_id);
    }
  }
  std::vector<CompositionRow> result;
  result.reserve(rows.size());
  for (auto& [language, row] : rows) {
    row.books = used_books[language].size();
    row.pct_used =
        row.total == 0
            ? 0.0
            : std::round(static_cast<double>(row.src) /
                         static_cast<double>(row.total) * 100.0) /
                  100.0;
    result.push_back(row);
  }
  std::stable_sort(result.begin(), result.end(),
                   [](const CompositionRow& a, const CompositionRow& b) {
                     if (a.src != b.src) {
                       return a.src < b.src;
                     }
                     return a.language < b.language;
                   });
  return result;
}

std::string composition_csv(const std::vector<CompositionRow>& rows) {
  std::string out = "language,books,src,total,pct_used\n";
  char buffer[256];
  for (const auto& row : rows) {
    std::snprintf(buffer, sizeof(buffer), "%s,%zu,%zu,%zu,%.2f\n",
                  row.language.c_str(), row.books, row.src, row.total,
                  row.pct_used);
    out += buffer;
  }
  return out;
}

std::string histogram_csv(const std::vector<HistogramBin>& bins) {
  std::string out = "lower_edge,count\n";
  for (const auto& bin : bins) {
    out += shortest_double(bin.lower_edge);
    out += ',';
    out += std::to_string(bin.count);
    out += '\n';
  }
  return out;
}

std::string histogram_svg(const std::vector<HistogramBin>& bins,
                          const BinThresholds& thresholds) {
  const double width = 640.0;
  const double height = 400.0;
  const double left = 50.0;
  const double right = 610.0;
  const double top = 20.0;
  const double bottom = 360.0;

  std::size_t max_count = 1;
  for (const auto& bin : bins) {
    max_count = std::max(max_count, bin.count);
  }
  auto x_of = [&](double score) {
    return left + (score + 1.0) / 2.0 * (right - left);
  };

  char buffer[512];
  std::string svg;
  std::snprintf(buffer, sizeof(buffer),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" "
                "height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                width, height, width, height);
  svg += buffer;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buffer, sizeof(buffer),
                "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
                "stroke=\"black\"/>\n",
                left, bottom, right, bottom);
  svg += buffer;

  if (!bins.empty()) {
    double bin_width = 2.0 / static_cast<double>(bins.size());
    for (std::size_t i = 0; i < bins.size(); ++i) {
      double x0 = x_of(-1.0 + static_cast<double>(i) * bin_width);
      double x1 = x_of(-1.0 + static_cast<double>(i + 1) * bin_width);
      double h = (bottom - top) * static_cast<double>(bins[i].count) /
                 static_cast<double>(max_count);
      std::snprintf(buffer, sizeof(buffer),
                    "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" "
                    "height=\"%.2f\" fill=\"steelblue\"/>\n",
                    x0, bottom - h, x1 - x0, h);
      svg += buffer;
    }
  }

  std::snprintf(buffer, sizeof(buffer),
                "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
                "stroke=\"red\"/>\n",
                x_of(thresholds.low_hi), top, x_of(thresholds.low_hi), bottom);
  svg += buffer;
  std::snprintf(buffer, sizeof(buffer),
                "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
                "stroke=\"blue\"/>\n",
                x_of(thresholds.med_hi), top, x_of(thresholds.med_hi), bottom);
  svg += buffer;

  for (double tick : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    std::snprintf(buffer, sizeof(buffer),
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" "
                  "text-anchor=\"middle\">%g</text>\n",
                  x_of(tick), bottom + 20.0, tick);
    svg += buffer;
  }
  svg += "</svg>\n";
  return svg;
}

std::string corpus_stats_csv(const CorpusStats& stats) {
  std::string out = "language,books,sources,references\n";
  char buffer[256];
  for (const auto& row : stats.per_language) {
    std::snprintf(buffer, sizeof(buffer), "%s,%zu,%zu,%zu\n",
                  row.language.c_str(), row.book_count, row.source_count,
                  row.reference_count);
    out += buffer;
  }
  std::snprintf(buffer, sizeof(buffer), "%s,%zu,%zu,%zu\n",
                stats.totals.language.c_str(), stats.totals.book_count,
                stats.totals.source_count, stats.totals.reference_count);
  out += buffer;
  return out;
}

std::string gain_report_json(const GainReport& gain) {
  json obj;
  obj["overall"] = gain.overall;
  json languages = json::object();
  for (const auto& [language, delta] : gain.per_language) {
    languages[language] = delta;
  }
  obj["per_language"] = std::move(languages);
  return obj.dump(2) + "\n";
}

}  // namespace multiref
